#ifndef ERTKIT_GAM_HPP
#define ERTKIT_GAM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ertkit/bspline.hpp"
#include "ertkit/token.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// One additive smooth term. lambda scales the second-order difference
/// penalty; monotone constraints act on adjacent coefficient differences
/// (sufficient condition for monotonicity of the curve).
struct SmoothSpec {
  Feature feature = Feature::length;
  int n_splines = 20;
  int spline_degree = 3;
  double lambda = 1.0;
  Constraint constraint = Constraint::none;
  int penalty_order = 2;
};

/// One tensor-product interaction term: Kronecker product of two marginal
/// bases with a Kronecker-sum difference penalty under a single lambda.
struct TensorSpec {
  Feature f1 = Feature::length;
  Feature f2 = Feature::zipf;
  int n1 = 5;
  int n2 = 5;
  double lambda = 1.0;
  int penalty_order = 2;
};

/// Training distribution of one feature, stored for prediction clamping,
/// partial-effect grids, and counterfactual settings.
struct FeatureStats {
  double mean = 0;
  double min_v = 0;
  double max_v = 0;
  double p01 = 0;
  double p99 = 0;
};

/// Smooth after fitting: full coefficient vector (sums to zero) plus the
/// training column means; the smooth's value at x is
/// (basis_row(x) - col_means) . coefs.
struct FittedSmooth {
  SmoothSpec spec;
  Knots knots;
  Vec col_means;
  Vec coefs;
};

/// Tensor after fitting: coefficient matrix flattened row-major over
/// (index in f1 basis, index in f2 basis); both marginal coefficient sums
/// vanish, so the term carries interaction only.
struct FittedTensor {
  TensorSpec spec;
  Knots knots1;
  Knots knots2;
  Vec coefs;
};

struct FitInfo {
  int iterations = 0;
  int outer_iterations = 0;
  double deviance = 0;
  double penalized_deviance = 0;
  bool converged = false;
  /// 1 - RSS/TSS on the log scale; gaussian_log only.
  double r2_log = 0;
  Index n_rows = 0;
  Index n_coefs = 0;
};

struct FittedGAM {
  Family family = Family::binomial_logit;
  double intercept = 0;
  std::vector<FittedSmooth> smooths;
  std::vector<FittedTensor> tensors;
  FeatureStats stats[kNFeatures];
  /// Training mean of exp(log-scale residuals); 1 for binomial.
  double smearing_factor = 1.0;
  FitInfo info;
  std::string config_hash;
  /// Packed optimizer solution, layout matching FitOptions::warm_start.
  /// Transient: not serialized, empty after load_model.
  Vec packed_params;

  const FittedSmooth* find_smooth(Feature f) const;
  const FeatureStats& feature_stats(Feature f) const {
    return stats[static_cast<int>(f)];
  }
};

struct FitOptions {
  double tol = 1e-8;
  int max_iter = 100;
  double monotone_weight = 1e9;
  /// Outer re-fit passes for the monotone active set, including weight
  /// escalation when the 512-point grid check still fails.
  int max_outer = 40;
  /// Any |coefficient| beyond this is treated as separation (binomial).
  double separation_threshold = 1e4;
  /// Optional warm start (full packed parameter vector from a previous
  /// fit with the identical layout); empty = cold start.
  Vec warm_start;
};

/// Orthonormal basis of the subspace orthogonal to the ones vector,
/// m x (m-1); Householder complement, deterministic.
Mat sum_to_zero_basis(int m);

/// Solve (X' W X + P) beta = X' W z; the penalized weighted least squares
/// kernel inside the fitter, exposed for oracle tests.
Vec penalized_wls(const Mat& X, const Vec& z, const Vec& w, const Mat& P);

/// Fit a penalized additive model by iteratively reweighted penalized
/// least squares. X columns follow kFeatures order (length, zipf,
/// surprisal). For binomial_logit, y must be 0/1; for gaussian_log, y is
/// the log response. Monotone constraints are enforced by an outer loop
/// adding a large quadratic penalty (weight monotone_weight) on violated
/// adjacent coefficient differences, re-fit until no new violations, with
/// the result verified on a 512-point grid.
FittedGAM fit(Family family, const std::vector<SmoothSpec>& specs,
              const std::vector<TensorSpec>& tensors, const Mat& X,
              const Vec& y, const FitOptions& opts = {});

/// Process-wide count of fitter invocations; lets hot paths assert they
/// stayed refit-free.
std::uint64_t fit_count();

/// Linear predictor; feature values are clamped to the training range.
Vec predict_link(const FittedGAM& model, const Mat& X);

/// P(skip = 1); requires binomial_logit.
Vec predict_skip(const FittedGAM& model, const Mat& X);

/// Milliseconds via exp(eta) * smearing_factor; requires gaussian_log.
Vec predict_trt_ms(const FittedGAM& model, const Mat& X);

/// Response-scale curve varying one feature over `grid` with the other
/// features held at their training means.
Vec partial_effect(const FittedGAM& model, Feature feature, const Vec& grid);

/// Rows, response, and bookkeeping extracted from a token table for one
/// model family. Rows keep their source table index and subject index so
/// downstream joins and grouped CV stay exact.
struct ModelData {
  Mat X;
  Vec y;
  std::vector<std::size_t> token_rows;
  std::vector<int> subject_of_row;
};

/// All feature-complete tokens; y = 1 for skipped. subject_of_row always
/// indexes the full subject roster, also after group filtering.
ModelData skip_model_data(const TokenTable& table);
ModelData skip_model_data(const TokenTable& table, Group group);

/// Fixated feature-complete tokens; y = log(trt_ms).
ModelData duration_model_data(const TokenTable& table);
ModelData duration_model_data(const TokenTable& table, Group group);

/// Structured-text (JSON) serialization with exact double round-trip.
std::string model_to_json(const FittedGAM& model);
FittedGAM model_from_json(const std::string& text);
void save_model(const FittedGAM& model, const std::string& path);
FittedGAM load_model(const std::string& path);

/// Monotonically increasing count of completed fit() calls in this
/// process; lets callers assert that a code path refit nothing.
std::uint64_t fit_count();

}  // namespace ertkit

#endif
