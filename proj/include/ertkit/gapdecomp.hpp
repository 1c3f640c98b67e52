#ifndef ERTKIT_GAPDECOMP_HPP
#define ERTKIT_GAPDECOMP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ertkit/corpus.hpp"
#include "ertkit/gam.hpp"
#include "ertkit/token.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// Fitted model pair per group: skip is binomial-logit, duration is
/// gaussian on the log response. Indexed by Group.
struct ModelSet {
  FittedGAM skip[kNGroups];
  FittedGAM duration[kNGroups];
};

struct BaselineGap {
  /// Dyslexic minus control, ms.
  double gap_ms = 0;
  double group_mean_ms[kNGroups] = {};
  int n_subjects[kNGroups] = {};
  std::vector<std::string> warnings;
};

/// Model-predicted expected reading time gap. Each subject's feature-
/// complete tokens are scored with their own group's models and averaged;
/// group means weight subjects equally. A subject with no usable tokens
/// is excluded with a warning; a group with no usable subjects is a
/// validation error.
BaselineGap baseline_gap(const ModelSet& models, const TokenTable& tokens);

struct EqualEase {
  double g0 = 0;
  double g_cf = 0;
  /// g0 - g_cf.
  double reduction = 0;
  std::vector<std::string> warnings;
};

/// Counterfactual gap with every token moved to easy settings: length and
/// surprisal to the pooled first quartiles, zipf to the third quartile of
/// the token's own length bin. The bin stamped on the token wins over
/// re-binning the (possibly clamped) length, so the clamp map is
/// idempotent. A token whose bin has no zipf observations cannot be
/// clamped and is a validation error.
EqualEase equal_ease(const ModelSet& models, const TokenTable& tokens,
                     const PooledStats& stats, const LengthBins& bins);

/// Own-models gap with a chosen subset of the easy-setting clamps
/// applied: the building block behind equal_ease and the attribution
/// sweep, exposed for direct counterfactuals. All clamps off reproduces
/// baseline_gap.
BaselineGap clamped_gap(const ModelSet& models, const TokenTable& tokens,
                        const PooledStats& stats, const LengthBins& bins,
                        bool clamp_length, bool clamp_zipf,
                        bool clamp_surprisal);

/// Corpus the pathway split is evaluated on: every subject's tokens, or
/// only control subjects'.
enum class ShapleyCorpus { pooled, control_only };

struct PathwayShapley {
  double skip_contrib = 0;
  double dur_contrib = 0;
  /// ert_matrix[dys][dys] - ert_matrix[ctrl][ctrl]; the two contributions
  /// sum to this up to floating-point rounding.
  double common_gap = 0;
  /// |skip marginal under skip-first substitution - duration-first|.
  double order_spread = 0;
  /// ert_matrix[s][d]: skip model of group s with duration model of
  /// group d, subject-balanced mean over the shared corpus.
  double ert_matrix[kNGroups][kNGroups] = {};
  std::vector<std::string> warnings;
};

/// Exact two-player Shapley split of the shared-corpus gap into a skip
/// pathway and a duration pathway: each contribution is its substitution
/// marginal averaged over the two orders. All four skip/duration model
/// crossings are evaluated on the same corpus, each subject's tokens
/// averaged first and every subject weighted equally.
PathwayShapley pathway_shapley(const ModelSet& models,
                               const TokenTable& tokens,
                               ShapleyCorpus corpus = ShapleyCorpus::pooled);

/// How per-feature contributions are read off a configuration's models:
/// one clamp at a time from the unclamped baseline (the reported
/// numbers), or a Shapley value over all 2^3 clamp subsets (diagnostic;
/// sums to the joint reduction by construction).
enum class ClampMode { single, shapley };

struct AttributionOptions {
  /// Marginal basis size per tensor direction.
  int tensor_splines = 5;
  int cv_k = 5;
  double subsample_frac = 0.5;
  std::uint64_t seed = 0;
  /// Tensor smoothing grid; empty = default_lambda_grid().
  std::vector<double> lambda_grid;
  ClampMode clamp_mode = ClampMode::single;
  FitOptions fit;
};

/// One interaction-toggle configuration. with_tensor is ordered
/// length x zipf, length x surprisal, zipf x surprisal.
struct AttributionConfigResult {
  bool with_tensor[3] = {false, false, false};
  std::string label;
  /// Chosen tensor lambda per group, [group][skip=0, duration=1];
  /// 0 when the configuration has no tensors.
  double tensor_lambda[kNGroups][2] = {};
  double g0 = 0;
  double g_cf = 0;
  double reduction = 0;
  /// Per-feature gap reduction, ms.
  double raw[kNFeatures] = {};
  /// raw rescaled to sum to this configuration's joint reduction.
  double normalized[kNFeatures] = {};
  bool included = false;
  std::vector<std::string> warnings;
};

struct FeatureAttribution {
  /// Mean per-feature reduction across included configurations.
  double contrib[kNFeatures] = {};
  double contrib_normalized[kNFeatures] = {};
  int n_included = 0;
  /// All 2^3 configurations in mask order (bit 0 = length x zipf,
  /// bit 1 = length x surprisal, bit 2 = zipf x surprisal).
  std::vector<AttributionConfigResult> configs;
  std::vector<std::string> warnings;
};

/// Robustness sweep for the per-feature split of the equal-ease
/// reduction. For each subset of the three pairwise interactions, both
/// groups' models are refit with those tensor terms added (base smooths
/// keep the specs and smoothing of the models in `base`; the shared
/// tensor lambda is picked per model by subject-subsampled grid search
/// with the one-standard-error rule), per-feature clamps are evaluated,
/// and results are averaged across configurations. A configuration whose
/// refit fails or does not converge is excluded with a warning; if every
/// configuration fails, numeric_error.
FeatureAttribution feature_attribution(const ModelSet& base,
                                       const TokenTable& tokens,
                                       const PooledStats& stats,
                                       const LengthBins& bins,
                                       const AttributionOptions& opts = {});

/// Assembled decomposition record. feature_contribs is filled from
/// feature_attribution by the caller when that sweep was run.
struct GapDecomposition {
  double g0 = 0;
  double g_cf = 0;
  double reduction = 0;
  double skip_contrib = 0;
  double dur_contrib = 0;
  /// Shared-corpus gap the pathway contributions telescope to; differs
  /// from g0, which scores each subject with own-group models only.
  double common_gap = 0;
  double order_spread = 0;
  double feature_contribs[kNFeatures] = {};
  /// Interactions present in the scored models, same order as
  /// AttributionConfigResult::with_tensor.
  bool with_tensor[3] = {false, false, false};
  std::string corpus;
  std::vector<std::string> warnings;
};

GapDecomposition decompose_gap(const ModelSet& models,
                               const TokenTable& tokens,
                               const PooledStats& stats,
                               const LengthBins& bins,
                               ShapleyCorpus corpus = ShapleyCorpus::pooled);

}  // namespace ertkit

#endif
