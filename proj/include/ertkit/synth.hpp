#ifndef ERTKIT_SYNTH_HPP
#define ERTKIT_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ertkit/token.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// One additive truth term: linear * x + scale * logistic(rate * (x - c)).
/// Monotone whenever linear and scale * rate share a sign (or are zero);
/// the presets keep linear = 0 and use the logistic part only.
struct TruthTerm {
  double linear = 0;
  double scale = 0;
  double rate = 1;
  double center = 0;

  double operator()(double x) const;
};

/// Ground-truth response surfaces for one group. The skip model lives on
/// the logit scale, the duration model on log milliseconds; both are
/// additive in (length, zipf, surprisal).
struct GroupTruth {
  double skip_intercept = 0;
  double log_trt_intercept = 0;
  TruthTerm skip[kNFeatures];
  TruthTerm log_trt[kNFeatures];
};

struct SynthConfig {
  GroupTruth truth[kNGroups];
  /// SD of the additive noise on log TRT; the response-scale mean then
  /// carries an exp(sd^2 / 2) factor, which smearing must recover.
  double noise_sd = 0.35;
  int subjects_per_group = 30;
  int tokens_per_subject = 5000;
  std::uint64_t seed = 1;

  /// P(length = i + 1); lengths run 1..pmf.size().
  std::vector<double> length_pmf = {.05, .09,  .12, .13, .12,
                                    .11, .10,  .08, .07, .05,
                                    .04, .02,  .01, .006, .004};
  /// zipf | length ~ clip(Normal(alpha + beta * length, within_sd), lo, hi)
  /// with beta solved from the target length-zipf correlation and alpha
  /// from the target marginal mean.
  double zipf_mean = 4.5;
  double zipf_within_sd = 0.6;
  double length_zipf_corr = -0.8;
  double zipf_lo = 2.0;
  double zipf_hi = 7.0;
  /// surprisal ~ min(exp(Normal(log_mean, log_sd)), cap), in bits.
  double surprisal_log_mean = 1.6;
  double surprisal_log_sd = 0.8;
  double surprisal_cap = 20.0;
  /// Equal-frequency length bins used for the bin-conditional truths.
  int n_length_bins = 7;
};

/// Population length bin: pmf mass, mean length, and within-bin zipf
/// quartiles, mirroring what make_length_bins extracts from a sample.
struct TruthBin {
  int lo = 0;
  int hi = 0;
  double weight = 0;
  double mean_length = 0;
  double zipf_q1 = 0;
  double zipf_q3 = 0;
};

/// Closed-form values of every downstream estimand. Deltas are Q1 -> Q3
/// contrasts at population quartiles with the other features at their
/// population means; zipf entries are bin-conditional, weighted by bin
/// mass. Slope ratios are |dyslexic| / |control|; the zipf entry is the
/// bin-weighted mean of per-bin ratios. NaN marks a ratio whose control
/// delta is zero.
struct TruthRecord {
  double q1[kNFeatures] = {};
  double q3[kNFeatures] = {};
  double feature_mean[kNFeatures] = {};
  std::vector<TruthBin> bins;

  /// [group][pathway][feature]; skip deltas are probabilities, duration
  /// and ERT deltas milliseconds.
  double delta[kNGroups][kNPathways][kNFeatures] = {};
  /// Link-scale deltas: [group][0 = skip logit, 1 = log duration][feature].
  double link_delta[kNGroups][2][kNFeatures] = {};
  double sr[kNPathways][kNFeatures] = {};

  /// Population mean ERT with the skip model of one group and the
  /// duration model of another: [skip group][duration group].
  double ert_matrix[kNGroups][kNGroups] = {};
  double gap_ms = 0;
  double skip_share_ms = 0;
  double duration_share_ms = 0;
  double equal_ease_gap_ms = 0;
  double reduction_ms = 0;
  /// Gap reduction from clamping one feature to its easy value, and the
  /// same rescaled so the three sum to reduction_ms.
  double clamp_reduction[kNFeatures] = {};
  double attribution[kNFeatures] = {};

  double skip_rate[kNGroups] = {};
  double mean_trt_ms[kNGroups] = {};
  double mean_ert_ms[kNGroups] = {};
};

struct SynthResult {
  TokenTable table;
  TruthRecord truth;
};

/// Sample a token table from the config's truth surfaces. Subjects are
/// generated on index-derived random streams, so the output is identical
/// however the per-subject work is scheduled.
SynthResult generate(const SynthConfig& config);

/// Closed-form TruthRecord for a config: quadrature over the sampling
/// distributions and the truth surfaces, no model fitting involved.
TruthRecord true_targets(const SynthConfig& config);

/// Named presets: paper_shaped (realistic magnitudes for every target),
/// null_model (no effects, no gap), inert_zipf (paper_shaped with the
/// zipf terms removed), offset_gap (flat truths, duration-only 80 ms gap).
SynthConfig synth_preset(const std::string& name);

}  // namespace ertkit

#endif
