#ifndef ERTKIT_EFFECTS_HPP
#define ERTKIT_EFFECTS_HPP

#include <string>
#include <vector>

#include "ertkit/corpus.hpp"
#include "ertkit/gam.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// Per-bin piece of a bin-conditional contrast: the renormalized pooled
/// weight actually used and this pathway's delta at the bin's settings.
struct BinComponent {
  int bin = -1;
  double weight = 0;
  double q1 = 0;
  double q3 = 0;
  double delta = 0;
};

/// One Q1 -> Q3 effect along one pathway. value_q1/value_q3 are the
/// predicted outcomes at the two covariate settings (probability for the
/// skip pathway, milliseconds otherwise); delta = value_q3 - value_q1.
/// Bin-conditional contrasts carry per-bin components whose weighted sum
/// equals delta.
struct Contrast {
  Feature feature = Feature::length;
  Group group = Group::control;
  Pathway pathway = Pathway::ert;
  double q1_value = 0;
  double q3_value = 0;
  double value_q1 = 0;
  double value_q3 = 0;
  double delta = 0;
  std::vector<BinComponent> bins;
  std::vector<std::string> warnings;
};

/// The three pathways of one feature contrast for one group.
struct ContrastSet {
  Contrast skip;
  Contrast duration;
  Contrast ert;
};

/// Dyslexic-over-control amplification. sr is the headline ratio: for
/// plain contrasts |delta_dys| / |delta_ctrl| exactly; for bin-conditional
/// contrasts the bin-weighted mean of per-bin ratios, with the ratio of
/// combined deltas kept alongside as sr_of_combined.
struct SlopeRatio {
  Feature feature = Feature::length;
  Pathway pathway = Pathway::ert;
  double numerator = 0;    // |delta_dys|
  double denominator = 0;  // |delta_ctrl|
  double sr = 0;
  double sr_of_combined = 0;
  std::vector<int> bin_ids;
  std::vector<double> bin_srs;
  std::vector<double> bin_weights;
  std::vector<std::string> warnings;
};

/// Expected reading time of one token: (1 - p_skip) * trt_ms.
double ert(double p_skip, double trt_ms);

/// Q1 -> Q3 contrast for length or surprisal: the feature moves between
/// the pooled quartiles while the other two features sit at the group
/// means. Returns skip (probability), duration (ms), and ERT (ms)
/// pathways. zipf is rejected: its contrast is bin-conditional.
ContrastSet q1q3_contrast(const FittedGAM& skip_model,
                          const FittedGAM& dur_model, Feature feature,
                          const PooledStats& stats, Group group);

/// Bin-conditional zipf contrast: within each length bin, length is the
/// bin's pooled mean length, surprisal the group mean, and zipf moves
/// between the bin's Q1 and Q3; per-bin deltas combine by pooled bin
/// weights. Bins without zipf observations are excluded with the weights
/// re-normalized and a warning recorded.
ContrastSet zipf_conditional_contrast(const FittedGAM& skip_model,
                                      const FittedGAM& dur_model,
                                      const LengthBins& bins,
                                      const PooledStats& stats, Group group);

/// SR = |delta_dys| / |delta_ctrl| for matching feature and pathway.
/// Bin-conditional contrasts also get per-bin ratios combined by bin
/// weight; bins with a zero control delta are excluded with a warning.
SlopeRatio slope_ratio(const Contrast& c_dys, const Contrast& c_ctrl);

}  // namespace ertkit

#endif
