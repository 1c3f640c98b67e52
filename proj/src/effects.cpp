#include "ertkit/effects.hpp"

#include <cmath>

namespace ertkit {

namespace {

void check_families(const FittedGAM& skip_model, const FittedGAM& dur_model) {
  if (skip_model.family != Family::binomial_logit)
    throw validation_error("skip model must be binomial_logit");
  if (dur_model.family != Family::gaussian_log)
    throw validation_error("duration model must be gaussian_log");
}

double finite_setting(double v, const std::string& what) {
  if (!std::isfinite(v))
    throw validation_error(what + " is not available (not finite)");
  return v;
}

Contrast base_contrast(Feature f, Group g, Pathway p, double q1, double q3) {
  Contrast c;
  c.feature = f;
  c.group = g;
  c.pathway = p;
  c.q1_value = q1;
  c.q3_value = q3;
  return c;
}

}  // namespace

double ert(double p_skip, double trt_ms) {
  if (!(p_skip >= 0.0 && p_skip <= 1.0))
    throw validation_error("skip probability must lie in [0, 1]");
  if (!(trt_ms >= 0.0))
    throw validation_error("fixated duration must be nonnegative");
  return (1.0 - p_skip) * trt_ms;
}

ContrastSet q1q3_contrast(const FittedGAM& skip_model,
                          const FittedGAM& dur_model, Feature feature,
                          const PooledStats& stats, Group group) {
  if (feature == Feature::zipf)
    throw validation_error(
        "zipf contrasts are bin-conditional; use zipf_conditional_contrast");
  check_families(skip_model, dur_model);

  const double q1 = finite_setting(stats.feature_q1(feature),
                                   "pooled Q1 of " + to_string(feature));
  const double q3 = finite_setting(stats.feature_q3(feature),
                                   "pooled Q3 of " + to_string(feature));
  Mat X(2, kNFeatures);
  for (const Feature f : kFeatures) {
    const int c = static_cast<int>(f);
    if (f == feature) {
      X(0, c) = q1;
      X(1, c) = q3;
    } else {
      X(0, c) = X(1, c) = finite_setting(
          stats.group_mean(group, f),
          to_string(group) + " mean of " + to_string(f));
    }
  }

  const Vec p = predict_skip(skip_model, X);
  const Vec t = predict_trt_ms(dur_model, X);

  ContrastSet set;
  set.skip = base_contrast(feature, group, Pathway::skip, q1, q3);
  set.skip.value_q1 = p(0);
  set.skip.value_q3 = p(1);
  set.skip.delta = p(1) - p(0);
  set.duration = base_contrast(feature, group, Pathway::duration, q1, q3);
  set.duration.value_q1 = t(0);
  set.duration.value_q3 = t(1);
  set.duration.delta = t(1) - t(0);
  set.ert = base_contrast(feature, group, Pathway::ert, q1, q3);
  set.ert.value_q1 = ert(p(0), t(0));
  set.ert.value_q3 = ert(p(1), t(1));
  set.ert.delta = set.ert.value_q3 - set.ert.value_q1;
  return set;
}

ContrastSet zipf_conditional_contrast(const FittedGAM& skip_model,
                                      const FittedGAM& dur_model,
                                      const LengthBins& bins,
                                      const PooledStats& stats, Group group) {
  check_families(skip_model, dur_model);
  const double sur_mean =
      finite_setting(stats.group_mean(group, Feature::surprisal),
                     to_string(group) + " mean of surprisal");

  std::vector<int> usable;
  std::vector<std::string> warnings;
  double wsum = 0;
  for (int b = 0; b < bins.n_bins(); ++b) {
    const LengthBin& bin = bins.bins[static_cast<std::size_t>(b)];
    if (bin.count == 0 || bin.zipf_count == 0 ||
        !std::isfinite(bin.zipf_q1) || !std::isfinite(bin.zipf_q3)) {
      warnings.push_back("length bin " + std::to_string(b) +
                         " has no zipf observations; excluded and weights "
                         "re-normalized");
      continue;
    }
    usable.push_back(b);
    wsum += bin.weight;
  }
  if (usable.empty())
    throw validation_error("no usable length bins for the zipf contrast");

  Mat X(2 * static_cast<Index>(usable.size()), kNFeatures);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const LengthBin& bin = bins.bins[static_cast<std::size_t>(usable[i])];
    const Index r = 2 * static_cast<Index>(i);
    X(r, static_cast<int>(Feature::length)) = bin.mean_length;
    X(r, static_cast<int>(Feature::zipf)) = bin.zipf_q1;
    X(r, static_cast<int>(Feature::surprisal)) = sur_mean;
    X(r + 1, static_cast<int>(Feature::length)) = bin.mean_length;
    X(r + 1, static_cast<int>(Feature::zipf)) = bin.zipf_q3;
    X(r + 1, static_cast<int>(Feature::surprisal)) = sur_mean;
  }
  const Vec p = predict_skip(skip_model, X);
  const Vec t = predict_trt_ms(dur_model, X);

  ContrastSet set;
  set.skip = base_contrast(Feature::zipf, group, Pathway::skip, 0, 0);
  set.duration = base_contrast(Feature::zipf, group, Pathway::duration, 0, 0);
  set.ert = base_contrast(Feature::zipf, group, Pathway::ert, 0, 0);
  Contrast* all[3] = {&set.skip, &set.duration, &set.ert};

  for (std::size_t i = 0; i < usable.size(); ++i) {
    const LengthBin& bin = bins.bins[static_cast<std::size_t>(usable[i])];
    const double w = bin.weight / wsum;
    const Index r = 2 * static_cast<Index>(i);

    BinComponent bc;
    bc.bin = usable[i];
    bc.weight = w;
    bc.q1 = bin.zipf_q1;
    bc.q3 = bin.zipf_q3;

    const double e1 = ert(p(r), t(r));
    const double e3 = ert(p(r + 1), t(r + 1));
    const double deltas[3] = {p(r + 1) - p(r), t(r + 1) - t(r), e3 - e1};
    const double v1[3] = {p(r), t(r), e1};
    const double v3[3] = {p(r + 1), t(r + 1), e3};
    for (int k = 0; k < 3; ++k) {
      bc.delta = deltas[k];
      all[k]->bins.push_back(bc);
      all[k]->delta += w * deltas[k];
      all[k]->value_q1 += w * v1[k];
      all[k]->value_q3 += w * v3[k];
    }
    for (Contrast* c : all) {
      c->q1_value += w * bin.zipf_q1;
      c->q3_value += w * bin.zipf_q3;
    }
  }
  for (Contrast* c : all) c->warnings = warnings;
  return set;
}

SlopeRatio slope_ratio(const Contrast& c_dys, const Contrast& c_ctrl) {
  if (c_dys.feature != c_ctrl.feature || c_dys.pathway != c_ctrl.pathway)
    throw validation_error(
        "slope ratio requires matching feature and pathway");
  if (c_dys.bins.empty() != c_ctrl.bins.empty())
    throw validation_error(
        "slope ratio requires contrasts of the same structure");

  SlopeRatio r;
  r.feature = c_dys.feature;
  r.pathway = c_dys.pathway;
  r.numerator = std::abs(c_dys.delta);
  r.denominator = std::abs(c_ctrl.delta);
  if (r.denominator == 0.0)
    throw numeric_error("undefined slope ratio: control delta is zero");
  r.sr_of_combined = r.numerator / r.denominator;

  if (c_dys.bins.empty()) {
    r.sr = r.sr_of_combined;
    return r;
  }

  if (c_dys.bins.size() != c_ctrl.bins.size())
    throw validation_error("contrasts were built from different bins");
  double wsum = 0;
  for (std::size_t i = 0; i < c_dys.bins.size(); ++i) {
    const BinComponent& d = c_dys.bins[i];
    const BinComponent& c = c_ctrl.bins[i];
    if (d.bin != c.bin || std::abs(d.weight - c.weight) > 1e-12)
      throw validation_error("contrasts were built from different bins");
    if (c.delta == 0.0) {
      r.warnings.push_back("length bin " + std::to_string(d.bin) +
                           " has a zero control delta; excluded from the "
                           "per-bin ratio average");
      continue;
    }
    r.bin_ids.push_back(d.bin);
    r.bin_srs.push_back(std::abs(d.delta) / std::abs(c.delta));
    r.bin_weights.push_back(d.weight);
    wsum += d.weight;
  }
  if (r.bin_ids.empty())
    throw numeric_error(
        "undefined slope ratio: every bin has a zero control delta");
  r.sr = 0;
  for (std::size_t i = 0; i < r.bin_srs.size(); ++i) {
    r.bin_weights[i] /= wsum;
    r.sr += r.bin_weights[i] * r.bin_srs[i];
  }
  return r;
}

}  // namespace ertkit
