#include "ertkit/gapdecomp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ertkit/effects.hpp"
#include "ertkit/selection.hpp"

namespace ertkit {

namespace {

void check_models(const ModelSet& m) {
  for (int g = 0; g < kNGroups; ++g) {
    const std::string name = to_string(static_cast<Group>(g));
    if (m.skip[g].family != Family::binomial_logit)
      throw validation_error("skip model for " + name +
                             " must be binomial_logit");
    if (m.duration[g].family != Family::gaussian_log)
      throw validation_error("duration model for " + name +
                             " must be gaussian_log");
  }
}

struct Clamp {
  bool len = false;
  bool zf = false;
  bool sur = false;
};

Clamp single_clamp(int feature) {
  Clamp c;
  if (feature == 0)
    c.len = true;
  else if (feature == 1)
    c.zf = true;
  else
    c.sur = true;
  return c;
}

/// Design rows for one subject's feature-complete tokens with the easy-
/// setting clamps applied. Empty when the subject has no usable tokens.
Mat subject_design(const TokenTable& t, const SubjectInfo& s,
                   const PooledStats* stats, const LengthBins* bins,
                   Clamp c) {
  std::vector<std::size_t> rows;
  for (std::size_t i = s.range.begin; i < s.range.end; ++i)
    if (t[i].has_features()) rows.push_back(i);
  Mat X(static_cast<Index>(rows.size()), kNFeatures);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Token& tok = t[rows[r]];
    double len = tok.length_chars;
    double zf = *tok.zipf;
    double sur = *tok.surprisal_bits;
    if (c.len) len = stats->q1[0];
    if (c.sur) sur = stats->q1[2];
    if (c.zf) {
      // The stamped bin wins over re-binning a clamped length; this keeps
      // the clamp map idempotent.
      const int b = tok.length_bin >= 0 ? tok.length_bin
                                        : bins->bin_of(tok.length_chars);
      const double q3 = bins->bins[static_cast<std::size_t>(b)].zipf_q3;
      if (!std::isfinite(q3))
        throw validation_error("length bin " + std::to_string(b) +
                               " has no zipf observations to clamp to");
      zf = q3;
    }
    X(static_cast<Index>(r), 0) = len;
    X(static_cast<Index>(r), 1) = zf;
    X(static_cast<Index>(r), 2) = sur;
  }
  return X;
}

double mean_ert(const Vec& p, const Vec& ms) {
  double acc = 0;
  for (Index i = 0; i < p.size(); ++i) acc += ert(p(i), ms(i));
  return acc / static_cast<double>(p.size());
}

/// Own-models gap under a common clamp, subject-balanced.
BaselineGap gap_with_clamp(const ModelSet& m, const TokenTable& t,
                           const PooledStats* stats, const LengthBins* bins,
                           Clamp c) {
  BaselineGap r;
  double sum[kNGroups] = {};
  for (const SubjectInfo& s : t.subjects()) {
    const int g = static_cast<int>(s.group);
    const Mat X = subject_design(t, s, stats, bins, c);
    if (X.rows() == 0) {
      r.warnings.push_back("subject " + s.subject_id +
                           " has no feature-complete tokens; excluded");
      continue;
    }
    sum[g] += mean_ert(predict_skip(m.skip[g], X),
                       predict_trt_ms(m.duration[g], X));
    ++r.n_subjects[g];
  }
  for (int g = 0; g < kNGroups; ++g) {
    if (r.n_subjects[g] == 0)
      throw validation_error("no usable subjects in the " +
                             to_string(static_cast<Group>(g)) + " group");
    r.group_mean_ms[g] = sum[g] / r.n_subjects[g];
  }
  r.gap_ms = r.group_mean_ms[1] - r.group_mean_ms[0];
  return r;
}

void merge_warnings(std::vector<std::string>& dst,
                    const std::vector<std::string>& src) {
  for (const std::string& w : src)
    if (std::find(dst.begin(), dst.end(), w) == dst.end()) dst.push_back(w);
}

}  // namespace

BaselineGap baseline_gap(const ModelSet& models, const TokenTable& tokens) {
  check_models(models);
  return gap_with_clamp(models, tokens, nullptr, nullptr, {});
}

BaselineGap clamped_gap(const ModelSet& models, const TokenTable& tokens,
                        const PooledStats& stats, const LengthBins& bins,
                        bool clamp_length, bool clamp_zipf,
                        bool clamp_surprisal) {
  check_models(models);
  return gap_with_clamp(models, tokens, &stats, &bins,
                        {clamp_length, clamp_zipf, clamp_surprisal});
}

EqualEase equal_ease(const ModelSet& models, const TokenTable& tokens,
                     const PooledStats& stats, const LengthBins& bins) {
  check_models(models);
  const BaselineGap base = gap_with_clamp(models, tokens, nullptr, nullptr, {});
  const BaselineGap cf =
      gap_with_clamp(models, tokens, &stats, &bins, {true, true, true});
  EqualEase r;
  r.g0 = base.gap_ms;
  r.g_cf = cf.gap_ms;
  r.reduction = r.g0 - r.g_cf;
  r.warnings = base.warnings;
  merge_warnings(r.warnings, cf.warnings);
  return r;
}

PathwayShapley pathway_shapley(const ModelSet& models,
                               const TokenTable& tokens,
                               ShapleyCorpus corpus) {
  check_models(models);
  PathwayShapley r;
  double sum[kNGroups][kNGroups] = {};
  int n = 0;
  for (const SubjectInfo& s : tokens.subjects()) {
    if (corpus == ShapleyCorpus::control_only && s.group != Group::control)
      continue;
    const Mat X = subject_design(tokens, s, nullptr, nullptr, {});
    if (X.rows() == 0) {
      r.warnings.push_back("subject " + s.subject_id +
                           " has no feature-complete tokens; excluded");
      continue;
    }
    Vec p[kNGroups], ms[kNGroups];
    for (int g = 0; g < kNGroups; ++g) {
      p[g] = predict_skip(models.skip[g], X);
      ms[g] = predict_trt_ms(models.duration[g], X);
    }
    for (int a = 0; a < kNGroups; ++a)
      for (int b = 0; b < kNGroups; ++b) sum[a][b] += mean_ert(p[a], ms[b]);
    ++n;
  }
  if (n == 0)
    throw validation_error("no usable subjects for the pathway split");
  for (int a = 0; a < kNGroups; ++a)
    for (int b = 0; b < kNGroups; ++b)
      r.ert_matrix[a][b] = sum[a][b] / static_cast<double>(n);

  const double m00 = r.ert_matrix[0][0];
  const double m01 = r.ert_matrix[0][1];
  const double m10 = r.ert_matrix[1][0];
  const double m11 = r.ert_matrix[1][1];
  const double skip_first = m10 - m00;
  const double skip_last = m11 - m01;
  r.skip_contrib = 0.5 * (skip_first + skip_last);
  r.dur_contrib = 0.5 * ((m11 - m10) + (m01 - m00));
  r.common_gap = m11 - m00;
  r.order_spread = std::abs(skip_first - skip_last);
  return r;
}

namespace {

const char* kTensorLabel[3] = {"length x zipf", "length x surprisal",
                               "zipf x surprisal"};
const Feature kTensorPair[3][2] = {
    {Feature::length, Feature::zipf},
    {Feature::length, Feature::surprisal},
    {Feature::zipf, Feature::surprisal}};

std::string config_label(const bool with[3]) {
  std::string s;
  for (int i = 0; i < 3; ++i) {
    if (!with[i]) continue;
    if (!s.empty()) s += " + ";
    s += kTensorLabel[i];
  }
  return s.empty() ? "no interactions" : s;
}

}  // namespace

FeatureAttribution feature_attribution(const ModelSet& base,
                                       const TokenTable& tokens,
                                       const PooledStats& stats,
                                       const LengthBins& bins,
                                       const AttributionOptions& opts) {
  check_models(base);
  if (opts.tensor_splines < 3)
    throw validation_error("tensor_splines must be at least 3");
  if (opts.cv_k < 2) throw validation_error("cv_k must be at least 2");
  if (!(opts.subsample_frac > 0.0) || opts.subsample_frac > 1.0)
    throw validation_error("subsample_frac must lie in (0, 1]");
  const std::vector<double> grid =
      opts.lambda_grid.empty() ? default_lambda_grid() : opts.lambda_grid;

  const std::vector<std::string> names = subject_names(tokens);
  std::vector<std::string> roster[kNGroups];
  for (const SubjectInfo& s : tokens.subjects())
    roster[static_cast<int>(s.group)].push_back(s.subject_id);
  ModelData sdata[kNGroups], ddata[kNGroups];
  for (int g = 0; g < kNGroups; ++g) {
    const Group grp = static_cast<Group>(g);
    sdata[g] = skip_model_data(tokens, grp);
    ddata[g] = duration_model_data(tokens, grp);
    if (sdata[g].X.rows() == 0 || ddata[g].X.rows() == 0)
      throw validation_error("no usable rows for the " + to_string(grp) +
                             " group");
  }

  FeatureAttribution out;
  out.configs.resize(8);
  double acc_raw[kNFeatures] = {};
  double acc_norm[kNFeatures] = {};
  for (int mask = 0; mask < 8; ++mask) {
    AttributionConfigResult& c = out.configs[static_cast<std::size_t>(mask)];
    for (int b = 0; b < 3; ++b) c.with_tensor[b] = ((mask >> b) & 1) != 0;
    c.label = config_label(c.with_tensor);
    try {
      ModelSet ms;
      for (int g = 0; g < kNGroups; ++g) {
        for (int fam = 0; fam < 2; ++fam) {
          const bool dur = fam == 1;
          const Family family =
              dur ? Family::gaussian_log : Family::binomial_logit;
          const FittedGAM& src = dur ? base.duration[g] : base.skip[g];
          std::vector<SmoothSpec> specs;
          specs.reserve(src.smooths.size());
          for (const FittedSmooth& s : src.smooths) specs.push_back(s.spec);
          std::vector<TensorSpec> tens;
          for (int b = 0; b < 3; ++b) {
            if (!c.with_tensor[b]) continue;
            TensorSpec ts;
            ts.f1 = kTensorPair[b][0];
            ts.f2 = kTensorPair[b][1];
            ts.n1 = ts.n2 = opts.tensor_splines;
            tens.push_back(ts);
          }
          const ModelData& data = dur ? ddata[g] : sdata[g];
          SelectionOptions sel;
          sel.vary_smooths = false;
          sel.fit = opts.fit;
          double lam = 0;
          if (!tens.empty()) {
            // Deterministic per-slot stream so configurations never share
            // subsample or fold draws.
            const std::uint64_t seed =
                opts.seed + static_cast<std::uint64_t>(mask * 4 + g * 2 + fam);
            const std::vector<std::string> sub =
                subsample_subjects(roster[g], opts.subsample_frac, seed);
            CVPlan plan = group_kfold(sub, opts.cv_k, seed);
            plan.lambda_grid = grid;
            const SelectionResult sr =
                grid_search(family, specs, tens, data, names, plan, sel);
            merge_warnings(c.warnings, sr.warnings);
            lam = sr.chosen_lambda;
          }
          FittedGAM fm = final_refit(family, specs, tens, lam, data, sel);
          if (!fm.info.converged)
            throw numeric_error((dur ? std::string("duration model for ")
                                     : std::string("skip model for ")) +
                                to_string(static_cast<Group>(g)) +
                                " did not converge");
          c.tensor_lambda[g][fam] = tens.empty() ? 0.0 : lam;
          (dur ? ms.duration[g] : ms.skip[g]) = std::move(fm);
        }
      }

      const BaselineGap g0 = gap_with_clamp(ms, tokens, nullptr, nullptr, {});
      const BaselineGap cf =
          gap_with_clamp(ms, tokens, &stats, &bins, {true, true, true});
      c.g0 = g0.gap_ms;
      c.g_cf = cf.gap_ms;
      c.reduction = c.g0 - c.g_cf;
      if (opts.clamp_mode == ClampMode::single) {
        for (int f = 0; f < kNFeatures; ++f) {
          const BaselineGap gf =
              gap_with_clamp(ms, tokens, &stats, &bins, single_clamp(f));
          c.raw[f] = c.g0 - gf.gap_ms;
        }
      } else {
        double gap_of[8];
        gap_of[0] = c.g0;
        for (int sm = 1; sm < 8; ++sm) {
          const Clamp cl{(sm & 1) != 0, (sm & 2) != 0, (sm & 4) != 0};
          gap_of[sm] = gap_with_clamp(ms, tokens, &stats, &bins, cl).gap_ms;
        }
        // Shapley weight |S|!(3-|S|-1)!/3! over coalitions not holding f.
        static const double w[3] = {2.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0};
        for (int f = 0; f < kNFeatures; ++f) {
          double phi = 0;
          for (int sm = 0; sm < 8; ++sm) {
            if ((sm >> f) & 1) continue;
            const int size = std::popcount(static_cast<unsigned>(sm));
            phi += w[size] * (gap_of[sm] - gap_of[sm | (1 << f)]);
          }
          c.raw[f] = phi;
        }
      }
      const double rsum = c.raw[0] + c.raw[1] + c.raw[2];
      if (rsum != 0.0) {
        for (int f = 0; f < kNFeatures; ++f)
          c.normalized[f] = c.raw[f] * c.reduction / rsum;
      } else if (c.reduction != 0.0) {
        c.warnings.push_back(
            "zero per-feature total; normalized contributions left at zero");
      }
      c.included = true;
    } catch (const numeric_error& e) {
      c.warnings.push_back(std::string("excluded: ") + e.what());
      out.warnings.push_back("configuration \"" + c.label +
                             "\" excluded: " + e.what());
    }
    if (c.included) {
      ++out.n_included;
      for (int f = 0; f < kNFeatures; ++f) {
        acc_raw[f] += c.raw[f];
        acc_norm[f] += c.normalized[f];
      }
    }
  }
  if (out.n_included == 0)
    throw numeric_error("every interaction configuration failed");
  for (int f = 0; f < kNFeatures; ++f) {
    out.contrib[f] = acc_raw[f] / out.n_included;
    out.contrib_normalized[f] = acc_norm[f] / out.n_included;
  }
  return out;
}

GapDecomposition decompose_gap(const ModelSet& models,
                               const TokenTable& tokens,
                               const PooledStats& stats,
                               const LengthBins& bins, ShapleyCorpus corpus) {
  const EqualEase ee = equal_ease(models, tokens, stats, bins);
  const PathwayShapley ps = pathway_shapley(models, tokens, corpus);
  GapDecomposition d;
  d.g0 = ee.g0;
  d.g_cf = ee.g_cf;
  d.reduction = ee.reduction;
  d.skip_contrib = ps.skip_contrib;
  d.dur_contrib = ps.dur_contrib;
  d.common_gap = ps.common_gap;
  d.order_spread = ps.order_spread;
  for (int g = 0; g < kNGroups; ++g) {
    const FittedGAM* pair[2] = {&models.skip[g], &models.duration[g]};
    for (const FittedGAM* m : pair) {
      for (const FittedTensor& t : m->tensors) {
        for (int b = 0; b < 3; ++b) {
          const bool fwd =
              t.spec.f1 == kTensorPair[b][0] && t.spec.f2 == kTensorPair[b][1];
          const bool rev =
              t.spec.f1 == kTensorPair[b][1] && t.spec.f2 == kTensorPair[b][0];
          if (fwd || rev) d.with_tensor[b] = true;
        }
      }
    }
  }
  d.corpus = corpus == ShapleyCorpus::pooled ? "pooled" : "control-only";
  d.warnings = ee.warnings;
  merge_warnings(d.warnings, ps.warnings);
  return d;
}

}  // namespace ertkit
