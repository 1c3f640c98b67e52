#include "ertkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "ertkit/effects.hpp"
#include "ertkit/rng.hpp"
#include "ertkit/stats.hpp"

namespace ertkit {

namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Inverse standard normal CDF by bisection; exactness matters less than
/// being monotone and self-consistent with normal_cdf.
double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on the
/// recurrence. n stays small (<= 96) so this is exact to roundoff.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

double clipped_normal_mean(double mu, double sd, double a, double b) {
  const double al = (a - mu) / sd, be = (b - mu) / sd;
  return a * normal_cdf(al) + b * (1.0 - normal_cdf(be)) +
         mu * (normal_cdf(be) - normal_cdf(al)) -
         sd * (normal_pdf(be) - normal_pdf(al));
}

double capped_lognormal_mean(double mu, double sd, double cap) {
  if (sd == 0.0) return std::min(std::exp(mu), cap);
  const double c = std::log(cap);
  return std::exp(mu + 0.5 * sd * sd) * normal_cdf((c - mu - sd * sd) / sd) +
         cap * (1.0 - normal_cdf((c - mu) / sd));
}

struct Sampling {
  std::vector<double> pmf;    // normalized copy
  std::vector<double> cdf;
  double mean_len = 0, sd_len = 0;
  double alpha = 0, beta = 0;  // zipf | length mean = alpha + beta * L
  // realized population bins
  std::vector<int> bin_of_len;  // per length index (0-based), -1 if pmf 0
  int n_bins = 0;
};

double require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw validation_error(std::string(what) + " must be finite");
  return v;
}

Sampling prepare(const SynthConfig& cfg) {
  if (cfg.length_pmf.empty()) throw validation_error("length pmf is empty");
  double sum = 0;
  for (double p : cfg.length_pmf) {
    if (!(p >= 0))
      throw validation_error("length pmf has a negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw validation_error("length pmf must sum to 1");
  if (!(cfg.noise_sd >= 0)) throw validation_error("noise sd must be >= 0");
  if (cfg.subjects_per_group < 1)
    throw validation_error("need at least one subject per group");
  if (cfg.tokens_per_subject < 1)
    throw validation_error("need at least one token per subject");
  if (!(cfg.zipf_within_sd > 0))
    throw validation_error("zipf within-length sd must be > 0");
  if (!(cfg.zipf_lo < cfg.zipf_hi))
    throw validation_error("zipf clip range is empty");
  if (!(std::abs(cfg.length_zipf_corr) < 1.0))
    throw validation_error("length-zipf correlation must lie in (-1, 1)");
  if (!(cfg.surprisal_log_sd >= 0))
    throw validation_error("surprisal log-sd must be >= 0");
  if (!(cfg.surprisal_cap > 0))
    throw validation_error("surprisal cap must be > 0");
  if (cfg.n_length_bins < 1)
    throw validation_error("need at least one length bin");
  require_finite(cfg.zipf_mean, "zipf mean");
  require_finite(cfg.surprisal_log_mean, "surprisal log-mean");
  for (int g = 0; g < kNGroups; ++g) {
    const GroupTruth& t = cfg.truth[g];
    require_finite(t.skip_intercept, "truth parameter");
    require_finite(t.log_trt_intercept, "truth parameter");
    for (int f = 0; f < kNFeatures; ++f) {
      for (const TruthTerm* term : {&t.skip[f], &t.log_trt[f]}) {
        require_finite(term->linear, "truth parameter");
        require_finite(term->scale, "truth parameter");
        require_finite(term->rate, "truth parameter");
        require_finite(term->center, "truth parameter");
      }
    }
  }

  Sampling s;
  s.pmf = cfg.length_pmf;
  for (double& p : s.pmf) p /= sum;
  s.cdf.resize(s.pmf.size());
  double acc = 0;
  for (std::size_t i = 0; i < s.pmf.size(); ++i) {
    acc += s.pmf[i];
    s.cdf[i] = acc;
  }
  s.cdf.back() = 1.0;

  double m = 0, m2 = 0;
  for (std::size_t i = 0; i < s.pmf.size(); ++i) {
    const double L = static_cast<double>(i + 1);
    m += s.pmf[i] * L;
    m2 += s.pmf[i] * L * L;
  }
  s.mean_len = m;
  s.sd_len = std::sqrt(std::max(0.0, m2 - m * m));
  const double r = cfg.length_zipf_corr;
  if (r != 0.0 && s.sd_len == 0.0)
    throw validation_error(
        "degenerate length distribution cannot carry a length-zipf "
        "correlation");
  s.beta = (s.sd_len == 0.0)
               ? 0.0
               : r * cfg.zipf_within_sd / (s.sd_len * std::sqrt(1.0 - r * r));
  s.alpha = cfg.zipf_mean - s.beta * s.mean_len;

  // equal-frequency bins on the pmf: cutpoints at k/n quantiles, cell
  // index = cutpoints strictly below L, empty cells collapse downward
  std::vector<double> cuts;
  for (int k = 1; k < cfg.n_length_bins; ++k) {
    const double p = static_cast<double>(k) / cfg.n_length_bins;
    std::size_t i = 0;
    while (i + 1 < s.cdf.size() && s.cdf[i] < p) ++i;
    cuts.push_back(static_cast<double>(i + 1));
  }
  std::vector<int> raw(s.pmf.size());
  for (std::size_t i = 0; i < s.pmf.size(); ++i) {
    const double L = static_cast<double>(i + 1);
    raw[i] = static_cast<int>(
        std::count_if(cuts.begin(), cuts.end(), [&](double c) { return c < L; }));
  }
  std::vector<double> cell_mass(cuts.size() + 1, 0.0);
  for (std::size_t i = 0; i < s.pmf.size(); ++i) cell_mass[raw[i]] += s.pmf[i];
  std::vector<int> remap(cell_mass.size(), -1);
  int next = 0;
  for (std::size_t c = 0; c < cell_mass.size(); ++c)
    if (cell_mass[c] > 0) remap[c] = next++;
  s.n_bins = next;
  s.bin_of_len.assign(s.pmf.size(), -1);
  for (std::size_t i = 0; i < s.pmf.size(); ++i)
    if (s.pmf[i] > 0) s.bin_of_len[i] = remap[raw[i]];
  return s;
}

/// Quadrature grid over the feature population: length atoms x zipf
/// (Gauss-Legendre interior + clip atoms) x surprisal (Gauss-Legendre on
/// the log scale + cap atom). Weights sum to 1.
struct PopGrid {
  std::vector<double> L, Z, S, W;
};

PopGrid build_grid(const SynthConfig& cfg, const Sampling& s) {
  std::vector<double> gx, gw;
  gauss_legendre(48, gx, gw);
  const double zlo = cfg.zipf_lo, zhi = cfg.zipf_hi, tau = cfg.zipf_within_sd;
  std::vector<double> znodes, zj;
  for (int i = 0; i < 48; ++i) {
    znodes.push_back(0.5 * (zlo + zhi) + 0.5 * (zhi - zlo) * gx[i]);
    zj.push_back(0.5 * (zhi - zlo) * gw[i]);
  }
  znodes.push_back(zlo);
  znodes.push_back(zhi);

  std::vector<double> snodes, sweights;
  const double mu = cfg.surprisal_log_mean, sd = cfg.surprisal_log_sd;
  const double lcap = std::log(cfg.surprisal_cap);
  if (sd == 0.0) {
    snodes.push_back(std::min(std::exp(mu), cfg.surprisal_cap));
    sweights.push_back(1.0);
  } else if (lcap <= mu - 12.0 * sd) {
    snodes.push_back(cfg.surprisal_cap);
    sweights.push_back(1.0);
  } else {
    std::vector<double> sx, sw;
    gauss_legendre(96, sx, sw);
    const double lo = mu - 12.0 * sd, hi = std::min(lcap, mu + 12.0 * sd);
    for (int i = 0; i < 96; ++i) {
      const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * sx[i];
      snodes.push_back(std::exp(x));
      sweights.push_back(0.5 * (hi - lo) * sw[i] * normal_pdf((x - mu) / sd) /
                         sd);
    }
    if (lcap < mu + 12.0 * sd) {
      snodes.push_back(cfg.surprisal_cap);
      sweights.push_back(1.0 - normal_cdf((lcap - mu) / sd));
    }
  }

  PopGrid g;
  const std::size_t reserve =
      s.pmf.size() * znodes.size() * snodes.size();
  g.L.reserve(reserve);
  g.Z.reserve(reserve);
  g.S.reserve(reserve);
  g.W.reserve(reserve);
  for (std::size_t i = 0; i < s.pmf.size(); ++i) {
    if (s.pmf[i] == 0) continue;
    const double muz = s.alpha + s.beta * static_cast<double>(i + 1);
    std::vector<double> zw(znodes.size());
    for (int k = 0; k < 48; ++k)
      zw[k] = zj[k] * normal_pdf((znodes[k] - muz) / tau) / tau;
    zw[48] = normal_cdf((zlo - muz) / tau);
    zw[49] = 1.0 - normal_cdf((zhi - muz) / tau);
    for (std::size_t k = 0; k < znodes.size(); ++k) {
      if (zw[k] == 0) continue;
      for (std::size_t q = 0; q < snodes.size(); ++q) {
        g.L.push_back(static_cast<double>(i + 1));
        g.Z.push_back(znodes[k]);
        g.S.push_back(snodes[q]);
        g.W.push_back(s.pmf[i] * zw[k] * sweights[q]);
      }
    }
  }
  return g;
}

/// Mixture CDF of clip(Normal(alpha + beta L, tau), lo, hi) over the pmf
/// restricted to lengths with sel[i] mass; sel is pre-normalized.
double zipf_mix_cdf(double q, const SynthConfig& cfg, const Sampling& s,
                    const std::vector<double>& sel) {
  double acc = 0;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    if (sel[i] == 0) continue;
    const double muz = s.alpha + s.beta * static_cast<double>(i + 1);
    acc += sel[i] * normal_cdf((q - muz) / cfg.zipf_within_sd);
  }
  return acc;
}

double zipf_mix_quantile(double p, const SynthConfig& cfg, const Sampling& s,
                         const std::vector<double>& sel) {
  if (zipf_mix_cdf(cfg.zipf_lo, cfg, s, sel) >= p) return cfg.zipf_lo;
  double lo = cfg.zipf_lo, hi = cfg.zipf_hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (zipf_mix_cdf(mid, cfg, s, sel) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double eval_terms(const TruthTerm* terms, double intercept, double L, double Z,
                  double S) {
  const double x[kNFeatures] = {L, Z, S};
  double v = intercept;
  for (int f = 0; f < kNFeatures; ++f) v += terms[f](x[f]);
  return v;
}

double skip_p(const GroupTruth& t, double L, double Z, double S) {
  return logistic(eval_terms(t.skip, t.skip_intercept, L, Z, S));
}

double trt_ms(const GroupTruth& t, double smear, double L, double Z,
              double S) {
  return std::exp(eval_terms(t.log_trt, t.log_trt_intercept, L, Z, S)) * smear;
}

double ratio_or_nan(double num, double den) {
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(num) / std::abs(den);
}

}  // namespace

double TruthTerm::operator()(double x) const {
  return linear * x + scale * logistic(rate * (x - center));
}

TruthRecord true_targets(const SynthConfig& cfg) {
  const Sampling s = prepare(cfg);
  const double smear = std::exp(0.5 * cfg.noise_sd * cfg.noise_sd);
  TruthRecord rec;

  // pooled quartiles and means
  const auto len_quantile = [&](double p) {
    std::size_t i = 0;
    while (i + 1 < s.cdf.size() && s.cdf[i] < p) ++i;
    return static_cast<double>(i + 1);
  };
  rec.q1[0] = len_quantile(0.25);
  rec.q3[0] = len_quantile(0.75);
  rec.q1[1] = zipf_mix_quantile(0.25, cfg, s, s.pmf);
  rec.q3[1] = zipf_mix_quantile(0.75, cfg, s, s.pmf);
  const double sd_s = cfg.surprisal_log_sd;
  rec.q1[2] = std::min(cfg.surprisal_cap,
                       std::exp(cfg.surprisal_log_mean +
                                sd_s * normal_quantile(0.25)));
  rec.q3[2] = std::min(cfg.surprisal_cap,
                       std::exp(cfg.surprisal_log_mean +
                                sd_s * normal_quantile(0.75)));
  rec.feature_mean[0] = s.mean_len;
  double zm = 0;
  for (std::size_t i = 0; i < s.pmf.size(); ++i)
    zm += s.pmf[i] * clipped_normal_mean(
                         s.alpha + s.beta * static_cast<double>(i + 1),
                         cfg.zipf_within_sd, cfg.zipf_lo, cfg.zipf_hi);
  rec.feature_mean[1] = zm;
  rec.feature_mean[2] = capped_lognormal_mean(
      cfg.surprisal_log_mean, sd_s, cfg.surprisal_cap);

  // population bins
  rec.bins.resize(s.n_bins);
  for (std::size_t i = 0; i < s.pmf.size(); ++i) {
    const int b = s.bin_of_len[i];
    if (b < 0) continue;
    TruthBin& bin = rec.bins[b];
    const int L = static_cast<int>(i + 1);
    if (bin.weight == 0) bin.lo = L;
    bin.hi = L;
    bin.weight += s.pmf[i];
    bin.mean_length += s.pmf[i] * L;
  }
  for (int b = 0; b < s.n_bins; ++b) {
    TruthBin& bin = rec.bins[b];
    bin.mean_length /= bin.weight;
    std::vector<double> sel(s.pmf.size(), 0.0);
    for (std::size_t i = 0; i < s.pmf.size(); ++i)
      if (s.bin_of_len[i] == b) sel[i] = s.pmf[i] / bin.weight;
    bin.zipf_q1 = zipf_mix_quantile(0.25, cfg, s, sel);
    bin.zipf_q3 = zipf_mix_quantile(0.75, cfg, s, sel);
  }

  // plain contrasts (length, surprisal) and bin-conditional zipf contrast
  const double meanZ = rec.feature_mean[1], meanS = rec.feature_mean[2],
               meanL = rec.feature_mean[0];
  std::vector<double> bin_delta[kNGroups][kNPathways];
  for (int g = 0; g < kNGroups; ++g) {
    const GroupTruth& t = cfg.truth[g];
    for (int f : {0, 2}) {
      double s1[3] = {meanL, meanZ, meanS};
      double s3[3] = {meanL, meanZ, meanS};
      s1[f] = rec.q1[f];
      s3[f] = rec.q3[f];
      const double p1 = skip_p(t, s1[0], s1[1], s1[2]);
      const double p3 = skip_p(t, s3[0], s3[1], s3[2]);
      const double t1 = trt_ms(t, smear, s1[0], s1[1], s1[2]);
      const double t3 = trt_ms(t, smear, s3[0], s3[1], s3[2]);
      rec.delta[g][0][f] = p3 - p1;
      rec.delta[g][1][f] = t3 - t1;
      rec.delta[g][2][f] = ert(p3, t3) - ert(p1, t1);
      rec.link_delta[g][0][f] = t.skip[f](rec.q3[f]) - t.skip[f](rec.q1[f]);
      rec.link_delta[g][1][f] =
          t.log_trt[f](rec.q3[f]) - t.log_trt[f](rec.q1[f]);
    }
    for (int p = 0; p < kNPathways; ++p)
      bin_delta[g][p].resize(rec.bins.size());
    double lz0 = 0, lz1 = 0;
    for (std::size_t b = 0; b < rec.bins.size(); ++b) {
      const TruthBin& bin = rec.bins[b];
      const double p1 = skip_p(t, bin.mean_length, bin.zipf_q1, meanS);
      const double p3 = skip_p(t, bin.mean_length, bin.zipf_q3, meanS);
      const double t1 = trt_ms(t, smear, bin.mean_length, bin.zipf_q1, meanS);
      const double t3 = trt_ms(t, smear, bin.mean_length, bin.zipf_q3, meanS);
      bin_delta[g][0][b] = p3 - p1;
      bin_delta[g][1][b] = t3 - t1;
      bin_delta[g][2][b] = ert(p3, t3) - ert(p1, t1);
      for (int p = 0; p < kNPathways; ++p)
        rec.delta[g][p][1] += bin.weight * bin_delta[g][p][b];
      lz0 += bin.weight * (t.skip[1](bin.zipf_q3) - t.skip[1](bin.zipf_q1));
      lz1 +=
          bin.weight * (t.log_trt[1](bin.zipf_q3) - t.log_trt[1](bin.zipf_q1));
    }
    rec.link_delta[g][0][1] = lz0;
    rec.link_delta[g][1][1] = lz1;
  }

  // slope ratios: plain for length and surprisal, bin-weighted mean of
  // per-bin ratios for zipf (bins with a zero control delta drop out)
  for (int p = 0; p < kNPathways; ++p) {
    for (int f : {0, 2})
      rec.sr[p][f] = ratio_or_nan(rec.delta[1][p][f], rec.delta[0][p][f]);
    double num = 0, wsum = 0;
    for (std::size_t b = 0; b < rec.bins.size(); ++b) {
      if (bin_delta[0][p][b] == 0.0) continue;
      num += rec.bins[b].weight *
             std::abs(bin_delta[1][p][b]) / std::abs(bin_delta[0][p][b]);
      wsum += rec.bins[b].weight;
    }
    rec.sr[p][1] =
        wsum == 0 ? std::numeric_limits<double>::quiet_NaN() : num / wsum;
  }

  // population ERT matrix, rates, clamps
  const PopGrid grid = build_grid(cfg, s);
  const std::size_t n = grid.W.size();
  std::vector<double> P[kNGroups], T[kNGroups];
  for (int g = 0; g < kNGroups; ++g) {
    P[g].resize(n);
    T[g].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      P[g][i] = skip_p(cfg.truth[g], grid.L[i], grid.Z[i], grid.S[i]);
      T[g][i] = trt_ms(cfg.truth[g], smear, grid.L[i], grid.Z[i], grid.S[i]);
    }
  }
  for (int gs = 0; gs < kNGroups; ++gs)
    for (int gd = 0; gd < kNGroups; ++gd) {
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        acc += grid.W[i] * ert(P[gs][i], T[gd][i]);
      rec.ert_matrix[gs][gd] = acc;
    }
  for (int g = 0; g < kNGroups; ++g) {
    double pr = 0, tm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pr += grid.W[i] * P[g][i];
      tm += grid.W[i] * T[g][i];
    }
    rec.skip_rate[g] = pr;
    rec.mean_trt_ms[g] = tm;
    rec.mean_ert_ms[g] = rec.ert_matrix[g][g];
  }
  rec.gap_ms = rec.ert_matrix[1][1] - rec.ert_matrix[0][0];
  rec.skip_share_ms = 0.5 * ((rec.ert_matrix[1][0] - rec.ert_matrix[0][0]) +
                             (rec.ert_matrix[1][1] - rec.ert_matrix[0][1]));
  rec.duration_share_ms =
      0.5 * ((rec.ert_matrix[1][1] - rec.ert_matrix[1][0]) +
             (rec.ert_matrix[0][1] - rec.ert_matrix[0][0]));

  // equal-ease: length and surprisal to pooled Q1, zipf to the original
  // bin's Q3
  double ee[kNGroups] = {0, 0};
  for (int g = 0; g < kNGroups; ++g)
    for (const TruthBin& bin : rec.bins)
      ee[g] += bin.weight * ert(skip_p(cfg.truth[g], rec.q1[0], bin.zipf_q3,
                                       rec.q1[2]),
                                trt_ms(cfg.truth[g], smear, rec.q1[0],
                                       bin.zipf_q3, rec.q1[2]));
  rec.equal_ease_gap_ms = ee[1] - ee[0];
  rec.reduction_ms = rec.gap_ms - rec.equal_ease_gap_ms;

  // single-feature clamps from the unclamped baseline
  double raw_sum = 0;
  for (int f = 0; f < kNFeatures; ++f) {
    double val[kNGroups];
    for (int g = 0; g < kNGroups; ++g) {
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double L = grid.L[i], Z = grid.Z[i], S = grid.S[i];
        if (f == 0) L = rec.q1[0];
        if (f == 1)
          Z = rec.bins[s.bin_of_len[static_cast<int>(grid.L[i]) - 1]].zipf_q3;
        if (f == 2) S = rec.q1[2];
        acc += grid.W[i] * ert(skip_p(cfg.truth[g], L, Z, S),
                               trt_ms(cfg.truth[g], smear, L, Z, S));
      }
      val[g] = acc;
    }
    rec.clamp_reduction[f] = rec.gap_ms - (val[1] - val[0]);
    raw_sum += rec.clamp_reduction[f];
  }
  for (int f = 0; f < kNFeatures; ++f)
    rec.attribution[f] =
        raw_sum == 0 ? 0.0
                     : rec.clamp_reduction[f] * rec.reduction_ms / raw_sum;
  return rec;
}

namespace {

/// Deterministic pronounceable word of the exact requested length; keeps
/// the random streams untouched.
std::string word_of(int length, std::uint64_t h) {
  static const char cons[] = "bcdfghjklmnpqrstvwz";
  static const char vow[] = "aeiou";
  std::string w;
  w.reserve(length);
  for (int k = 0; k < length; ++k) {
    if (k % 2 == 0)
      w.push_back(cons[(h + 7u * k) % 19]);
    else
      w.push_back(vow[(h / 19 + 3u * k) % 5]);
  }
  return w;
}

}  // namespace

SynthResult generate(const SynthConfig& cfg) {
  const Sampling s = prepare(cfg);
  const int S = cfg.subjects_per_group;
  const int T = cfg.tokens_per_subject;
  const int n_subj = kNGroups * S;
  std::vector<Token> rows(static_cast<std::size_t>(n_subj) * T);

  const auto fill_subject = [&](int subj) {
    const int g = subj / S;
    const int j = subj % S;
    char id[24];
    std::snprintf(id, sizeof id, "syn_%c%04d", g == 0 ? 'c' : 'd', j + 1);
    const GroupTruth& truth = cfg.truth[g];
    Rng rng = Rng::derive(cfg.seed, 0x73796e74, static_cast<std::uint64_t>(subj));
    for (int t = 0; t < T; ++t) {
      Token& tok = rows[static_cast<std::size_t>(subj) * T + t];
      tok.subject_id = id;
      tok.group = g == 0 ? Group::control : Group::dyslexic;
      tok.doc_id = t / 720;
      tok.sentence_id = (t % 720) / 12;
      tok.word_pos = t % 12 + 1;

      const double u = rng.uniform();
      std::size_t i = 0;
      while (i + 1 < s.cdf.size() && s.cdf[i] < u) ++i;
      const int length = static_cast<int>(i + 1);
      const double muz = s.alpha + s.beta * length;
      const double z = std::clamp(muz + cfg.zipf_within_sd * rng.normal(),
                                  cfg.zipf_lo, cfg.zipf_hi);
      const double sur =
          std::min(cfg.surprisal_cap,
                   std::exp(cfg.surprisal_log_mean +
                            cfg.surprisal_log_sd * rng.normal()));
      tok.length_chars = length;
      tok.word_form = word_of(
          length, 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(subj) +
                                           1) +
                      2654435761ULL * static_cast<std::uint64_t>(t));
      tok.zipf = z;
      tok.surprisal_bits = sur;
      const double p = skip_p(truth, length, z, sur);
      tok.skipped = rng.bernoulli(p);
      if (!tok.skipped) {
        const double lt = eval_terms(truth.log_trt, truth.log_trt_intercept,
                                     length, z, sur);
        tok.trt_ms = std::exp(lt + cfg.noise_sd * rng.normal());
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int n_threads = static_cast<int>(
      std::min<unsigned>(hw, static_cast<unsigned>(n_subj)));
  if (n_threads <= 1) {
    for (int subj = 0; subj < n_subj; ++subj) fill_subject(subj);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&, w] {
        for (int subj = w; subj < n_subj; subj += n_threads)
          fill_subject(subj);
      });
    for (std::thread& th : pool) th.join();
  }

  SynthResult out{TokenTable(std::move(rows)), true_targets(cfg)};
  return out;
}

SynthConfig synth_preset(const std::string& name) {
  SynthConfig cfg;
  const auto term = [](double scale, double rate, double center) {
    TruthTerm t;
    t.scale = scale;
    t.rate = rate;
    t.center = center;
    return t;
  };
  if (name == "paper_shaped" || name == "inert_zipf") {
    GroupTruth& c = cfg.truth[0];
    c.skip_intercept = 0.233938;
    c.skip[0] = term(-2.998355, 0.45, 6.0);
    c.skip[1] = term(+0.314390, 0.90, 4.5);
    c.skip[2] = term(-0.349393, 0.35, 6.0);
    c.log_trt_intercept = 5.485796;
    c.log_trt[0] = term(+0.360341, 0.45, 6.0);
    c.log_trt[1] = term(-0.481405, 0.90, 4.5);
    c.log_trt[2] = term(+0.044256, 0.35, 6.0);
    GroupTruth& d = cfg.truth[1];
    d.skip_intercept = 0.496271;
    d.skip[0] = term(-5.368931, 0.45, 6.0);
    d.skip[1] = term(+0.439143, 3.20, 4.134322);
    d.skip[2] = term(-1.499787, 0.35, 6.0);
    d.log_trt_intercept = 5.725835;
    d.log_trt[0] = term(+0.268640, 0.45, 6.0);
    d.log_trt[1] = term(-0.267553, 3.20, 4.134322);
    d.log_trt[2] = term(+0.070830, 0.35, 6.0);
    cfg.seed = 1729;
    if (name == "inert_zipf") {
      for (int g = 0; g < kNGroups; ++g) {
        cfg.truth[g].skip[1] = TruthTerm{};
        cfg.truth[g].log_trt[1] = TruthTerm{};
      }
      cfg.seed = 1730;
    }
    return cfg;
  }
  if (name == "null_model" || name == "offset_gap") {
    for (int g = 0; g < kNGroups; ++g) {
      cfg.truth[g].skip_intercept = std::log(0.2 / 0.8);
      cfg.truth[g].log_trt_intercept = std::log(250.0);
    }
    if (name == "offset_gap") {
      // duration-only group offset; (1 - p) * smear * (exp(b0d) - 250) = 80
      const double smear = std::exp(0.5 * cfg.noise_sd * cfg.noise_sd);
      cfg.truth[1].log_trt_intercept =
          std::log(250.0 + 80.0 / (0.8 * smear));
      cfg.seed = 1732;
    } else {
      cfg.seed = 1731;
    }
    return cfg;
  }
  throw validation_error("unknown synth preset: '" + name + "'");
}

}  // namespace ertkit
