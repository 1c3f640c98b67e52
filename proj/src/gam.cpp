#include "ertkit/gam.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ertkit/stats.hpp"

namespace ertkit {

namespace {

using nlohmann::json;

std::atomic<std::uint64_t> g_fit_count{0};

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

std::vector<double> column_values(const Mat& X, Feature f) {
  const Index n = X.rows();
  const int c = static_cast<int>(f);
  return std::vector<double>(X.col(c).data(), X.col(c).data() + n);
}

/// Everything the optimizer needs about the packed parameter layout.
struct Assembly {
  Mat X;       // n x p design: intercept column then per-term blocks
  Mat P_base;  // p x p penalty, zero in the intercept row/col
  struct SmoothPart {
    Index offset;
    Index width;   // m - 1
    Mat Z;         // m x (m-1)
    Mat DZ;        // (m-1) x (m-1): adjacent full-coef diffs in gamma space
    Vec col_means; // m
    Knots knots;
  };
  struct TensorPart {
    Index offset;
    Index width;  // (m1-1)(m2-1)
    Mat kronZ;    // m1*m2 x width
    Knots knots1;
    Knots knots2;
  };
  std::vector<SmoothPart> smooths;
  std::vector<TensorPart> tensors;
  Index p = 0;
};

Assembly assemble(const std::vector<SmoothSpec>& specs,
                  const std::vector<TensorSpec>& tensors, const Mat& X) {
  const Index n = X.rows();
  Index p = 1;
  std::vector<Mat> blocks;

  Assembly a;
  for (const SmoothSpec& s : specs) {
    if (s.n_splines < 4 || s.n_splines <= s.spline_degree)
      throw validation_error("smooth needs n_splines >= 4 and > degree");
    if (!(s.lambda > 0) || !std::isfinite(s.lambda))
      throw validation_error("smooth lambda must be finite and positive");
    Assembly::SmoothPart part;
    part.knots = make_knots(column_values(X, s.feature), s.n_splines,
                            s.spline_degree);
    const int m = part.knots.n_basis();
    Mat B = basis_matrix(part.knots, Vec(X.col(static_cast<int>(s.feature))));
    part.col_means = B.colwise().mean();
    B.rowwise() -= part.col_means.transpose();
    part.Z = sum_to_zero_basis(m);
    part.DZ = difference_matrix<double>(m, 1) * part.Z;
    part.offset = p;
    part.width = m - 1;
    blocks.push_back(B * part.Z);
    p += part.width;
    a.smooths.push_back(std::move(part));
  }
  for (const TensorSpec& t : tensors) {
    if (t.f1 == t.f2)
      throw validation_error("tensor features must differ");
    if (!(t.lambda > 0) || !std::isfinite(t.lambda))
      throw validation_error("tensor lambda must be finite and positive");
    Assembly::TensorPart part;
    part.knots1 = make_knots(column_values(X, t.f1), t.n1, 3);
    part.knots2 = make_knots(column_values(X, t.f2), t.n2, 3);
    const int m1 = part.knots1.n_basis();
    const int m2 = part.knots2.n_basis();
    const Mat B1 =
        basis_matrix(part.knots1, Vec(X.col(static_cast<int>(t.f1))));
    const Mat B2 =
        basis_matrix(part.knots2, Vec(X.col(static_cast<int>(t.f2))));
    Mat Bt(n, m1 * m2);
    for (Index r = 0; r < n; ++r)
      for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j)
          Bt(r, i * m2 + j) = B1(r, i) * B2(r, j);
    part.kronZ = kron(sum_to_zero_basis(m1), sum_to_zero_basis(m2));
    part.offset = p;
    part.width = (m1 - 1) * (m2 - 1);
    blocks.push_back(Bt * part.kronZ);
    p += part.width;
    a.tensors.push_back(std::move(part));
  }

  a.p = p;
  a.X.resize(n, p);
  a.X.col(0).setOnes();
  {
    Index at = 1;
    for (const Mat& b : blocks) {
      a.X.middleCols(at, b.cols()) = b;
      at += b.cols();
    }
  }

  a.P_base = Mat::Zero(p, p);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& part = a.smooths[s];
    const int m = part.knots.n_basis();
    const Mat P = penalty_matrix<double>(m, specs[s].penalty_order);
    a.P_base.block(part.offset, part.offset, part.width, part.width) =
        specs[s].lambda * (part.Z.transpose() * P * part.Z);
  }
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& part = a.tensors[t];
    const int m1 = part.knots1.n_basis();
    const int m2 = part.knots2.n_basis();
    const Mat Z1 = sum_to_zero_basis(m1);
    const Mat Z2 = sum_to_zero_basis(m2);
    const Mat P1 =
        Z1.transpose() * penalty_matrix<double>(m1, tensors[t].penalty_order) *
        Z1;
    const Mat P2 =
        Z2.transpose() * penalty_matrix<double>(m2, tensors[t].penalty_order) *
        Z2;
    // (Z1 (x) Z2)' (P1 (x) I + I (x) P2) (Z1 (x) Z2) with orthonormal Z
    // collapses to the reduced Kronecker sum.
    const Mat Ps = kron(P1, Mat::Identity(m2 - 1, m2 - 1)) +
                   kron(Mat::Identity(m1 - 1, m1 - 1), P2);
    a.P_base.block(part.offset, part.offset, part.width, part.width) =
        tensors[t].lambda * Ps;
  }
  return a;
}

double deviance_of(Family family, const Vec& y, const Vec& eta) {
  if (family == Family::binomial_logit) {
    double d = 0;
    for (Index i = 0; i < y.size(); ++i) {
      double mu = logistic(eta(i));
      mu = std::min(std::max(mu, 1e-12), 1.0 - 1e-12);
      d += y(i) > 0.5 ? -2.0 * std::log(mu) : -2.0 * std::log(1.0 - mu);
    }
    return d;
  }
  return (y - eta).squaredNorm();
}

struct PirlsResult {
  Vec beta;
  Vec eta;
  int iterations = 0;
  bool converged = false;
  double deviance = 0;
  double penalized_deviance = 0;
};

PirlsResult pirls(Family family, const Assembly& a, const Mat& P_active,
                  const Vec& y, const FitOptions& opts, const Vec& init) {
  const Index n = a.X.rows();
  const Index p = a.p;
  PirlsResult r;
  Vec eta(n);
  bool have_beta = false;
  if (init.size() == p) {
    r.beta = init;
    eta = a.X * r.beta;
    have_beta = true;
  } else if (family == Family::binomial_logit) {
    for (Index i = 0; i < n; ++i) eta(i) = y(i) > 0.5 ? logit(0.75) : logit(0.25);
  } else {
    eta = y;
  }

  double pd_prev = 0;
  bool have_prev = false;
  Mat Xw(n, p);
  for (int it = 1; it <= opts.max_iter; ++it) {
    r.iterations = it;
    Vec w(n), z(n);
    if (family == Family::binomial_logit) {
      for (Index i = 0; i < n; ++i) {
        const double mu = logistic(eta(i));
        const double wi = std::max(mu * (1.0 - mu), 1e-10);
        w(i) = wi;
        z(i) = eta(i) + (y(i) - mu) / wi;
      }
    } else {
      w.setOnes();
      z = y;
    }
    const Vec sw = w.array().sqrt();
    Xw = sw.asDiagonal() * a.X;
    Mat M = P_active;
    M.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose());
    M.triangularView<Eigen::Upper>() = M.transpose();
    const Vec rhs = Xw.transpose() * (sw.asDiagonal() * z);
    r.beta = M.ldlt().solve(rhs);
    have_beta = true;
    eta = a.X * r.beta;

    if (family == Family::binomial_logit &&
        r.beta.cwiseAbs().maxCoeff() > opts.separation_threshold)
      throw numeric_error(
          "unbounded coefficients in binomial fit (possible separation); "
          "try a larger lambda");

    const double dev = deviance_of(family, y, eta);
    const double pd = dev + r.beta.dot(P_active * r.beta);
    if (have_prev &&
        std::abs(pd - pd_prev) / (std::abs(pd_prev) + 1e-10) < opts.tol) {
      r.converged = true;
      r.deviance = dev;
      r.penalized_deviance = pd;
      break;
    }
    pd_prev = pd;
    have_prev = true;
    r.deviance = dev;
    r.penalized_deviance = pd;
  }
  (void)have_beta;
  r.eta = eta;
  return r;
}

bool grid_monotone_ok(const Assembly::SmoothPart& part, Constraint c,
                      const Vec& full_coefs) {
  const int kGrid = 512;
  const double lo = part.knots.min_knot();
  const double hi = part.knots.max_knot();
  Vec x(kGrid);
  for (int i = 0; i < kGrid; ++i)
    x(i) = lo + (hi - lo) * i / (kGrid - 1.0);
  const Mat B = basis_matrix(part.knots, x);
  const Vec f = B * full_coefs;
  for (int i = 1; i < kGrid; ++i) {
    const double d = f(i) - f(i - 1);
    if (c == Constraint::monotone_inc && d < -1e-8) return false;
    if (c == Constraint::monotone_dec && d > 1e-8) return false;
  }
  return true;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(arr.size());
  Index i = 0;
  for (const auto& x : arr) v(i++) = x.get<double>();
  return v;
}

}  // namespace

Mat sum_to_zero_basis(int m) {
  if (m < 2) throw validation_error("sum_to_zero_basis needs m >= 2");
  // Householder reflector sending e1 to ones/sqrt(m); columns 2..m span
  // the orthogonal complement of the ones vector.
  Vec v = Vec::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  v(0) -= 1.0;
  Mat Z = Mat::Identity(m, m).rightCols(m - 1);
  Z.noalias() -= (2.0 / v.squaredNorm()) * v * v.tail(m - 1).transpose();
  return Z;
}

Vec penalized_wls(const Mat& X, const Vec& z, const Vec& w, const Mat& P) {
  const Vec sw = w.array().sqrt();
  const Mat Xw = sw.asDiagonal() * X;
  Mat M = P;
  M.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose());
  M.triangularView<Eigen::Upper>() = M.transpose();
  const Vec rhs = Xw.transpose() * (sw.asDiagonal() * z);
  return M.ldlt().solve(rhs);
}

const FittedSmooth* FittedGAM::find_smooth(Feature f) const {
  for (const FittedSmooth& s : smooths)
    if (s.spec.feature == f) return &s;
  return nullptr;
}

FittedGAM fit(Family family, const std::vector<SmoothSpec>& specs,
              const std::vector<TensorSpec>& tensors, const Mat& X,
              const Vec& y, const FitOptions& opts) {
  ++g_fit_count;
  const Index n = X.rows();
  if (X.cols() != kNFeatures)
    throw validation_error("X must have one column per feature");
  if (y.size() != n) throw validation_error("y length must match X rows");
  if (n == 0) throw validation_error("empty training data");
  if (!X.allFinite()) throw validation_error("non-finite feature value");
  for (Index i = 0; i < n; ++i) {
    if (family == Family::binomial_logit) {
      if (y(i) != 0.0 && y(i) != 1.0)
        throw validation_error("binomial response must be 0 or 1");
    } else if (!std::isfinite(y(i))) {
      throw validation_error("non-finite response");
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t j = i + 1; j < specs.size(); ++j)
      if (specs[i].feature == specs[j].feature)
        throw validation_error("duplicate smooth for feature '" +
                               to_string(specs[i].feature) + "'");

  Assembly a = assemble(specs, tensors, X);
  if (n < 10 * a.p)
    throw validation_error(
        "insufficient data: " + std::to_string(n) + " rows for " +
        std::to_string(a.p) + " coefficients (need 10x)");

  // Monotone outer loop: active-set quadratic penalties on violated
  // adjacent coefficient differences, escalated if the grid check fails.
  std::vector<Vec> active(a.smooths.size());
  for (std::size_t s = 0; s < a.smooths.size(); ++s)
    active[s] = Vec::Zero(a.smooths[s].width);
  bool any_constraint = false;
  for (const SmoothSpec& s : specs)
    if (s.constraint != Constraint::none) any_constraint = true;

  PirlsResult pr;
  Vec init = opts.warm_start;
  int outer = 0;
  for (;;) {
    ++outer;
    Mat P_active = a.P_base;
    for (std::size_t s = 0; s < a.smooths.size(); ++s) {
      if (active[s].maxCoeff() <= 0) continue;
      const auto& part = a.smooths[s];
      P_active.block(part.offset, part.offset, part.width, part.width) +=
          part.DZ.transpose() * active[s].asDiagonal() * part.DZ;
    }
    pr = pirls(family, a, P_active, y, opts, init);
    init = pr.beta;  // later passes start from the current solution
    if (!any_constraint) break;

    bool new_violation = false;
    std::vector<char> grid_fail(a.smooths.size(), 0);
    for (std::size_t s = 0; s < a.smooths.size(); ++s) {
      const Constraint c = specs[s].constraint;
      if (c == Constraint::none) continue;
      const auto& part = a.smooths[s];
      const Vec gamma = pr.beta.segment(part.offset, part.width);
      const Vec d = part.DZ * gamma;
      const double sign = c == Constraint::monotone_inc ? 1.0 : -1.0;
      for (Index j = 0; j < d.size(); ++j) {
        if (sign * d(j) < -1e-12 && active[s](j) == 0.0) {
          active[s](j) = opts.monotone_weight;
          new_violation = true;
        }
      }
    }
    if (new_violation && outer < opts.max_outer) continue;

    bool all_ok = true;
    for (std::size_t s = 0; s < a.smooths.size(); ++s) {
      const Constraint c = specs[s].constraint;
      if (c == Constraint::none) continue;
      const auto& part = a.smooths[s];
      const Vec full = part.Z * pr.beta.segment(part.offset, part.width);
      if (!grid_monotone_ok(part, c, full)) {
        grid_fail[s] = 1;
        all_ok = false;
      }
    }
    if (all_ok) break;
    if (outer >= opts.max_outer)
      throw numeric_error(
          "monotone constraint could not be enforced to grid tolerance");
    for (std::size_t s = 0; s < a.smooths.size(); ++s) {
      if (!grid_fail[s]) continue;
      const auto& part = a.smooths[s];
      const Vec gamma = pr.beta.segment(part.offset, part.width);
      const Vec d = part.DZ * gamma;
      const double sign =
          specs[s].constraint == Constraint::monotone_inc ? 1.0 : -1.0;
      for (Index j = 0; j < d.size(); ++j)
        if (sign * d(j) < -1e-12)
          active[s](j) = std::max(active[s](j), opts.monotone_weight) * 32.0;
    }
  }

  FittedGAM model;
  model.family = family;
  model.intercept = pr.beta(0);
  model.packed_params = pr.beta;
  for (std::size_t s = 0; s < a.smooths.size(); ++s) {
    const auto& part = a.smooths[s];
    FittedSmooth fs;
    fs.spec = specs[s];
    fs.knots = part.knots;
    fs.col_means = part.col_means;
    fs.coefs = part.Z * pr.beta.segment(part.offset, part.width);
    model.smooths.push_back(std::move(fs));
  }
  for (std::size_t t = 0; t < a.tensors.size(); ++t) {
    const auto& part = a.tensors[t];
    FittedTensor ft;
    ft.spec = tensors[t];
    ft.knots1 = part.knots1;
    ft.knots2 = part.knots2;
    ft.coefs = part.kronZ * pr.beta.segment(part.offset, part.width);
    model.tensors.push_back(std::move(ft));
  }
  for (const Feature f : kFeatures) {
    std::vector<double> vals = column_values(X, f);
    std::sort(vals.begin(), vals.end());
    FeatureStats& st = model.stats[static_cast<int>(f)];
    st.min_v = vals.front();
    st.max_v = vals.back();
    st.mean = mean(vals);
    st.p01 = quantile_sorted(vals, 0.01);
    st.p99 = quantile_sorted(vals, 0.99);
  }
  if (family == Family::gaussian_log) {
    const Vec resid = y - pr.eta;
    model.smearing_factor = resid.array().exp().mean();
    const double tss = (y.array() - y.mean()).square().sum();
    model.info.r2_log = tss > 0 ? 1.0 - resid.squaredNorm() / tss : 0.0;
  }
  model.info.iterations = pr.iterations;
  model.info.outer_iterations = outer;
  model.info.deviance = pr.deviance;
  model.info.penalized_deviance = pr.penalized_deviance;
  model.info.converged = pr.converged;
  model.info.n_rows = n;
  model.info.n_coefs = a.p;
  return model;
}

Vec predict_link(const FittedGAM& model, const Mat& X) {
  if (X.cols() != kNFeatures)
    throw validation_error("X must have one column per feature");
  const Index n = X.rows();
  Vec eta = Vec::Constant(n, model.intercept);
  for (const FittedSmooth& s : model.smooths) {
    const Mat B =
        basis_matrix(s.knots, Vec(X.col(static_cast<int>(s.spec.feature))));
    eta.noalias() += B * s.coefs;
    eta.array() -= s.col_means.dot(s.coefs);
  }
  for (const FittedTensor& t : model.tensors) {
    const int m1 = t.knots1.n_basis();
    const int m2 = t.knots2.n_basis();
    const Mat B1 =
        basis_matrix(t.knots1, Vec(X.col(static_cast<int>(t.spec.f1))));
    const Mat B2 =
        basis_matrix(t.knots2, Vec(X.col(static_cast<int>(t.spec.f2))));
    const Eigen::Map<const Mat> C(t.coefs.data(), m2, m1);
    // coefs are row-major over (i1, i2); the column-major map transposes.
    for (Index r = 0; r < n; ++r)
      eta(r) += (B2.row(r) * C).dot(B1.row(r));
  }
  return eta;
}

Vec predict_skip(const FittedGAM& model, const Mat& X) {
  if (model.family != Family::binomial_logit)
    throw validation_error("predict_skip requires a binomial_logit model");
  Vec eta = predict_link(model, X);
  for (Index i = 0; i < eta.size(); ++i) eta(i) = logistic(eta(i));
  return eta;
}

Vec predict_trt_ms(const FittedGAM& model, const Mat& X) {
  if (model.family != Family::gaussian_log)
    throw validation_error("predict_trt_ms requires a gaussian_log model");
  const Vec eta = predict_link(model, X);
  return (eta.array().exp() * model.smearing_factor).matrix();
}

Vec partial_effect(const FittedGAM& model, Feature feature, const Vec& grid) {
  if (model.find_smooth(feature) == nullptr)
    throw validation_error("model has no smooth for feature '" +
                           to_string(feature) + "'");
  Mat X(grid.size(), kNFeatures);
  for (const Feature f : kFeatures)
    X.col(static_cast<int>(f))
        .setConstant(model.feature_stats(f).mean);
  X.col(static_cast<int>(feature)) = grid;
  return model.family == Family::binomial_logit ? predict_skip(model, X)
                                                : predict_trt_ms(model, X);
}

namespace {

ModelData extract(const TokenTable& table, bool duration, const Group* only) {
  std::vector<std::size_t> rows;
  std::vector<int> subj_of;
  std::size_t subj = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    while (subj < table.subjects().size() &&
           i >= table.subject(subj).range.end)
      ++subj;
    if (only && table.subject(subj).group != *only) continue;
    const Token& t = table[i];
    if (!t.has_features()) continue;
    if (duration && (t.skipped || !t.trt_ms)) continue;
    rows.push_back(i);
    subj_of.push_back(static_cast<int>(subj));
  }
  ModelData d;
  d.X.resize(static_cast<Index>(rows.size()), kNFeatures);
  d.y.resize(static_cast<Index>(rows.size()));
  d.token_rows = std::move(rows);
  d.subject_of_row = std::move(subj_of);
  for (std::size_t r = 0; r < d.token_rows.size(); ++r) {
    const Token& t = table[d.token_rows[r]];
    d.X(static_cast<Index>(r), 0) = t.length_chars;
    d.X(static_cast<Index>(r), 1) = *t.zipf;
    d.X(static_cast<Index>(r), 2) = *t.surprisal_bits;
    d.y(static_cast<Index>(r)) =
        duration ? std::log(*t.trt_ms) : (t.skipped ? 1.0 : 0.0);
  }
  return d;
}

}  // namespace

ModelData skip_model_data(const TokenTable& table) {
  return extract(table, false, nullptr);
}

ModelData skip_model_data(const TokenTable& table, Group group) {
  return extract(table, false, &group);
}

ModelData duration_model_data(const TokenTable& table) {
  return extract(table, true, nullptr);
}

ModelData duration_model_data(const TokenTable& table, Group group) {
  return extract(table, true, &group);
}

std::string model_to_json(const FittedGAM& model) {
  json j;
  j["family"] = to_string(model.family);
  j["intercept"] = model.intercept;
  j["smearing_factor"] = model.smearing_factor;
  j["config_hash"] = model.config_hash;
  j["smooths"] = json::array();
  for (const FittedSmooth& s : model.smooths) {
    json js;
    js["feature"] = to_string(s.spec.feature);
    js["n_splines"] = s.spec.n_splines;
    js["spline_degree"] = s.spec.spline_degree;
    js["lambda"] = s.spec.lambda;
    js["constraint"] = to_string(s.spec.constraint);
    js["penalty_order"] = s.spec.penalty_order;
    js["knots"] = vec_to_json(s.knots.knots);
    js["col_means"] = vec_to_json(s.col_means);
    js["coefs"] = vec_to_json(s.coefs);
    j["smooths"].push_back(std::move(js));
  }
  j["tensors"] = json::array();
  for (const FittedTensor& t : model.tensors) {
    json jt;
    jt["f1"] = to_string(t.spec.f1);
    jt["f2"] = to_string(t.spec.f2);
    jt["n1"] = t.spec.n1;
    jt["n2"] = t.spec.n2;
    jt["lambda"] = t.spec.lambda;
    jt["penalty_order"] = t.spec.penalty_order;
    jt["knots1"] = vec_to_json(t.knots1.knots);
    jt["knots2"] = vec_to_json(t.knots2.knots);
    jt["coefs"] = vec_to_json(t.coefs);
    j["tensors"].push_back(std::move(jt));
  }
  j["feature_stats"] = json::object();
  for (const Feature f : kFeatures) {
    const FeatureStats& st = model.feature_stats(f);
    j["feature_stats"][to_string(f)] = {{"mean", st.mean},
                                        {"min", st.min_v},
                                        {"max", st.max_v},
                                        {"p01", st.p01},
                                        {"p99", st.p99}};
  }
  j["fit_info"] = {{"iterations", model.info.iterations},
                   {"outer_iterations", model.info.outer_iterations},
                   {"deviance", model.info.deviance},
                   {"penalized_deviance", model.info.penalized_deviance},
                   {"converged", model.info.converged},
                   {"r2_log", model.info.r2_log},
                   {"n_rows", model.info.n_rows},
                   {"n_coefs", model.info.n_coefs}};
  return j.dump(2);
}

FittedGAM model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("model parse failure: ") + e.what());
  }
  try {
    FittedGAM model;
    model.family = family_from_string(j.at("family").get<std::string>());
    model.intercept = j.at("intercept").get<double>();
    model.smearing_factor = j.at("smearing_factor").get<double>();
    model.config_hash = j.at("config_hash").get<std::string>();
    for (const json& js : j.at("smooths")) {
      FittedSmooth s;
      s.spec.feature = feature_from_string(js.at("feature").get<std::string>());
      s.spec.n_splines = js.at("n_splines").get<int>();
      s.spec.spline_degree = js.at("spline_degree").get<int>();
      s.spec.lambda = js.at("lambda").get<double>();
      s.spec.constraint =
          constraint_from_string(js.at("constraint").get<std::string>());
      s.spec.penalty_order = js.at("penalty_order").get<int>();
      s.knots.knots = vec_from_json(js.at("knots"));
      s.knots.degree = s.spec.spline_degree;
      s.col_means = vec_from_json(js.at("col_means"));
      s.coefs = vec_from_json(js.at("coefs"));
      if (s.coefs.size() != s.knots.n_basis() ||
          s.col_means.size() != s.knots.n_basis())
        throw validation_error("model coefficients do not match basis size");
      model.smooths.push_back(std::move(s));
    }
    for (const json& jt : j.at("tensors")) {
      FittedTensor t;
      t.spec.f1 = feature_from_string(jt.at("f1").get<std::string>());
      t.spec.f2 = feature_from_string(jt.at("f2").get<std::string>());
      t.spec.n1 = jt.at("n1").get<int>();
      t.spec.n2 = jt.at("n2").get<int>();
      t.spec.lambda = jt.at("lambda").get<double>();
      t.spec.penalty_order = jt.at("penalty_order").get<int>();
      t.knots1.knots = vec_from_json(jt.at("knots1"));
      t.knots1.degree = 3;
      t.knots2.knots = vec_from_json(jt.at("knots2"));
      t.knots2.degree = 3;
      t.coefs = vec_from_json(jt.at("coefs"));
      if (t.coefs.size() !=
          static_cast<Index>(t.knots1.n_basis()) * t.knots2.n_basis())
        throw validation_error("tensor coefficients do not match basis size");
      model.tensors.push_back(std::move(t));
    }
    for (const Feature f : kFeatures) {
      const json& js = j.at("feature_stats").at(to_string(f));
      FeatureStats& st = model.stats[static_cast<int>(f)];
      st.mean = js.at("mean").get<double>();
      st.min_v = js.at("min").get<double>();
      st.max_v = js.at("max").get<double>();
      st.p01 = js.at("p01").get<double>();
      st.p99 = js.at("p99").get<double>();
    }
    const json& ji = j.at("fit_info");
    model.info.iterations = ji.at("iterations").get<int>();
    model.info.outer_iterations = ji.at("outer_iterations").get<int>();
    model.info.deviance = ji.at("deviance").get<double>();
    model.info.penalized_deviance = ji.at("penalized_deviance").get<double>();
    model.info.converged = ji.at("converged").get<bool>();
    model.info.r2_log = ji.at("r2_log").get<double>();
    model.info.n_rows = ji.at("n_rows").get<Index>();
    model.info.n_coefs = ji.at("n_coefs").get<Index>();
    return model;
  } catch (const json::exception& e) {
    throw validation_error(std::string("model field failure: ") + e.what());
  }
}

void save_model(const FittedGAM& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write model: " + path);
  out << model_to_json(model) << '\n';
  if (!out) throw validation_error("write failed: " + path);
}

FittedGAM load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open model: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::uint64_t fit_count() { return g_fit_count.load(); }

}  // namespace ertkit
