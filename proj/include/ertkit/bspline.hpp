#ifndef ERTKIT_BSPLINE_HPP
#define ERTKIT_BSPLINE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "ertkit/stats.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// Clamped B-spline knot vector: boundary knots repeated degree+1 times,
/// interior knots strictly increasing. Evaluation clamps x to
/// [min_knot, max_knot], so the basis is a partition of unity everywhere.
template <class Scalar>
struct KnotVector {
  VecX<Scalar> knots;
  int degree = 3;

  int n_basis() const {
    return static_cast<int>(knots.size()) - degree - 1;
  }
  Scalar min_knot() const { return knots(0); }
  Scalar max_knot() const { return knots(knots.size() - 1); }
};

using Knots = KnotVector<double>;

/// Build a clamped knot vector with interior knots at equally spaced
/// quantiles of the training values. Duplicate interior knots are merged,
/// so the realized basis size may be below n_splines on heavily tied data.
template <class Scalar>
KnotVector<Scalar> make_knots(std::vector<Scalar> values, int n_splines,
                              int degree = 3) {
  if (n_splines <= degree)
    throw validation_error("n_splines must exceed spline degree");
  std::sort(values.begin(), values.end());
  if (values.empty() || values.front() == values.back())
    throw numeric_error("degenerate knot vector: feature has fewer than 2 distinct values");
  const Scalar lo = values.front();
  const Scalar hi = values.back();

  const int n_interior = n_splines - degree - 1;
  std::vector<Scalar> interior;
  interior.reserve(n_interior);
  for (int i = 1; i <= n_interior; ++i) {
    const Scalar q = quantile_sorted(values, static_cast<double>(i) / (n_interior + 1));
    if (q > lo && q < hi && (interior.empty() || q > interior.back()))
      interior.push_back(q);
  }

  KnotVector<Scalar> kv;
  kv.degree = degree;
  kv.knots.resize(2 * (degree + 1) + static_cast<int>(interior.size()));
  int j = 0;
  for (int i = 0; i <= degree; ++i) kv.knots(j++) = lo;
  for (const Scalar q : interior) kv.knots(j++) = q;
  for (int i = 0; i <= degree; ++i) kv.knots(j++) = hi;
  return kv;
}

/// Evaluate the degree+1 possibly non-zero basis functions at x (clamped to
/// the knot range). Returns the index of the first non-zero basis function;
/// out[0..degree] receive the values. Iterative de Boor triangle with the
/// 0/0 := 0 convention.
template <class Scalar>
int basis_local(const KnotVector<Scalar>& kv, Scalar x, Scalar* out) {
  const auto& t = kv.knots;
  const int degree = kv.degree;
  const int n = kv.n_basis();
  x = std::min(std::max(x, t(0)), t(t.size() - 1));

  // span: largest i with t(i) <= x < t(i+1); x at the right boundary falls
  // in the last non-empty span.
  int span;
  if (x >= t(n)) {
    span = n - 1;
    while (span > degree && t(span) == t(span + 1)) --span;
  } else {
    int lo = degree, hi = n;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x < t(mid) ? hi : lo) = mid;
    }
    span = lo;
  }

  out[0] = Scalar(1);
  for (int d = 1; d <= degree; ++d) {
    Scalar saved = Scalar(0);
    for (int r = 0; r < d; ++r) {
      const Scalar den = t(span + r + 1) - t(span + r + 1 - d);
      const Scalar term = den == Scalar(0) ? Scalar(0) : out[r] / den;
      out[r] = saved + (t(span + r + 1) - x) * term;
      saved = (x - t(span + r + 1 - d)) * term;
    }
    out[d] = saved;
  }
  return span - degree;
}

/// Dense basis matrix: row i holds all n_basis values at x(i). Rows sum
/// to 1.
template <class Scalar>
MatX<Scalar> basis_matrix(const KnotVector<Scalar>& kv,
                          const VecX<Scalar>& x) {
  const int n_basis = kv.n_basis();
  MatX<Scalar> B = MatX<Scalar>::Zero(x.size(), n_basis);
  std::vector<Scalar> local(kv.degree + 1);
  for (Index i = 0; i < x.size(); ++i) {
    const int first = basis_local(kv, x(i), local.data());
    for (int j = 0; j <= kv.degree; ++j) B(i, first + j) = local[j];
  }
  return B;
}

/// Forward difference operator of the given order, (n-order) x n.
template <class Scalar>
MatX<Scalar> difference_matrix(int n_coefs, int order) {
  if (n_coefs <= order)
    throw validation_error("difference penalty needs n_coefs > order");
  MatX<Scalar> D = MatX<Scalar>::Identity(n_coefs, n_coefs);
  for (int k = 0; k < order; ++k) {
    MatX<Scalar> D1 = MatX<Scalar>::Zero(n_coefs - k - 1, n_coefs - k);
    for (Index i = 0; i < D1.rows(); ++i) {
      D1(i, i) = Scalar(-1);
      D1(i, i + 1) = Scalar(1);
    }
    D = (D1 * D).eval();
  }
  return D;
}

/// P-spline roughness penalty D'D; PSD with a null space of polynomial
/// coefficient sequences up to degree order-1.
template <class Scalar>
MatX<Scalar> penalty_matrix(int n_coefs, int order = 2) {
  const MatX<Scalar> D = difference_matrix<Scalar>(n_coefs, order);
  return D.transpose() * D;
}

}  // namespace ertkit

#endif
