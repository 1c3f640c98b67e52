#ifndef ERTKIT_TESTS_ORACLES_HPP
#define ERTKIT_TESTS_ORACLES_HPP

// Independent reference implementations used only by tests. Each one is
// written from the textbook definition, structured differently from the
// production code, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

/// Cox-de Boor recursion, direct recursive form with the 0/0 := 0
/// convention. Basis i of the given degree on knot vector t, open at the
/// right end (returns 0 at x = t.back(); callers test interior points).
inline double naive_bspline(const std::vector<double>& t, int i, int degree,
                            double x) {
  if (degree == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  double left = 0.0;
  const double dl = t[i + degree] - t[i];
  if (dl > 0.0)
    left = (x - t[i]) / dl * naive_bspline(t, i, degree - 1, x);
  double right = 0.0;
  const double dr = t[i + degree + 1] - t[i + 1];
  if (dr > 0.0)
    right = (t[i + degree + 1] - x) / dr * naive_bspline(t, i + 1, degree - 1, x);
  return left + right;
}

/// Linear-interpolation quantile written as "index into the sorted sample",
/// type-7 rule only: h = (n-1)p, zero-based.
inline double naive_quantile7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double h = (static_cast<double>(n) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

/// AUC by exhaustive pair counting with half-credit ties, O(n0 * n1).
inline double naive_auc(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t n_pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++n_pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(n_pairs);
}

}  // namespace oracles

#endif
