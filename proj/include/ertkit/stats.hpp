#ifndef ERTKIT_STATS_HPP
#define ERTKIT_STATS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "ertkit/types.hpp"

namespace ertkit {

/// Empirical quantile of a sorted sample, Hyndman–Fan continuous family
/// (types 4–9). Type 7 interpolates linearly between order statistics at
/// h = (n-1)p + 1 and is the default everywhere in this project.
template <class Scalar>
Scalar quantile_sorted(const std::vector<Scalar>& sorted, double p,
                       int type = 7) {
  const std::size_t n = sorted.size();
  if (n == 0) throw validation_error("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw validation_error("quantile level outside [0,1]");
  if (n == 1) return sorted[0];
  double h;
  switch (type) {
    case 4: h = n * p; break;
    case 5: h = n * p + 0.5; break;
    case 6: h = (n + 1) * p; break;
    case 7: h = (n - 1) * p + 1.0; break;
    case 8: h = (n + 1.0 / 3.0) * p + 1.0 / 3.0; break;
    case 9: h = (n + 0.25) * p + 0.375; break;
    default:
      throw validation_error("unsupported quantile type " + std::to_string(type));
  }
  h = std::min(std::max(h, 1.0), static_cast<double>(n));
  const double fl = std::floor(h);
  const std::size_t lo = static_cast<std::size_t>(fl) - 1;
  const std::size_t hi = std::min(lo + 1, n - 1);
  return sorted[lo] + static_cast<Scalar>(h - fl) * (sorted[hi] - sorted[lo]);
}

template <class Scalar>
Scalar quantile(std::vector<Scalar> values, double p, int type = 7) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p, type);
}

template <class Derived>
double mean(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) throw validation_error("mean of empty sample");
  return v.mean();
}

/// Sample standard deviation (n-1 denominator); 0 for n < 2.
template <class Derived>
double sample_sd(const Eigen::MatrixBase<Derived>& v) {
  const Index n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(n - 1));
}

inline double mean(const std::vector<double>& v) {
  return mean(Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size())));
}

inline double sample_sd(const std::vector<double>& v) {
  return sample_sd(Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size())));
}

inline double logistic(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw validation_error("logit requires p in (0,1)");
  return std::log(p / (1.0 - p));
}

}  // namespace ertkit

#endif
