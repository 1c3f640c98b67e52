#ifndef ERTKIT_INFERENCE_HPP
#define ERTKIT_INFERENCE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ertkit/token.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// Statistic evaluated on one (re)sampled token table. Fitted models and
/// any held-fixed context are captured by the callable; anything the
/// statistic should recompute per resample (pooled stats, bins, quartile
/// settings) it must rebuild from the table it receives. Throwing marks
/// the resample failed; it is redrawn and eventually counted.
using Statistic = std::function<double(const TokenTable&)>;

struct BootstrapOptions {
  int b = 3000;
  std::uint64_t seed = 0;
  double level = 0.95;
  /// 0 = all hardware threads. Results are identical for any value.
  int n_threads = 0;
  int max_redraws = 10;
  double max_fail_frac = 0.01;
  bool keep_samples = false;
};

struct BootstrapResult {
  std::string statistic;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  /// Two-tailed, doubled smaller tail with the +1 correction; never
  /// below 2/(successes + 1), never above 1.
  double p = 1;
  int b = 0;
  int n_failed = 0;
  double null_value = 0;
  std::uint64_t seed = 0;
  /// Order-stable digest of every resample's subject draws and redraw
  /// attempts; equal seeds give equal hashes on any thread count.
  std::uint64_t trace_hash = 0;
  /// Successful resample values, in resample-index order; only filled
  /// when BootstrapOptions::keep_samples is set.
  std::vector<double> samples;
  std::vector<std::string> warnings;
};

/// Subject-level bootstrap: each resample draws subjects with replacement
/// within group, preserving both group sizes, and rebuilds the token
/// table with clone-numbered subject ids so repeated draws stay distinct
/// subjects. The statistic must not refit models (asserted through the
/// fit counter). A failing resample is redrawn up to max_redraws times
/// with a fresh derived stream, then counted failed; more than
/// max_fail_frac failures is a hard error. Resample streams derive from
/// (seed, index, attempt), so parallel and sequential runs are
/// bit-identical.
BootstrapResult bootstrap(const std::string& statistic_id,
                          const Statistic& statistic, const TokenTable& table,
                          double null_value, const BootstrapOptions& opts = {});

/// Central percentile interval under type-7 quantiles; requires at least
/// 40 samples.
std::pair<double, double> percentile_ci(std::vector<double> samples,
                                        double level = 0.95);

}  // namespace ertkit

#endif
