#include "ertkit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ertkit/gam.hpp"
#include "ertkit/rng.hpp"
#include "ertkit/stats.hpp"

namespace ertkit {

namespace {

constexpr std::uint64_t kBootStream = 0x626f6f74;  // "boot"
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// One resampled table: every group slot draws a subject with replacement
/// from its own group; clone ids keep repeated draws distinct. Draws are
/// folded into the trace hash.
TokenTable resample_table(const TokenTable& t,
                          const std::vector<std::size_t> (&roster)[kNGroups],
                          Rng& rng, std::uint64_t& hash) {
  std::vector<Token> rows;
  rows.reserve(t.size());
  for (int g = 0; g < kNGroups; ++g) {
    const std::size_t n = roster[g].size();
    for (std::size_t slot = 0; slot < n; ++slot) {
      const std::size_t pick = static_cast<std::size_t>(rng.below(n));
      hash = fnv1a(hash, (static_cast<std::uint64_t>(g) << 32) | pick);
      const SubjectInfo& s = t.subject(roster[g][pick]);
      const std::string clone_id =
          s.subject_id + "#" + std::to_string(slot);
      for (std::size_t i = s.range.begin; i < s.range.end; ++i) {
        Token tok = t[i];
        tok.subject_id = clone_id;
        rows.push_back(std::move(tok));
      }
    }
  }
  return TokenTable(std::move(rows));
}

}  // namespace

BootstrapResult bootstrap(const std::string& statistic_id,
                          const Statistic& statistic, const TokenTable& table,
                          double null_value, const BootstrapOptions& opts) {
  if (!statistic) throw validation_error("statistic must be callable");
  if (opts.b < 1) throw validation_error("b must be positive");
  if (!(opts.level > 0.0) || !(opts.level < 1.0))
    throw validation_error("level must lie in (0, 1)");
  if (opts.max_redraws < 0)
    throw validation_error("max_redraws must be nonnegative");
  if (!(opts.max_fail_frac >= 0.0) || opts.max_fail_frac > 1.0)
    throw validation_error("max_fail_frac must lie in [0, 1]");

  std::vector<std::size_t> roster[kNGroups];
  for (std::size_t i = 0; i < table.subjects().size(); ++i)
    roster[static_cast<int>(table.subject(i).group)].push_back(i);
  for (int g = 0; g < kNGroups; ++g)
    if (roster[g].empty())
      throw validation_error("cannot resample: no subjects in the " +
                             to_string(static_cast<Group>(g)) + " group");

  const std::uint64_t fits_before = fit_count();
  BootstrapResult r;
  r.statistic = statistic_id;
  r.null_value = null_value;
  r.seed = opts.seed;
  r.b = opts.b;
  r.estimate = statistic(table);
  if (!std::isfinite(r.estimate))
    throw numeric_error("statistic is not finite on the original table");

  struct Slot {
    double value = 0;
    bool ok = false;
    std::uint64_t hash = 0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(opts.b));
  auto run_index = [&](int idx) {
    Slot& s = slots[static_cast<std::size_t>(idx)];
    std::uint64_t h = kFnvOffset;
    for (int attempt = 0; attempt <= opts.max_redraws; ++attempt) {
      h = fnv1a(h, static_cast<std::uint64_t>(attempt));
      Rng rng = Rng::derive(opts.seed, kBootStream,
                            static_cast<std::uint64_t>(idx),
                            static_cast<std::uint64_t>(attempt));
      const TokenTable rt = resample_table(table, roster, rng, h);
      try {
        const double v = statistic(rt);
        if (!std::isfinite(v)) throw numeric_error("non-finite statistic");
        s.value = v;
        s.ok = true;
        break;
      } catch (const validation_error&) {
      } catch (const numeric_error&) {
      }
    }
    s.hash = h;
  };

  const unsigned hw = std::thread::hardware_concurrency();
  int n_threads =
      opts.n_threads > 0 ? opts.n_threads : (hw ? static_cast<int>(hw) : 1);
  n_threads = std::min(n_threads, opts.b);
  if (n_threads <= 1) {
    for (int i = 0; i < opts.b; ++i) run_index(i);
  } else {
    std::mutex error_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < opts.b; i += n_threads) run_index(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<double> ok_vals;
  ok_vals.reserve(static_cast<std::size_t>(opts.b));
  std::uint64_t trace = kFnvOffset;
  int failed = 0;
  for (const Slot& s : slots) {
    trace = fnv1a(trace, s.hash);
    if (s.ok)
      ok_vals.push_back(s.value);
    else
      ++failed;
  }
  r.trace_hash = trace;
  r.n_failed = failed;
  if (static_cast<double>(failed) > opts.max_fail_frac * opts.b)
    throw numeric_error(std::to_string(failed) + " of " +
                        std::to_string(opts.b) +
                        " bootstrap resamples failed");
  if (failed > 0)
    r.warnings.push_back(std::to_string(failed) +
                         " resamples failed after redraws");

  const std::size_t n_ok = ok_vals.size();
  std::size_t at_or_below = 0, at_or_above = 0;
  for (const double v : ok_vals) {
    if (v <= null_value) ++at_or_below;
    if (v >= null_value) ++at_or_above;
  }
  const double r_min =
      static_cast<double>(std::min(at_or_below, at_or_above));
  r.p = std::min(1.0, 2.0 * (r_min + 1.0) / (static_cast<double>(n_ok) + 1.0));

  const std::pair<double, double> ci = percentile_ci(ok_vals, opts.level);
  r.ci_low = ci.first;
  r.ci_high = ci.second;
  if (opts.keep_samples) r.samples = std::move(ok_vals);

  if (fit_count() != fits_before)
    throw validation_error(
        "statistic refit a model during resampling; models must stay frozen");
  return r;
}

std::pair<double, double> percentile_ci(std::vector<double> samples,
                                        double level) {
  if (samples.size() < 40)
    throw validation_error("percentile_ci needs at least 40 samples");
  if (!(level > 0.0) || !(level < 1.0))
    throw validation_error("level must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(samples, tail), quantile_sorted(samples, 1.0 - tail)};
}

}  // namespace ertkit
