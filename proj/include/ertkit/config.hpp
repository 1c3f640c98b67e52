#ifndef ERTKIT_CONFIG_HPP
#define ERTKIT_CONFIG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ertkit/corpus.hpp"
#include "ertkit/gapdecomp.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// Flat pipeline configuration. Every field has a documented default;
/// parsing rejects unknown keys so typos never silently fall back to a
/// default. Enum-valued fields are stored as their validated string
/// spelling, which keeps the canonical serialization trivial.
struct RunConfig {
  // Paths. Empty means "not supplied"; commands that need one fail with
  // the missing path named.
  std::string tokens_path;
  std::string freq_paths;
  std::string spans_path;
  std::string scores_path;
  std::string lexicon_path;
  std::string surprisal_path;
  std::string out_dir = "out";

  // Preprocessing.
  bool trim = true;
  int quantile_type = 7;
  std::string length_policy = "validate";
  int n_length_bins = 7;
  std::uint64_t lexicon_max_types = 1'500'000;
  bool lexicon_total_from_retained = true;

  // Model structure.
  int n_splines = 8;
  int spline_degree = 3;
  int penalty_order = 2;
  std::string lambda_grid;
  std::string skip_constraint_length = "none";
  std::string skip_constraint_zipf = "monotone_inc";
  std::string skip_constraint_surprisal = "none";
  std::string dur_constraint_length = "none";
  std::string dur_constraint_zipf = "monotone_dec";
  std::string dur_constraint_surprisal = "none";

  // Cross-validation.
  int cv_k = 10;
  double subsample_frac = 0.5;
  std::uint64_t cv_seed = 1;

  // Bootstrap.
  int bootstrap_b = 3000;
  std::uint64_t bootstrap_seed = 2;
  double bootstrap_level = 0.95;
  bool bootstrap_recompute_stats = true;

  // Decomposition.
  std::string shapley_corpus = "pooled";
  std::string attribution_mode = "single";
  int attribution_tensor_splines = 5;
  bool run_attribution = true;

  // Synthetic data.
  std::string synth_preset = "paper_shaped";
  int synth_subjects = 0;
  int synth_tokens = 0;
  std::uint64_t synth_seed = 1;

  std::vector<double> parsed_lambda_grid() const;
  std::vector<std::string> parsed_freq_paths() const;
  LengthPolicy parsed_length_policy() const;
  Constraint skip_constraint(Feature f) const;
  Constraint dur_constraint(Feature f) const;
  ShapleyCorpus parsed_corpus() const;
  ClampMode parsed_clamp_mode() const;
};

/// Set one key from its string value. Unknown key or malformed value
/// throws validation_error naming the key.
void set_key(RunConfig& cfg, const std::string& key,
             const std::string& value);

/// Parse `key = value` lines. Blank lines and lines whose first
/// non-space character is '#' are skipped; inline comments are not
/// supported (values may contain '#').
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical serialization: every key in a fixed order, with its
/// documentation as a comment block. Parsing it back reproduces cfg.
std::string config_text(const RunConfig& cfg);

/// 16-hex-digit digest of the canonical `key = value` lines (comments
/// excluded, so documentation edits never shift artifact hashes).
/// Path-valued keys (`*_path`, `*_paths`, `out_dir`) are skipped: the hash
/// names the processing parameters, not where files happen to live.
std::string config_hash(const RunConfig& cfg);

/// All known keys in canonical order.
std::vector<std::string> config_keys();

}  // namespace ertkit

#endif
