#include "ertkit/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <fstream>
#include <sstream>

#include "ertkit/selection.hpp"

namespace ertkit {

namespace {

std::string trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* want) {
  throw validation_error("config key '" + key + "': cannot parse '" + value +
                         "' as " + want);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "a bool (true/false)");
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    bad_value(key, v, "an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    bad_value(key, v, "a number");
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void check_constraint(const std::string& key, const std::string& v) {
  constraint_from_string(v);  // throws on bad spelling
  (void)key;
}

struct KeyDef {
  const char* key;
  const char* doc;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyDef>& registry() {
  auto int_key = [](const char* key, const char* doc, int RunConfig::*field,
                    int lo) {
    return KeyDef{
        key, doc,
        [key, field, lo](RunConfig& c, const std::string& v) {
          const long long x = parse_int(key, v);
          if (x < lo)
            throw validation_error(std::string("config key '") + key +
                                   "' must be >= " + std::to_string(lo));
          c.*field = static_cast<int>(x);
        },
        [field](const RunConfig& c) { return std::to_string(c.*field); }};
  };
  auto u64_key = [](const char* key, const char* doc,
                    std::uint64_t RunConfig::*field) {
    return KeyDef{key, doc,
                  [key, field](RunConfig& c, const std::string& v) {
                    c.*field = parse_u64(key, v);
                  },
                  [field](const RunConfig& c) {
                    return std::to_string(c.*field);
                  }};
  };
  auto bool_key = [](const char* key, const char* doc,
                     bool RunConfig::*field) {
    return KeyDef{key, doc,
                  [key, field](RunConfig& c, const std::string& v) {
                    c.*field = parse_bool(key, v);
                  },
                  [field](const RunConfig& c) {
                    return c.*field ? "true" : "false";
                  }};
  };
  auto str_key = [](const char* key, const char* doc,
                    std::string RunConfig::*field,
                    void (*check)(const std::string&,
                                  const std::string&) = nullptr) {
    return KeyDef{key, doc,
                  [key, field, check](RunConfig& c, const std::string& v) {
                    if (check) check(key, v);
                    c.*field = v;
                  },
                  [field](const RunConfig& c) { return c.*field; }};
  };

  static const std::vector<KeyDef> defs = {
      str_key("tokens_path", "Raw token file consumed by `ingest`.",
              &RunConfig::tokens_path),
      str_key("freq_paths",
              "Comma-separated frequency list files for `build-lexicon`.",
              &RunConfig::freq_paths),
      str_key("spans_path", "Word span table for `align-surprisal`.",
              &RunConfig::spans_path),
      str_key("scores_path", "Subtoken score table for `align-surprisal`.",
              &RunConfig::scores_path),
      str_key("lexicon_path",
              "Lexicon joined onto tokens missing zipf during `ingest`; "
              "empty skips the join.",
              &RunConfig::lexicon_path),
      str_key("surprisal_path",
              "Aligned surprisal table joined during `ingest` (doc_id, "
              "word_pos, surprisal_bits); empty skips the join.",
              &RunConfig::surprisal_path),
      str_key("out_dir", "Artifact root directory.", &RunConfig::out_dir),
      bool_key("trim",
               "Drop fixated tokens beyond pooled mean + 3 SD at ingest.",
               &RunConfig::trim),
      int_key("quantile_type",
              "Quantile definition (types 4-9; 7 interpolates order "
              "statistics).",
              &RunConfig::quantile_type, 4),
      str_key("length_policy",
              "How the length column relates to the word form: validate, "
              "recompute, or trust.",
              &RunConfig::length_policy,
              [](const std::string& key, const std::string& v) {
                (void)key;
                length_policy_from_string(v);
              }),
      int_key("n_length_bins", "Equal-frequency pooled length bins.",
              &RunConfig::n_length_bins, 1),
      u64_key("lexicon_max_types", "Lexicon type cap, kept by count.",
              &RunConfig::lexicon_max_types),
      bool_key("lexicon_total_from_retained",
               "Lexicon token total from retained types (true) or all "
               "types before filtering (false).",
               &RunConfig::lexicon_total_from_retained),
      int_key("n_splines", "Cubic B-spline basis size per smooth.",
              &RunConfig::n_splines, 4),
      int_key("spline_degree", "Spline degree.", &RunConfig::spline_degree,
              1),
      int_key("penalty_order", "Difference-penalty order.",
              &RunConfig::penalty_order, 1),
      str_key("lambda_grid",
              "Comma-separated smoothing grid; empty = 9 points log-spaced "
              "1e-3..1e5.",
              &RunConfig::lambda_grid,
              [](const std::string& key, const std::string& v) {
                if (v.empty()) return;
                std::stringstream ss{v};
                std::string part;
                while (std::getline(ss, part, ',')) {
                  const double x = parse_double(key, trimmed(part));
                  if (!(x > 0))
                    throw validation_error(
                        "config key 'lambda_grid': values must be > 0");
                }
              }),
      str_key("skip_constraint_length",
              "Skip-model length shape: none, monotone_inc, monotone_dec.",
              &RunConfig::skip_constraint_length, check_constraint),
      str_key("skip_constraint_zipf", "Skip-model zipf shape.",
              &RunConfig::skip_constraint_zipf, check_constraint),
      str_key("skip_constraint_surprisal", "Skip-model surprisal shape.",
              &RunConfig::skip_constraint_surprisal, check_constraint),
      str_key("dur_constraint_length", "Duration-model length shape.",
              &RunConfig::dur_constraint_length, check_constraint),
      str_key("dur_constraint_zipf", "Duration-model zipf shape.",
              &RunConfig::dur_constraint_zipf, check_constraint),
      str_key("dur_constraint_surprisal", "Duration-model surprisal shape.",
              &RunConfig::dur_constraint_surprisal, check_constraint),
      int_key("cv_k", "Folds for subject-wise cross-validation.",
              &RunConfig::cv_k, 2),
      KeyDef{"subsample_frac",
             "Subject fraction for the first selection stage, in (0, 1].",
             [](RunConfig& c, const std::string& v) {
               const double x = parse_double("subsample_frac", v);
               if (!(x > 0.0) || x > 1.0)
                 throw validation_error(
                     "config key 'subsample_frac' must be in (0, 1]");
               c.subsample_frac = x;
             },
             [](const RunConfig& c) { return fmt_double(c.subsample_frac); }},
      u64_key("cv_seed", "Seed for subsampling and fold assignment.",
              &RunConfig::cv_seed),
      int_key("bootstrap_b", "Bootstrap resamples.", &RunConfig::bootstrap_b,
              1),
      u64_key("bootstrap_seed", "Seed for bootstrap resampling.",
              &RunConfig::bootstrap_seed),
      KeyDef{"bootstrap_level", "Confidence level, in (0, 1).",
             [](RunConfig& c, const std::string& v) {
               const double x = parse_double("bootstrap_level", v);
               if (!(x > 0.0 && x < 1.0))
                 throw validation_error(
                     "config key 'bootstrap_level' must be in (0, 1)");
               c.bootstrap_level = x;
             },
             [](const RunConfig& c) {
               return fmt_double(c.bootstrap_level);
             }},
      bool_key("bootstrap_recompute_stats",
               "Recompute pooled quartiles and length bins on every "
               "resample (true) or hold the originals fixed (false).",
               &RunConfig::bootstrap_recompute_stats),
      str_key("shapley_corpus",
              "Evaluation corpus for the pathway split: pooled or "
              "control_only.",
              &RunConfig::shapley_corpus,
              [](const std::string& key, const std::string& v) {
                if (v != "pooled" && v != "control_only")
                  throw validation_error("config key '" + key +
                                         "': expected pooled or "
                                         "control_only, got '" +
                                         v + "'");
              }),
      str_key("attribution_mode",
              "Per-feature clamp mode inside each interaction "
              "configuration: single or shapley.",
              &RunConfig::attribution_mode,
              [](const std::string& key, const std::string& v) {
                if (v != "single" && v != "shapley")
                  throw validation_error("config key '" + key +
                                         "': expected single or shapley, "
                                         "got '" +
                                         v + "'");
              }),
      int_key("attribution_tensor_splines",
              "Marginal basis size per tensor direction in the "
              "interaction sweep.",
              &RunConfig::attribution_tensor_splines, 3),
      bool_key("run_attribution",
               "Run the 8-configuration interaction sweep in `decompose`.",
               &RunConfig::run_attribution),
      str_key("synth_preset",
              "Generator preset: paper_shaped, null_model, inert_zipf, or "
              "offset_gap.",
              &RunConfig::synth_preset),
      int_key("synth_subjects",
              "Subjects per group for `synth`; 0 keeps the preset default.",
              &RunConfig::synth_subjects, 0),
      int_key("synth_tokens",
              "Tokens per subject for `synth`; 0 keeps the preset default.",
              &RunConfig::synth_tokens, 0),
      u64_key("synth_seed", "Seed for `synth`.", &RunConfig::synth_seed),
  };
  return defs;
}

}  // namespace

std::vector<double> RunConfig::parsed_lambda_grid() const {
  if (lambda_grid.empty()) return default_lambda_grid();
  std::vector<double> out;
  std::stringstream ss{lambda_grid};
  std::string part;
  while (std::getline(ss, part, ','))
    out.push_back(parse_double("lambda_grid", trimmed(part)));
  return out;
}

std::vector<std::string> RunConfig::parsed_freq_paths() const {
  std::vector<std::string> out;
  std::stringstream ss{freq_paths};
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::string p = trimmed(part);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

LengthPolicy RunConfig::parsed_length_policy() const {
  return length_policy_from_string(length_policy);
}

Constraint RunConfig::skip_constraint(Feature f) const {
  switch (f) {
    case Feature::length:
      return constraint_from_string(skip_constraint_length);
    case Feature::zipf:
      return constraint_from_string(skip_constraint_zipf);
    default:
      return constraint_from_string(skip_constraint_surprisal);
  }
}

Constraint RunConfig::dur_constraint(Feature f) const {
  switch (f) {
    case Feature::length:
      return constraint_from_string(dur_constraint_length);
    case Feature::zipf:
      return constraint_from_string(dur_constraint_zipf);
    default:
      return constraint_from_string(dur_constraint_surprisal);
  }
}

ShapleyCorpus RunConfig::parsed_corpus() const {
  return shapley_corpus == "pooled" ? ShapleyCorpus::pooled
                                    : ShapleyCorpus::control_only;
}

ClampMode RunConfig::parsed_clamp_mode() const {
  return attribution_mode == "single" ? ClampMode::single
                                      : ClampMode::shapley;
}

void set_key(RunConfig& cfg, const std::string& key,
             const std::string& value) {
  for (const KeyDef& def : registry())
    if (key == def.key) {
      def.set(cfg, value);
      return;
    }
  throw validation_error("unknown config key '" + key + "'");
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const std::string line = trimmed(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error("config line " + std::to_string(lineno) +
                             ": expected 'key = value', got '" + line + "'");
    try {
      set_key(cfg, trimmed(line.substr(0, eq)), trimmed(line.substr(eq + 1)));
    } catch (const validation_error& e) {
      throw validation_error("config line " + std::to_string(lineno) + ": " +
                             e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_text(const RunConfig& cfg) {
  std::string out;
  for (const KeyDef& def : registry()) {
    out += "# ";
    out += def.doc;
    out.push_back('\n');
    out += def.key;
    out += " = ";
    out += def.get(cfg);
    out += "\n\n";
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto fold = [&h](std::string_view s) {
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  };
  const auto is_path_key = [](std::string_view k) {
    return k == "out_dir" || k.ends_with("_path") || k.ends_with("_paths");
  };
  for (const KeyDef& def : registry()) {
    // The hash identifies the processing parameters; where inputs and
    // artifacts live does not change what was computed.
    if (is_path_key(def.key)) continue;
    fold(def.key);
    fold("=");
    fold(def.get(cfg));
    fold("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const KeyDef& def : registry()) out.push_back(def.key);
  return out;
}

}  // namespace ertkit
