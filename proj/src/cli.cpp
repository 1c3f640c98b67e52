#include "ertkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ertkit/corpus.hpp"
#include "ertkit/effects.hpp"
#include "ertkit/features.hpp"
#include "ertkit/gam.hpp"
#include "ertkit/gapdecomp.hpp"
#include "ertkit/inference.hpp"
#include "ertkit/selection.hpp"
#include "ertkit/synth.hpp"

namespace fs = std::filesystem;

namespace ertkit {

namespace {

using nlohmann::json;

constexpr const char* kFeatureName[kNFeatures] = {"length", "zipf",
                                                  "surprisal"};
constexpr const char* kGroupName[kNGroups] = {"control", "dyslexic"};
constexpr const char* kPathwayName[kNPathways] = {"skip", "duration", "ert"};

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
  if (!std::isfinite(v)) return fmt(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write: " + path);
  out << text;
  if (!out) throw validation_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_artifact(const std::string& path, const char* stage) {
  if (!fs::exists(path))
    throw validation_error("missing artifact: " + path +
                           " (produce it with `ertkit " + stage + "`)");
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

/// Data lines of a delimited artifact: comments and blank lines removed,
/// trailing \r stripped.
std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss{text};
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

double parse_field_double(const std::string& s, const std::string& where) {
  double out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw validation_error(where + ": cannot parse number '" + s + "'");
  return out;
}

long parse_field_long(const std::string& s, const std::string& where) {
  long out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw validation_error(where + ": cannot parse integer '" + s + "'");
  return out;
}

std::string group_names_stem(Family fam, Group g) {
  return std::string(fam == Family::binomial_logit ? "skip" : "duration") +
         "_" + kGroupName[static_cast<int>(g)];
}

TokenTable load_tokens(const ArtifactPaths& paths, const RunConfig& cfg) {
  require_artifact(paths.tokens(), "ingest");
  IngestOptions opts;
  opts.length_policy = cfg.parsed_length_policy();
  return ingest_tokens(paths.tokens(), opts);
}

ModelSet load_models(const ArtifactPaths& paths) {
  ModelSet ms;
  for (int g = 0; g < kNGroups; ++g) {
    const Group grp = static_cast<Group>(g);
    require_artifact(paths.model(Family::binomial_logit, grp), "fit");
    require_artifact(paths.model(Family::gaussian_log, grp), "fit");
    ms.skip[g] = load_model(paths.model(Family::binomial_logit, grp));
    ms.duration[g] = load_model(paths.model(Family::gaussian_log, grp));
  }
  return ms;
}

/// The six Q1->Q3 contrast sets: [group][feature].
struct AllContrasts {
  ContrastSet set[kNGroups][kNFeatures];
};

AllContrasts compute_contrasts(const ModelSet& ms, const PooledStats& stats,
                               const LengthBins& bins) {
  AllContrasts all;
  for (int g = 0; g < kNGroups; ++g) {
    const Group grp = static_cast<Group>(g);
    all.set[g][0] = q1q3_contrast(ms.skip[g], ms.duration[g],
                                  Feature::length, stats, grp);
    all.set[g][1] = zipf_conditional_contrast(ms.skip[g], ms.duration[g],
                                              bins, stats, grp);
    all.set[g][2] = q1q3_contrast(ms.skip[g], ms.duration[g],
                                  Feature::surprisal, stats, grp);
  }
  return all;
}

const Contrast& pick_pathway(const ContrastSet& cs, int pathway) {
  switch (pathway) {
    case 0:
      return cs.skip;
    case 1:
      return cs.duration;
    default:
      return cs.ert;
  }
}

// ---------------------------------------------------------------- svg --

/// Minimal deterministic SVG assembly; coordinates are emitted with two
/// decimals so byte identity never depends on float printing quirks.
class Svg {
 public:
  Svg(double width, double height) : w_(width), h_(height) {}

  void line(double x1, double y1, double x2, double y2,
            const std::string& color, double width = 1.0) {
    body_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" +
             px(x2) + "\" y2=\"" + px(y2) + "\" stroke=\"" + color +
             "\" stroke-width=\"" + px(width) + "\"/>\n";
  }
  void rect(double x, double y, double w, double h,
            const std::string& fill) {
    body_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" +
             px(w) + "\" height=\"" + px(h) + "\" fill=\"" + fill + "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"" +
             px(r) + "\" fill=\"" + fill + "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "start") {
    body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" +
             std::to_string(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
             "\">" + s + "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color) {
    body_ += "<polyline fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) body_ += px(x) + "," + px(y) + " ";
    body_ += "\"/>\n";
  }

  std::string finish(const std::string& hash) const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w_) +
           "\" height=\"" + px(h_) + "\">\n<!-- config " + hash + " -->\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + px(w_) + "\" height=\"" +
           px(h_) + "\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

 private:
  static std::string px(double v) { return fmt_fixed(v, 2); }
  double w_, h_;
  std::string body_;
};

/// Affine map from a value range onto a pixel range.
struct Scale {
  double v0 = 0, v1 = 1, p0 = 0, p1 = 1;
  double operator()(double v) const {
    return p0 + (v - v0) / (v1 - v0) * (p1 - p0);
  }
};

// ------------------------------------------------------------- tables --

std::string tsv_header(const std::string& hash,
                       const std::vector<std::string>& cols) {
  std::string out = "# config " + hash + "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out.push_back('\t');
    out += cols[i];
  }
  out.push_back('\n');
  return out;
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back('\t');
    out += cells[i];
  }
  out.push_back('\n');
}

}  // namespace

// ------------------------------------------------------ artifact paths --

std::string ArtifactPaths::model(Family fam, Group g) const {
  return models_dir() + "/" + group_names_stem(fam, g) + ".json";
}

std::string ArtifactPaths::selection(Family fam, Group g) const {
  return models_dir() + "/selection_" + group_names_stem(fam, g) + ".tsv";
}

std::string ArtifactPaths::fig_data(int fig) const {
  static const char* stems[4] = {"fig1_partial_effects", "fig2_contrast_bars",
                                 "fig3_sr_forest", "fig4_gap_waterfall"};
  return report_dir() + "/" + stems[fig - 1] + ".tsv";
}

std::string ArtifactPaths::fig_svg(int fig) const {
  static const char* stems[4] = {"fig1_partial_effects", "fig2_contrast_bars",
                                 "fig3_sr_forest", "fig4_gap_waterfall"};
  return report_dir() + "/" + stems[fig - 1] + ".svg";
}

std::string ArtifactPaths::summary(int hypothesis) const {
  return report_dir() + "/summary_h" + std::to_string(hypothesis) + ".json";
}

// --------------------------------------------------------------- synth --

namespace {

json feature_map(const double v[kNFeatures]) {
  json j;
  for (int f = 0; f < kNFeatures; ++f) j[kFeatureName[f]] = v[f];
  return j;
}

json truth_to_json(const TruthRecord& tr, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["q1"] = feature_map(tr.q1);
  j["q3"] = feature_map(tr.q3);
  j["feature_mean"] = feature_map(tr.feature_mean);
  for (int g = 0; g < kNGroups; ++g) {
    json per;
    for (int p = 0; p < kNPathways; ++p)
      per[kPathwayName[p]] = feature_map(tr.delta[g][p]);
    j["delta"][kGroupName[g]] = per;
    j["link_delta"][kGroupName[g]]["skip_logit"] =
        feature_map(tr.link_delta[g][0]);
    j["link_delta"][kGroupName[g]]["log_duration"] =
        feature_map(tr.link_delta[g][1]);
    j["skip_rate"][kGroupName[g]] = tr.skip_rate[g];
    j["mean_trt_ms"][kGroupName[g]] = tr.mean_trt_ms[g];
    j["mean_ert_ms"][kGroupName[g]] = tr.mean_ert_ms[g];
  }
  for (int p = 0; p < kNPathways; ++p)
    j["sr"][kPathwayName[p]] = feature_map(tr.sr[p]);
  for (int sg = 0; sg < kNGroups; ++sg)
    for (int dg = 0; dg < kNGroups; ++dg)
      j["ert_matrix"][std::string("skip_") + kGroupName[sg]]
       [std::string("dur_") + kGroupName[dg]] = tr.ert_matrix[sg][dg];
  j["gap_ms"] = tr.gap_ms;
  j["skip_share_ms"] = tr.skip_share_ms;
  j["duration_share_ms"] = tr.duration_share_ms;
  j["equal_ease_gap_ms"] = tr.equal_ease_gap_ms;
  j["reduction_ms"] = tr.reduction_ms;
  j["clamp_reduction"] = feature_map(tr.clamp_reduction);
  j["attribution"] = feature_map(tr.attribution);
  json bins = json::array();
  for (const TruthBin& b : tr.bins) {
    json e;
    e["lo"] = b.lo;
    e["hi"] = b.hi;
    e["weight"] = b.weight;
    e["mean_length"] = b.mean_length;
    e["zipf_q1"] = b.zipf_q1;
    e["zipf_q3"] = b.zipf_q3;
    bins.push_back(e);
  }
  j["bins"] = bins;
  return j;
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  SynthConfig sc = synth_preset(cfg.synth_preset);
  if (cfg.synth_subjects > 0) sc.subjects_per_group = cfg.synth_subjects;
  if (cfg.synth_tokens > 0) sc.tokens_per_subject = cfg.synth_tokens;
  sc.seed = cfg.synth_seed;
  const SynthResult r = generate(sc);
  fs::create_directories(paths.tokens_dir());
  write_token_file(r.table, paths.synth_tokens());
  const std::string hash = config_hash(cfg);
  write_text(paths.truth(), truth_to_json(r.truth, hash).dump(2) + "\n");
  std::cout << "synth: preset " << cfg.synth_preset << ", "
            << sc.subjects_per_group << " subjects/group x "
            << sc.tokens_per_subject << " tokens, seed " << sc.seed << "\n"
            << "  wrote " << paths.synth_tokens() << " (" << r.table.size()
            << " rows)\n  wrote " << paths.truth() << "\n";
}

// -------------------------------------------------------------- lexicon --

void cmd_build_lexicon(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  const std::vector<std::string> freq = cfg.parsed_freq_paths();
  if (freq.empty())
    throw validation_error(
        "freq_paths is empty; pass --freq or set freq_paths");
  for (const std::string& p : freq) require_artifact(p.c_str(), "synth");
  LexiconOptions opts;
  opts.max_types = static_cast<std::size_t>(cfg.lexicon_max_types);
  opts.total_from_retained = cfg.lexicon_total_from_retained;
  const FrequencyLexicon lex = build_lexicon(freq, opts);
  fs::create_directories(paths.lexicon_dir());
  save_lexicon(lex, paths.lexicon());
  std::string meta = "# config " + config_hash(cfg) + "\n";
  meta += "retained_types\t" + std::to_string(lex.retained_types) + "\n";
  meta += "total_tokens\t" + std::to_string(lex.total_tokens) + "\n";
  write_text(paths.lexicon_meta(), meta);
  std::cout << "build-lexicon: " << lex.retained_types << " types, "
            << lex.total_tokens << " tokens\n  wrote " << paths.lexicon()
            << "\n";
}

// ------------------------------------------------------ align-surprisal --

namespace {

void check_header(const std::vector<std::string>& cells,
                  const std::vector<std::string>& want,
                  const std::string& path) {
  if (cells != want) {
    std::string expect;
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (i) expect += "\\t";
      expect += want[i];
    }
    throw validation_error(path + ": expected header '" + expect + "'");
  }
}

}  // namespace

void cmd_align_surprisal(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  if (cfg.spans_path.empty())
    throw validation_error("spans_path is empty; pass --spans");
  if (cfg.scores_path.empty())
    throw validation_error("scores_path is empty; pass --scores");
  require_artifact(cfg.spans_path, "align-surprisal");
  require_artifact(cfg.scores_path, "align-surprisal");

  std::vector<WordSpan> words;
  {
    const auto lines = data_lines(read_text(cfg.spans_path));
    if (lines.empty())
      throw validation_error(cfg.spans_path + ": no rows");
    check_header(split_tab(lines[0]),
                 {"doc_id", "word_pos", "char_start", "char_end"},
                 cfg.spans_path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto c = split_tab(lines[i]);
      if (c.size() != 4)
        throw validation_error(cfg.spans_path + " row " +
                               std::to_string(i + 1) + ": expected 4 fields");
      WordSpan w;
      const std::string where = cfg.spans_path + " row " +
                                std::to_string(i + 1);
      w.doc_id = static_cast<int>(parse_field_long(c[0], where));
      w.word_pos = static_cast<int>(parse_field_long(c[1], where));
      w.char_start = parse_field_long(c[2], where);
      w.char_end = parse_field_long(c[3], where);
      words.push_back(w);
    }
  }
  std::vector<SubtokenScore> scores;
  {
    const auto lines = data_lines(read_text(cfg.scores_path));
    if (lines.empty())
      throw validation_error(cfg.scores_path + ": no rows");
    check_header(split_tab(lines[0]),
                 {"doc_id", "char_start", "char_end", "nll_nats"},
                 cfg.scores_path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto c = split_tab(lines[i]);
      if (c.size() != 4)
        throw validation_error(cfg.scores_path + " row " +
                               std::to_string(i + 1) + ": expected 4 fields");
      SubtokenScore s;
      const std::string where = cfg.scores_path + " row " +
                                std::to_string(i + 1);
      s.doc_id = static_cast<int>(parse_field_long(c[0], where));
      s.char_start = parse_field_long(c[1], where);
      s.char_end = parse_field_long(c[2], where);
      s.nll_nats = parse_field_double(c[3], where);
      scores.push_back(s);
    }
  }

  const AlignResult ar = align_surprisal(words, scores);
  std::string out = tsv_header(config_hash(cfg),
                               {"doc_id", "word_pos", "surprisal_bits"});
  for (std::size_t i = 0; i < words.size(); ++i)
    append_row(out, {std::to_string(words[i].doc_id),
                     std::to_string(words[i].word_pos),
                     fmt(ar.surprisal_bits[i])});
  write_text(paths.surprisal(), out);
  std::cout << "align-surprisal: " << words.size() << " words, "
            << ar.n_orphans << " orphan subtokens, " << fmt(ar.total_nats)
            << " total nats\n  wrote " << paths.surprisal() << "\n";
}

// --------------------------------------------------------------- ingest --

void cmd_ingest(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  if (cfg.tokens_path.empty())
    throw validation_error("tokens_path is empty; pass --tokens");
  require_artifact(cfg.tokens_path, "synth");

  IngestOptions iopts;
  iopts.length_policy = cfg.parsed_length_policy();
  TokenTable table = ingest_tokens(cfg.tokens_path, iopts);
  const std::size_t rows_in = table.size();

  std::size_t zipf_joined = 0, surprisal_joined = 0;
  if (!cfg.lexicon_path.empty()) {
    require_artifact(cfg.lexicon_path, "build-lexicon");
    const FrequencyLexicon lex = load_lexicon(cfg.lexicon_path);
    for (Token& t : table.mutable_rows())
      if (!t.zipf)
        if (const auto z = zipf(t.word_form, lex)) {
          t.zipf = *z;
          ++zipf_joined;
        }
  }
  if (!cfg.surprisal_path.empty()) {
    require_artifact(cfg.surprisal_path, "align-surprisal");
    const auto lines = data_lines(read_text(cfg.surprisal_path));
    if (lines.empty())
      throw validation_error(cfg.surprisal_path + ": no rows");
    check_header(split_tab(lines[0]),
                 {"doc_id", "word_pos", "surprisal_bits"},
                 cfg.surprisal_path);
    std::map<std::pair<int, int>, double> by_word;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto c = split_tab(lines[i]);
      if (c.size() != 3)
        throw validation_error(cfg.surprisal_path + " row " +
                               std::to_string(i + 1) + ": expected 3 fields");
      const std::string where = cfg.surprisal_path + " row " +
                                std::to_string(i + 1);
      const auto key =
          std::make_pair(static_cast<int>(parse_field_long(c[0], where)),
                         static_cast<int>(parse_field_long(c[1], where)));
      if (!by_word.emplace(key, parse_field_double(c[2], where)).second)
        throw validation_error(where + ": duplicate (doc_id, word_pos)");
    }
    for (Token& t : table.mutable_rows())
      if (!t.surprisal_bits) {
        const auto it = by_word.find({t.doc_id, t.word_pos});
        if (it != by_word.end()) {
          t.surprisal_bits = it->second;
          ++surprisal_joined;
        }
      }
  }

  TrimReport trim;
  if (cfg.trim) {
    auto [trimmed_table, report] = trim_outliers(table);
    table = std::move(trimmed_table);
    trim = report;
  }

  const PooledStats stats = pooled_stats(table, cfg.quantile_type);
  const std::string orientation = orientation_check(stats);

  fs::create_directories(paths.tokens_dir());
  write_token_file(table, paths.tokens());

  std::size_t with_zipf = 0, with_surprisal = 0;
  for (const Token& t : table.rows()) {
    if (t.zipf) ++with_zipf;
    if (t.surprisal_bits) ++with_surprisal;
  }
  std::string rep = "# config " + config_hash(cfg) + "\n";
  rep += "rows_in\t" + std::to_string(rows_in) + "\n";
  rep += "rows_out\t" + std::to_string(table.size()) + "\n";
  rep += "trimmed\t" + std::to_string(trim.n_removed) + "\n";
  rep += "trim_threshold_ms\t" + fmt(trim.threshold) + "\n";
  rep += "trim_mean_ms\t" + fmt(trim.mean) + "\n";
  rep += "trim_sd_ms\t" + fmt(trim.sd) + "\n";
  for (int g = 0; g < kNGroups; ++g)
    rep += std::string("subjects_") + kGroupName[g] + "\t" +
           std::to_string(table.n_subjects(static_cast<Group>(g))) + "\n";
  rep += "zipf_joined\t" + std::to_string(zipf_joined) + "\n";
  rep += "surprisal_joined\t" + std::to_string(surprisal_joined) + "\n";
  rep += "rows_with_zipf\t" + std::to_string(with_zipf) + "\n";
  rep += "rows_with_surprisal\t" + std::to_string(with_surprisal) + "\n";
  for (int f = 0; f < kNFeatures; ++f)
    rep += std::string("q1_q3_") + kFeatureName[f] + "\t" + fmt(stats.q1[f]) +
           "\t" + fmt(stats.q3[f]) + "\n";
  rep += "orientation\t" + orientation + "\n";
  write_text(paths.ingest_report(), rep);
  std::cout << "ingest: " << rows_in << " rows in, " << table.size()
            << " out (" << trim.n_removed << " trimmed)\n  wrote "
            << paths.tokens() << "\n";
}

// ------------------------------------------------------------------ fit --

namespace {

std::vector<SmoothSpec> model_specs(const RunConfig& cfg, Family fam) {
  std::vector<SmoothSpec> specs;
  for (int f = 0; f < kNFeatures; ++f) {
    SmoothSpec s;
    s.feature = static_cast<Feature>(f);
    s.n_splines = cfg.n_splines;
    s.spline_degree = cfg.spline_degree;
    s.penalty_order = cfg.penalty_order;
    s.constraint = fam == Family::binomial_logit
                       ? cfg.skip_constraint(s.feature)
                       : cfg.dur_constraint(s.feature);
    specs.push_back(s);
  }
  return specs;
}

std::vector<std::string> group_roster(const TokenTable& table, Group g) {
  std::vector<std::string> names;
  for (const std::size_t idx : table.subjects_of(g))
    names.push_back(table.subject(idx).subject_id);
  return names;
}

}  // namespace

void cmd_fit(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  const TokenTable table = load_tokens(paths, cfg);
  const std::vector<std::string> all_names = subject_names(table);
  const std::string hash = config_hash(cfg);
  const std::vector<double> grid = cfg.parsed_lambda_grid();

  std::string validation_out =
      tsv_header(hash, {"model", "metric", "mean_score", "se", "n_folds",
                        "chosen_lambda"});

  for (int g = 0; g < kNGroups; ++g) {
    const Group grp = static_cast<Group>(g);
    const std::vector<std::string> roster = group_roster(table, grp);
    for (const Family fam :
         {Family::binomial_logit, Family::gaussian_log}) {
      const std::string stem = group_names_stem(fam, grp);
      const ModelData data = fam == Family::binomial_logit
                                 ? skip_model_data(table, grp)
                                 : duration_model_data(table, grp);
      const std::vector<SmoothSpec> specs = model_specs(cfg, fam);

      const std::vector<std::string> sub = subsample_subjects(
          roster, cfg.subsample_frac, mix_seed(cfg.cv_seed, stem + "/sub"));
      CVPlan plan1 =
          group_kfold(sub, cfg.cv_k, mix_seed(cfg.cv_seed, stem + "/stage1"));
      plan1.lambda_grid = grid;
      const SelectionResult sel =
          grid_search(fam, specs, {}, data, all_names, plan1);

      CVPlan plan2 = group_kfold(roster, cfg.cv_k,
                                 mix_seed(cfg.cv_seed, stem + "/stage2"));
      plan2.lambda_grid = grid;
      const ValidationMetrics metrics =
          validate(fam, specs, {}, sel, data, all_names, plan2);

      FittedGAM model =
          final_refit(fam, specs, {}, sel.chosen_lambda, data);
      model.config_hash = hash;
      fs::create_directories(paths.models_dir());
      save_model(model, paths.model(fam, grp));

      std::string sel_out =
          tsv_header(hash, {"lambda", "mean_score", "se", "n_folds",
                            "failed", "chosen"});
      for (const GridPointResult& pt : sel.grid)
        append_row(sel_out,
                   {fmt(pt.lambda), fmt(pt.mean_score), fmt(pt.se),
                    std::to_string(pt.n_folds), pt.failed ? "1" : "0",
                    pt.chosen ? "1" : "0"});
      for (const std::string& w : sel.warnings)
        sel_out += "# warning: " + w + "\n";
      write_text(paths.selection(fam, grp), sel_out);

      const char* metric =
          fam == Family::binomial_logit ? "auc" : "log_rmse";
      append_row(validation_out,
                 {stem, metric, fmt(metrics.mean_score), fmt(metrics.se),
                  std::to_string(static_cast<int>(
                      metrics.fold_scores.size())),
                  fmt(sel.chosen_lambda)});
      std::cout << "fit: " << stem << " lambda=" << fmt(sel.chosen_lambda)
                << " cv_" << metric << "=" << fmt_fixed(metrics.mean_score, 4)
                << " (se " << fmt_fixed(metrics.se, 4) << ")"
                << (model.info.converged ? "" : " NOT CONVERGED") << "\n";
      for (const std::string& w : metrics.warnings)
        std::cout << "  warning: " << w << "\n";
    }
  }
  write_text(paths.validation(), validation_out);
  std::cout << "  wrote " << paths.validation() << "\n";
}

// ------------------------------------------------------------- contrast --

void cmd_contrast(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  const TokenTable table = load_tokens(paths, cfg);
  const ModelSet ms = load_models(paths);
  const PooledStats stats = pooled_stats(table, cfg.quantile_type);
  const LengthBins bins =
      make_length_bins(table, cfg.n_length_bins, cfg.quantile_type);
  const AllContrasts all = compute_contrasts(ms, stats, bins);
  const std::string hash = config_hash(cfg);

  std::string out = tsv_header(
      hash, {"group", "feature", "pathway", "q1", "q3", "value_q1",
             "value_q3", "delta"});
  std::string bins_out = tsv_header(
      hash, {"group", "pathway", "bin", "weight", "q1", "q3", "delta"});
  std::vector<std::string> warnings;
  for (int g = 0; g < kNGroups; ++g)
    for (int f = 0; f < kNFeatures; ++f)
      for (int p = 0; p < kNPathways; ++p) {
        const Contrast& c = pick_pathway(all.set[g][f], p);
        append_row(out, {kGroupName[g], kFeatureName[f], kPathwayName[p],
                         fmt(c.q1_value), fmt(c.q3_value), fmt(c.value_q1),
                         fmt(c.value_q3), fmt(c.delta)});
        for (const BinComponent& b : c.bins)
          append_row(bins_out,
                     {kGroupName[g], kPathwayName[p], std::to_string(b.bin),
                      fmt(b.weight), fmt(b.q1), fmt(b.q3), fmt(b.delta)});
        for (const std::string& w : c.warnings)
          warnings.push_back(std::string(kGroupName[g]) + "/" +
                             kFeatureName[f] + "/" + kPathwayName[p] + ": " +
                             w);
      }
  for (const std::string& w : warnings) out += "# warning: " + w + "\n";
  write_text(paths.contrasts(), out);
  write_text(paths.zipf_bins(), bins_out);
  std::cout << "contrast: wrote " << paths.contrasts() << " and "
            << paths.zipf_bins() << "\n";
  for (const std::string& w : warnings)
    std::cout << "  warning: " << w << "\n";
}

// --------------------------------------------------------- slope-ratios --

void cmd_slope_ratios(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  const TokenTable table = load_tokens(paths, cfg);
  const ModelSet ms = load_models(paths);
  const PooledStats stats = pooled_stats(table, cfg.quantile_type);
  const LengthBins bins =
      make_length_bins(table, cfg.n_length_bins, cfg.quantile_type);
  const AllContrasts all = compute_contrasts(ms, stats, bins);
  const std::string hash = config_hash(cfg);

  std::string out = tsv_header(
      hash, {"feature", "pathway", "delta_dyslexic_abs", "delta_control_abs",
             "sr", "sr_of_combined"});
  std::string bins_out = tsv_header(
      hash, {"feature", "pathway", "bin", "weight", "sr"});
  std::vector<std::string> warnings;
  for (int f = 0; f < kNFeatures; ++f)
    for (int p = 0; p < kNPathways; ++p) {
      const SlopeRatio sr = slope_ratio(pick_pathway(all.set[1][f], p),
                                        pick_pathway(all.set[0][f], p));
      append_row(out, {kFeatureName[f], kPathwayName[p], fmt(sr.numerator),
                       fmt(sr.denominator), fmt(sr.sr),
                       fmt(sr.sr_of_combined)});
      for (std::size_t b = 0; b < sr.bin_ids.size(); ++b)
        append_row(bins_out,
                   {kFeatureName[f], kPathwayName[p],
                    std::to_string(sr.bin_ids[b]), fmt(sr.bin_weights[b]),
                    fmt(sr.bin_srs[b])});
      for (const std::string& w : sr.warnings)
        warnings.push_back(std::string(kFeatureName[f]) + "/" +
                           kPathwayName[p] + ": " + w);
    }
  for (const std::string& w : warnings) out += "# warning: " + w + "\n";
  write_text(paths.slope_ratios(), out);
  write_text(paths.zipf_sr_bins(), bins_out);
  std::cout << "slope-ratios: wrote " << paths.slope_ratios() << "\n";
  for (const std::string& w : warnings)
    std::cout << "  warning: " << w << "\n";
}

// ------------------------------------------------------------ decompose --

void cmd_decompose(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  TokenTable table = load_tokens(paths, cfg);
  const ModelSet ms = load_models(paths);
  const PooledStats stats = pooled_stats(table, cfg.quantile_type);
  const LengthBins bins =
      make_length_bins(table, cfg.n_length_bins, cfg.quantile_type);
  assign_bins(table, bins);
  const std::string hash = config_hash(cfg);

  GapDecomposition d =
      decompose_gap(ms, table, stats, bins, cfg.parsed_corpus());

  FeatureAttribution fa;
  bool have_attribution = false;
  if (cfg.run_attribution) {
    AttributionOptions ao;
    ao.tensor_splines = cfg.attribution_tensor_splines;
    ao.cv_k = cfg.cv_k;
    ao.subsample_frac = cfg.subsample_frac;
    ao.seed = mix_seed(cfg.cv_seed, "attribution");
    ao.lambda_grid = cfg.parsed_lambda_grid();
    ao.clamp_mode = cfg.parsed_clamp_mode();
    fa = feature_attribution(ms, table, stats, bins, ao);
    have_attribution = true;
    for (int f = 0; f < kNFeatures; ++f)
      d.feature_contribs[f] = fa.contrib_normalized[f];
    for (const std::string& w : fa.warnings) d.warnings.push_back(w);
  } else {
    // Single clamps against the scored models; rescaled so the three
    // contributions carry the joint reduction, mirroring the sweep's
    // normalized variant.
    double raw[kNFeatures];
    double total = 0;
    for (int f = 0; f < kNFeatures; ++f) {
      const BaselineGap cg =
          clamped_gap(ms, table, stats, bins, f == 0, f == 1, f == 2);
      raw[f] = d.g0 - cg.gap_ms;
      total += raw[f];
    }
    for (int f = 0; f < kNFeatures; ++f)
      d.feature_contribs[f] =
          total != 0.0 ? raw[f] * (d.reduction / total) : 0.0;
  }

  std::string out = "# config " + hash + "\n";
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k + "\t" + v + "\n";
  };
  kv("g0", fmt(d.g0));
  kv("g_cf", fmt(d.g_cf));
  kv("reduction", fmt(d.reduction));
  kv("skip_contrib", fmt(d.skip_contrib));
  kv("dur_contrib", fmt(d.dur_contrib));
  kv("common_gap", fmt(d.common_gap));
  kv("order_spread", fmt(d.order_spread));
  kv("corpus", d.corpus);
  for (int f = 0; f < kNFeatures; ++f)
    kv(std::string("contrib_") + kFeatureName[f],
       fmt(d.feature_contribs[f]));
  kv("attribution_ran", have_attribution ? "1" : "0");
  kv("attribution_included",
     std::to_string(have_attribution ? fa.n_included : 0));
  if (have_attribution)
    for (int f = 0; f < kNFeatures; ++f)
      kv(std::string("contrib_raw_") + kFeatureName[f], fmt(fa.contrib[f]));
  for (const std::string& w : d.warnings) out += "# warning: " + w + "\n";
  write_text(paths.decomposition(), out);

  if (have_attribution) {
    std::string cfg_out = tsv_header(
        hash,
        {"label", "length_x_zipf", "length_x_surprisal", "zipf_x_surprisal",
         "included", "g0", "g_cf", "reduction", "raw_length", "raw_zipf",
         "raw_surprisal", "norm_length", "norm_zipf", "norm_surprisal",
         "lambda_skip_control", "lambda_dur_control", "lambda_skip_dyslexic",
         "lambda_dur_dyslexic"});
    for (const AttributionConfigResult& c : fa.configs) {
      append_row(
          cfg_out,
          {c.label, c.with_tensor[0] ? "1" : "0",
           c.with_tensor[1] ? "1" : "0", c.with_tensor[2] ? "1" : "0",
           c.included ? "1" : "0", fmt(c.g0), fmt(c.g_cf), fmt(c.reduction),
           fmt(c.raw[0]), fmt(c.raw[1]), fmt(c.raw[2]), fmt(c.normalized[0]),
           fmt(c.normalized[1]), fmt(c.normalized[2]),
           fmt(c.tensor_lambda[0][0]), fmt(c.tensor_lambda[0][1]),
           fmt(c.tensor_lambda[1][0]), fmt(c.tensor_lambda[1][1])});
      for (const std::string& w : c.warnings)
        cfg_out += "# warning: " + c.label + ": " + w + "\n";
    }
    write_text(paths.attribution_configs(), cfg_out);
  }

  std::cout << "decompose: g0=" << fmt_fixed(d.g0, 2)
            << " ms, reduction=" << fmt_fixed(d.reduction, 2)
            << " ms, skip/dur split=" << fmt_fixed(d.skip_contrib, 2) << "/"
            << fmt_fixed(d.dur_contrib, 2) << " ms\n  wrote "
            << paths.decomposition() << "\n";
  for (const std::string& w : d.warnings)
    std::cout << "  warning: " << w << "\n";
}

// ------------------------------------------------------------ bootstrap --

namespace {

struct BootTarget {
  std::string id;
  double null_value = 0;
  Statistic stat;
};

std::vector<BootTarget> bootstrap_targets(
    const std::shared_ptr<const ModelSet>& ms, const RunConfig& cfg,
    const PooledStats& stats0, const LengthBins& bins0) {
  const bool recompute = cfg.bootstrap_recompute_stats;
  const int qt = cfg.quantile_type;
  const int nbins = cfg.n_length_bins;
  auto context = [recompute, qt, nbins, stats0,
                  bins0](const TokenTable& t) {
    if (recompute)
      return std::make_pair(pooled_stats(t, qt),
                            make_length_bins(t, nbins, qt));
    return std::make_pair(stats0, bins0);
  };
  auto ert_contrast = [context, ms](const TokenTable& t, int f,
                                    int g) -> double {
    const auto [st, bn] = context(t);
    const Group grp = static_cast<Group>(g);
    const ContrastSet cs =
        f == 1 ? zipf_conditional_contrast(ms->skip[g], ms->duration[g], bn,
                                           st, grp)
               : q1q3_contrast(ms->skip[g], ms->duration[g],
                               static_cast<Feature>(f), st, grp);
    return cs.ert.delta;
  };

  std::vector<BootTarget> targets;
  targets.push_back(
      {"baseline_gap_ms", 0.0, [ms](const TokenTable& t) {
         return baseline_gap(*ms, t).gap_ms;
       }});
  targets.push_back(
      {"equal_ease_reduction_ms", 0.0, [ms, context](const TokenTable& t) {
         const auto [st, bn] = context(t);
         return equal_ease(*ms, t, st, bn).reduction;
       }});
  for (int g = 0; g < kNGroups; ++g)
    for (int f = 0; f < kNFeatures; ++f)
      targets.push_back({std::string("ert_delta_") + kFeatureName[f] + "_" +
                             kGroupName[g],
                         0.0, [ert_contrast, f, g](const TokenTable& t) {
                           return ert_contrast(t, f, g);
                         }});
  for (int f = 0; f < kNFeatures; ++f)
    targets.push_back(
        {std::string("sr_ert_") + kFeatureName[f], 1.0,
         [context, ms, f](const TokenTable& t) {
           const auto [st, bn] = context(t);
           Contrast per_group[kNGroups];
           for (int g = 0; g < kNGroups; ++g) {
             const Group grp = static_cast<Group>(g);
             per_group[g] =
                 (f == 1 ? zipf_conditional_contrast(
                               ms->skip[g], ms->duration[g], bn, st, grp)
                         : q1q3_contrast(ms->skip[g], ms->duration[g],
                                         static_cast<Feature>(f), st, grp))
                     .ert;
           }
           return slope_ratio(per_group[1], per_group[0]).sr;
         }});
  return targets;
}

}  // namespace

void cmd_bootstrap(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  const TokenTable table = load_tokens(paths, cfg);
  const auto ms = std::make_shared<const ModelSet>(load_models(paths));
  const PooledStats stats = pooled_stats(table, cfg.quantile_type);
  const LengthBins bins =
      make_length_bins(table, cfg.n_length_bins, cfg.quantile_type);

  BootstrapOptions opts;
  opts.b = cfg.bootstrap_b;
  opts.seed = cfg.bootstrap_seed;
  opts.level = cfg.bootstrap_level;

  std::string out = tsv_header(
      config_hash(cfg),
      {"statistic", "null", "estimate", "ci_low", "ci_high", "p", "b",
       "n_failed", "seed", "trace_hash"});
  std::vector<std::string> warnings;
  for (const BootTarget& target : bootstrap_targets(ms, cfg, stats, bins)) {
    const BootstrapResult r =
        bootstrap(target.id, target.stat, table, target.null_value, opts);
    append_row(out, {r.statistic, fmt(r.null_value), fmt(r.estimate),
                     fmt(r.ci_low), fmt(r.ci_high), fmt(r.p),
                     std::to_string(r.b), std::to_string(r.n_failed),
                     std::to_string(r.seed), hex16(r.trace_hash)});
    for (const std::string& w : r.warnings)
      warnings.push_back(target.id + ": " + w);
    std::cout << "bootstrap: " << target.id << " = "
              << fmt_fixed(r.estimate, 3) << " [" << fmt_fixed(r.ci_low, 3)
              << ", " << fmt_fixed(r.ci_high, 3)
              << "], p = " << fmt(r.p) << "\n";
  }
  for (const std::string& w : warnings) out += "# warning: " + w + "\n";
  write_text(paths.bootstrap(), out);
  std::cout << "  wrote " << paths.bootstrap() << "\n";
  for (const std::string& w : warnings)
    std::cout << "  warning: " << w << "\n";
}

// --------------------------------------------------------------- report --

namespace {

struct BootRow {
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  double p = 1;
};

std::map<std::string, BootRow> read_bootstrap_rows(const std::string& path) {
  std::map<std::string, BootRow> rows;
  const auto lines = data_lines(read_text(path));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto c = split_tab(lines[i]);
    if (c.size() < 10) continue;
    BootRow r;
    const std::string where = path;
    r.estimate = parse_field_double(c[2], where);
    r.ci_low = parse_field_double(c[3], where);
    r.ci_high = parse_field_double(c[4], where);
    r.p = parse_field_double(c[5], where);
    rows[c[0]] = r;
  }
  return rows;
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::map<std::string, std::string> kv;
  for (const std::string& line : data_lines(read_text(path))) {
    const auto c = split_tab(line);
    if (c.size() >= 2) kv[c[0]] = c[1];
  }
  return kv;
}

double kv_double(const std::map<std::string, std::string>& kv,
                 const std::string& key, const std::string& path) {
  const auto it = kv.find(key);
  if (it == kv.end())
    throw validation_error(path + ": missing key '" + key + "'");
  return parse_field_double(it->second, path);
}

/// One recovery target: an estimate checked against a known truth value.
struct RecoveryLine {
  std::string name;
  double estimate = 0;
  double target = 0;
  bool is_ms = true;
  bool pass = false;
};

bool recovery_pass(double estimate, double target, bool is_ms) {
  const double err = std::abs(estimate - target);
  if (is_ms && std::abs(target) < 15.0) return err <= 2.0;
  return err <= 0.15 * std::abs(target);
}

json boot_json(const std::map<std::string, BootRow>& boot,
               const std::string& id) {
  json j;
  const auto it = boot.find(id);
  if (it == boot.end()) {
    j["ci_low"] = nullptr;
    j["ci_high"] = nullptr;
    j["p"] = nullptr;
  } else {
    j["ci_low"] = it->second.ci_low;
    j["ci_high"] = it->second.ci_high;
    j["p"] = it->second.p;
  }
  return j;
}

}  // namespace

void cmd_report(const RunConfig& cfg) {
  const ArtifactPaths paths{cfg.out_dir};
  const TokenTable table = load_tokens(paths, cfg);
  const ModelSet ms = load_models(paths);
  require_artifact(paths.decomposition(), "decompose");
  const auto decomp = read_kv(paths.decomposition());
  const PooledStats stats = pooled_stats(table, cfg.quantile_type);
  const LengthBins bins =
      make_length_bins(table, cfg.n_length_bins, cfg.quantile_type);
  const AllContrasts all = compute_contrasts(ms, stats, bins);
  const std::string hash = config_hash(cfg);

  std::map<std::string, BootRow> boot;
  if (fs::exists(paths.bootstrap()))
    boot = read_bootstrap_rows(paths.bootstrap());

  SlopeRatio srs[kNFeatures];
  for (int f = 0; f < kNFeatures; ++f)
    srs[f] = slope_ratio(all.set[1][f].ert, all.set[0][f].ert);

  // Figure 1: link-scale partial effects on 101-point grids clipped to
  // each model's training 1st..99th percentiles.
  {
    std::string out = tsv_header(
        hash, {"model", "group", "feature", "x", "effect"});
    struct Curve {
      int model;  // 0 = skip, 1 = duration
      int group;
      int feature;
      std::vector<double> x, y;
    };
    std::vector<Curve> curves;
    for (int m = 0; m < 2; ++m)
      for (int g = 0; g < kNGroups; ++g)
        for (int f = 0; f < kNFeatures; ++f) {
          const FittedGAM& model = m == 0 ? ms.skip[g] : ms.duration[g];
          const FeatureStats& fstats =
              model.feature_stats(static_cast<Feature>(f));
          Curve c{m, g, f, {}, {}};
          Vec grid(101);
          for (int i = 0; i <= 100; ++i)
            grid(i) = fstats.p01 + (fstats.p99 - fstats.p01) * i / 100.0;
          const Vec eff =
              partial_effect(model, static_cast<Feature>(f), grid);
          for (int i = 0; i <= 100; ++i) {
            c.x.push_back(grid(i));
            c.y.push_back(eff(i));
            append_row(out, {m == 0 ? "skip" : "duration", kGroupName[g],
                             kFeatureName[f], fmt(grid(i)), fmt(eff(i))});
          }
          curves.push_back(std::move(c));
        }
    write_text(paths.fig_data(1), out);

    Svg svg(940, 560);
    const char* colors[2] = {"#31669e", "#c24b42"};
    for (int m = 0; m < 2; ++m)
      for (int f = 0; f < kNFeatures; ++f) {
        const double x0 = 60 + f * 300, y0 = 40 + m * 260;
        const double pw = 240, ph = 190;
        double lo = 1e300, hi = -1e300, xlo = 1e300, xhi = -1e300;
        for (const auto& c : curves)
          if (c.model == m && c.feature == f) {
            for (const double v : c.y) {
              lo = std::min(lo, v);
              hi = std::max(hi, v);
            }
            xlo = std::min(xlo, c.x.front());
            xhi = std::max(xhi, c.x.back());
          }
        if (hi - lo < 1e-9) hi = lo + 1e-9;
        const Scale sx{xlo, xhi, x0, x0 + pw};
        const Scale sy{lo, hi, y0 + ph, y0};
        svg.line(x0, y0 + ph, x0 + pw, y0 + ph, "#888888");
        svg.line(x0, y0, x0, y0 + ph, "#888888");
        svg.text(x0 + pw / 2, y0 - 8,
                 std::string(m == 0 ? "skip" : "duration") + ": " +
                     kFeatureName[f],
                 12, "middle");
        svg.text(x0 - 4, y0 + ph + 4, fmt_fixed(lo, 2), 9, "end");
        svg.text(x0 - 4, y0 + 10, fmt_fixed(hi, 2), 9, "end");
        svg.text(x0, y0 + ph + 14, fmt_fixed(xlo, 1), 9, "middle");
        svg.text(x0 + pw, y0 + ph + 14, fmt_fixed(xhi, 1), 9, "middle");
        for (const auto& c : curves)
          if (c.model == m && c.feature == f) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < c.x.size(); ++i)
              pts.emplace_back(sx(c.x[i]), sy(c.y[i]));
            svg.polyline(pts, colors[c.group]);
          }
      }
    svg.text(60, 545, "control", 11);
    svg.rect(110, 537, 18, 8, colors[0]);
    svg.text(150, 545, "dyslexic", 11);
    svg.rect(205, 537, 18, 8, colors[1]);
    write_text(paths.fig_svg(1), svg.finish(hash));
  }

  // Figure 2: ERT contrast bars with bootstrap whiskers when available.
  {
    std::string out = tsv_header(
        hash, {"group", "feature", "delta_ms", "ci_low", "ci_high"});
    double lo = 0, hi = 0;
    double vals[kNGroups][kNFeatures];
    for (int g = 0; g < kNGroups; ++g)
      for (int f = 0; f < kNFeatures; ++f) {
        const double d = all.set[g][f].ert.delta;
        vals[g][f] = d;
        const std::string id = std::string("ert_delta_") + kFeatureName[f] +
                               "_" + kGroupName[g];
        const auto it = boot.find(id);
        append_row(out,
                   {kGroupName[g], kFeatureName[f], fmt(d),
                    it == boot.end() ? "nan" : fmt(it->second.ci_low),
                    it == boot.end() ? "nan" : fmt(it->second.ci_high)});
        lo = std::min(lo, it == boot.end() ? d : it->second.ci_low);
        hi = std::max(hi, it == boot.end() ? d : it->second.ci_high);
      }
    write_text(paths.fig_data(2), out);

    Svg svg(640, 360);
    const char* colors[2] = {"#31669e", "#c24b42"};
    const Scale sy{lo * 1.1 - 1, hi * 1.1 + 1, 320, 40};
    svg.line(60, sy(0), 600, sy(0), "#888888");
    for (int f = 0; f < kNFeatures; ++f)
      for (int g = 0; g < kNGroups; ++g) {
        const double x = 90 + f * 180 + g * 60;
        const double y0 = sy(0), y1 = sy(vals[g][f]);
        svg.rect(x, std::min(y0, y1), 40, std::abs(y1 - y0), colors[g]);
        const std::string id = std::string("ert_delta_") + kFeatureName[f] +
                               "_" + kGroupName[g];
        const auto it = boot.find(id);
        if (it != boot.end()) {
          svg.line(x + 20, sy(it->second.ci_low), x + 20,
                   sy(it->second.ci_high), "#222222");
          svg.line(x + 12, sy(it->second.ci_low), x + 28,
                   sy(it->second.ci_low), "#222222");
          svg.line(x + 12, sy(it->second.ci_high), x + 28,
                   sy(it->second.ci_high), "#222222");
        }
        svg.text(x + 20, std::min(sy(vals[g][f]), sy(0)) - 4,
                 fmt_fixed(vals[g][f], 1), 9, "middle");
      }
    for (int f = 0; f < kNFeatures; ++f)
      svg.text(90 + f * 180 + 50, 345, kFeatureName[f], 12, "middle");
    svg.text(60, 24, "ERT Q1->Q3 contrast (ms)", 12);
    write_text(paths.fig_svg(2), svg.finish(hash));
  }

  // Figure 3: slope-ratio forest.
  {
    std::string out = tsv_header(
        hash, {"feature", "sr", "ci_low", "ci_high"});
    double hi = 1;
    for (int f = 0; f < kNFeatures; ++f) {
      const auto it = boot.find(std::string("sr_ert_") + kFeatureName[f]);
      append_row(out, {kFeatureName[f], fmt(srs[f].sr),
                       it == boot.end() ? "nan" : fmt(it->second.ci_low),
                       it == boot.end() ? "nan" : fmt(it->second.ci_high)});
      hi = std::max(hi, it == boot.end() ? srs[f].sr : it->second.ci_high);
    }
    write_text(paths.fig_data(3), out);

    Svg svg(600, 220);
    const Scale sx{0, hi * 1.15, 140, 560};
    svg.line(sx(1), 30, sx(1), 180, "#888888");
    svg.text(sx(1), 196, "1", 10, "middle");
    for (int f = 0; f < kNFeatures; ++f) {
      const double y = 50 + f * 50;
      svg.text(130, y + 4, kFeatureName[f], 11, "end");
      const auto it = boot.find(std::string("sr_ert_") + kFeatureName[f]);
      if (it != boot.end())
        svg.line(sx(it->second.ci_low), y, sx(it->second.ci_high), y,
                 "#222222");
      svg.circle(sx(srs[f].sr), y, 4, "#31669e");
      svg.text(sx(srs[f].sr), y - 8, fmt_fixed(srs[f].sr, 2), 9, "middle");
    }
    svg.text(140, 20, "ERT slope ratio (dyslexic / control)", 12);
    write_text(paths.fig_svg(3), svg.finish(hash));
  }

  // Figure 4: gap waterfall plus pathway split.
  const double g0 = kv_double(decomp, "g0", paths.decomposition());
  const double g_cf = kv_double(decomp, "g_cf", paths.decomposition());
  const double reduction =
      kv_double(decomp, "reduction", paths.decomposition());
  const double skip_contrib =
      kv_double(decomp, "skip_contrib", paths.decomposition());
  const double dur_contrib =
      kv_double(decomp, "dur_contrib", paths.decomposition());
  const double common_gap =
      kv_double(decomp, "common_gap", paths.decomposition());
  double contribs[kNFeatures];
  for (int f = 0; f < kNFeatures; ++f)
    contribs[f] = kv_double(decomp, std::string("contrib_") + kFeatureName[f],
                            paths.decomposition());
  {
    std::string out = tsv_header(hash, {"step", "value_ms"});
    append_row(out, {"baseline_gap", fmt(g0)});
    for (int f = 0; f < kNFeatures; ++f)
      append_row(out, {std::string("minus_") + kFeatureName[f],
                       fmt(-contribs[f])});
    append_row(out, {"equal_ease_gap", fmt(g_cf)});
    append_row(out, {"skip_pathway", fmt(skip_contrib)});
    append_row(out, {"duration_pathway", fmt(dur_contrib)});
    append_row(out, {"common_gap", fmt(common_gap)});
    write_text(paths.fig_data(4), out);

    Svg svg(700, 360);
    const double top = std::max({g0, common_gap, 1.0});
    const Scale sy{0, top * 1.15, 320, 40};
    svg.line(50, sy(0), 660, sy(0), "#888888");
    double run = g0;
    const std::string labels[5] = {"G0", "- length", "- zipf", "- surprisal",
                                   "G_cf"};
    for (int i = 0; i < 5; ++i) {
      const double x = 70 + i * 80;
      double lo_v, hi_v;
      const char* color;
      if (i == 0) {
        lo_v = 0;
        hi_v = g0;
        color = "#31669e";
      } else if (i == 4) {
        lo_v = 0;
        hi_v = g_cf;
        color = "#4d8a57";
      } else {
        const double next = run - contribs[i - 1];
        lo_v = std::min(run, next);
        hi_v = std::max(run, next);
        run = next;
        color = "#c2a24b";
      }
      svg.rect(x, sy(hi_v), 50, std::max(1.0, sy(lo_v) - sy(hi_v)), color);
      svg.text(x + 25, 338, labels[i], 10, "middle");
      svg.text(x + 25, sy(hi_v) - 4,
               fmt_fixed(i == 0 ? g0 : (i == 4 ? g_cf : -contribs[i - 1]),
                         1),
               9, "middle");
    }
    const double xs = 540;
    svg.rect(xs, sy(common_gap), 50,
             std::max(1.0, sy(0) - sy(common_gap)), "#9e9e9e");
    svg.rect(xs + 60, sy(dur_contrib), 50,
             std::max(1.0, sy(0) - sy(dur_contrib)), "#c24b42");
    svg.text(xs + 25, 338, "common", 10, "middle");
    svg.text(xs + 85, 338, "duration", 10, "middle");
    svg.text(xs + 25, sy(common_gap) - 4, fmt_fixed(common_gap, 1), 9,
             "middle");
    svg.text(xs + 85, sy(dur_contrib) - 4, fmt_fixed(dur_contrib, 1), 9,
             "middle");
    svg.text(50, 24, "Group gap decomposition (ms)", 12);
    write_text(paths.fig_svg(4), svg.finish(hash));
  }

  // Per-hypothesis machine-readable summaries.
  {
    json h1;
    h1["hypothesis"] = "H1";
    h1["config_hash"] = hash;
    json records = json::array();
    for (int g = 0; g < kNGroups; ++g)
      for (int f = 0; f < kNFeatures; ++f) {
        const Contrast& c = all.set[g][f].ert;
        json r = boot_json(boot, std::string("ert_delta_") +
                                     kFeatureName[f] + "_" + kGroupName[g]);
        r["group"] = kGroupName[g];
        r["feature"] = kFeatureName[f];
        r["delta_ms"] = c.delta;
        r["value_q1_ms"] = c.value_q1;
        r["value_q3_ms"] = c.value_q3;
        records.push_back(r);
      }
    h1["records"] = records;
    write_text(paths.summary(1), h1.dump(2) + "\n");

    json h2;
    h2["hypothesis"] = "H2";
    h2["config_hash"] = hash;
    json rec2 = json::array();
    for (int f = 0; f < kNFeatures; ++f) {
      json r = boot_json(boot, std::string("sr_ert_") + kFeatureName[f]);
      r["feature"] = kFeatureName[f];
      r["sr"] = srs[f].sr;
      r["sr_of_combined"] = srs[f].sr_of_combined;
      records.push_back(r);
      rec2.push_back(r);
    }
    h2["records"] = rec2;
    write_text(paths.summary(2), h2.dump(2) + "\n");

    json h3;
    h3["hypothesis"] = "H3";
    h3["config_hash"] = hash;
    h3["gap_ms"] = g0;
    h3["gap_bootstrap"] = boot_json(boot, "baseline_gap_ms");
    h3["equal_ease_gap_ms"] = g_cf;
    h3["reduction_ms"] = reduction;
    h3["reduction_bootstrap"] = boot_json(boot, "equal_ease_reduction_ms");
    h3["skip_contrib_ms"] = skip_contrib;
    h3["dur_contrib_ms"] = dur_contrib;
    h3["common_gap_ms"] = common_gap;
    h3["duration_share"] =
        common_gap != 0.0 ? dur_contrib / common_gap : 0.0;
    json fc;
    for (int f = 0; f < kNFeatures; ++f)
      fc[kFeatureName[f]] = contribs[f];
    h3["feature_contribs_ms"] = fc;
    write_text(paths.summary(3), h3.dump(2) + "\n");
  }

  // Human-readable report plus truth recovery when a truth record exists.
  std::string rep = "expected reading time pipeline report\n";
  rep += "config " + hash + "\n\n";
  rep += "[models]\n";
  for (int g = 0; g < kNGroups; ++g)
    for (const Family fam : {Family::binomial_logit, Family::gaussian_log}) {
      const FittedGAM& m =
          fam == Family::binomial_logit ? ms.skip[g] : ms.duration[g];
      rep += group_names_stem(fam, static_cast<Group>(g)) + ": lambda=" +
             fmt(m.smooths.empty() ? 0.0 : m.smooths[0].spec.lambda) +
             " rows=" + std::to_string(m.info.n_rows) +
             " coefs=" + std::to_string(m.info.n_coefs) +
             (fam == Family::gaussian_log
                  ? " r2_log=" + fmt_fixed(m.info.r2_log, 4) +
                        " smearing=" + fmt_fixed(m.smearing_factor, 4)
                  : "") +
             (m.info.converged ? "" : " NOT CONVERGED") + "\n";
    }
  rep += "\n[ert contrasts, ms]\n";
  for (int g = 0; g < kNGroups; ++g)
    for (int f = 0; f < kNFeatures; ++f) {
      const Contrast& c = all.set[g][f].ert;
      rep += std::string(kGroupName[g]) + " " + kFeatureName[f] + ": " +
             fmt_fixed(c.delta, 2);
      const auto it = boot.find(std::string("ert_delta_") + kFeatureName[f] +
                                "_" + kGroupName[g]);
      if (it != boot.end())
        rep += " [" + fmt_fixed(it->second.ci_low, 2) + ", " +
               fmt_fixed(it->second.ci_high, 2) + "] p=" +
               fmt(it->second.p);
      rep += "\n";
    }
  rep += "\n[ert slope ratios]\n";
  for (int f = 0; f < kNFeatures; ++f) {
    rep += std::string(kFeatureName[f]) + ": " + fmt_fixed(srs[f].sr, 3);
    const auto it = boot.find(std::string("sr_ert_") + kFeatureName[f]);
    if (it != boot.end())
      rep += " [" + fmt_fixed(it->second.ci_low, 3) + ", " +
             fmt_fixed(it->second.ci_high, 3) + "] p=" + fmt(it->second.p);
    rep += "\n";
  }
  rep += "\n[gap decomposition, ms]\n";
  rep += "baseline gap: " + fmt_fixed(g0, 2) + "\n";
  rep += "equal-ease gap: " + fmt_fixed(g_cf, 2) + "\n";
  rep += "reduction: " + fmt_fixed(reduction, 2) + "\n";
  rep += "skip pathway: " + fmt_fixed(skip_contrib, 2) + "\n";
  rep += "duration pathway: " + fmt_fixed(dur_contrib, 2) + "\n";
  rep += "common-corpus gap: " + fmt_fixed(common_gap, 2) + "\n";
  for (int f = 0; f < kNFeatures; ++f)
    rep += std::string("contribution ") + kFeatureName[f] + ": " +
           fmt_fixed(contribs[f], 2) + "\n";

  bool recovery_ok = true;
  if (fs::exists(paths.truth())) {
    const json truth = json::parse(read_text(paths.truth()));
    std::vector<RecoveryLine> lines;
    for (int g = 0; g < kNGroups; ++g)
      for (int f = 0; f < kNFeatures; ++f)
        lines.push_back({std::string("ert_delta_") + kFeatureName[f] + "_" +
                             kGroupName[g],
                         all.set[g][f].ert.delta,
                         truth["delta"][kGroupName[g]]["ert"]
                              [kFeatureName[f]]
                                  .get<double>(),
                         true, false});
    for (int f = 0; f < kNFeatures; ++f)
      lines.push_back({std::string("sr_ert_") + kFeatureName[f], srs[f].sr,
                       truth["sr"]["ert"][kFeatureName[f]].get<double>(),
                       false, false});
    lines.push_back({"baseline_gap_ms", g0, truth["gap_ms"].get<double>(),
                     true, false});
    lines.push_back({"equal_ease_reduction_ms", reduction,
                     truth["reduction_ms"].get<double>(), true, false});
    int n_pass = 0;
    rep += "\n[recovery against generator truth]\n";
    rep += "rule: within 15% relative; ms targets under 15 ms within 2 ms "
           "absolute\n";
    for (RecoveryLine& l : lines) {
      l.pass = recovery_pass(l.estimate, l.target, l.is_ms);
      n_pass += l.pass ? 1 : 0;
      recovery_ok = recovery_ok && l.pass;
      rep += l.name + ": estimate " + fmt_fixed(l.estimate, 3) +
             " target " + fmt_fixed(l.target, 3) + " -> " +
             (l.pass ? "PASS" : "FAIL") + "\n";
    }
    rep += "recovery overall: " +
           std::string(recovery_ok ? "PASS" : "FAIL") + " (" +
           std::to_string(n_pass) + "/" + std::to_string(lines.size()) +
           " targets)\n";
  }
  write_text(paths.report_text(), rep);
  std::cout << "report: wrote " << paths.report_dir() << " (figures 1-4, "
            << "summaries H1-H3)\n";
  if (fs::exists(paths.truth()))
    std::cout << "  recovery " << (recovery_ok ? "PASS" : "FAIL") << "\n";
}

// ----------------------------------------------------------------- cli --

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"expected reading time analysis pipeline"};
  app.require_subcommand(0, 1);

  std::string config_file;
  std::vector<std::string> overrides;
  bool dump_config = false;
  app.add_option("--config", config_file, "key = value config file");
  app.add_option("--set", overrides,
                 "config override KEY=VALUE, repeatable, applied after "
                 "--config");
  app.add_flag("--dump-config", dump_config,
               "print the effective config with documentation and exit");

  // Subcommand-local overrides; each maps onto a config key after parse.
  std::map<const CLI::Option*, std::pair<std::string, std::string*>> opt_keys;
  std::vector<std::unique_ptr<std::string>> storage;
  auto key_option = [&](CLI::App* sub, const std::string& flag,
                        const std::string& key, const std::string& help) {
    storage.push_back(std::make_unique<std::string>());
    CLI::Option* opt = sub->add_option(flag, *storage.back(), help);
    opt_keys[opt] = {key, storage.back().get()};
    return opt;
  };

  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic token table with a truth record");
  key_option(synth, "--preset", "synth_preset",
             "paper_shaped, null_model, inert_zipf, offset_gap");
  key_option(synth, "--subjects", "synth_subjects", "subjects per group");
  key_option(synth, "--tokens-per-subject", "synth_tokens",
             "tokens per subject");
  key_option(synth, "--seed", "synth_seed", "generator seed");

  CLI::App* lex = app.add_subcommand(
      "build-lexicon", "merge frequency lists into a zipf lexicon");
  key_option(lex, "--freq", "freq_paths", "comma-separated frequency lists");
  key_option(lex, "--max-types", "lexicon_max_types", "type cap");

  CLI::App* align = app.add_subcommand(
      "align-surprisal", "sum subtoken scores onto word spans, nats to bits");
  key_option(align, "--spans", "spans_path", "word span table");
  key_option(align, "--scores", "scores_path", "subtoken score table");

  CLI::App* ingest = app.add_subcommand(
      "ingest", "parse, join, trim, and canonicalize a raw token file");
  key_option(ingest, "--tokens", "tokens_path", "raw token file");
  key_option(ingest, "--lexicon", "lexicon_path",
             "lexicon for zipf join (empty skips)");
  key_option(ingest, "--surprisal", "surprisal_path",
             "aligned surprisal table (empty skips)");
  key_option(ingest, "--length-policy", "length_policy",
             "validate, recompute, or trust");
  bool no_trim = false;
  ingest->add_flag("--no-trim", no_trim, "skip outlier trimming");

  CLI::App* fit = app.add_subcommand(
      "fit", "select smoothing, validate, and refit the four models");
  key_option(fit, "--n-splines", "n_splines", "basis size per smooth");
  key_option(fit, "--cv-k", "cv_k", "cross-validation folds");
  key_option(fit, "--cv-seed", "cv_seed", "cross-validation seed");
  key_option(fit, "--subsample-frac", "subsample_frac",
             "stage-1 subject fraction");
  key_option(fit, "--lambda-grid", "lambda_grid",
             "comma-separated smoothing grid");

  app.add_subcommand("contrast", "Q1->Q3 effect contrasts per pathway");
  app.add_subcommand("slope-ratios",
                     "dyslexic-over-control contrast ratios");

  CLI::App* dec = app.add_subcommand(
      "decompose", "gap decomposition and interaction-toggle attribution");
  key_option(dec, "--corpus", "shapley_corpus", "pooled or control_only");
  key_option(dec, "--clamp-mode", "attribution_mode", "single or shapley");
  key_option(dec, "--tensor-splines", "attribution_tensor_splines",
             "tensor basis size");
  bool no_attr = false;
  dec->add_flag("--no-attribution", no_attr,
                "skip the 8-configuration sweep");

  CLI::App* boot = app.add_subcommand(
      "bootstrap", "subject bootstrap CIs and p-values on frozen models");
  key_option(boot, "--b", "bootstrap_b", "resample count");
  key_option(boot, "--seed", "bootstrap_seed", "bootstrap seed");
  key_option(boot, "--level", "bootstrap_level", "confidence level");
  bool hold_stats = false;
  boot->add_flag("--hold-stats", hold_stats,
                 "hold quartiles and bins fixed across resamples");

  app.add_subcommand("report",
                     "assemble figure data, plots, and hypothesis summaries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) cfg = load_config(config_file);
    for (const std::string& kvs : overrides) {
      const std::size_t eq = kvs.find('=');
      if (eq == std::string::npos)
        throw validation_error("--set expects KEY=VALUE, got '" + kvs + "'");
      std::string k = kvs.substr(0, eq), v = kvs.substr(eq + 1);
      while (!k.empty() && k.back() == ' ') k.pop_back();
      while (!v.empty() && v.front() == ' ') v.erase(v.begin());
      set_key(cfg, k, v);
    }
    for (const auto& [opt, kv] : opt_keys)
      if (opt->count() > 0) set_key(cfg, kv.first, *kv.second);
    if (no_trim) cfg.trim = false;
    if (no_attr) cfg.run_attribution = false;
    if (hold_stats) cfg.bootstrap_recompute_stats = false;

    if (dump_config) {
      std::cout << config_text(cfg);
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 1;
    }
    const std::string name = app.get_subcommands()[0]->get_name();
    if (name == "synth")
      cmd_synth(cfg);
    else if (name == "build-lexicon")
      cmd_build_lexicon(cfg);
    else if (name == "align-surprisal")
      cmd_align_surprisal(cfg);
    else if (name == "ingest")
      cmd_ingest(cfg);
    else if (name == "fit")
      cmd_fit(cfg);
    else if (name == "contrast")
      cmd_contrast(cfg);
    else if (name == "slope-ratios")
      cmd_slope_ratios(cfg);
    else if (name == "decompose")
      cmd_decompose(cfg);
    else if (name == "bootstrap")
      cmd_bootstrap(cfg);
    else if (name == "report")
      cmd_report(cfg);
    return 0;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ertkit
