#include "ertkit/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ertkit/stats.hpp"
#include "ertkit/text.hpp"

namespace ertkit {

namespace {

constexpr const char* kColumns[11] = {
    "subject_id", "group",  "doc_id", "sentence_id",    "word_pos", "word",
    "skip",       "trt_ms", "length", "zipf",           "surprisal_bits"};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

/// Comma fields may be RFC-4180 quoted (so a word can be "," itself);
/// tab-separated fields are always raw.
std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (delim == ',' && c == '"') {
      if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else {
        in_quotes = !in_quotes;
      }
    } else if (c == delim && !in_quotes) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

bool parse_int(const std::string& s, int& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && !s.empty();
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && !s.empty() &&
         std::isfinite(out);
}

class Diagnostics {
 public:
  explicit Diagnostics(int cap) : cap_(cap) {}

  void add(std::size_t line_no, const std::string& message) {
    ++total_;
    if (static_cast<int>(messages_.size()) < cap_)
      messages_.push_back("row " + std::to_string(line_no) + ": " + message);
  }

  bool any() const { return total_ > 0; }

  [[noreturn]] void raise() const {
    std::string out = "token ingest rejected " + std::to_string(total_) +
                      " row(s):";
    for (const auto& m : messages_) out += "\n  " + m;
    if (total_ > messages_.size())
      out += "\n  (+" + std::to_string(total_ - messages_.size()) + " more)";
    throw validation_error(out);
  }

 private:
  int cap_;
  std::size_t total_ = 0;
  std::vector<std::string> messages_;
};

}  // namespace

LengthPolicy length_policy_from_string(const std::string& s) {
  if (s == "validate") return LengthPolicy::validate;
  if (s == "recompute") return LengthPolicy::recompute;
  if (s == "trust") return LengthPolicy::trust;
  throw validation_error("unknown length policy: '" + s + "'");
}

std::string to_string(LengthPolicy p) {
  switch (p) {
    case LengthPolicy::validate: return "validate";
    case LengthPolicy::recompute: return "recompute";
    case LengthPolicy::trust: return "trust";
  }
  return "?";
}

TokenTable ingest_tokens(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open token file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_tokens_text(buf.str(), opts);
}

TokenTable ingest_tokens_text(std::string_view text,
                              const IngestOptions& opts) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF")
    text.remove_prefix(3);
  const auto lines = split_lines(text);
  if (lines.empty()) throw validation_error("token file is empty");

  const char delim =
      lines[0].find('\t') != std::string_view::npos ? '\t' : ',';
  const auto header = split_fields(lines[0], delim);

  int col[11];
  std::fill(std::begin(col), std::end(col), -1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    bool known = false;
    for (int c = 0; c < 11; ++c) {
      if (header[i] == kColumns[c]) {
        if (col[c] >= 0)
          throw validation_error("duplicate column '" + header[i] + "'");
        col[c] = static_cast<int>(i);
        known = true;
        break;
      }
    }
    if (!known)
      throw validation_error("unknown column '" + header[i] + "'");
  }
  for (int c = 0; c < 11; ++c)
    if (col[c] < 0)
      throw validation_error(std::string("missing column '") + kColumns[c] +
                             "'");

  Diagnostics diag(opts.max_diagnostics);
  std::vector<Token> tokens;
  tokens.reserve(lines.size() - 1);

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (lines[li].empty()) continue;
    const auto f = split_fields(lines[li], delim);
    if (f.size() != header.size()) {
      diag.add(line_no, "expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(f.size()));
      continue;
    }

    Token t;
    bool ok = true;
    t.subject_id = f[col[0]];
    if (t.subject_id.empty()) {
      diag.add(line_no, "empty subject_id");
      ok = false;
    }
    try {
      t.group = group_from_string(f[col[1]]);
    } catch (const validation_error& e) {
      diag.add(line_no, e.what());
      ok = false;
    }
    if (!parse_int(f[col[2]], t.doc_id)) {
      diag.add(line_no, "bad doc_id '" + f[col[2]] + "'");
      ok = false;
    }
    if (!parse_int(f[col[3]], t.sentence_id)) {
      diag.add(line_no, "bad sentence_id '" + f[col[3]] + "'");
      ok = false;
    }
    if (!parse_int(f[col[4]], t.word_pos)) {
      diag.add(line_no, "bad word_pos '" + f[col[4]] + "'");
      ok = false;
    }
    t.word_form = f[col[5]];

    const std::string& skip_s = f[col[6]];
    if (skip_s == "0") {
      t.skipped = false;
    } else if (skip_s == "1") {
      t.skipped = true;
    } else {
      diag.add(line_no, "skip must be 0 or 1, got '" + skip_s + "'");
      ok = false;
    }

    const std::string& trt_s = f[col[7]];
    if (!trt_s.empty()) {
      double v;
      if (!parse_double(trt_s, v)) {
        diag.add(line_no, "bad trt_ms '" + trt_s + "'");
        ok = false;
      } else if (v <= 0) {
        diag.add(line_no, "trt_ms must be > 0, got " + trt_s);
        ok = false;
      } else {
        t.trt_ms = v;
      }
    }
    if (ok) {
      if (t.skipped && t.trt_ms) {
        diag.add(line_no, "skipped token has trt_ms");
        ok = false;
      } else if (!t.skipped && !t.trt_ms) {
        diag.add(line_no, "fixated token missing trt_ms");
        ok = false;
      }
    }

    const std::string& len_s = f[col[8]];
    int len_col = 0;
    const bool len_given = !len_s.empty() && parse_int(len_s, len_col);
    if (!len_s.empty() && !len_given) {
      diag.add(line_no, "bad length '" + len_s + "'");
      ok = false;
    }
    if (ok) {
      switch (opts.length_policy) {
        case LengthPolicy::recompute:
          t.length_chars = static_cast<int>(normalized_length(t.word_form));
          break;
        case LengthPolicy::trust:
          if (!len_given) {
            diag.add(line_no, "missing length");
            ok = false;
          } else {
            t.length_chars = len_col;
          }
          break;
        case LengthPolicy::validate: {
          const int computed =
              static_cast<int>(normalized_length(t.word_form));
          if (!len_given) {
            diag.add(line_no, "missing length");
            ok = false;
          } else if (len_col != computed) {
            diag.add(line_no, "length " + std::to_string(len_col) +
                                  " does not match word '" + t.word_form +
                                  "' (" + std::to_string(computed) + ")");
            ok = false;
          } else {
            t.length_chars = len_col;
          }
          break;
        }
      }
    }
    if (ok && t.length_chars < 1) {
      diag.add(line_no, "length must be >= 1");
      ok = false;
    }

    const std::string& zipf_s = f[col[9]];
    if (!zipf_s.empty()) {
      double v;
      if (!parse_double(zipf_s, v)) {
        diag.add(line_no, "bad zipf '" + zipf_s + "'");
        ok = false;
      } else if (v < 0 || v > 8) {
        diag.add(line_no, "zipf out of [0, 8]: " + zipf_s);
        ok = false;
      } else {
        t.zipf = v;
      }
    }
    const std::string& surp_s = f[col[10]];
    if (!surp_s.empty()) {
      double v;
      if (!parse_double(surp_s, v)) {
        diag.add(line_no, "bad surprisal_bits '" + surp_s + "'");
        ok = false;
      } else if (v < 0) {
        diag.add(line_no, "surprisal_bits must be >= 0, got " + surp_s);
        ok = false;
      } else {
        t.surprisal_bits = v;
      }
    }

    if (ok) tokens.push_back(std::move(t));
  }

  if (diag.any()) diag.raise();
  return TokenTable(std::move(tokens));
}

namespace {

std::pair<TokenTable, TrimReport> trim_with(const TokenTable& table,
                                            const TrimReport& report) {
  std::vector<Token> kept;
  kept.reserve(table.size());
  std::size_t removed = 0;
  for (const Token& t : table.rows()) {
    if (!t.skipped && t.trt_ms && *t.trt_ms > report.threshold) {
      ++removed;
      continue;
    }
    kept.push_back(t);
  }
  TrimReport out = report;
  out.n_removed = removed;
  return {TokenTable(std::move(kept)), std::move(out)};
}

}  // namespace

std::pair<TokenTable, TrimReport> trim_outliers(const TokenTable& table) {
  if (table.empty()) throw validation_error("trim_outliers: empty table");
  std::vector<double> trts;
  trts.reserve(table.size());
  for (const Token& t : table.rows())
    if (!t.skipped && t.trt_ms) trts.push_back(*t.trt_ms);
  if (trts.empty())
    throw validation_error("trim_outliers: no fixated tokens");
  TrimReport report;
  report.mean = mean(trts);
  report.sd = sample_sd(trts);
  report.threshold = report.mean + 3.0 * report.sd;
  report.frozen = false;
  return trim_with(table, report);
}

std::pair<TokenTable, TrimReport> trim_outliers(const TokenTable& table,
                                                double frozen_threshold) {
  TrimReport report;
  report.threshold = frozen_threshold;
  report.frozen = true;
  return trim_with(table, report);
}

PooledStats pooled_stats(const TokenTable& table, int quantile_type) {
  if (table.empty()) throw validation_error("pooled_stats: empty table");
  PooledStats stats;
  stats.quantile_type = quantile_type;
  stats.n_tokens = table.size();

  for (const Feature f : kFeatures) {
    const int fi = static_cast<int>(f);
    std::vector<double> values;
    values.reserve(table.size());
    double sum[kNGroups] = {};
    std::size_t cnt[kNGroups] = {};
    for (const Token& t : table.rows()) {
      double v;
      if (f == Feature::length) {
        v = t.length_chars;
      } else if (f == Feature::zipf) {
        if (!t.zipf) continue;
        v = *t.zipf;
      } else {
        if (!t.surprisal_bits) continue;
        v = *t.surprisal_bits;
      }
      values.push_back(v);
      const int gi = static_cast<int>(t.group);
      sum[gi] += v;
      ++cnt[gi];
    }
    if (values.empty())
      throw validation_error("pooled_stats: feature '" + to_string(f) +
                             "' has no observed values");
    std::sort(values.begin(), values.end());
    stats.q1[fi] = quantile_sorted(values, 0.25, quantile_type);
    stats.q3[fi] = quantile_sorted(values, 0.75, quantile_type);
    for (int gi = 0; gi < kNGroups; ++gi)
      stats.mean[gi][fi] =
          cnt[gi] ? sum[gi] / cnt[gi]
                  : std::numeric_limits<double>::quiet_NaN();
  }

  std::vector<double> trts;
  std::size_t skipped[kNGroups] = {};
  std::size_t totals[kNGroups] = {};
  for (const Token& t : table.rows()) {
    ++totals[static_cast<int>(t.group)];
    if (t.skipped)
      ++skipped[static_cast<int>(t.group)];
    else if (t.trt_ms)
      trts.push_back(*t.trt_ms);
  }
  if (trts.empty())
    throw validation_error("pooled_stats: no fixated tokens");
  stats.n_fixated = trts.size();
  stats.trt_mean = mean(trts);
  stats.trt_sd = sample_sd(trts);
  for (int gi = 0; gi < kNGroups; ++gi)
    stats.skip_rate[gi] =
        totals[gi] ? static_cast<double>(skipped[gi]) / totals[gi]
                   : std::numeric_limits<double>::quiet_NaN();
  stats.skip_rate_pooled =
      static_cast<double>(skipped[0] + skipped[1]) / table.size();
  return stats;
}

std::string orientation_check(const PooledStats& stats) {
  static const char* kDirections[kNFeatures] = {
      "shorter -> longer", "rarer -> more frequent",
      "more predictable -> more surprising"};
  std::ostringstream out;
  for (const Feature f : kFeatures) {
    const int fi = static_cast<int>(f);
    if (!(stats.q1[fi] < stats.q3[fi]))
      throw validation_error("orientation check failed for feature '" +
                             to_string(f) + "': Q1 = " +
                             std::to_string(stats.q1[fi]) + " is not below Q3 = " +
                             std::to_string(stats.q3[fi]));
    out << to_string(f) << ": Q1 = " << stats.q1[fi]
        << " -> Q3 = " << stats.q3[fi] << " (" << kDirections[fi] << ") ok\n";
  }
  return out.str();
}

int LengthBins::bin_of(double length) const {
  const auto it =
      std::lower_bound(cutpoints.begin(), cutpoints.end(), length);
  const int raw = static_cast<int>(it - cutpoints.begin());
  return remap[raw];
}

LengthBins make_length_bins(const TokenTable& table, int k,
                            int quantile_type) {
  if (table.empty()) throw validation_error("make_length_bins: empty table");
  if (k < 1) throw validation_error("make_length_bins: k must be >= 1");

  std::vector<double> lengths;
  lengths.reserve(table.size());
  for (const Token& t : table.rows())
    lengths.push_back(t.length_chars);
  std::sort(lengths.begin(), lengths.end());
  if (lengths.front() == lengths.back())
    throw validation_error(
        "make_length_bins: fewer than 2 distinct length values");

  LengthBins bins;
  bins.quantile_type = quantile_type;
  for (int i = 1; i < k; ++i) {
    const double c =
        quantile_sorted(lengths, static_cast<double>(i) / k, quantile_type);
    if (bins.cutpoints.empty() || c > bins.cutpoints.back())
      bins.cutpoints.push_back(c);
  }

  const int n_raw = static_cast<int>(bins.cutpoints.size()) + 1;
  std::vector<std::size_t> counts(n_raw, 0);
  std::vector<int> raw_of(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto it = std::lower_bound(bins.cutpoints.begin(),
                                     bins.cutpoints.end(),
                                     static_cast<double>(table[i].length_chars));
    raw_of[i] = static_cast<int>(it - bins.cutpoints.begin());
    ++counts[raw_of[i]];
  }

  // Raw cells with no pooled tokens collapse into the nearest lower
  // non-empty cell (the first non-empty cell for leading empties).
  bins.remap.assign(n_raw, -1);
  int realized = -1;
  for (int r = 0; r < n_raw; ++r) {
    if (counts[r] > 0) {
      ++realized;
      bins.bins.emplace_back();
    }
    bins.remap[r] = std::max(realized, 0);
  }
  for (int r = 0; r < n_raw; ++r)
    if (bins.remap[r] >= static_cast<int>(bins.bins.size()))
      bins.remap[r] = static_cast<int>(bins.bins.size()) - 1;

  std::vector<std::vector<double>> zipfs(bins.bins.size());
  std::vector<double> len_sum(bins.bins.size(), 0.0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const int b = bins.remap[raw_of[i]];
    LengthBin& bin = bins.bins[b];
    const int len = table[i].length_chars;
    if (bin.count == 0) {
      bin.lo = bin.hi = len;
    } else {
      bin.lo = std::min(bin.lo, len);
      bin.hi = std::max(bin.hi, len);
    }
    ++bin.count;
    len_sum[b] += len;
    if (table[i].zipf) zipfs[b].push_back(*table[i].zipf);
  }
  for (std::size_t b = 0; b < bins.bins.size(); ++b) {
    LengthBin& bin = bins.bins[b];
    bin.weight = static_cast<double>(bin.count) / table.size();
    bin.mean_length = len_sum[b] / bin.count;
    bin.zipf_count = zipfs[b].size();
    if (zipfs[b].empty()) {
      bin.zipf_q1 = bin.zipf_q3 = std::numeric_limits<double>::quiet_NaN();
    } else {
      std::sort(zipfs[b].begin(), zipfs[b].end());
      bin.zipf_q1 = quantile_sorted(zipfs[b], 0.25, quantile_type);
      bin.zipf_q3 = quantile_sorted(zipfs[b], 0.75, quantile_type);
    }
  }
  return bins;
}

void assign_bins(TokenTable& table, const LengthBins& bins) {
  for (Token& t : table.mutable_rows())
    t.length_bin = bins.bin_of(t.length_chars);
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string token_file_text(const TokenTable& table) {
  std::string out;
  out.reserve(64 * table.size() + 128);
  for (int c = 0; c < 11; ++c) {
    if (c) out.push_back('\t');
    out += kColumns[c];
  }
  out.push_back('\n');
  for (const Token& t : table.rows()) {
    out += t.subject_id;
    out.push_back('\t');
    out += to_string(t.group);
    out.push_back('\t');
    out += std::to_string(t.doc_id);
    out.push_back('\t');
    out += std::to_string(t.sentence_id);
    out.push_back('\t');
    out += std::to_string(t.word_pos);
    out.push_back('\t');
    out += t.word_form;
    out.push_back('\t');
    out.push_back(t.skipped ? '1' : '0');
    out.push_back('\t');
    if (t.trt_ms) append_double(out, *t.trt_ms);
    out.push_back('\t');
    out += std::to_string(t.length_chars);
    out.push_back('\t');
    if (t.zipf) append_double(out, *t.zipf);
    out.push_back('\t');
    if (t.surprisal_bits) append_double(out, *t.surprisal_bits);
    out.push_back('\n');
  }
  return out;
}

void write_token_file(const TokenTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write token file: " + path);
  const std::string text = token_file_text(table);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw validation_error("failed writing token file: " + path);
}

}  // namespace ertkit
