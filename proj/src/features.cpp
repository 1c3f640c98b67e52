#include "ertkit/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ertkit/text.hpp"

namespace ertkit {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) tab = line.size();
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

std::uint64_t parse_count(std::string_view s, std::size_t line_no,
                          const std::string& where) {
  if (!s.empty() && s[0] == '-')
    throw validation_error(where + " line " + std::to_string(line_no) +
                           ": negative count '" + std::string(s) + "'");
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw validation_error(where + " line " + std::to_string(line_no) +
                           ": bad count '" + std::string(s) + "'");
  return v;
}

void merge_counts(std::unordered_map<std::string, std::uint64_t>& acc,
                  std::string_view text, const std::string& where) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    std::string_view word;
    std::string_view count;
    if (f.size() == 2) {
      word = f[0];
      count = f[1];
    } else if (f.size() == 3) {
      word = f[1];
      count = f[2];
    } else {
      throw validation_error(where + " line " + std::to_string(line_no) +
                             ": expected 2 or 3 tab-separated fields");
    }
    acc[lowercase(std::string(word))] += parse_count(count, line_no, where);
  }
}

FrequencyLexicon finish_lexicon(
    std::unordered_map<std::string, std::uint64_t> acc,
    const LexiconOptions& opts) {
  std::uint64_t prefilter_total = 0;
  for (const auto& [word, count] : acc) prefilter_total += count;

  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(acc.size());
  for (auto& [word, count] : acc)
    if (count >= 2 && !punctuation_only(word))
      entries.emplace_back(word, count);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (entries.size() > opts.max_types) entries.resize(opts.max_types);

  FrequencyLexicon lex;
  lex.counts.reserve(entries.size());
  std::uint64_t retained_total = 0;
  for (auto& [word, count] : entries) {
    retained_total += count;
    lex.counts.emplace(std::move(word), count);
  }
  lex.retained_types = lex.counts.size();
  lex.total_tokens = opts.total_from_retained ? retained_total : prefilter_total;
  return lex;
}

}  // namespace

FrequencyLexicon build_lexicon(const std::vector<std::string>& paths,
                               const LexiconOptions& opts) {
  std::unordered_map<std::string, std::uint64_t> acc;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw validation_error("cannot open frequency list: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    merge_counts(acc, buf.str(), path);
  }
  return finish_lexicon(std::move(acc), opts);
}

FrequencyLexicon build_lexicon_texts(const std::vector<std::string>& texts,
                                     const LexiconOptions& opts) {
  std::unordered_map<std::string, std::uint64_t> acc;
  for (std::size_t i = 0; i < texts.size(); ++i)
    merge_counts(acc, texts[i], "input " + std::to_string(i));
  return finish_lexicon(std::move(acc), opts);
}

void save_lexicon(const FrequencyLexicon& lex, const std::string& path) {
  std::vector<std::pair<std::string, std::uint64_t>> entries(
      lex.counts.begin(), lex.counts.end());
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write lexicon: " + path);
  for (const auto& [word, count] : entries)
    out << word << '\t' << count << '\n';
  if (!out) throw validation_error("write failed: " + path);
}

FrequencyLexicon load_lexicon(const std::string& path) {
  // A saved lexicon is already filtered and truncated, so rebuilding it
  // through the normal pipeline is a no-op beyond re-deriving totals.
  return build_lexicon({path});
}

std::optional<double> zipf(const std::string& word,
                           const FrequencyLexicon& lex) {
  const auto it = lex.counts.find(lowercase(word));
  if (it == lex.counts.end()) return std::nullopt;
  const double per_million =
      static_cast<double>(it->second) /
      (static_cast<double>(lex.total_tokens) / 1e6);
  return std::log10(per_million) + 3.0;
}

AlignResult align_surprisal(const std::vector<WordSpan>& words,
                            const std::vector<SubtokenScore>& scores) {
  struct WordRef {
    WordSpan span;
    std::size_t input_index;
    double nats = 0;
    bool covered = false;
  };
  std::vector<WordRef> sorted;
  sorted.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].char_start >= words[i].char_end)
      throw validation_error("word span with char_start >= char_end");
    sorted.push_back({words[i], i, 0, false});
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const WordRef& a, const WordRef& b) {
              if (a.span.doc_id != b.span.doc_id)
                return a.span.doc_id < b.span.doc_id;
              return a.span.char_start < b.span.char_start;
            });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto& prev = sorted[i - 1].span;
    const auto& cur = sorted[i].span;
    if (prev.doc_id == cur.doc_id && cur.char_start < prev.char_end)
      throw validation_error(
          "overlapping word spans in doc " + std::to_string(cur.doc_id) +
          " at offsets " + std::to_string(prev.char_start) + ".." +
          std::to_string(prev.char_end) + " and " +
          std::to_string(cur.char_start) + ".." +
          std::to_string(cur.char_end));
  }

  AlignResult result;
  result.surprisal_bits.assign(words.size(), 0.0);

  for (const SubtokenScore& st : scores) {
    if (st.char_start >= st.char_end)
      throw validation_error("subtoken span with char_start >= char_end");
    if (st.nll_nats < 0)
      throw validation_error("negative nll_nats at doc " +
                             std::to_string(st.doc_id) + " offsets " +
                             std::to_string(st.char_start) + ".." +
                             std::to_string(st.char_end));
    // First word whose end exceeds the subtoken start.
    const auto it = std::upper_bound(
        sorted.begin(), sorted.end(), st,
        [](const SubtokenScore& s, const WordRef& w) {
          if (s.doc_id != w.span.doc_id) return s.doc_id < w.span.doc_id;
          return s.char_start < w.span.char_end;
        });
    const bool overlaps = it != sorted.end() &&
                          it->span.doc_id == st.doc_id &&
                          it->span.char_start < st.char_end;
    if (!overlaps) {
      ++result.n_orphans;
      continue;
    }
    const bool contained = it->span.char_start <= st.char_start &&
                           st.char_end <= it->span.char_end;
    if (!contained)
      throw validation_error(
          "subtoken at doc " + std::to_string(st.doc_id) + " offsets " +
          std::to_string(st.char_start) + ".." + std::to_string(st.char_end) +
          " straddles the boundary of word at " +
          std::to_string(it->span.char_start) + ".." +
          std::to_string(it->span.char_end));
    it->nats += st.nll_nats;
    it->covered = true;
    result.total_nats += st.nll_nats;
  }

  for (const WordRef& w : sorted) {
    if (!w.covered)
      throw validation_error(
          "word at doc " + std::to_string(w.span.doc_id) + " pos " +
          std::to_string(w.span.word_pos) + " offsets " +
          std::to_string(w.span.char_start) + ".." +
          std::to_string(w.span.char_end) + " has no aligned subtokens");
    result.surprisal_bits[w.input_index] = w.nats / M_LN2;
  }
  return result;
}

}  // namespace ertkit
