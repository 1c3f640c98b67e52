#ifndef ERTKIT_FEATURES_HPP
#define ERTKIT_FEATURES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ertkit/types.hpp"

namespace ertkit {

/// Word-frequency lexicon with lower-cased keys. Invariants: no key with
/// count < 2, no punctuation-only key, at most max_types entries,
/// total_tokens consistent with the configured totalling scope.
struct FrequencyLexicon {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total_tokens = 0;
  std::size_t retained_types = 0;
};

struct LexiconOptions {
  std::size_t max_types = 1'500'000;
  /// true: total_tokens = sum over retained types (self-consistent).
  /// false: total_tokens = sum over all types before filtering/truncation.
  bool total_from_retained = true;
};

/// Merge Leipzig-style frequency lists (`rank<TAB>word<TAB>count` or
/// `word<TAB>count`, auto-detected per line). Casings merge after
/// lower-casing; count < 2 and punctuation-only entries drop; the top
/// max_types by (count desc, word asc) are retained.
FrequencyLexicon build_lexicon(const std::vector<std::string>& paths,
                               const LexiconOptions& opts = {});
FrequencyLexicon build_lexicon_texts(const std::vector<std::string>& texts,
                                     const LexiconOptions& opts = {});

void save_lexicon(const FrequencyLexicon& lex, const std::string& path);
FrequencyLexicon load_lexicon(const std::string& path);

/// Zipf scale value log10(count per million tokens) + 3 for the
/// lower-cased word; missing when the lexicon has no entry.
std::optional<double> zipf(const std::string& word,
                           const FrequencyLexicon& lex);

/// One word's character span in a document, keyed for joining back onto
/// tokens.
struct WordSpan {
  int doc_id = 0;
  int word_pos = 0;
  long char_start = 0;
  long char_end = 0;
};

/// One language-model subtoken: character span plus negative
/// log-likelihood in nats.
struct SubtokenScore {
  int doc_id = 0;
  long char_start = 0;
  long char_end = 0;
  double nll_nats = 0;
};

struct AlignResult {
  /// Parallel to the input word spans.
  std::vector<double> surprisal_bits;
  /// Subtokens lying fully between word spans (whitespace, stray
  /// punctuation); skipped, not an error.
  std::size_t n_orphans = 0;
  /// Sum of nll_nats over aligned subtokens; conservation check:
  /// sum(surprisal_bits) * ln 2 == total_nats.
  double total_nats = 0;
};

/// Sum each word's subtoken negative log-likelihoods and convert nats to
/// bits. A subtoken overlapping a word without being contained straddles a
/// boundary (error with offsets); a word with no subtokens is an alignment
/// gap (error).
AlignResult align_surprisal(const std::vector<WordSpan>& words,
                            const std::vector<SubtokenScore>& scores);

}  // namespace ertkit

#endif
