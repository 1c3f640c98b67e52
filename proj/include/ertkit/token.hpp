#ifndef ERTKIT_TOKEN_HPP
#define ERTKIT_TOKEN_HPP

#include <optional>
#include <string>
#include <vector>

#include "ertkit/types.hpp"

namespace ertkit {

/// One word token from one subject's reading record. skipped == true means
/// the word received no fixation, in which case trt_ms is absent. zipf and
/// surprisal_bits stay absent when the lexicon or language model has no
/// value for the word; such tokens are kept here and dropped at model time.
struct Token {
  std::string subject_id;
  Group group = Group::control;
  int doc_id = 0;
  int sentence_id = 0;
  int word_pos = 0;
  std::string word_form;
  int length_chars = 0;
  std::optional<double> zipf;
  std::optional<double> surprisal_bits;
  bool skipped = false;
  std::optional<double> trt_ms;

  /// Pooled length-bin index, assigned by assign_bins; -1 = unassigned.
  int length_bin = -1;

  bool has_features() const {
    return zipf.has_value() && surprisal_bits.has_value();
  }
};

/// Half-open row range [begin, end) into TokenTable::rows().
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Subject roster entry: id, group, and that subject's contiguous rows.
struct SubjectInfo {
  std::string subject_id;
  Group group = Group::control;
  RowRange range;
};

/// Token container in canonical order: (subject_id, doc_id, sentence_id,
/// word_pos). Each subject occupies one contiguous row range; per-group
/// rosters list subjects in subject_id order. A subject appearing under two
/// group labels is a construction error. Immutable after construction
/// except for the bin-assignment pass, which only touches length_bin.
class TokenTable {
 public:
  TokenTable() = default;
  explicit TokenTable(std::vector<Token> tokens);

  const std::vector<Token>& rows() const { return rows_; }
  std::vector<Token>& mutable_rows() { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const Token& operator[](std::size_t i) const { return rows_[i]; }

  const std::vector<SubjectInfo>& subjects() const { return subjects_; }
  const std::vector<std::size_t>& subjects_of(Group g) const {
    return group_subjects_[static_cast<int>(g)];
  }
  int n_subjects(Group g) const {
    return static_cast<int>(subjects_of(g).size());
  }
  const SubjectInfo& subject(std::size_t idx) const { return subjects_[idx]; }

  /// Index into subjects() for a subject id; throws if unknown.
  std::size_t subject_index(const std::string& subject_id) const;

 private:
  std::vector<Token> rows_;
  std::vector<SubjectInfo> subjects_;
  std::vector<std::size_t> group_subjects_[2];
};

/// Subject ids in subjects() order, the indexing used by model rows.
inline std::vector<std::string> subject_names(const TokenTable& table) {
  std::vector<std::string> names;
  names.reserve(table.subjects().size());
  for (const SubjectInfo& s : table.subjects()) names.push_back(s.subject_id);
  return names;
}

}  // namespace ertkit

#endif
