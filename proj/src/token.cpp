#include "ertkit/token.hpp"

#include <algorithm>
#include <tuple>

namespace ertkit {

TokenTable::TokenTable(std::vector<Token> tokens) : rows_(std::move(tokens)) {
  std::stable_sort(rows_.begin(), rows_.end(),
                   [](const Token& a, const Token& b) {
                     return std::tie(a.subject_id, a.doc_id, a.sentence_id,
                                     a.word_pos) <
                            std::tie(b.subject_id, b.doc_id, b.sentence_id,
                                     b.word_pos);
                   });
  for (std::size_t i = 0; i < rows_.size();) {
    std::size_t j = i;
    while (j < rows_.size() && rows_[j].subject_id == rows_[i].subject_id) {
      if (rows_[j].group != rows_[i].group)
        throw validation_error("subject '" + rows_[i].subject_id +
                               "' appears in more than one group");
      ++j;
    }
    SubjectInfo info;
    info.subject_id = rows_[i].subject_id;
    info.group = rows_[i].group;
    info.range = {i, j};
    group_subjects_[static_cast<int>(info.group)].push_back(subjects_.size());
    subjects_.push_back(std::move(info));
    i = j;
  }
}

std::size_t TokenTable::subject_index(const std::string& subject_id) const {
  const auto it = std::lower_bound(
      subjects_.begin(), subjects_.end(), subject_id,
      [](const SubjectInfo& s, const std::string& id) {
        return s.subject_id < id;
      });
  if (it == subjects_.end() || it->subject_id != subject_id)
    throw validation_error("unknown subject id: '" + subject_id + "'");
  return static_cast<std::size_t>(it - subjects_.begin());
}

}  // namespace ertkit
