#ifndef ERTKIT_CORPUS_HPP
#define ERTKIT_CORPUS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ertkit/token.hpp"
#include "ertkit/types.hpp"

namespace ertkit {

/// How the `length` column relates to the word form.
///   validate: recompute from the word form and reject mismatching rows.
///   recompute: ignore the column, always recompute.
///   trust: take the column as-is.
enum class LengthPolicy { validate, recompute, trust };

LengthPolicy length_policy_from_string(const std::string& s);
std::string to_string(LengthPolicy p);

struct IngestOptions {
  LengthPolicy length_policy = LengthPolicy::validate;
  /// Row diagnostics beyond this count are summarized, not listed.
  int max_diagnostics = 20;
};

/// Parse a delimiter-separated token file (tab or comma, auto-detected from
/// the header). Columns, any order: subject_id, group, doc_id, sentence_id,
/// word_pos, word, skip, trt_ms, length, zipf, surprisal_bits. Missing
/// values are empty fields. Rows violating the token invariants produce
/// row-numbered diagnostics; any diagnostic makes the whole ingest throw.
TokenTable ingest_tokens(const std::string& path,
                         const IngestOptions& opts = {});
TokenTable ingest_tokens_text(std::string_view text,
                              const IngestOptions& opts = {});

struct TrimReport {
  std::size_t n_removed = 0;
  double threshold = 0;
  /// Pooled fixated mean/SD the threshold was computed from; zero when the
  /// threshold was supplied frozen.
  double mean = 0;
  double sd = 0;
  bool frozen = false;
};

/// Remove fixated tokens with trt_ms > mean + 3 SD, mean and SD pooled over
/// all fixated tokens across groups. The two-argument form re-applies a
/// frozen threshold, which makes trimming idempotent across passes.
std::pair<TokenTable, TrimReport> trim_outliers(const TokenTable& table);
std::pair<TokenTable, TrimReport> trim_outliers(const TokenTable& table,
                                                double frozen_threshold);

/// Pooled quartiles and group means per feature, plus pooled fixated-TRT
/// moments and skip rates. Feature means/quartiles use only tokens where
/// the feature is present; a group with no such tokens gets a NaN mean.
struct PooledStats {
  double q1[kNFeatures] = {};
  double q3[kNFeatures] = {};
  double mean[kNGroups][kNFeatures] = {};
  double trt_mean = 0;
  double trt_sd = 0;
  double skip_rate[kNGroups] = {};
  double skip_rate_pooled = 0;
  std::size_t n_tokens = 0;
  std::size_t n_fixated = 0;
  int quantile_type = 7;

  double feature_q1(Feature f) const { return q1[static_cast<int>(f)]; }
  double feature_q3(Feature f) const { return q3[static_cast<int>(f)]; }
  double group_mean(Group g, Feature f) const {
    return mean[static_cast<int>(g)][static_cast<int>(f)];
  }
};

PooledStats pooled_stats(const TokenTable& table, int quantile_type = 7);

/// Assert Q1 < Q3 for length, zipf, and surprisal so the downstream
/// Q1->Q3 contrasts mean shorter->longer, rarer->more frequent,
/// more predictable->more surprising. Returns a direction summary; any
/// violation is a hard error naming the feature.
std::string orientation_check(const PooledStats& stats);

struct LengthBin {
  /// Observed length range inside the bin (reporting only; membership is
  /// decided by the cutpoints).
  int lo = 0;
  int hi = 0;
  double weight = 0;
  std::size_t count = 0;
  double mean_length = 0;
  double zipf_q1 = 0;
  double zipf_q3 = 0;
  std::size_t zipf_count = 0;
};

/// Equal-frequency pooled length bins. Membership: raw cell index of
/// length L = number of cutpoints strictly below L (integer ties fall to
/// the lower bin), then raw cells that were empty at build time collapse
/// into their lower neighbor. Weights are pooled token shares and sum to 1.
struct LengthBins {
  std::vector<double> cutpoints;
  /// raw cell index -> realized bin index.
  std::vector<int> remap;
  std::vector<LengthBin> bins;
  int quantile_type = 7;

  int n_bins() const { return static_cast<int>(bins.size()); }
  int bin_of(double length) const;
};

LengthBins make_length_bins(const TokenTable& table, int k = 7,
                            int quantile_type = 7);

/// Stamp each token's length_bin field. Only mutation a built table sees.
void assign_bins(TokenTable& table, const LengthBins& bins);

/// Serialize a table to the tab-separated token format ingest_tokens
/// reads. Doubles use shortest round-trip formatting, so
/// ingest_tokens_text(token_file_text(t)) reproduces t bit for bit.
std::string token_file_text(const TokenTable& table);
void write_token_file(const TokenTable& table, const std::string& path);

}  // namespace ertkit

#endif
