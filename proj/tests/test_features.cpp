#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "ertkit/features.hpp"

using namespace ertkit;

TEST_CASE("casings merge and filters drop rare and punctuation entries") {
  const FrequencyLexicon lex = build_lexicon_texts(
      {"Hund\t3\n!!\t40\n", "hund\t2\nsjælden\t1\n"});
  REQUIRE(lex.counts.count("hund") == 1);
  CHECK(lex.counts.at("hund") == 5);
  CHECK(lex.counts.count("!!") == 0);
  CHECK(lex.counts.count("sjælden") == 0);
  CHECK(lex.retained_types == 1);
  CHECK(lex.total_tokens == 5);
}

TEST_CASE("leipzig three-column lines parse with the rank ignored") {
  const FrequencyLexicon lex =
      build_lexicon_texts({"1\thund\t100\n2\tkat\t50\n"});
  CHECK(lex.counts.at("hund") == 100);
  CHECK(lex.counts.at("kat") == 50);
  CHECK(lex.total_tokens == 150);
}

TEST_CASE("zipf follows the per-million log scale") {
  FrequencyLexicon lex;
  lex.counts["hund"] = 1000;
  lex.total_tokens = 1'000'000;
  CHECK(zipf("hund", lex).value() == doctest::Approx(6.0));
  CHECK(zipf("HUND", lex).value() == doctest::Approx(6.0));
  CHECK(!zipf("kat", lex).has_value());

  FrequencyLexicon lex2;
  lex2.counts["x"] = 2;
  lex2.total_tokens = 2'000'000;
  CHECK(zipf("x", lex2).value() == doctest::Approx(3.0));
}

TEST_CASE("zipf is monotone in count within one lexicon") {
  FrequencyLexicon lex;
  lex.counts["a"] = 700;
  lex.counts["b"] = 699;
  lex.total_tokens = 12345678;
  CHECK(zipf("a", lex).value() > zipf("b", lex).value());
}

TEST_CASE("truncation keeps the top types with lexicographic ties") {
  LexiconOptions opts;
  opts.max_types = 2;
  const FrequencyLexicon lex =
      build_lexicon_texts({"aa\t5\ncc\t3\nbb\t3\n"}, opts);
  CHECK(lex.retained_types == 2);
  CHECK(lex.counts.count("aa") == 1);
  CHECK(lex.counts.count("bb") == 1);
  CHECK(lex.counts.count("cc") == 0);
  CHECK(lex.total_tokens == 8);

  LexiconOptions prefilter = opts;
  prefilter.total_from_retained = false;
  const FrequencyLexicon lex2 =
      build_lexicon_texts({"aa\t5\ncc\t3\nbb\t3\n"}, prefilter);
  CHECK(lex2.total_tokens == 11);
}

TEST_CASE("file order does not change the lexicon") {
  const std::vector<std::string> a{"hund\t3\nkat\t7\n", "hund\t4\nmus\t2\n"};
  const std::vector<std::string> b{"hund\t4\nmus\t2\n", "hund\t3\nkat\t7\n"};
  const FrequencyLexicon la = build_lexicon_texts(a);
  const FrequencyLexicon lb = build_lexicon_texts(b);
  CHECK(la.total_tokens == lb.total_tokens);
  REQUIRE(la.counts.size() == lb.counts.size());
  for (const auto& [w, c] : la.counts) CHECK(lb.counts.at(w) == c);
}

TEST_CASE("frequency list parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(build_lexicon_texts({"hund\t-3\n"}),
                       doctest::Contains("negative count"), validation_error);
  CHECK_THROWS_WITH_AS(build_lexicon_texts({"hund\n"}),
                       doctest::Contains("line 1"), validation_error);
  CHECK_THROWS_WITH_AS(build_lexicon_texts({"hund\tmany\n"}),
                       doctest::Contains("bad count"), validation_error);
  CHECK_THROWS_AS(build_lexicon({"/nonexistent/freq.txt"}), validation_error);
}

TEST_CASE("lexicon round-trips through its file form") {
  const FrequencyLexicon lex =
      build_lexicon_texts({"hund\t100\nkat\t50\nmus\t2\n"});
  const std::string path = "/tmp/ertkit_test_lexicon.tsv";
  save_lexicon(lex, path);
  const FrequencyLexicon back = load_lexicon(path);
  CHECK(back.total_tokens == lex.total_tokens);
  REQUIRE(back.counts.size() == lex.counts.size());
  for (const auto& [w, c] : lex.counts) CHECK(back.counts.at(w) == c);
}

TEST_CASE("surprisal alignment sums nats per word and converts to bits") {
  // Doc text: "ab cde" with words at [0,2) and [3,6).
  std::vector<WordSpan> words{{1, 1, 0, 2}, {1, 2, 3, 6}};
  std::vector<SubtokenScore> scores{
      {1, 0, 2, std::log(2.0)},  // exactly one bit
      {1, 3, 5, 0.5},
      {1, 5, 6, 0.3},
  };
  const AlignResult r = align_surprisal(words, scores);
  REQUIRE(r.surprisal_bits.size() == 2);
  CHECK(r.surprisal_bits[0] == doctest::Approx(1.0));
  CHECK(r.surprisal_bits[1] == doctest::Approx(1.1542).epsilon(1e-4));
  CHECK(r.n_orphans == 0);
  // Conservation: total bits * ln 2 equals total aligned nats.
  const double bits = r.surprisal_bits[0] + r.surprisal_bits[1];
  CHECK(bits * std::log(2.0) ==
        doctest::Approx(std::log(2.0) + 0.8).epsilon(1e-12));
}

TEST_CASE("orphan subtokens between words are skipped and counted") {
  std::vector<WordSpan> words{{1, 1, 0, 2}, {1, 2, 3, 6}};
  std::vector<SubtokenScore> scores{
      {1, 0, 2, 0.4}, {1, 2, 3, 9.9}, {1, 3, 6, 0.6}, {2, 0, 4, 1.0}};
  const AlignResult r = align_surprisal(words, scores);
  CHECK(r.n_orphans == 2);
  CHECK(r.total_nats == doctest::Approx(1.0));
}

TEST_CASE("alignment errors: straddle, gap, overlap, negative nll") {
  std::vector<WordSpan> words{{1, 1, 0, 2}, {1, 2, 3, 6}};
  CHECK_THROWS_WITH_AS(
      align_surprisal(words, {{1, 1, 4, 0.5}, {1, 4, 6, 0.5}}),
      doctest::Contains("straddles"), validation_error);
  CHECK_THROWS_WITH_AS(align_surprisal(words, {{1, 0, 2, 0.5}}),
                       doctest::Contains("no aligned subtokens"),
                       validation_error);
  CHECK_THROWS_WITH_AS(align_surprisal(words, {{1, 0, 2, -0.1}}),
                       doctest::Contains("negative nll"), validation_error);
  std::vector<WordSpan> overlapping{{1, 1, 0, 4}, {1, 2, 2, 6}};
  CHECK_THROWS_WITH_AS(align_surprisal(overlapping, {{1, 0, 2, 0.5}}),
                       doctest::Contains("overlapping word spans"),
                       validation_error);
}
