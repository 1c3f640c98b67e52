#include "doctest.h"

#include <string>

#include "ertkit/text.hpp"

using namespace ertkit;

TEST_CASE("lowercase covers ASCII and Danish letters") {
  CHECK(lowercase("HUND") == "hund");
  CHECK(lowercase("Hund") == "hund");
  CHECK(lowercase("ÆØÅ") == "æøå");  // ÆØÅ
  CHECK(lowercase("SØVN") == "søvn");
  CHECK(lowercase("Œuvre") == "œuvre");  // Œ -> œ
  CHECK(lowercase("cafÉ") == "café");
  CHECK(lowercase("123-a") == "123-a");
}

TEST_CASE("multiplication sign is not a letter case pair") {
  CHECK(lowercase("×") == "×");
}

TEST_CASE("punctuation_only classification") {
  CHECK(punctuation_only(","));
  CHECK(punctuation_only("..."));
  CHECK(punctuation_only("!?"));
  CHECK(punctuation_only("“hi”") == false);
  CHECK(punctuation_only("("));
  CHECK(punctuation_only("–"));  // en dash
  CHECK(punctuation_only("hund") == false);
  CHECK(punctuation_only("it's") == false);
  CHECK(punctuation_only("3") == false);
  CHECK(punctuation_only(""));
}

TEST_CASE("combining marks compose before counting") {
  // "a" + COMBINING GRAVE = U+00E0.
  CHECK(compose_latin("à") == "à");
  CHECK(normalized_length("à") == 1);
  CHECK(normalized_length("blå") == 3);
  CHECK(normalized_length("hund") == 4);
  // Unknown base+mark pairs stay decomposed and count separately.
  CHECK(normalized_length("q̀") == 2);
}

TEST_CASE("utf8 round trip and invalid byte replacement") {
  const std::string s = "håb æø";
  CHECK(utf8_encode(utf8_decode(s)) == s);
  const std::string bad = "a\xFF b";
  const auto cps = utf8_decode(bad);
  CHECK(cps[1] == 0xFFFD);
}
