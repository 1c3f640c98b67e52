#ifndef ERTKIT_TEXT_HPP
#define ERTKIT_TEXT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ertkit {

// Minimal, locale-free UTF-8 utilities. Coverage is deliberately limited to
// what Latin-script corpora need (ASCII, Latin-1 Supplement, Latin
// Extended-A); everything else passes through unchanged.

/// Decode UTF-8 into code points. Invalid bytes decode as U+FFFD.
std::vector<char32_t> utf8_decode(const std::string& s);

std::string utf8_encode(const std::vector<char32_t>& cps);

/// Simple (1:1) lowercase for ASCII and Latin-1/Extended-A letters.
std::string lowercase(const std::string& s);

/// True when every code point is punctuation, a symbol, or whitespace.
bool punctuation_only(const std::string& s);

/// Compose common Latin base+combining-mark pairs to their precomposed
/// forms, then return the composed string. Not full NFC; covers the
/// combining marks seen in European-language word lists.
std::string compose_latin(const std::string& s);

/// Code-point count after compose_latin(); the canonical word length.
int normalized_length(const std::string& word);

}  // namespace ertkit

#endif
