#include "ertkit/text.hpp"

#include <array>
#include <utility>

namespace ertkit {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

char32_t lower_cp(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  // Latin-1 Supplement: À..Þ map to à..þ, except the multiplication sign.
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
  // Latin Extended-A: upper/lower interleaved in even/odd pairs, with a few
  // irregular runs handled explicitly.
  if (c >= 0x0100 && c <= 0x0137) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x0139 && c <= 0x0148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x014A && c <= 0x0177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x0178) return 0x00FF;  // Ÿ
  if (c >= 0x0179 && c <= 0x017E) return (c % 2 == 1) ? c + 1 : c;
  return c;
}

bool punct_or_symbol_cp(char32_t c) {
  if (c <= 0x7F) {
    return !((c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') ||
             (c >= U'a' && c <= U'z'));
  }
  if (c >= 0x00A0 && c <= 0x00BF) return c != 0x00AA && c != 0x00BA;
  if (c == 0x00D7 || c == 0x00F7) return true;
  if (c >= 0x2000 && c <= 0x206F) return true;  // general punctuation
  if (c >= 0x20A0 && c <= 0x20CF) return true;  // currency
  if (c >= 0x2100 && c <= 0x2BFF) return true;  // arrows, math, misc symbols
  if (c >= 0x3000 && c <= 0x303F) return true;  // CJK punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;
  return false;
}

// Precomposition pairs for the combining marks that occur in practice in
// Latin-script frequency lists: grave, acute, circumflex, tilde, diaeresis,
// ring above, cedilla, caron, macron, breve, double acute, ogonek.
struct Composition {
  char32_t mark;
  char32_t base;
  char32_t composed;
};

constexpr Composition kCompositions[] = {
    {0x0300, U'A', 0x00C0}, {0x0301, U'A', 0x00C1}, {0x0302, U'A', 0x00C2},
    {0x0303, U'A', 0x00C3}, {0x0308, U'A', 0x00C4}, {0x030A, U'A', 0x00C5},
    {0x0304, U'A', 0x0100}, {0x0306, U'A', 0x0102}, {0x0328, U'A', 0x0104},
    {0x0300, U'a', 0x00E0}, {0x0301, U'a', 0x00E1}, {0x0302, U'a', 0x00E2},
    {0x0303, U'a', 0x00E3}, {0x0308, U'a', 0x00E4}, {0x030A, U'a', 0x00E5},
    {0x0304, U'a', 0x0101}, {0x0306, U'a', 0x0103}, {0x0328, U'a', 0x0105},
    {0x0327, U'C', 0x00C7}, {0x0327, U'c', 0x00E7}, {0x0301, U'C', 0x0106},
    {0x0301, U'c', 0x0107}, {0x030C, U'C', 0x010C}, {0x030C, U'c', 0x010D},
    {0x030C, U'D', 0x010E}, {0x030C, U'd', 0x010F},
    {0x0300, U'E', 0x00C8}, {0x0301, U'E', 0x00C9}, {0x0302, U'E', 0x00CA},
    {0x0308, U'E', 0x00CB}, {0x0304, U'E', 0x0112}, {0x0328, U'E', 0x0118},
    {0x030C, U'E', 0x011A},
    {0x0300, U'e', 0x00E8}, {0x0301, U'e', 0x00E9}, {0x0302, U'e', 0x00EA},
    {0x0308, U'e', 0x00EB}, {0x0304, U'e', 0x0113}, {0x0328, U'e', 0x0119},
    {0x030C, U'e', 0x011B},
    {0x0306, U'G', 0x011E}, {0x0306, U'g', 0x011F},
    {0x0300, U'I', 0x00CC}, {0x0301, U'I', 0x00CD}, {0x0302, U'I', 0x00CE},
    {0x0308, U'I', 0x00CF},
    {0x0300, U'i', 0x00EC}, {0x0301, U'i', 0x00ED}, {0x0302, U'i', 0x00EE},
    {0x0308, U'i', 0x00EF},
    {0x0303, U'N', 0x00D1}, {0x0303, U'n', 0x00F1}, {0x0301, U'N', 0x0143},
    {0x0301, U'n', 0x0144}, {0x030C, U'N', 0x0147}, {0x030C, U'n', 0x0148},
    {0x0300, U'O', 0x00D2}, {0x0301, U'O', 0x00D3}, {0x0302, U'O', 0x00D4},
    {0x0303, U'O', 0x00D5}, {0x0308, U'O', 0x00D6}, {0x030B, U'O', 0x0150},
    {0x0300, U'o', 0x00F2}, {0x0301, U'o', 0x00F3}, {0x0302, U'o', 0x00F4},
    {0x0303, U'o', 0x00F5}, {0x0308, U'o', 0x00F6}, {0x030B, U'o', 0x0151},
    {0x0301, U'S', 0x015A}, {0x0301, U's', 0x015B}, {0x0327, U'S', 0x015E},
    {0x0327, U's', 0x015F}, {0x030C, U'S', 0x0160}, {0x030C, U's', 0x0161},
    {0x030C, U'T', 0x0164}, {0x030C, U't', 0x0165},
    {0x0300, U'U', 0x00D9}, {0x0301, U'U', 0x00DA}, {0x0302, U'U', 0x00DB},
    {0x0308, U'U', 0x00DC}, {0x030A, U'U', 0x016E}, {0x030B, U'U', 0x0170},
    {0x0300, U'u', 0x00F9}, {0x0301, U'u', 0x00FA}, {0x0302, U'u', 0x00FB},
    {0x0308, U'u', 0x00FC}, {0x030A, U'u', 0x016F}, {0x030B, U'u', 0x0171},
    {0x0301, U'Y', 0x00DD}, {0x0301, U'y', 0x00FD}, {0x0308, U'y', 0x00FF},
    {0x0308, U'Y', 0x0178},
    {0x0301, U'Z', 0x0179}, {0x0301, U'z', 0x017A}, {0x0307, U'Z', 0x017B},
    {0x0307, U'z', 0x017C}, {0x030C, U'Z', 0x017D}, {0x030C, U'z', 0x017E},
};

char32_t composed_or_zero(char32_t base, char32_t mark) {
  for (const auto& c : kCompositions) {
    if (c.mark == mark && c.base == base) return c.composed;
  }
  return 0;
}

bool is_combining_mark(char32_t c) { return c >= 0x0300 && c <= 0x036F; }

}  // namespace

std::vector<char32_t> utf8_decode(const std::string& s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    char32_t cp = kReplacement;
    std::size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else if ((b >> 5) == 0x6 && i + 1 < s.size()) {
      cp = (b & 0x1F) << 6 | (s[i + 1] & 0x3F);
      len = 2;
    } else if ((b >> 4) == 0xE && i + 2 < s.size()) {
      cp = (b & 0x0F) << 12 | (s[i + 1] & 0x3F) << 6 | (s[i + 2] & 0x3F);
      len = 3;
    } else if ((b >> 3) == 0x1E && i + 3 < s.size()) {
      cp = (b & 0x07) << 18 | (s[i + 1] & 0x3F) << 12 | (s[i + 2] & 0x3F) << 6 |
           (s[i + 3] & 0x3F);
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::string lowercase(const std::string& s) {
  auto cps = utf8_decode(s);
  for (auto& c : cps) c = lower_cp(c);
  return utf8_encode(cps);
}

bool punctuation_only(const std::string& s) {
  const auto cps = utf8_decode(s);
  if (cps.empty()) return true;
  for (char32_t c : cps) {
    if (!punct_or_symbol_cp(c)) return false;
  }
  return true;
}

std::string compose_latin(const std::string& s) {
  const auto cps = utf8_decode(s);
  std::vector<char32_t> out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    if (!out.empty() && is_combining_mark(c)) {
      if (const char32_t comp = composed_or_zero(out.back(), c)) {
        out.back() = comp;
        continue;
      }
    }
    out.push_back(c);
  }
  return utf8_encode(out);
}

int normalized_length(const std::string& word) {
  return static_cast<int>(utf8_decode(compose_latin(word)).size());
}

}  // namespace ertkit
