#include "fnmt/casing.h"

#include "fnmt/error.h"
#include "fnmt/segmentation.h"
#include "fnmt/unicode.h"

namespace fnmt {

char casing_tag(CasingClass cls) {
  switch (cls) {
    case CasingClass::kLower: return 'l';
    case CasingClass::kCapitalized: return 'c';
    case CasingClass::kAllCaps: return 'a';
    case CasingClass::kUndefined: return 'u';
  }
  return 'u';
}

CasingClass parse_casing_tag(std::string_view tag) {
  if (tag == "l") return CasingClass::kLower;
  if (tag == "c") return CasingClass::kCapitalized;
  if (tag == "a") return CasingClass::kAllCaps;
  if (tag == "u") return CasingClass::kUndefined;
  throw FormatError("unknown casing tag \"" + std::string(tag) + "\"");
}

namespace {

// A leading word-boundary marker is not part of the cased text.
std::string_view strip_boundary(std::string_view token) {
  return has_word_boundary(token) && token.size() > kWordBoundary.size()
             ? token.substr(kWordBoundary.size())
             : token;
}

}  // namespace

CasingClass classify_casing(std::string_view token) {
  if (token.empty()) throw InvalidInput("cannot classify casing of an empty token");
  const auto text = unicode::decode(strip_boundary(token));

  std::size_t letters = 0, lower = 0, upper = 0;
  for (char32_t c : text) {
    if (!unicode::is_letter(c)) continue;
    ++letters;
    if (unicode::is_lower(c)) ++lower;
    else if (unicode::is_upper(c)) ++upper;
  }
  if (letters == 0) return CasingClass::kUndefined;
  if (lower == letters) return CasingClass::kLower;
  if (upper == letters) return CasingClass::kAllCaps;

  if (unicode::is_upper(text.front()) && lower == letters - 1)
    return CasingClass::kCapitalized;
  return CasingClass::kUndefined;
}

CasedToken encode_casing(std::string_view token) {
  const auto cls = classify_casing(token);
  return {unicode::to_lower(token), cls};
}

std::string apply_casing(std::string_view lemma, CasingClass cls) {
  switch (cls) {
    case CasingClass::kLower:
    case CasingClass::kUndefined:
      return std::string(lemma);
    case CasingClass::kAllCaps:
      return unicode::to_upper(lemma);
    case CasingClass::kCapitalized: {
      const auto body = strip_boundary(lemma);
      auto text = unicode::decode(body);
      if (!text.empty()) text.front() = unicode::to_upper(text.front());
      return std::string(lemma.substr(0, lemma.size() - body.size())) + unicode::encode(text);
    }
  }
  return std::string(lemma);
}

bool is_lossy_casing(std::string_view token) {
  return classify_casing(token) == CasingClass::kUndefined &&
         unicode::to_lower(token) != token;
}

}  // namespace fnmt
