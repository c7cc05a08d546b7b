#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "fnmt/factored_token.h"

namespace fnmt {

enum class CasingClass { kLower = 0, kCapitalized = 1, kAllCaps = 2, kUndefined = 3 };

inline constexpr int kNumCasingClasses = 4;

// Tags `l`, `c`, `a`, `u`.
char casing_tag(CasingClass cls);
CasingClass parse_casing_tag(std::string_view tag);

// Classification over Unicode letters (general category L*). Checked in the
// order lower, all-caps, capitalized, so a single upper-case letter ("I") is
// all-caps. Letterless tokens and other mixtures are undefined. A leading
// word-boundary marker (marked subwords) is skipped.
CasingClass classify_casing(std::string_view token);

using CasedToken = Factored<CasingClass>;

CasedToken encode_casing(std::string_view token);

// Undefined leaves the lemma as is, whatever its case.
std::string apply_casing(std::string_view lemma, CasingClass cls);

// True for tokens whose surface form is not recoverable from (lemma, class):
// undefined tokens containing letters that lower-casing changes ("McDonald").
bool is_lossy_casing(std::string_view token);

}  // namespace fnmt
