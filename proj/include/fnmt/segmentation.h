#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnmt/factored_token.h"

namespace fnmt {

// U+2581 LOWER ONE EIGHTH BLOCK, the word-boundary prefix of marked subwords.
inline constexpr std::string_view kWordBoundary = "\xE2\x96\x81";

// separated = the token starts a new word (a space goes to its left).
struct SegFlag {
  bool separated = false;
  bool operator==(const SegFlag&) const = default;
};

char seg_tag(SegFlag flag);
SegFlag parse_seg_tag(std::string_view tag);

using SegmentedToken = Factored<SegFlag>;

bool has_word_boundary(std::string_view subword);

// Strips one leading marker. The marker may only occur as a prefix and a token
// consisting of the bare marker is rejected.
SegmentedToken encode_segmentation(std::string_view subword);

// Inverse of encode_segmentation.
std::string mark_subword(const SegmentedToken& token);

// Concatenates bare subwords, inserting one space before each separated token
// except the first.
std::string decode_segmentation(std::span<const SegmentedToken> tokens);

// Detokenizes a marked subword line under the standard convention: markers
// become spaces, leading whitespace is dropped.
std::string detokenize_marked(std::string_view line);

}  // namespace fnmt
