#include "fnmt/segmenter.h"

#include <algorithm>

#include "fnmt/error.h"
#include "fnmt/segmentation.h"
#include "fnmt/unicode.h"

namespace fnmt {

FallbackSegmenter::FallbackSegmenter(std::set<std::string> lexicon) : lexicon_(std::move(lexicon)) {
  for (const auto& entry : lexicon_) {
    if (entry.empty() || entry.find(kWordBoundary) != std::string::npos)
      throw InvalidInput("lexicon entries must be non-empty and unmarked");
    longest_ = std::max(longest_, unicode::length(entry));
  }
}

Tokens FallbackSegmenter::operator()(std::string_view word) const {
  if (word.empty()) throw InvalidInput("cannot segment an empty word");
  if (word.find(kWordBoundary) != std::string_view::npos)
    throw InvalidInput("word already contains the boundary marker");
  const auto cps = unicode::decode(word);
  Tokens pieces;
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t take = 1;
    for (std::size_t len = std::min(longest_, cps.size() - i); len > 1; --len) {
      if (lexicon_.contains(unicode::encode(std::u32string_view(cps).substr(i, len)))) {
        take = len;
        break;
      }
    }
    pieces.push_back(unicode::encode(std::u32string_view(cps).substr(i, take)));
    i += take;
  }
  pieces.front().insert(0, kWordBoundary);
  return pieces;
}

std::string FallbackSegmenter::segment_line(std::string_view line) const {
  Tokens out;
  for (const auto& word : split_tokens(line))
    for (auto& piece : (*this)(word)) out.push_back(std::move(piece));
  return join_tokens(out);
}

}  // namespace fnmt
