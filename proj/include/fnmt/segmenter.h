#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>

#include "fnmt/text_io.h"

namespace fnmt {

// Greedy longest-match subword splitter over a fixed lexicon; positions no
// lexicon entry covers become single code points. The first piece carries the
// word-boundary marker. A stand-in for a trained unigram segmenter.
class FallbackSegmenter {
 public:
  FallbackSegmenter() = default;
  explicit FallbackSegmenter(std::set<std::string> lexicon);

  Tokens operator()(std::string_view word) const;
  // Segments every space-separated word of a line.
  std::string segment_line(std::string_view line) const;

  const std::set<std::string>& lexicon() const { return lexicon_; }

 private:
  std::set<std::string> lexicon_;
  std::size_t longest_ = 0;  // in code points
};

}  // namespace fnmt
