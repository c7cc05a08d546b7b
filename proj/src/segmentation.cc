#include "fnmt/segmentation.h"

#include "fnmt/error.h"

namespace fnmt {

char seg_tag(SegFlag flag) { return flag.separated ? '1' : '0'; }

SegFlag parse_seg_tag(std::string_view tag) {
  if (tag == "1") return {true};
  if (tag == "0") return {false};
  throw FormatError("unknown segmentation flag \"" + std::string(tag) + "\"");
}

bool has_word_boundary(std::string_view subword) { return subword.starts_with(kWordBoundary); }

SegmentedToken encode_segmentation(std::string_view subword) {
  const bool separated = has_word_boundary(subword);
  auto bare = separated ? subword.substr(kWordBoundary.size()) : subword;
  if (bare.empty())
    throw InvalidInput("subword \"" + std::string(subword) + "\" has no content besides the marker");
  if (bare.find(kWordBoundary) != std::string_view::npos)
    throw InvalidInput("word-boundary marker inside subword \"" + std::string(subword) + "\"");
  return {std::string(bare), {separated}};
}

std::string mark_subword(const SegmentedToken& token) {
  return token.factor.separated ? std::string(kWordBoundary) + token.lemma : token.lemma;
}

std::string decode_segmentation(std::span<const SegmentedToken> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && tokens[i].factor.separated) out += ' ';
    out += tokens[i].lemma;
  }
  return out;
}

std::string detokenize_marked(std::string_view line) {
  std::string out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line.substr(i).starts_with(kWordBoundary)) {
      out += ' ';
      i += kWordBoundary.size();
    } else if (line[i] == ' ') {
      ++i;
    } else {
      out += line[i++];
    }
  }
  const auto first = out.find_first_not_of(' ');
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(' ');
  return out.substr(first, last - first + 1);
}

}  // namespace fnmt
