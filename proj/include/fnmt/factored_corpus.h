#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fnmt {

enum class Codec { kCasing, kSegmentation };

Codec parse_codec(std::string_view name);
std::string_view codec_name(Codec codec);

struct FactoredLine {
  std::string lemmas;
  std::string factors;
};

// Per-token application of the token codecs to a space-separated line.
FactoredLine encode_line(std::string_view line, Codec codec);

// Inverse of encode_line. For segmentation the marked subword line is
// restored (use detokenize_marked or decode_segmentation for plain text).
// `line_no` is only used in error messages.
std::string decode_line(std::string_view lemmas, std::string_view factors, Codec codec,
                        std::size_t line_no = 0);

// Plain text from a segmentation-factored line pair.
std::string detokenize_line(std::string_view lemmas, std::string_view factors,
                            std::size_t line_no = 0);

struct FactoredCorpus {
  std::vector<std::string> lemmas;
  std::vector<std::string> factors;
};

FactoredCorpus encode_corpus(const std::vector<std::string>& lines, Codec codec);
std::vector<std::string> decode_corpus(const FactoredCorpus& corpus, Codec codec);

struct VocabStats {
  std::size_t surface = 0;   // distinct tokens y
  std::size_t lemma = 0;     // distinct first-factor tokens y1
  std::size_t variants = 0;  // distinct surface forms reproducible from the lemma vocabulary
};

// With `lemma_limit`, only the most frequent lemmas (ties lexicographic) count
// as in-vocabulary and variants are restricted to forms over those lemmas.
VocabStats vocab_stats(const std::vector<std::string>& lines, Codec codec,
                       std::optional<std::size_t> lemma_limit = std::nullopt);

}  // namespace fnmt
