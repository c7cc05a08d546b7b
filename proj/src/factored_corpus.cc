#include "fnmt/factored_corpus.h"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "fnmt/casing.h"
#include "fnmt/error.h"
#include "fnmt/segmentation.h"
#include "fnmt/text_io.h"

namespace fnmt {

Codec parse_codec(std::string_view name) {
  if (name == "casing") return Codec::kCasing;
  if (name == "segmentation") return Codec::kSegmentation;
  throw InvalidInput("unknown codec \"" + std::string(name) + "\"");
}

std::string_view codec_name(Codec codec) {
  return codec == Codec::kCasing ? "casing" : "segmentation";
}

FactoredLine encode_line(std::string_view line, Codec codec) {
  Tokens lemmas, factors;
  for (const auto& tok : split_tokens(line)) {
    if (codec == Codec::kCasing) {
      auto enc = encode_casing(tok);
      lemmas.push_back(std::move(enc.lemma));
      factors.emplace_back(1, casing_tag(enc.factor));
    } else {
      auto enc = encode_segmentation(tok);
      lemmas.push_back(std::move(enc.lemma));
      factors.emplace_back(1, seg_tag(enc.factor));
    }
  }
  return {join_tokens(lemmas), join_tokens(factors)};
}

namespace {

std::pair<Tokens, Tokens> split_parallel(std::string_view lemmas, std::string_view factors,
                                         std::size_t line_no) {
  auto l = split_tokens(lemmas);
  auto f = split_tokens(factors);
  if (l.size() != f.size())
    throw FormatError("line " + std::to_string(line_no) + ": " + std::to_string(l.size()) +
                      " lemmas but " + std::to_string(f.size()) + " factors");
  return {std::move(l), std::move(f)};
}

std::vector<SegmentedToken> parse_segmented(std::string_view lemmas, std::string_view factors,
                                            std::size_t line_no) {
  auto [l, f] = split_parallel(lemmas, factors, line_no);
  std::vector<SegmentedToken> out;
  out.reserve(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) out.push_back({l[i], parse_seg_tag(f[i])});
  return out;
}

}  // namespace

std::string decode_line(std::string_view lemmas, std::string_view factors, Codec codec,
                        std::size_t line_no) {
  if (codec == Codec::kSegmentation) {
    Tokens out;
    for (const auto& tok : parse_segmented(lemmas, factors, line_no)) out.push_back(mark_subword(tok));
    return join_tokens(out);
  }
  auto [l, f] = split_parallel(lemmas, factors, line_no);
  Tokens out;
  out.reserve(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) out.push_back(apply_casing(l[i], parse_casing_tag(f[i])));
  return join_tokens(out);
}

std::string detokenize_line(std::string_view lemmas, std::string_view factors, std::size_t line_no) {
  return decode_segmentation(parse_segmented(lemmas, factors, line_no));
}

FactoredCorpus encode_corpus(const std::vector<std::string>& lines, Codec codec) {
  FactoredCorpus out;
  out.lemmas.reserve(lines.size());
  out.factors.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      auto enc = encode_line(lines[i], codec);
      out.lemmas.push_back(std::move(enc.lemmas));
      out.factors.push_back(std::move(enc.factors));
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> decode_corpus(const FactoredCorpus& corpus, Codec codec) {
  if (corpus.lemmas.size() != corpus.factors.size())
    throw FormatError(std::to_string(corpus.lemmas.size()) + " lemma lines but " +
                      std::to_string(corpus.factors.size()) + " factor lines");
  std::vector<std::string> out;
  out.reserve(corpus.lemmas.size());
  for (std::size_t i = 0; i < corpus.lemmas.size(); ++i)
    out.push_back(decode_line(corpus.lemmas[i], corpus.factors[i], codec, i + 1));
  return out;
}

VocabStats vocab_stats(const std::vector<std::string>& lines, Codec codec,
                       std::optional<std::size_t> lemma_limit) {
  std::set<std::string> surfaces;
  std::unordered_map<std::string, std::size_t> lemma_counts;
  // surface -> (lemma, reproducible)
  std::map<std::string, std::pair<std::string, bool>> forms;

  for (const auto& line : lines) {
    for (const auto& tok : split_tokens(line)) {
      std::string lemma;
      bool reproducible = true;
      if (codec == Codec::kCasing) {
        auto enc = encode_casing(tok);
        reproducible = apply_casing(enc.lemma, enc.factor) == tok;
        lemma = std::move(enc.lemma);
      } else {
        lemma = encode_segmentation(tok).lemma;
      }
      ++lemma_counts[lemma];
      forms.emplace(tok, std::make_pair(lemma, reproducible));
      surfaces.insert(tok);
    }
  }

  std::set<std::string> in_vocab;
  if (lemma_limit && *lemma_limit < lemma_counts.size()) {
    std::vector<std::pair<std::string, std::size_t>> ranked(lemma_counts.begin(), lemma_counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t i = 0; i < *lemma_limit; ++i) in_vocab.insert(ranked[i].first);
  } else {
    for (const auto& [lemma, _] : lemma_counts) in_vocab.insert(lemma);
  }

  VocabStats stats;
  stats.surface = surfaces.size();
  stats.lemma = lemma_counts.size();
  for (const auto& [surface, info] : forms)
    if (info.second && in_vocab.count(info.first)) ++stats.variants;
  return stats;
}

}  // namespace fnmt
