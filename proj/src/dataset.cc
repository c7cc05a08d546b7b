#include "fnmt/dataset.h"

#include "fnmt/casing.h"
#include "fnmt/error.h"
#include "fnmt/segmentation.h"

namespace fnmt {

std::vector<TargetToken> target_factors(std::string_view line, Application app, int max_pops) {
  std::vector<TargetToken> out;
  if (app == Application::kOsnmt) {
    for (auto& p : osm::factor(osm::parse_program(line), max_pops)) out.push_back({std::move(p.lemma), p.factor.n});
    return out;
  }
  for (const auto& tok : split_tokens(line)) {
    switch (app) {
      case Application::kCasing: {
        auto t = encode_casing(tok);
        out.push_back({std::move(t.lemma), static_cast<int>(t.factor)});
        break;
      }
      case Application::kSegmentation: {
        auto t = encode_segmentation(tok);
        out.push_back({std::move(t.lemma), t.factor.separated ? 1 : 0});
        break;
      }
      default:
        out.push_back({tok, 0});
    }
  }
  out.push_back({std::string(osm::kEndOfSequence), 0});
  return out;
}

std::vector<std::string> target_lemma_lines(const std::vector<std::string>& lines, Application app) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    Tokens lemmas;
    for (auto& t : target_factors(line, app)) lemmas.push_back(std::move(t.lemma));
    lemmas.pop_back();
    out.push_back(join_tokens(lemmas));
  }
  return out;
}

Example make_example(std::string_view source, std::string_view target, Application app, const Vocab& source_vocab,
                     const Vocab& target_vocab) {
  Example ex;
  ex.source = source_vocab.encode(split_tokens(source));
  if (ex.source.empty()) throw InvalidInput("empty source sentence");
  for (const auto& t : target_factors(target, app)) {
    ex.y1.push_back(target_vocab.id(t.lemma));
    ex.y2.push_back(t.factor);
  }
  return ex;
}

std::vector<Example> make_examples(const std::vector<std::string>& sources, const std::vector<std::string>& targets,
                                   Application app, const Vocab& source_vocab, const Vocab& target_vocab) {
  if (sources.size() != targets.size())
    throw FormatError("source has " + std::to_string(sources.size()) + " lines, target has " +
                      std::to_string(targets.size()));
  std::vector<Example> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    try {
      out.push_back(make_example(sources[i], targets[i], app, source_vocab, target_vocab));
    } catch (const Error& e) {
      throw FormatError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fnmt
