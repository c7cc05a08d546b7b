#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnmt/casing.h"
#include "fnmt/model_io.h"
#include "fnmt/osm.h"
#include "fnmt/search.h"
#include "fnmt/segmentation.h"

namespace fnmt {

// Cased tokens joined by spaces; marked subwords are detokenized.
std::string render_casing(std::span<const CasedToken> tokens);
std::string render_segmentation(std::span<const SegmentedToken> tokens);
// Plain first-factor tokens.
std::string render_plain(const Tokens& tokens);

struct OsnmtRendering {
  osm::Compiled compiled;   // word level
  std::size_t rank = 0;     // index of the hypothesis used
  bool flagged = false;     // no hypothesis compiled; tokens with ops stripped
};

// Uses the best-ranked hypothesis that defactors and compiles. Marked subword
// targets are joined back into words.
OsnmtRendering render_osnmt(const std::vector<std::vector<osm::FactoredOp>>& ranked, std::size_t src_len);

struct DecodedSentence {
  std::string text;
  osm::Alignment alignment;  // OSNMT only
  bool flagged = false;
  double score = 0;
  std::size_t steps = 0;  // decoder steps of the chosen hypothesis
};

// Runs factored beam search and the postprocessing matching the model's
// application. Parameters are shared read-only.
class Decoder {
 public:
  explicit Decoder(ModelBundle bundle);

  const ModelBundle& bundle() const { return bundle_; }

  // Up to `nbest` outputs, best first (OSNMT: only compilable hypotheses,
  // or a single flagged fallback).
  std::vector<DecodedSentence> decode(std::string_view source_line, const search::SearchConfig& config,
                                      std::size_t nbest = 1) const;

  // Postprocessing of already searched hypotheses.
  std::vector<DecodedSentence> render(const std::vector<search::Hypothesis>& hyps, std::size_t src_len,
                                      std::size_t nbest) const;

 private:
  ModelBundle bundle_;
  Model<float> model_;
};

}  // namespace fnmt
