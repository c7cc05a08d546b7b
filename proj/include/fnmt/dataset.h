#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fnmt/model.h"
#include "fnmt/model_config.h"
#include "fnmt/osm.h"
#include "fnmt/vocab.h"

namespace fnmt {

struct TargetToken {
  std::string lemma;
  int factor = 0;
  bool operator==(const TargetToken&) const = default;
};

// Factor streams of one target line, ending with the end-of-sequence step.
//   casing:       cased tokens -> (lower-cased lemma, class)
//   segmentation: marked subwords -> (bare subword, separated)
//   osnmt:        operation sequence -> (op, preceding pop count), sentinel last
//   none:         tokens -> (token, 0)
std::vector<TargetToken> target_factors(std::string_view line, Application app,
                                        int max_pops = osm::kDefaultMaxPops);

// First-factor tokens of each line, for building the target vocabulary.
std::vector<std::string> target_lemma_lines(const std::vector<std::string>& lines, Application app);

Example make_example(std::string_view source, std::string_view target, Application app, const Vocab& source_vocab,
                     const Vocab& target_vocab);

std::vector<Example> make_examples(const std::vector<std::string>& sources, const std::vector<std::string>& targets,
                                   Application app, const Vocab& source_vocab, const Vocab& target_vocab);

}  // namespace fnmt
