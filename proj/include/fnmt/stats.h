#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fnmt/casing.h"
#include "fnmt/factored_corpus.h"
#include "fnmt/model_config.h"

namespace fnmt {

struct CorpusStats {
  Application application = Application::kNone;
  std::size_t lines = 0;
  std::size_t tokens = 0;
  VocabStats projection;  // segmentation codec for segmentation corpora, casing otherwise
  std::array<std::size_t, kNumCasingClasses> casing_histogram{};
  std::size_t mixed_case_tokens = 0;  // undefined class that lower-casing would alter
  // OSNMT corpora only (lines are operation sequences).
  std::map<std::size_t, std::size_t> pop_runs;
  std::size_t lines_over_pop_limit = 0;

  double mixed_case_rate() const;
  std::vector<std::string> report() const;
};

CorpusStats corpus_stats(const std::vector<std::string>& lines, Application application,
                         std::size_t max_pop_run = 10);

}  // namespace fnmt
