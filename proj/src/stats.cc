#include "fnmt/stats.h"

#include <algorithm>
#include <cstdio>

#include "fnmt/osm.h"
#include "fnmt/text_io.h"

namespace fnmt {

double CorpusStats::mixed_case_rate() const {
  return tokens == 0 ? 0.0 : static_cast<double>(mixed_case_tokens) / static_cast<double>(tokens);
}

std::vector<std::string> CorpusStats::report() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& key, const std::string& value) { out.push_back(key + '\t' + value); };
  add("application", std::string(application_name(application)));
  add("lines", std::to_string(lines));
  add("tokens", std::to_string(tokens));
  add("surface_vocab", std::to_string(projection.surface));
  add("lemma_vocab", std::to_string(projection.lemma));
  add("variants", std::to_string(projection.variants));
  for (std::size_t c = 0; c < kNumCasingClasses; ++c)
    add(std::string("casing.") + casing_tag(static_cast<CasingClass>(c)), std::to_string(casing_histogram[c]));
  add("mixed_case_tokens", std::to_string(mixed_case_tokens));
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.6f", mixed_case_rate());
  add("mixed_case_rate", rate);
  if (application == Application::kOsnmt) {
    for (const auto& [run, count] : pop_runs) add("pop_run." + std::to_string(run), std::to_string(count));
    add("pop_run_over_limit", std::to_string(lines_over_pop_limit));
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<std::string>& lines, Application application, std::size_t max_pop_run) {
  CorpusStats stats;
  stats.application = application;
  stats.lines = lines.size();

  std::vector<std::string> words;
  words.reserve(lines.size());
  for (const auto& line : lines) {
    Tokens kept;
    for (auto& tok : split_tokens(line)) {
      if (application == Application::kOsnmt && osm::is_reserved_name(tok)) continue;
      kept.push_back(std::move(tok));
    }
    for (const auto& tok : kept) {
      ++stats.casing_histogram[static_cast<std::size_t>(classify_casing(tok))];
      if (is_lossy_casing(tok)) ++stats.mixed_case_tokens;
    }
    stats.tokens += kept.size();
    words.push_back(join_tokens(kept));

    if (application == Application::kOsnmt) {
      const auto hist = osm::pop_run_histogram(osm::parse_program(line));
      for (const auto& [run, count] : hist) stats.pop_runs[run] += count;
      if (!hist.empty() && hist.rbegin()->first > max_pop_run) ++stats.lines_over_pop_limit;
    }
  }
  stats.projection =
      vocab_stats(words, application == Application::kSegmentation ? Codec::kSegmentation : Codec::kCasing);
  return stats;
}

}  // namespace fnmt
