#include "fnmt/filter.h"

#include <algorithm>

#include "fnmt/error.h"
#include "fnmt/osm.h"
#include "fnmt/unicode.h"

namespace fnmt {

std::string_view rule_name(FilterRule rule) {
  switch (rule) {
    case FilterRule::kMinChars: return "min-chars";
    case FilterRule::kMaxWords: return "max-words";
    case FilterRule::kLengthRatio: return "length-ratio";
    case FilterRule::kLangId: return "langid";
    case FilterRule::kNgramOverlap: return "ngram-overlap";
    case FilterRule::kPopRun: return "pop-run";
  }
  return "?";
}

namespace {

std::size_t word_count(std::string_view line) {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : line) {
    if (ch == ' ') {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

}  // namespace

std::size_t longest_pop_run(std::string_view line) {
  std::size_t best = 0, run = 0, pos = 0;
  while (pos <= line.size()) {
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    if (line.substr(pos, end - pos) == osm::kSrcPop) {
      best = std::max(best, ++run);
    } else {
      run = 0;
    }
    pos = end + 1;
  }
  return best;
}

FilterDecision filter_pair(std::string_view src, std::string_view tgt, const FilterConfig& config) {
  if (unicode::length(src) <= config.min_chars || unicode::length(tgt) <= config.min_chars)
    return FilterRule::kMinChars;
  const auto ns = word_count(src), nt = word_count(tgt);
  if (ns > config.max_words || nt > config.max_words) return FilterRule::kMaxWords;
  if (ns == 0 || nt == 0) return FilterRule::kLengthRatio;
  const auto lo = static_cast<double>(std::min(ns, nt));
  const auto hi = static_cast<double>(std::max(ns, nt));
  if (hi > config.max_ratio * lo) return FilterRule::kLengthRatio;
  if (longest_pop_run(tgt) > config.max_pop_run) return FilterRule::kPopRun;
  return std::nullopt;
}

NgramSet::NgramSet(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidInput("n-gram order must be at least 1");
}

std::vector<std::string> NgramSet::grams_of(std::string_view line) const {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < line.size()) {
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    if (end > pos) words.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i + n_ <= words.size(); ++i) {
    std::string g(words[i]);
    for (std::size_t k = 1; k < n_; ++k) {
      g += '\x1f';
      g += words[i + k];
    }
    out.push_back(std::move(g));
  }
  return out;
}

void NgramSet::add(std::string_view line) {
  for (auto& g : grams_of(line)) grams_.insert(std::move(g));
}

bool NgramSet::overlaps(std::string_view line) const {
  if (grams_.empty()) return false;
  const auto grams = grams_of(line);
  return std::any_of(grams.begin(), grams.end(), [&](const auto& g) { return grams_.contains(g); });
}

std::vector<std::string> FilterReport::lines() const {
  std::vector<std::string> out;
  out.reserve(decisions.size());
  for (std::size_t i = 0; i < decisions.size(); ++i)
    out.push_back(std::to_string(i + 1) + '\t' + std::string(decisions[i] ? rule_name(*decisions[i]) : "keep"));
  return out;
}

namespace {

template <typename Decide>
FilteredCorpus run_filter(const std::vector<std::string>& src, const std::vector<std::string>& tgt, Decide decide) {
  if (src.size() != tgt.size())
    throw FormatError("source has " + std::to_string(src.size()) + " lines, target has " + std::to_string(tgt.size()));
  FilteredCorpus out;
  out.report.decisions.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const FilterDecision d = decide(i);
    out.report.decisions.push_back(d);
    if (d) {
      ++out.report.rejected[*d];
    } else {
      ++out.report.kept;
      out.src.push_back(src[i]);
      out.tgt.push_back(tgt[i]);
    }
  }
  return out;
}

NgramSet make_test_set(const std::vector<std::string>& test_sentences, std::size_t n) {
  NgramSet set(n);
  for (const auto& s : test_sentences) set.add(s);
  return set;
}

}  // namespace

FilteredCorpus filter_corpus(const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                             const FilterConfig& config, const FilterInputs& inputs) {
  if (inputs.langid && inputs.langid->size() != src.size())
    throw FormatError("langid sidecar has " + std::to_string(inputs.langid->size()) + " lines, corpus has " +
                      std::to_string(src.size()));
  const auto tests = make_test_set(inputs.test_sentences, config.ngram);
  auto out = run_filter(src, tgt, [&](std::size_t i) -> FilterDecision {
    const auto& s = src[i];
    const auto& t = tgt[i];
    if (unicode::length(s) <= config.min_chars || unicode::length(t) <= config.min_chars)
      return FilterRule::kMinChars;
    FilterConfig length_only = config;
    length_only.max_pop_run = static_cast<std::size_t>(-1);
    if (auto d = filter_pair(s, t, length_only)) return d;
    if (inputs.langid && !(*inputs.langid)[i]) return FilterRule::kLangId;
    if (tests.overlaps(s) || tests.overlaps(t)) return FilterRule::kNgramOverlap;
    if (longest_pop_run(t) > config.max_pop_run) return FilterRule::kPopRun;
    return std::nullopt;
  });
  if (tests.empty()) out.report.warnings.push_back("no test n-grams; n-gram overlap rule inactive");
  return out;
}

FilteredCorpus ngram_overlap_filter(const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                                    const std::vector<std::string>& test_sentences, std::size_t n) {
  const auto tests = make_test_set(test_sentences, n);
  auto out = run_filter(src, tgt, [&](std::size_t i) -> FilterDecision {
    if (tests.overlaps(src[i]) || tests.overlaps(tgt[i])) return FilterRule::kNgramOverlap;
    return std::nullopt;
  });
  if (tests.empty()) out.report.warnings.push_back("empty test set; corpus passed through unchanged");
  return out;
}

std::vector<bool> parse_langid_sidecar(const std::vector<std::string>& lines) {
  std::vector<bool> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l == "1" || l == "keep") out.push_back(true);
    else if (l == "0" || l == "reject") out.push_back(false);
    else throw FormatError("langid sidecar line " + std::to_string(i + 1) + ": expected 1, 0, keep or reject");
  }
  return out;
}

}  // namespace fnmt
