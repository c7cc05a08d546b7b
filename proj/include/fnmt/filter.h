#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fnmt/text_io.h"

namespace fnmt {

// Rules in evaluation order; the first failing rule is reported.
enum class FilterRule { kMinChars, kMaxWords, kLengthRatio, kLangId, kNgramOverlap, kPopRun };

std::string_view rule_name(FilterRule rule);

struct FilterConfig {
  std::size_t min_chars = 2;    // keep iff both sides have more characters
  std::size_t max_words = 79;   // keep iff both sides have at most this many words
  double max_ratio = 4.0;       // word-count ratio, inclusive
  std::size_t ngram = 8;
  std::size_t max_pop_run = 10; // longest SRC_POP run allowed on the target side
};

using FilterDecision = std::optional<FilterRule>;  // nullopt = keep

// Length rules and the SRC_POP run rule for one sentence pair. Characters are
// Unicode scalar values, words are space-separated tokens.
FilterDecision filter_pair(std::string_view src, std::string_view tgt, const FilterConfig& config = {});

// Longest run of consecutive SRC_POP tokens in a line.
std::size_t longest_pop_run(std::string_view line);

class NgramSet {
 public:
  explicit NgramSet(std::size_t n);

  void add(std::string_view line);
  bool overlaps(std::string_view line) const;

  std::size_t n() const { return n_; }
  std::size_t size() const { return grams_.size(); }
  bool empty() const { return grams_.empty(); }

 private:
  std::vector<std::string> grams_of(std::string_view line) const;

  std::size_t n_;
  std::unordered_set<std::string> grams_;
};

struct FilterReport {
  std::vector<FilterDecision> decisions;  // one per input pair
  std::map<FilterRule, std::size_t> rejected;
  std::size_t kept = 0;
  std::vector<std::string> warnings;

  std::size_t total() const { return decisions.size(); }
  // "lineno<TAB>rule" with 1-based line numbers and "keep" for kept pairs.
  std::vector<std::string> lines() const;
};

struct FilteredCorpus {
  std::vector<std::string> src;
  std::vector<std::string> tgt;
  FilterReport report;
};

struct FilterInputs {
  std::vector<std::string> test_sentences;     // for the n-gram rule
  std::optional<std::vector<bool>> langid;     // precomputed per-pair keep flags
};

// All rules, order preserving.
FilteredCorpus filter_corpus(const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                             const FilterConfig& config = {}, const FilterInputs& inputs = {});

// Only the n-gram overlap rule. An empty test set passes everything through
// and records a warning.
FilteredCorpus ngram_overlap_filter(const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                                    const std::vector<std::string>& test_sentences, std::size_t n = 8);

// Reads a langid sidecar: one of 1/0, keep/reject per line.
std::vector<bool> parse_langid_sidecar(const std::vector<std::string>& lines);

}  // namespace fnmt
