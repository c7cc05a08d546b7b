#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fnmt {

inline constexpr std::size_t kBleuOrder = 4;

struct BleuStats {
  std::array<std::size_t, kBleuOrder> matches{};  // clipped n-gram matches
  std::array<std::size_t, kBleuOrder> totals{};   // hypothesis n-grams
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  double precision(std::size_t order) const;  // order is 1-based
  double brevity_penalty() const;
  double score() const;
};

// Corpus-level counts over space-tokenized, case-sensitive lines.
BleuStats bleu_stats(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

// Geometric mean of the modified precisions times the brevity penalty, in
// [0, 1]. No smoothing: any zero precision gives 0. Orders longer than every
// hypothesis contribute no n-grams and are left out of the mean.
double bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

}  // namespace fnmt
