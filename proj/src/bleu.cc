#include "fnmt/bleu.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "fnmt/error.h"
#include "fnmt/text_io.h"

namespace fnmt {

namespace {

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngrams(const Tokens& words, std::size_t n) {
  Counts out;
  for (std::size_t i = 0; i + n <= words.size(); ++i)
    ++out[std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i),
                                   words.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

double BleuStats::precision(std::size_t order) const {
  const auto t = totals.at(order - 1);
  return t == 0 ? 0.0 : static_cast<double>(matches[order - 1]) / static_cast<double>(t);
}

double BleuStats::brevity_penalty() const {
  if (hyp_length == 0) return 0.0;
  if (hyp_length >= ref_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
}

double BleuStats::score() const {
  if (hyp_length == 0) return ref_length == 0 ? 1.0 : 0.0;
  double log_sum = 0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    if (totals[n - 1] == 0) continue;
    if (matches[n - 1] == 0) return 0.0;
    log_sum += std::log(precision(n));
    ++orders;
  }
  return brevity_penalty() * std::exp(log_sum / static_cast<double>(orders));
}

BleuStats bleu_stats(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size())
    throw FormatError("hypotheses have " + std::to_string(hypotheses.size()) + " lines, references have " +
                      std::to_string(references.size()));
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = split_tokens(hypotheses[i]);
    const auto ref = split_tokens(references[i]);
    stats.hyp_length += hyp.size();
    stats.ref_length += ref.size();
    for (std::size_t n = 1; n <= kBleuOrder; ++n) {
      const auto h = ngrams(hyp, n);
      const auto r = ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        stats.totals[n - 1] += count;
        const auto it = r.find(gram);
        if (it != r.end()) stats.matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  return stats;
}

double bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  return bleu_stats(hypotheses, references).score();
}

}  // namespace fnmt
