#pragma once

// Shared helpers for the unit and acceptance tests. The oracles here are
// written independently of the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fnmt/model.h"
#include "fnmt/osm.h"
#include "fnmt/search.h"

namespace fnmt::oracles {

inline std::string fixture_path(const std::string& name) { return std::string(FNMT_FIXTURE_DIR) + "/" + name; }

// Plain text of a marked subword line: glue all pieces, then split at the
// markers.
inline std::string oracle_detokenize(const std::string& marked) {
  const std::string marker = "\xE2\x96\x81";
  std::string glued;
  for (char c : marked)
    if (c != ' ') glued += c;
  std::string out;
  std::size_t pos = 0;
  while (pos <= glued.size()) {
    auto next = glued.find(marker, pos);
    if (next == std::string::npos) next = glued.size();
    if (next > pos) out += (out.empty() ? "" : " ") + glued.substr(pos, next - pos);
    pos = next + marker.size();
  }
  return out;
}

// Step-wise distributions drawn from a hash of the history: arbitrary
// normalized factor tables for search tests.
class TableScorer final : public search::StepScorer {
 public:
  TableScorer(std::size_t v1, std::size_t v2, std::uint64_t seed, double temperature = 1.5)
      : v1_(v1), v2_(v2), seed_(seed), temperature_(temperature) {}

  std::size_t factor1_size() const override { return v1_; }
  std::size_t factor2_size() const override { return v2_; }

  search::StatePtr initial() const override { return std::make_shared<State>(); }

  search::ScoredStep step(const search::ScorerState& prev, int y1_prev, int y2_prev) const override {
    auto next = std::make_shared<State>(static_cast<const State&>(prev));
    next->history.push_back(y1_prev);
    next->history.push_back(y2_prev);
    return {next, table(next->history, -1, v1_)};
  }

  std::vector<double> factor2(const search::ScorerState& state, int y1) const override {
    return table(static_cast<const State&>(state).history, y1, v2_);
  }

 private:
  struct State final : search::ScorerState {
    std::vector<int> history;
  };

  std::vector<double> table(const std::vector<int>& history, int extra, std::size_t n) const {
    std::uint64_t h = seed_ * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(extra + 7);
    for (int x : history) h = (h ^ static_cast<std::uint64_t>(x + 3)) * 0x100000001B3ULL;
    std::mt19937_64 rng(h);
    std::normal_distribution<double> z(0.0, temperature_);
    std::vector<double> logits(n);
    for (auto& l : logits) l = z(rng);
    const double m = *std::max_element(logits.begin(), logits.end());
    double s = 0;
    for (double l : logits) s += std::exp(l - m);
    for (auto& l : logits) l = l - m - std::log(s);
    return logits;
  }

  std::size_t v1_, v2_;
  std::uint64_t seed_;
  double temperature_;
};

// Brute-force argmax over every factored sequence: a sequence ends at the
// first eos or at max_len. Independent of the library's exhaustive search.
struct BruteForceBest {
  std::vector<search::FactorIds> tokens;
  double score = -INFINITY;
};

inline void brute_force(const search::StepScorer& scorer, const search::SearchConfig& cfg,
                        const search::ScorerState& state, int y1_prev, int y2_prev,
                        std::vector<search::FactorIds>& prefix, double score, BruteForceBest& best) {
  const auto step = scorer.step(state, y1_prev, y2_prev);
  for (int y1 = 0; y1 < static_cast<int>(scorer.factor1_size()); ++y1) {
    if (std::find(cfg.blocked.begin(), cfg.blocked.end(), y1) != cfg.blocked.end()) continue;
    const auto f2 = scorer.factor2(*step.state, y1);
    for (int y2 = 0; y2 < static_cast<int>(f2.size()); ++y2) {
      prefix.push_back({y1, y2});
      const double s = score + step.factor1[static_cast<std::size_t>(y1)] + f2[static_cast<std::size_t>(y2)];
      if (y1 == cfg.eos || prefix.size() == cfg.max_len) {
        if (s > best.score || (s == best.score && prefix < best.tokens)) best = {prefix, s};
      } else {
        brute_force(scorer, cfg, *step.state, y1, y2, prefix, s, best);
      }
      prefix.pop_back();
    }
  }
}

inline BruteForceBest brute_force(const search::StepScorer& scorer, const search::SearchConfig& cfg) {
  BruteForceBest best;
  std::vector<search::FactorIds> prefix;
  brute_force(scorer, cfg, *scorer.initial(), cfg.bos, kNoFactor, prefix, 0.0, best);
  return best;
}

struct GradCheck {
  std::string worst_tensor;
  double max_rel_error = 0;
  std::size_t checked = 0;
};

// Central differences on `per_tensor` sampled entries of every tensor (all
// entries when the tensor is smaller). Relative error uses a floor of 1e-6
// in the denominator so that entries whose gradient is numerically zero are
// compared absolutely.
inline GradCheck check_gradients(const ModelConfig& cfg, ModelParams<double> params, const std::vector<Example>& batch,
                                 const LossOptions& opts, std::size_t per_tensor, std::uint64_t seed,
                                 double step = 1e-5) {
  ModelParams<double> grads = ModelParams<double>::zeros(cfg);
  loss_and_gradient<double>(Model<double>(cfg, params), batch, opts, grads);

  std::map<std::string, const Mat<double>*> gmats;
  std::map<std::string, const Vec<double>*> gvecs;
  grads.visit([&](const std::string& name, const auto& t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Mat<double>>) gmats[name] = &t;
    else gvecs[name] = &t;
  });

  GradCheck out;
  std::mt19937_64 rng(seed);
  auto eval = [&](const ModelParams<double>& p) { return loss<double>(Model<double>(cfg, p), batch, opts); };
  std::vector<std::pair<std::string, Eigen::Index>> targets;
  params.visit([&](const std::string& name, auto& t) {
    const Eigen::Index n = t.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    if (idx.size() > per_tensor) idx.resize(per_tensor);
    for (auto i : idx) targets.emplace_back(name, i);
  });
  for (const auto& [name, i] : targets) {
    double analytic = 0;
    if (gmats.count(name)) analytic = gmats[name]->data()[i];
    else analytic = gvecs[name]->data()[i];
    auto plus = params, minus = params;
    auto bump = [&](ModelParams<double>& p, double d) {
      p.visit([&](const std::string& n, auto& t) {
        if (n == name) t.data()[i] += d;
      });
    };
    bump(plus, step);
    bump(minus, -step);
    const double numeric = (eval(plus) - eval(minus)) / (2 * step);
    const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    ++out.checked;
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_tensor = name;
    }
  }
  return out;
}

inline std::vector<Example> random_examples(const ModelConfig& cfg, std::size_t count, std::size_t max_len,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](std::size_t lo, std::size_t hi) {
    return static_cast<int>(std::uniform_int_distribution<std::size_t>(lo, hi)(rng));
  };
  std::vector<Example> out;
  for (std::size_t k = 0; k < count; ++k) {
    Example ex;
    const int sl = uni(1, max_len), tl = uni(1, max_len);
    for (int i = 0; i < sl; ++i) ex.source.push_back(uni(kNumReserved - 1, cfg.source_vocab - 1));
    for (int i = 0; i < tl; ++i) {
      ex.y1.push_back(uni(kNumReserved - 1, cfg.target_vocab - 1));
      ex.y2.push_back(uni(0, cfg.factor_vocab - 1));
    }
    ex.y1.push_back(kEosId);
    ex.y2.push_back(uni(0, cfg.factor_vocab - 1));
    out.push_back(std::move(ex));
  }
  return out;
}

// Random alignment with links drawn independently; may leave words unaligned.
inline osm::Alignment random_links(std::size_t src_len, std::size_t tgt_len, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution on(density);
  osm::Alignment a;
  for (std::size_t s = 0; s < src_len; ++s)
    for (std::size_t t = 0; t < tgt_len; ++t)
      if (on(rng)) a.push_back({s, t});
  return a;
}

// Exactly one link per target word.
inline osm::Alignment random_function(std::size_t src_len, std::size_t tgt_len, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, src_len - 1);
  osm::Alignment a;
  for (std::size_t t = 0; t < tgt_len; ++t) a.push_back({pick(rng), t});
  std::sort(a.begin(), a.end());
  return a;
}

inline Tokens word_list(std::size_t n, std::mt19937_64& rng, std::size_t distinct = 6) {
  std::uniform_int_distribution<std::size_t> pick(0, distinct - 1);
  Tokens out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(pick(rng)));
  return out;
}

}  // namespace fnmt::oracles
