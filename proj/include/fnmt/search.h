#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fnmt/model.h"
#include "fnmt/vocab.h"

namespace fnmt::search {

inline constexpr std::size_t kDefaultBeam = 12;

struct SearchConfig {
  std::size_t beam = kDefaultBeam;
  std::size_t max_len = 100;
  int bos = kBosId;
  int eos = kEosId;
  // First-factor ids never proposed by the search.
  std::vector<int> blocked = {kPadId, kBosId};
};

class ScorerState {
 public:
  virtual ~ScorerState() = default;
};
using StatePtr = std::shared_ptr<const ScorerState>;

struct ScoredStep {
  StatePtr state;
  std::vector<double> factor1;  // log p(y1 | t)
};

// Scores one decoding step of a two-factor decoder for a fixed source.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual std::size_t factor1_size() const = 0;
  virtual std::size_t factor2_size() const = 0;
  virtual StatePtr initial() const = 0;
  // Feeds the previous outputs (bos / kNoFactor at the first step).
  virtual ScoredStep step(const ScorerState& prev, int y1_prev, int y2_prev) const = 0;
  // log p(y2 | t, y1), t being the readout stored in `state`.
  virtual std::vector<double> factor2(const ScorerState& state, int y1) const = 0;
};

template <typename T>
class ModelScorer final : public StepScorer {
 public:
  ModelScorer(const Model<T>& model, std::span<const int> source)
      : model_(model), encoded_(model.encode(source)) {}

  std::size_t factor1_size() const override { return model_.config().target_vocab; }
  std::size_t factor2_size() const override { return model_.config().factor_vocab; }

  StatePtr initial() const override {
    auto s = std::make_shared<State>();
    s->decoder = model_.initial_state(encoded_);
    return s;
  }

  ScoredStep step(const ScorerState& prev, int y1_prev, int y2_prev) const override {
    const auto& p = static_cast<const State&>(prev);
    auto next = std::make_shared<State>();
    auto st = model_.advance(encoded_, p.decoder, y1_prev, y2_prev);
    next->decoder = std::move(st.state);
    next->readout = std::move(st.readout);
    const Vec<T> lp = model_.log_factor1(next->readout);
    ScoredStep out;
    out.factor1.assign(lp.data(), lp.data() + lp.size());
    out.state = std::move(next);
    return out;
  }

  std::vector<double> factor2(const ScorerState& state, int y1) const override {
    const auto& s = static_cast<const State&>(state);
    const Vec<T> lp = model_.log_factor2(s.readout, y1);
    return {lp.data(), lp.data() + lp.size()};
  }

 private:
  struct State final : ScorerState {
    typename Model<T>::DecoderState decoder;
    Vec<T> readout;
  };

  const Model<T>& model_;
  typename Model<T>::Encoded encoded_;
};

struct FactorIds {
  int y1 = 0;
  int y2 = 0;
  auto operator<=>(const FactorIds&) const = default;
};

struct Hypothesis {
  std::vector<FactorIds> tokens;  // includes the final end-of-sequence step when finished
  double score = 0;               // sum of log p(y1) and log p(y2) over all steps
  bool finished = false;
  StatePtr state;
};

struct SearchResult {
  std::vector<Hypothesis> hypotheses;  // best first
  std::size_t scorer_steps = 0;        // decoder steps evaluated
};

// Per step: every live hypothesis is expanded by all first-factor ids and the
// n best form an intermediate beam; each entry is then expanded by all
// second-factor ids and the n best overall survive. Finished hypotheses leave
// the beam. Hypotheses still open at max_len are returned unfinished.
SearchResult beam_search_factored(const StepScorer& scorer, const SearchConfig& config);

// One output per step; the scorer must have a single second-factor class.
SearchResult beam_search_single(const StepScorer& scorer, const SearchConfig& config);

// Argmax y1, then argmax y2 given y1; ties go to the lower id.
Hypothesis greedy_factored(const StepScorer& scorer, const SearchConfig& config);

// True argmax over all sequences ending in eos within max_len or reaching
// max_len; equal scores resolve to the lexicographically smallest ids.
// Refuses search spaces above `guard` sequences.
Hypothesis exhaustive_search(const StepScorer& scorer, const SearchConfig& config,
                             double guard = 1e6);

// Independent re-scoring of a token sequence, accumulated as in the searches.
double rescore(const StepScorer& scorer, std::span<const FactorIds> tokens, const SearchConfig& config);

}  // namespace fnmt::search
