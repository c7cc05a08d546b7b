#include "fnmt/search.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fnmt/error.h"

namespace fnmt::search {

namespace {

std::vector<int> allowed_y1(const StepScorer& scorer, const SearchConfig& config) {
  std::vector<int> ids;
  for (int y = 0; y < static_cast<int>(scorer.factor1_size()); ++y)
    if (std::find(config.blocked.begin(), config.blocked.end(), y) == config.blocked.end()) ids.push_back(y);
  if (ids.empty()) throw InvalidInput("every first-factor id is blocked");
  return ids;
}

void check_config(const SearchConfig& config) {
  if (config.beam < 1) throw InvalidInput("beam size must be at least 1");
  if (config.max_len < 1) throw InvalidInput("max length must be at least 1");
}

void check_finite(double score) {
  if (!std::isfinite(score)) throw Error("non-finite hypothesis score during search");
}

int prev_y1(const Hypothesis& h, const SearchConfig& c) { return h.tokens.empty() ? c.bos : h.tokens.back().y1; }
int prev_y2(const Hypothesis& h) { return h.tokens.empty() ? kNoFactor : h.tokens.back().y2; }

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

// Selects up to n candidates in order; `less` ranks best first.
template <typename Cand, typename Less>
void keep_best(std::vector<Cand>& cands, std::size_t n, Less less) {
  if (cands.size() > n) {
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(n), cands.end(), less);
    cands.resize(n);
  } else {
    std::sort(cands.begin(), cands.end(), less);
  }
}

struct Partial {
  double score;
  std::size_t hyp;
  int y1;
};

struct Full {
  double score;
  std::size_t partial;
  int y2;
};

template <typename Expand>
SearchResult run_beam(const StepScorer& scorer, const SearchConfig& config, Expand expand) {
  check_config(config);
  SearchResult result;
  std::vector<Hypothesis> live(1);
  live[0].state = scorer.initial();
  for (std::size_t t = 0; t < config.max_len && !live.empty(); ++t) {
    auto next = expand(live, result.scorer_steps);
    live.clear();
    for (auto& h : next) {
      if (h.tokens.back().y1 == config.eos || t + 1 == config.max_len) {
        h.finished = h.tokens.back().y1 == config.eos;
        result.hypotheses.push_back(std::move(h));
      } else {
        live.push_back(std::move(h));
      }
    }
  }
  std::stable_sort(result.hypotheses.begin(), result.hypotheses.end(), better);
  return result;
}

}  // namespace

SearchResult beam_search_factored(const StepScorer& scorer, const SearchConfig& config) {
  const auto ids = allowed_y1(scorer, config);
  const auto v2 = static_cast<int>(scorer.factor2_size());
  return run_beam(scorer, config, [&](const std::vector<Hypothesis>& live, std::size_t& steps) {
    std::vector<ScoredStep> scored;
    scored.reserve(live.size());
    std::vector<Partial> partial;
    for (std::size_t h = 0; h < live.size(); ++h) {
      scored.push_back(scorer.step(*live[h].state, prev_y1(live[h], config), prev_y2(live[h])));
      ++steps;
      for (int y1 : ids) partial.push_back({live[h].score + scored.back().factor1[static_cast<std::size_t>(y1)], h, y1});
    }
    keep_best(partial, config.beam, [](const Partial& a, const Partial& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.y1 != b.y1) return a.y1 < b.y1;
      return a.hyp < b.hyp;
    });

    std::vector<Full> full;
    for (std::size_t k = 0; k < partial.size(); ++k) {
      const auto lp2 = scorer.factor2(*scored[partial[k].hyp].state, partial[k].y1);
      for (int y2 = 0; y2 < v2; ++y2) full.push_back({partial[k].score + lp2[static_cast<std::size_t>(y2)], k, y2});
    }
    keep_best(full, config.beam, [](const Full& a, const Full& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.y2 != b.y2) return a.y2 < b.y2;
      return a.partial < b.partial;
    });

    std::vector<Hypothesis> next;
    next.reserve(full.size());
    for (const auto& f : full) {
      check_finite(f.score);
      const auto& p = partial[f.partial];
      Hypothesis h;
      h.tokens = live[p.hyp].tokens;
      h.tokens.push_back({p.y1, f.y2});
      h.score = f.score;
      h.state = scored[p.hyp].state;
      next.push_back(std::move(h));
    }
    return next;
  });
}

SearchResult beam_search_single(const StepScorer& scorer, const SearchConfig& config) {
  if (scorer.factor2_size() != 1) throw InvalidInput("single-output search needs a one-class second factor");
  const auto ids = allowed_y1(scorer, config);
  return run_beam(scorer, config, [&](const std::vector<Hypothesis>& live, std::size_t& steps) {
    std::vector<ScoredStep> scored;
    std::vector<Partial> cands;
    for (std::size_t h = 0; h < live.size(); ++h) {
      scored.push_back(scorer.step(*live[h].state, prev_y1(live[h], config), prev_y2(live[h])));
      ++steps;
      for (int y : ids) cands.push_back({live[h].score + scored.back().factor1[static_cast<std::size_t>(y)], h, y});
    }
    keep_best(cands, config.beam, [](const Partial& a, const Partial& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.y1 != b.y1) return a.y1 < b.y1;
      return a.hyp < b.hyp;
    });
    std::vector<Hypothesis> next;
    for (const auto& c : cands) {
      check_finite(c.score);
      Hypothesis h;
      h.tokens = live[c.hyp].tokens;
      h.tokens.push_back({c.y1, 0});
      h.score = c.score;
      h.state = scored[c.hyp].state;
      next.push_back(std::move(h));
    }
    return next;
  });
}

Hypothesis greedy_factored(const StepScorer& scorer, const SearchConfig& config) {
  check_config(config);
  const auto ids = allowed_y1(scorer, config);
  Hypothesis h;
  h.state = scorer.initial();
  for (std::size_t t = 0; t < config.max_len; ++t) {
    auto st = scorer.step(*h.state, prev_y1(h, config), prev_y2(h));
    int y1 = ids.front();
    for (int y : ids)
      if (st.factor1[static_cast<std::size_t>(y)] > st.factor1[static_cast<std::size_t>(y1)]) y1 = y;
    const auto lp2 = scorer.factor2(*st.state, y1);
    const auto y2 = static_cast<int>(std::max_element(lp2.begin(), lp2.end()) - lp2.begin());
    h.score += st.factor1[static_cast<std::size_t>(y1)];
    h.score += lp2[static_cast<std::size_t>(y2)];
    h.tokens.push_back({y1, y2});
    h.state = st.state;
    if (y1 == config.eos) {
      h.finished = true;
      break;
    }
  }
  return h;
}

Hypothesis exhaustive_search(const StepScorer& scorer, const SearchConfig& config, double guard) {
  check_config(config);
  const auto ids = allowed_y1(scorer, config);
  const bool eos_allowed = std::find(ids.begin(), ids.end(), config.eos) != ids.end();
  const double v2 = static_cast<double>(scorer.factor2_size());
  const double open = (static_cast<double>(ids.size()) - (eos_allowed ? 1 : 0)) * v2;
  const double closing = (eos_allowed ? 1.0 : 0.0) * v2;
  double total = 0, prefixes = 1;
  for (std::size_t len = 1; len <= config.max_len; ++len) {
    total += prefixes * closing;
    prefixes *= open;
    if (total + prefixes > guard) throw InvalidInput("exhaustive search space exceeds the guard");
  }
  total += prefixes;

  Hypothesis best;
  bool have = false;
  std::vector<FactorIds> tokens;
  std::function<void(const StatePtr&, double)> dfs = [&](const StatePtr& state, double score) {
    const int y1_prev = tokens.empty() ? config.bos : tokens.back().y1;
    const int y2_prev = tokens.empty() ? kNoFactor : tokens.back().y2;
    const auto st = scorer.step(*state, y1_prev, y2_prev);
    for (int y1 : ids) {
      const double s1 = score + st.factor1[static_cast<std::size_t>(y1)];
      const auto lp2 = scorer.factor2(*st.state, y1);
      for (int y2 = 0; y2 < static_cast<int>(lp2.size()); ++y2) {
        const double s2 = s1 + lp2[static_cast<std::size_t>(y2)];
        tokens.push_back({y1, y2});
        if (y1 == config.eos || tokens.size() == config.max_len) {
          Hypothesis cand;
          cand.tokens = tokens;
          cand.score = s2;
          cand.finished = y1 == config.eos;
          if (!have || better(cand, best)) {
            cand.state = st.state;
            best = std::move(cand);
            have = true;
          }
        } else {
          dfs(st.state, s2);
        }
        tokens.pop_back();
      }
    }
  };
  dfs(scorer.initial(), 0.0);
  return best;
}

double rescore(const StepScorer& scorer, std::span<const FactorIds> tokens, const SearchConfig& config) {
  auto state = scorer.initial();
  double score = 0;
  int y1_prev = config.bos, y2_prev = kNoFactor;
  for (const auto& tok : tokens) {
    const auto st = scorer.step(*state, y1_prev, y2_prev);
    score += st.factor1[static_cast<std::size_t>(tok.y1)];
    const auto lp2 = scorer.factor2(*st.state, tok.y1);
    score += lp2[static_cast<std::size_t>(tok.y2)];
    state = st.state;
    y1_prev = tok.y1;
    y2_prev = tok.y2;
  }
  return score;
}

}  // namespace fnmt::search
