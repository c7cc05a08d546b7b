#pragma once

#include <string>

namespace fnmt {

// One decoding step of a two-factor model: the first-factor token (lower-cased
// word, bare subword or OSM op) and its second-factor value.
template <typename Factor>
struct Factored {
  std::string lemma;
  Factor factor;

  bool operator==(const Factored&) const = default;
};

}  // namespace fnmt
