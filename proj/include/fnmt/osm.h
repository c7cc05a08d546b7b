#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fnmt/factored_token.h"
#include "fnmt/text_io.h"

namespace fnmt::osm {

inline constexpr std::string_view kSetMarker = "SET_MARKER";
inline constexpr std::string_view kJmpFwd = "JMP_FWD";
inline constexpr std::string_view kJmpBwd = "JMP_BWD";
inline constexpr std::string_view kSrcPop = "SRC_POP";
// Terminates a factored program and carries its trailing pop count.
inline constexpr std::string_view kEndOfSequence = "</s>";

inline constexpr int kDefaultMaxPops = 10;

enum class OpKind { kToken, kSetMarker, kJmpFwd, kJmpBwd, kSrcPop };

// One cell of an operation sequence. Token payloads never collide with the
// reserved op names or the end-of-sequence sentinel.
class Op {
 public:
  static Op token(std::string word);
  static Op set_marker() { return Op(OpKind::kSetMarker); }
  static Op jmp_fwd() { return Op(OpKind::kJmpFwd); }
  static Op jmp_bwd() { return Op(OpKind::kJmpBwd); }
  static Op src_pop() { return Op(OpKind::kSrcPop); }

  // Reserved names map to their op kinds, anything else becomes a token.
  static Op parse(std::string_view text);

  OpKind kind() const { return kind_; }
  bool is_token() const { return kind_ == OpKind::kToken; }
  const std::string& word() const { return word_; }
  std::string to_string() const;

  bool operator==(const Op&) const = default;

 private:
  explicit Op(OpKind kind) : kind_(kind) {}
  Op(OpKind kind, std::string word) : kind_(kind), word_(std::move(word)) {}

  OpKind kind_;
  std::string word_;
};

using Program = std::vector<Op>;

bool is_reserved_name(std::string_view text);

Program parse_program(std::string_view line);
std::string format_program(const Program& ops);

struct AlignmentLink {
  std::size_t src = 0;
  std::size_t tgt = 0;
  auto operator<=>(const AlignmentLink&) const = default;
};

// Sorted by (src, tgt), no duplicates.
using Alignment = std::vector<AlignmentLink>;

Alignment normalize(Alignment links);
// `s-t` pairs separated by spaces.
Alignment parse_alignment(std::string_view line);
std::string format_alignment(const Alignment& links);

struct Compiled {
  Tokens target;
  Alignment alignment;
  bool operator==(const Compiled&) const = default;
};

// Executes a program. Tokens are inserted at the write head and linked to the
// read head; SET_MARKER inserts a marker cell; JMP_BWD/JMP_FWD move the write
// head to the nearest marker to the left/right; SRC_POP advances the read
// head. Exactly `src_len` pops are required. Throws IllFormedProgram.
Compiled interpret(const Program& ops, std::size_t src_len);

// One source position per target word: the smallest linked source index,
// unaligned words inherit from the nearest preceding aligned word, else the
// nearest following one, else 0.
std::vector<std::size_t> canonical_sources(std::size_t target_len, const Alignment& links);
Alignment canonicalize(std::size_t target_len, const Alignment& links);

// Builds a program such that interpret(result, src_len) yields the target and
// its canonical alignment. Monotone alignments produce no markers or jumps.
Program generate(const Tokens& target, const Alignment& links, std::size_t src_len);

struct PopCount {
  int n = 0;
  bool operator==(const PopCount&) const = default;
};

using FactoredOp = Factored<PopCount>;

// Removes SRC_POP ops and attaches the length of each pop run to the op that
// follows it; the last run attaches to the end-of-sequence sentinel.
std::vector<FactoredOp> factor(const Program& ops, int max_pops = kDefaultMaxPops);
Program defactor(const std::vector<FactoredOp>& pairs, int max_pops = kDefaultMaxPops);

// Longest run of consecutive SRC_POP ops.
std::size_t max_pop_run(const Program& ops);
// Run length -> number of maximal runs of that length.
std::map<std::size_t, std::size_t> pop_run_histogram(const Program& ops);
bool keep_by_pop_run(const Program& ops, std::size_t max_run = kDefaultMaxPops);

using Segmenter = std::function<Tokens(const std::string&)>;

// Replaces every token by its marked subwords; other ops are kept verbatim.
Program subword_encode(const Program& ops, const Segmenter& segmenter);

// Rejoins marked subwords of a compiled program into words. Each word takes
// the source link of its first subword.
Compiled join_subwords(const Compiled& compiled);

}  // namespace fnmt::osm
