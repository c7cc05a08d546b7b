#include "fnmt/osm.h"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "fnmt/error.h"
#include "fnmt/segmentation.h"

namespace fnmt::osm {

bool is_reserved_name(std::string_view text) {
  return text == kSetMarker || text == kJmpFwd || text == kJmpBwd || text == kSrcPop ||
         text == kEndOfSequence;
}

Op Op::token(std::string word) {
  if (word.empty()) throw InvalidInput("empty OSM token");
  if (is_reserved_name(word)) throw InvalidInput("token payload \"" + word + "\" is a reserved name");
  return Op(OpKind::kToken, std::move(word));
}

Op Op::parse(std::string_view text) {
  if (text == kSetMarker) return set_marker();
  if (text == kJmpFwd) return jmp_fwd();
  if (text == kJmpBwd) return jmp_bwd();
  if (text == kSrcPop) return src_pop();
  return token(std::string(text));
}

std::string Op::to_string() const {
  switch (kind_) {
    case OpKind::kToken: return word_;
    case OpKind::kSetMarker: return std::string(kSetMarker);
    case OpKind::kJmpFwd: return std::string(kJmpFwd);
    case OpKind::kJmpBwd: return std::string(kJmpBwd);
    case OpKind::kSrcPop: return std::string(kSrcPop);
  }
  return word_;
}

Program parse_program(std::string_view line) {
  Program ops;
  for (const auto& t : split_tokens(line)) ops.push_back(Op::parse(t));
  return ops;
}

std::string format_program(const Program& ops) {
  Tokens out;
  out.reserve(ops.size());
  for (const auto& op : ops) out.push_back(op.to_string());
  return join_tokens(out);
}

Alignment normalize(Alignment links) {
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  return links;
}

namespace {

std::size_t parse_index(std::string_view s, std::string_view context) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("bad alignment link \"" + std::string(context) + "\"");
  return v;
}

}  // namespace

Alignment parse_alignment(std::string_view line) {
  Alignment links;
  for (const auto& pair : split_tokens(line)) {
    const auto dash = pair.find('-');
    if (dash == std::string::npos) throw FormatError("bad alignment link \"" + pair + "\"");
    std::string_view sv(pair);
    links.push_back({parse_index(sv.substr(0, dash), pair), parse_index(sv.substr(dash + 1), pair)});
  }
  return normalize(std::move(links));
}

std::string format_alignment(const Alignment& links) {
  Tokens out;
  out.reserve(links.size());
  for (const auto& l : links) out.push_back(std::to_string(l.src) + "-" + std::to_string(l.tgt));
  return join_tokens(out);
}

namespace {

// Buffer cell of the interpreter: a marker or the index of an emitted token.
struct Cell {
  static constexpr std::size_t kMarker = static_cast<std::size_t>(-1);
  std::size_t token = kMarker;
  bool is_marker() const { return token == kMarker; }
};

}  // namespace

Compiled interpret(const Program& ops, std::size_t src_len) {
  if (src_len == 0) throw InvalidInput("source length must be at least 1");

  std::vector<Cell> buffer;
  std::vector<std::string> words;
  std::vector<std::size_t> word_src;
  std::size_t gap = 0;
  std::size_t head = 0;

  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    switch (op.kind()) {
      case OpKind::kToken:
        if (head == src_len) throw IllFormedProgram(i, "token after the last source word");
        buffer.insert(buffer.begin() + static_cast<std::ptrdiff_t>(gap), Cell{words.size()});
        words.push_back(op.word());
        word_src.push_back(head);
        ++gap;
        break;
      case OpKind::kSetMarker:
        buffer.insert(buffer.begin() + static_cast<std::ptrdiff_t>(gap), Cell{});
        ++gap;
        break;
      case OpKind::kJmpBwd: {
        std::optional<std::size_t> target;
        for (std::size_t m = gap; m-- > 0;)
          if (buffer[m].is_marker()) { target = m; break; }
        if (!target) throw IllFormedProgram(i, "JMP_BWD without a marker to the left");
        gap = *target;
        break;
      }
      case OpKind::kJmpFwd: {
        std::optional<std::size_t> target;
        for (std::size_t m = gap + 1; m < buffer.size(); ++m)
          if (buffer[m].is_marker()) { target = m; break; }
        if (!target) throw IllFormedProgram(i, "JMP_FWD without a marker to the right");
        gap = *target;
        break;
      }
      case OpKind::kSrcPop:
        if (head == src_len) throw IllFormedProgram(i, "SRC_POP past the last source word");
        ++head;
        break;
    }
  }
  if (head != src_len)
    throw IllFormedProgram(ops.size(), std::to_string(head) + " SRC_POPs for " +
                                           std::to_string(src_len) + " source words");

  Compiled out;
  for (const auto& cell : buffer) {
    if (cell.is_marker()) continue;
    out.alignment.push_back({word_src[cell.token], out.target.size()});
    out.target.push_back(words[cell.token]);
  }
  out.alignment = normalize(std::move(out.alignment));
  return out;
}

std::vector<std::size_t> canonical_sources(std::size_t target_len, const Alignment& links) {
  std::vector<std::optional<std::size_t>> src(target_len);
  for (const auto& l : links) {
    if (l.tgt >= target_len) throw InvalidInput("alignment target index out of range");
    if (!src[l.tgt] || l.src < *src[l.tgt]) src[l.tgt] = l.src;
  }
  std::vector<std::size_t> out(target_len, 0);
  std::optional<std::size_t> prev;
  for (std::size_t j = 0; j < target_len; ++j) {
    if (src[j]) prev = src[j];
    if (prev) out[j] = *prev;
  }
  // Leading unaligned words take the first aligned source, if any.
  const auto first = std::find_if(src.begin(), src.end(), [](const auto& s) { return s.has_value(); });
  if (first != src.end())
    for (auto it = src.begin(); it != first; ++it) out[static_cast<std::size_t>(it - src.begin())] = **first;
  return out;
}

Alignment canonicalize(std::size_t target_len, const Alignment& links) {
  const auto src = canonical_sources(target_len, links);
  Alignment out;
  for (std::size_t j = 0; j < target_len; ++j) out.push_back({src[j], j});
  return normalize(std::move(out));
}

namespace {

// Mirror of the interpreter state used while emitting a program.
class Emitter {
 public:
  explicit Emitter(std::size_t target_len) : emitted_(target_len, false) {}

  void emit_token(std::size_t j, const std::string& word) {
    insert(Cell{j});
    emitted_[j] = true;
    ops_.push_back(Op::token(word));
  }

  void emit_marker() {
    insert(Cell{});
    ops_.push_back(Op::set_marker());
  }

  void emit_pop() { ops_.push_back(Op::src_pop()); }

  // Cell index of the emitted target word `j`.
  std::size_t cell_of(std::size_t j) const {
    for (std::size_t c = 0; c < buffer_.size(); ++c)
      if (buffer_[c].token == j) return c;
    throw std::logic_error("target word not in buffer");
  }

  // Buffer span (exclusive bounds, cell indices) of the hole that target
  // position j falls into, together with the neighbouring emitted words.
  struct Hole {
    std::ptrdiff_t left_cell;   // -1 if no emitted word on the left
    std::size_t right_cell;     // buffer size if none on the right
    std::ptrdiff_t left_word;   // -1 if none
    std::size_t right_word;     // target length if none
  };

  Hole hole_for(std::size_t j) const {
    Hole h{-1, buffer_.size(), -1, emitted_.size()};
    for (std::size_t i = j; i-- > 0;)
      if (emitted_[i]) { h.left_word = static_cast<std::ptrdiff_t>(i); h.left_cell = static_cast<std::ptrdiff_t>(cell_of(i)); break; }
    for (std::size_t i = j + 1; i < emitted_.size(); ++i)
      if (emitted_[i]) { h.right_word = i; h.right_cell = cell_of(i); break; }
    return h;
  }

  // The hole the write head currently sits in.
  Hole current_hole() const {
    Hole h{-1, buffer_.size(), -1, emitted_.size()};
    for (std::size_t c = gap_; c-- > 0;)
      if (!buffer_[c].is_marker()) { h.left_cell = static_cast<std::ptrdiff_t>(c); h.left_word = static_cast<std::ptrdiff_t>(buffer_[c].token); break; }
    for (std::size_t c = gap_; c < buffer_.size(); ++c)
      if (!buffer_[c].is_marker()) { h.right_cell = c; h.right_word = buffer_[c].token; break; }
    return h;
  }

  bool gap_inside(const Hole& h) const {
    return static_cast<std::ptrdiff_t>(gap_) > h.left_cell && gap_ <= h.right_cell;
  }

  bool has_pending(const Hole& h) const {
    for (auto i = static_cast<std::size_t>(h.left_word + 1); i < h.right_word; ++i)
      if (!emitted_[i]) return true;
    return false;
  }

  std::optional<std::size_t> first_marker(std::ptrdiff_t after_cell, std::size_t before_cell) const {
    for (auto c = static_cast<std::size_t>(after_cell + 1); c < before_cell; ++c)
      if (buffer_[c].is_marker()) return c;
    return std::nullopt;
  }

  void jump_to(std::size_t marker) {
    if (marker < gap_) {
      for (std::size_t c = marker; c < gap_; ++c)
        if (buffer_[c].is_marker()) ops_.push_back(Op::jmp_bwd());
    } else {
      for (std::size_t c = gap_ + 1; c <= marker; ++c)
        if (buffer_[c].is_marker()) ops_.push_back(Op::jmp_fwd());
    }
    gap_ = marker;
  }

  std::size_t gap() const { return gap_; }
  Program take() { return std::move(ops_); }

 private:
  void insert(Cell cell) {
    buffer_.insert(buffer_.begin() + static_cast<std::ptrdiff_t>(gap_), cell);
    ++gap_;
  }

  std::vector<Cell> buffer_;
  std::vector<bool> emitted_;
  std::size_t gap_ = 0;
  Program ops_;
};

}  // namespace

Program generate(const Tokens& target, const Alignment& links, std::size_t src_len) {
  if (target.empty()) throw InvalidInput("cannot generate a program for an empty target");
  if (src_len == 0) throw InvalidInput("source length must be at least 1");
  for (const auto& l : links)
    if (l.src >= src_len || l.tgt >= target.size())
      throw InvalidInput("alignment link " + std::to_string(l.src) + "-" + std::to_string(l.tgt) +
                         " out of range");
  for (const auto& w : target)
    if (w.empty() || is_reserved_name(w)) throw InvalidInput("invalid target token \"" + w + "\"");

  const auto src = canonical_sources(target.size(), links);
  std::vector<std::size_t> order(target.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return src[a] < src[b]; });

  Emitter em(target.size());
  std::size_t head = 0;
  for (std::size_t j : order) {
    for (; head < src[j]; ++head) em.emit_pop();

    const auto hole = em.hole_for(j);
    if (!em.gap_inside(hole)) {
      const auto here = em.current_hole();
      if (em.has_pending(here) && !em.first_marker(here.left_cell, here.right_cell)) em.emit_marker();
      const auto hole_now = em.hole_for(j);
      const auto marker = em.first_marker(hole_now.left_cell, hole_now.right_cell);
      if (!marker) throw std::logic_error("no marker reaches target position " + std::to_string(j));
      em.jump_to(*marker);
    }
    const auto h = em.hole_for(j);
    const bool left_pending = static_cast<std::ptrdiff_t>(j) - h.left_word > 1;
    if (left_pending && !em.first_marker(h.left_cell, em.gap())) em.emit_marker();
    em.emit_token(j, target[j]);
  }
  for (; head < src_len; ++head) em.emit_pop();
  return em.take();
}

std::vector<FactoredOp> factor(const Program& ops, int max_pops) {
  std::vector<FactoredOp> out;
  int run = 0;
  std::size_t run_start = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind() == OpKind::kSrcPop) {
      if (run == 0) run_start = i;
      if (++run > max_pops)
        throw CapacityError("run of more than " + std::to_string(max_pops) +
                            " SRC_POPs starting at op " + std::to_string(run_start));
      continue;
    }
    out.push_back({ops[i].to_string(), {run}});
    run = 0;
  }
  out.push_back({std::string(kEndOfSequence), {run}});
  return out;
}

Program defactor(const std::vector<FactoredOp>& pairs, int max_pops) {
  if (pairs.empty() || pairs.back().lemma != kEndOfSequence)
    throw FormatError("factored program does not end with " + std::string(kEndOfSequence));
  Program ops;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.factor.n < 0 || p.factor.n > max_pops)
      throw FormatError("pop count " + std::to_string(p.factor.n) + " at position " +
                        std::to_string(i) + " outside [0, " + std::to_string(max_pops) + "]");
    for (int k = 0; k < p.factor.n; ++k) ops.push_back(Op::src_pop());
    if (i + 1 == pairs.size()) break;
    if (p.lemma == kEndOfSequence)
      throw FormatError("sentinel before the end of the factored program");
    if (p.lemma == kSrcPop) throw FormatError("SRC_POP inside a factored program");
    ops.push_back(Op::parse(p.lemma));
  }
  return ops;
}

std::map<std::size_t, std::size_t> pop_run_histogram(const Program& ops) {
  std::map<std::size_t, std::size_t> hist;
  std::size_t run = 0;
  for (const auto& op : ops) {
    if (op.kind() == OpKind::kSrcPop) {
      ++run;
    } else if (run) {
      ++hist[run];
      run = 0;
    }
  }
  if (run) ++hist[run];
  return hist;
}

std::size_t max_pop_run(const Program& ops) {
  const auto hist = pop_run_histogram(ops);
  return hist.empty() ? 0 : hist.rbegin()->first;
}

bool keep_by_pop_run(const Program& ops, std::size_t max_run) { return max_pop_run(ops) <= max_run; }

Program subword_encode(const Program& ops, const Segmenter& segmenter) {
  Program out;
  out.reserve(ops.size());
  for (const auto& op : ops) {
    if (!op.is_token()) {
      out.push_back(op);
      continue;
    }
    const auto pieces = segmenter(op.word());
    if (pieces.empty()) throw InvalidInput("segmenter returned no pieces for \"" + op.word() + "\"");
    for (const auto& p : pieces) {
      if (is_reserved_name(p)) throw InvalidInput("segmenter produced reserved name \"" + p + "\"");
      out.push_back(Op::token(p));
    }
  }
  return out;
}

Compiled join_subwords(const Compiled& compiled) {
  std::vector<std::size_t> src_of(compiled.target.size(), 0);
  for (const auto& l : compiled.alignment) src_of.at(l.tgt) = l.src;

  Compiled out;
  for (std::size_t i = 0; i < compiled.target.size(); ++i) {
    const auto piece = encode_segmentation(compiled.target[i]);
    if (piece.factor.separated || out.target.empty()) {
      out.alignment.push_back({src_of[i], out.target.size()});
      out.target.push_back(piece.lemma);
    } else {
      out.target.back() += piece.lemma;
    }
  }
  out.alignment = normalize(std::move(out.alignment));
  return out;
}

}  // namespace fnmt::osm
