#include <gtest/gtest.h>

#include <random>

#include "fnmt/error.h"
#include "fnmt/osm.h"
#include "fnmt/segmenter.h"
#include "support.h"

using namespace fnmt;
using namespace fnmt::osm;

namespace {

Program ops(const std::string& line) { return parse_program(line); }

}  // namespace

TEST(Op, ParsesReservedNames) {
  EXPECT_EQ(Op::parse("SET_MARKER").kind(), OpKind::kSetMarker);
  EXPECT_EQ(Op::parse("JMP_FWD").kind(), OpKind::kJmpFwd);
  EXPECT_EQ(Op::parse("JMP_BWD").kind(), OpKind::kJmpBwd);
  EXPECT_EQ(Op::parse("SRC_POP").kind(), OpKind::kSrcPop);
  EXPECT_TRUE(Op::parse("Haus").is_token());
  EXPECT_THROW(Op::token("SRC_POP"), InvalidInput);
  EXPECT_THROW(Op::token(""), InvalidInput);
  EXPECT_EQ(format_program(ops("a SRC_POP SET_MARKER b")), "a SRC_POP SET_MARKER b");
}

TEST(Alignment, ParsesAndFormats) {
  const auto a = parse_alignment("1-0 0-1 0-1");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(format_alignment(a), "0-1 1-0");
  EXPECT_THROW(parse_alignment("0:1"), FormatError);
  EXPECT_TRUE(parse_alignment("").empty());
}

TEST(Interpret, MonotoneProgram) {
  const auto c = interpret(ops("das SRC_POP Haus SRC_POP"), 2);
  EXPECT_EQ(c.target, (Tokens{"das", "Haus"}));
  EXPECT_EQ(format_alignment(c.alignment), "0-0 1-1");
}

TEST(Interpret, ReorderingWithMarkerAndJump) {
  const auto c = interpret(ops("SET_MARKER A SRC_POP JMP_BWD B SRC_POP"), 2);
  EXPECT_EQ(c.target, (Tokens{"B", "A"}));
  EXPECT_EQ(format_alignment(c.alignment), "0-1 1-0");
}

TEST(Interpret, ForwardJumpReturnsPastTheMarker) {
  const auto p = osm::generate({"a", "b", "c"}, parse_alignment("1-0 0-1 2-2"), 3);
  EXPECT_EQ(format_program(p), "SET_MARKER b SRC_POP SET_MARKER JMP_BWD JMP_BWD a SRC_POP JMP_FWD c SRC_POP");
  const auto c = interpret(p, 3);
  EXPECT_EQ(c.target, (Tokens{"a", "b", "c"}));
  EXPECT_EQ(format_alignment(c.alignment), "0-1 1-0 2-2");
}

TEST(Interpret, ErrorsCarryTheOpIndex) {
  try {
    interpret(ops("a JMP_BWD SRC_POP"), 1);
    FAIL();
  } catch (const IllFormedProgram& e) {
    EXPECT_EQ(e.op_index(), 1u);
  }
  EXPECT_THROW(interpret(ops("a SRC_POP SRC_POP"), 1), IllFormedProgram);
  EXPECT_THROW(interpret(ops("a"), 1), IllFormedProgram);
}

TEST(Interpret, RandomRoundTrips) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> len(1, 9);
  for (int i = 0; i < 3000; ++i) {
    const auto s = len(rng), t = len(rng);
    const auto words = oracles::word_list(t, rng);
    const auto a = oracles::random_function(s, t, rng);
    const auto c = interpret(osm::generate(words, a, s), s);
    ASSERT_EQ(c.target, words);
    ASSERT_EQ(c.alignment, a);
  }
}

TEST(Generate, MonotoneNeedsNoJumps) {
  const auto p = osm::generate({"a", "b", "c"}, parse_alignment("0-0 1-1 2-2"), 3);
  EXPECT_EQ(format_program(p), "a SRC_POP b SRC_POP c SRC_POP");
}

TEST(Generate, SwapUsesMarker) {
  const auto p = osm::generate({"B", "A"}, parse_alignment("0-1 1-0"), 2);
  EXPECT_EQ(format_program(p), "SET_MARKER A SRC_POP JMP_BWD B SRC_POP");
}

TEST(Generate, UnalignedSourceWordsStillPop) {
  const auto p = osm::generate({"x"}, parse_alignment("1-0"), 3);
  const auto pops = std::count(p.begin(), p.end(), Op::src_pop());
  EXPECT_EQ(pops, 3);
  EXPECT_EQ(format_alignment(interpret(p, 3).alignment), "1-0");
}

TEST(Generate, CanonicalizesManyToOneLinks) {
  const auto a = parse_alignment("0-0 2-0 1-1");
  const auto c = interpret(osm::generate({"x", "y", "z"}, a, 3), 3);
  EXPECT_EQ(format_alignment(c.alignment), "0-0 1-1 1-2");
  EXPECT_EQ(c.alignment, canonicalize(3, a));
}

TEST(Generate, RejectsBadInput) {
  EXPECT_THROW(osm::generate({"a"}, parse_alignment("3-0"), 2), InvalidInput);
  EXPECT_THROW(osm::generate({"a"}, parse_alignment("0-3"), 2), InvalidInput);
  EXPECT_THROW(osm::generate({"SRC_POP"}, {}, 1), InvalidInput);
}

TEST(Factor, ReplacesPopRuns) {
  const auto f = factor(ops("SET_MARKER A SRC_POP JMP_BWD B SRC_POP"));
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f[2], (FactoredOp{"JMP_BWD", {1}}));
  EXPECT_EQ(f.back(), (FactoredOp{"</s>", {1}}));
  EXPECT_EQ(defactor(f), ops("SET_MARKER A SRC_POP JMP_BWD B SRC_POP"));
}

TEST(Factor, CapacityAndFormatErrors) {
  Program eleven;
  for (int i = 0; i < 11; ++i) eleven.push_back(Op::src_pop());
  eleven.push_back(Op::token("a"));
  EXPECT_THROW(factor(eleven), CapacityError);
  EXPECT_NO_THROW(factor(eleven, 11));
  EXPECT_THROW(defactor({{"a", {0}}}), FormatError);
  EXPECT_THROW(defactor({{"a", {11}}, {"</s>", {0}}}), FormatError);
  EXPECT_THROW(defactor({{"</s>", {0}}, {"a", {0}}, {"</s>", {0}}}), FormatError);
  EXPECT_THROW(defactor({{"SRC_POP", {0}}, {"</s>", {0}}}), FormatError);
}

TEST(Factor, EmptyProgram) {
  const auto f = factor({});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_TRUE(defactor(f).empty());
}

TEST(PopRuns, Histogram) {
  const auto p = ops("SRC_POP SRC_POP a SRC_POP b SRC_POP SRC_POP");
  const auto h = pop_run_histogram(p);
  EXPECT_EQ(h.at(2), 2u);
  EXPECT_EQ(h.at(1), 1u);
  EXPECT_EQ(max_pop_run(p), 2u);
  EXPECT_TRUE(keep_by_pop_run(p, 2));
  EXPECT_FALSE(keep_by_pop_run(p, 1));
}

TEST(Subwords, EncodeAndJoin) {
  const FallbackSegmenter seg({"Pilot", "versuch", "gut"});
  const auto p = subword_encode(ops("SET_MARKER gut SRC_POP JMP_BWD Pilotversuch SRC_POP"),
                                [&](const std::string& w) { return seg(w); });
  EXPECT_EQ(format_program(p), "SET_MARKER \xE2\x96\x81gut SRC_POP JMP_BWD \xE2\x96\x81Pilot versuch SRC_POP");
  const auto joined = join_subwords(interpret(p, 2));
  EXPECT_EQ(joined.target, (Tokens{"Pilotversuch", "gut"}));
  EXPECT_EQ(format_alignment(joined.alignment), "0-1 1-0");
}
