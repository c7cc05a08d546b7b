#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fnmt/cli.h"
#include "fnmt/text_io.h"
#include "support.h"

namespace fs = std::filesystem;
using fnmt::oracles::fixture_path;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fnmt::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fnmt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, CasingRoundTripIsByteIdentical) {
  // Fixture lines without mixed-case tokens.
  std::string lossless;
  for (const auto& line : fnmt::read_lines(fixture_path("casing.txt")))
    if (line.find("iPhone") == std::string::npos && line.find("\u01C5") == std::string::npos) lossless += line + "\n";
  const auto in = path("in");
  write(in, lossless);
  auto r = run({"factorize", "--codec", "casing", "--in", in, "--out-lemma", path("l"), "--out-factor", path("f")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.err.empty()) << r.err;
  r = run({"defactorize", "--codec", "casing", "--in-lemma", path("l"), "--in-factor", path("f"), "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("o")), lossless);
}

TEST_F(Cli, CasingMixedTokensAreLoweredWithWarning) {
  write(path("in"), "iPhone Haus\n");
  auto r = run({"factorize", "--codec", "casing", "--in", path("in"), "--out-lemma", path("l"), "--out-factor",
                path("f")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("mixed"), std::string::npos);
  r = run({"defactorize", "--codec", "casing", "--in-lemma", path("l"), "--in-factor", path("f"), "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("o")), "iphone Haus\n");
}

TEST_F(Cli, SegmentationRoundTripAndDetokenize) {
  const auto in = fixture_path("segmentation.txt");
  ASSERT_EQ(run({"factorize", "--codec", "segmentation", "--in", in, "--out-lemma", path("l"), "--out-factor",
                 path("f")}).code,
            0);
  ASSERT_EQ(run({"defactorize", "--codec", "segmentation", "--in-lemma", path("l"), "--in-factor", path("f"),
                 "--out", path("o")}).code,
            0);
  EXPECT_EQ(slurp(path("o")), slurp(in));
  ASSERT_EQ(run({"defactorize", "--codec", "segmentation", "--in-lemma", path("l"), "--in-factor", path("f"),
                 "--out", path("d"), "--detokenize"}).code,
            0);
  const auto marked = fnmt::read_lines(in);
  const auto plain = fnmt::read_lines(path("d"));
  ASSERT_EQ(plain.size(), marked.size());
  for (std::size_t i = 0; i < marked.size(); ++i) EXPECT_EQ(plain[i], fnmt::oracles::oracle_detokenize(marked[i]));
}

TEST_F(Cli, OsmGenerateCompileFactor) {
  write(path("src"), "a b c\nx y\n");
  write(path("tgt"), "C A B\nY\n");
  write(path("al"), "0-1 1-2 2-0\n1-0\n");
  auto r = run({"osm", "generate", "--src", path("src"), "--tgt", path("tgt"), "--alignment", path("al"), "--out",
                path("ops")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"osm", "compile", "--in", path("ops"), "--src", path("src"), "--out", path("back"), "--alignment-out",
           path("back.al")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("back")), slurp(path("tgt")));
  EXPECT_EQ(slurp(path("back.al")), slurp(path("al")));

  ASSERT_EQ(run({"osm", "factor", "--in", path("ops"), "--out-lemma", path("l"), "--out-factor", path("f")}).code, 0);
  ASSERT_EQ(run({"osm", "defactor", "--in-lemma", path("l"), "--in-factor", path("f"), "--out", path("ops2")}).code,
            0);
  EXPECT_EQ(slurp(path("ops2")), slurp(path("ops")));

  write(path("bad"), "A JMP_BWD SRC_POP\n");
  r = run({"osm", "compile", "--in", path("bad"), "--src", path("src"), "--out", path("x")});
  EXPECT_EQ(r.code, fnmt::cli::kExitInvalid);
}

TEST_F(Cli, EvalIdentity) {
  const auto r = run({"eval", "--hyp", fixture_path("casing.txt"), "--ref", fixture_path("casing.txt")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "BLEU 100.00\n");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, fnmt::cli::kExitInvalid);
  EXPECT_EQ(run({"--help"}).code, fnmt::cli::kExitOk);
  EXPECT_EQ(run({"eval", "--hyp", "x"}).code, fnmt::cli::kExitInvalid);
  EXPECT_EQ(run({"eval", "--bogus", "1", "--hyp", "x", "--ref", "y"}).code, fnmt::cli::kExitInvalid);
  EXPECT_EQ(run({"factorize", "--codec", "nope", "--in", "x", "--out-lemma", "a", "--out-factor", "b"}).code,
            fnmt::cli::kExitInvalid);
  const auto missing = path("does_not_exist");
  EXPECT_EQ(run({"eval", "--hyp", missing, "--ref", missing}).code, fnmt::cli::kExitIo);
  write(path("one"), "a\n");
  write(path("two"), "a\nb\n");
  EXPECT_EQ(run({"eval", "--hyp", path("one"), "--ref", path("two")}).code, fnmt::cli::kExitInvalid);
}

TEST_F(Cli, ConfigFileMirrorsFlags) {
  write(path("cfg.toml"), "[eval]\nhyp = \"" + fixture_path("casing.txt") + "\"\nref = \"" +
                              fixture_path("casing.txt") + "\"\n");
  auto r = run({"--config", path("cfg.toml"), "eval"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "BLEU 100.00\n");

  // The command line wins over the file.
  write(path("other"), "x y z w\nq\nq\nq\nq\nq\nq\nq\n");
  r = run({"--config", path("cfg.toml"), "eval", "--hyp", path("other")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out, "BLEU 100.00\n");

  write(path("bad.toml"), "[eval]\nhyp = \"a\"\nref = \"b\"\nbeam_width = 3\n");
  EXPECT_EQ(run({"--config", path("bad.toml"), "eval"}).code, fnmt::cli::kExitInvalid);
}

TEST_F(Cli, FilterMatchesFixtureReport) {
  const auto r = run({"filter", "--src", fixture_path("filter.src"), "--tgt", fixture_path("filter.tgt"), "--test",
                      fixture_path("filter.test"), "--report", path("report"), "--out-src", path("s"), "--out-tgt",
                      path("t")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("report")), slurp(fixture_path("filter.expected")));
  EXPECT_EQ(r.out.rfind("total\t18\nkeep\t8\n", 0), 0u) << r.out;
  EXPECT_EQ(fnmt::read_lines(path("s")).size(), 8u);
  EXPECT_EQ(fnmt::read_lines(path("t")).size(), 8u);
}

TEST_F(Cli, Stats) {
  write(path("c"), "Treffen treffen\n");
  const auto r = run({"stats", "--in", path("c"), "--application", "casing"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("surface_vocab\t2\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("lemma_vocab\t1\n"), std::string::npos) << r.out;
}

TEST_F(Cli, TrainDecodeIsDeterministic) {
  std::string src, tgt;
  const std::vector<std::string> words = {"haus", "treffen", "stadt", "york", "gut"};
  for (int i = 0; i < 60; ++i) {
    const std::string a = words[i % 5], b = words[(i * 3 + 1) % 5];
    src += a + " " + b + "\n";
    std::string ca = a;
    ca[0] = static_cast<char>(ca[0] - 32);
    tgt += (i % 2 ? ca : a) + " " + b + "\n";
  }
  write(path("src"), src);
  write(path("tgt"), tgt);
  write(path("in"), "haus gut\nstadt york\n");
  for (const std::string m : {"m1", "m2"}) {
    const auto r = run({"--seed", "7", "train", "--application", "casing", "--src", path("src"), "--tgt",
                        path("tgt"), "--model", path(m), "--embedding-dim", "8", "--hidden-dim", "8", "--steps", "20",
                        "--batch-size", "8", "--validate-every", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = run({"decode", "--model", path(m), "--input", path("in"), "--output", path(m + ".out"), "--beam",
                        "3", "--max-len", "6"});
    ASSERT_EQ(d.code, 0) << d.err;
  }
  EXPECT_EQ(slurp(path("m1") + "/weights.bin"), slurp(path("m2") + "/weights.bin"));
  EXPECT_EQ(slurp(path("m1.out")), slurp(path("m2.out")));
  EXPECT_EQ(fnmt::read_lines(path("m1.out")).size(), 2u);

  const auto nb = run({"decode", "--model", path("m1"), "--input", path("in"), "--beam", "3", "--nbest", "2"});
  ASSERT_EQ(nb.code, 0) << nb.err;
  EXPECT_NE(nb.out.find("0 ||| "), std::string::npos);
  EXPECT_EQ(run({"decode", "--model", path("m1"), "--input", path("in"), "--application", "osnmt"}).code,
            fnmt::cli::kExitInvalid);
}

TEST(CliBinary, RunsAsAProcess) {
  const std::string cmd = std::string(FNMT_CLI_PATH) + " --help > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  const std::string bad = std::string(FNMT_CLI_PATH) + " > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 1);
}
