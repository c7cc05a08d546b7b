#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fnmt/error.h"
#include "fnmt/model.h"
#include "fnmt/model_io.h"
#include "fnmt/trainer.h"
#include "support.h"

using namespace fnmt;

namespace {

ModelConfig small_config(std::size_t factor_vocab = 3) {
  auto c = ModelConfig::desk_scale(10, 9, factor_vocab);
  c.embedding_dim = 6;
  c.hidden_dim = 5;
  return c;
}

ModelParams<double> random_params(const ModelConfig& c, std::uint64_t seed = 7) {
  return ModelParams<double>::random(c, seed);
}

double sum(const Vec<double>& v) { return v.sum(); }

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fnmt_model_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Encoder, ZeroWeightsGiveZeroAnnotations) {
  const auto c = small_config();
  const Model<double> m(c, ModelParams<double>::zeros(c));
  const std::vector<int> src = {4, 5, 6};
  const auto enc = m.encode(src);
  EXPECT_EQ(enc.annotations.cols(), 3);
  EXPECT_EQ(enc.annotations.rows(), static_cast<Eigen::Index>(c.annotation_dim()));
  EXPECT_EQ(enc.annotations.norm(), 0.0);
}

TEST(Encoder, LengthOneAndSensitivity) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  EXPECT_EQ(m.encode(std::vector<int>{4}).annotations.cols(), 1);
  const auto a = m.encode(std::vector<int>{4, 5, 6}).annotations;
  const auto b = m.encode(std::vector<int>{4, 7, 6}).annotations;
  EXPECT_GT((a - b).norm(), 0.0);
  EXPECT_THROW(m.encode(std::vector<int>{10}), InvalidInput);
  EXPECT_THROW(m.encode(std::vector<int>{}), InvalidInput);
}

TEST(Attention, SingleAnnotation) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  const auto enc = m.encode(std::vector<int>{4});
  const auto att = m.attend(Vec<double>::Random(5), enc, Vec<double>::Zero(1));
  EXPECT_DOUBLE_EQ(att.weights[0], 1.0);
  EXPECT_LT((att.context - enc.annotations.col(0)).norm(), 1e-15);
}

TEST(Attention, ZeroEnergyWeightsAreUniform) {
  const auto c = small_config();
  auto p = random_params(c);
  p.att_score.setZero();
  const Model<double> m(c, p);
  const auto enc = m.encode(std::vector<int>{4, 5, 6, 7});
  const auto att = m.attend(Vec<double>::Random(5), enc, Vec<double>::Zero(4));
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(att.weights[j], 0.25, 1e-15);
}

TEST(Attention, WeightsNormalizeOverManyTrials) {
  auto c = small_config();
  c.coverage = true;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> id(4, 9), len(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Model<double> m(c, random_params(c, rng()));
    std::vector<int> src(static_cast<std::size_t>(len(rng)));
    for (auto& s : src) s = id(rng);
    const auto enc = m.encode(src);
    const auto att = m.attend(Vec<double>::Random(5), enc, Vec<double>::Random(enc.annotations.cols()).cwiseAbs());
    ASSERT_NEAR(sum(att.weights), 1.0, 1e-6);
    ASSERT_GE(att.weights.minCoeff(), 0.0);
  }
}

TEST(Decoder, ZeroWeightsGiveZeroStateAndReadout) {
  const auto c = small_config();
  const Model<double> m(c, ModelParams<double>::zeros(c));
  typename Model<double>::DecoderState prev{Vec<double>::Zero(5), Vec<double>::Zero(5), Vec<double>::Zero(2)};
  const auto [s, t] = m.decoder_step(prev, kBosId, kNoFactor, Vec<double>::Zero(10));
  EXPECT_EQ(s.h.norm(), 0.0);
  EXPECT_EQ(t.norm(), 0.0);
}

TEST(Decoder, SecondFactorFeedsBackIntoTheState) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  const auto enc = m.encode(std::vector<int>{4, 5});
  const auto s0 = m.initial_state(enc);
  const Vec<double> ctx = enc.annotations.col(0);
  const auto a = m.decoder_step(s0, 5, 0, ctx);
  const auto b = m.decoder_step(s0, 5, 1, ctx);
  const auto a2 = m.decoder_step(s0, 5, 0, ctx);
  EXPECT_GT((a.first.h - b.first.h).norm(), 0.0);
  EXPECT_EQ(a.first.h, a2.first.h);
  EXPECT_EQ(a.second, a2.second);
  EXPECT_THROW(m.decoder_step(s0, 9, 0, ctx), InvalidInput);
  EXPECT_THROW(m.decoder_step(s0, 5, 3, ctx), InvalidInput);
}

TEST(Output, ZeroWeightsAreUniform) {
  const auto c = small_config();
  auto p = random_params(c);
  p.output1.setZero();
  p.output2.setZero();
  const Model<double> m(c, p);
  const Vec<double> t = Vec<double>::Random(6);
  for (Eigen::Index k = 0; k < 9; ++k) EXPECT_NEAR(m.output_factor1(t)[k], 1.0 / 9, 1e-15);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(m.output_factor2(t, 4)[k], 1.0 / 3, 1e-15);
}

TEST(Output, NormalizedAndLemmaDependent) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  const Vec<double> t = Vec<double>::Random(6);
  EXPECT_NEAR(sum(m.output_factor1(t)), 1.0, 1e-12);
  EXPECT_GT((m.output_factor2(t, 4) - m.output_factor2(t, 5)).norm(), 0.0);
  double joint = 0;
  const auto p1 = m.output_factor1(t);
  for (int y1 = 0; y1 < 9; ++y1) joint += p1[y1] * sum(m.output_factor2(t, y1));
  EXPECT_NEAR(joint, 1.0, 1e-6);
  EXPECT_THROW(m.output_factor2(t, 9), InvalidInput);
}

TEST(Output, SoftmaxShiftInvariance) {
  const Vec<double> z = Vec<double>::Random(7);
  const Vec<double> shifted = (z.array() + 123.0).matrix();
  EXPECT_LT((detail::softmax<double>(z) - detail::softmax<double>(shifted)).norm(), 1e-12);
}

TEST(Loss, UniformModelIsAnalytic) {
  const auto c = small_config(4);
  auto p = random_params(c);
  p.output1.setZero();
  p.output2.setZero();
  const Model<double> m(c, p);
  const auto batch = oracles::random_examples(c, 4, 5, 1);
  const double expected = std::log(9.0) + std::log(4.0);
  EXPECT_NEAR(loss<double>(m, batch, {}), expected, 1e-12);
  LossOptions smooth;
  smooth.label_smoothing = 0.1;
  EXPECT_NEAR(loss<double>(m, batch, smooth), expected, 1e-12);
  EXPECT_NEAR(perplexity<double>(m, batch), 9.0 * 4.0, 1e-9);
}

TEST(Loss, PlainCrossEntropyMatchesInferencePath) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  const auto batch = oracles::random_examples(c, 3, 4, 2);
  double nll = 0;
  std::size_t tokens = 0;
  for (const auto& ex : batch) {
    const auto enc = m.encode(ex.source);
    auto state = m.initial_state(enc);
    int y1p = kBosId, y2p = kNoFactor;
    for (std::size_t i = 0; i < ex.y1.size(); ++i) {
      auto st = m.advance(enc, state, y1p, y2p);
      nll -= m.log_factor1(st.readout)[ex.y1[i]] + m.log_factor2(st.readout, ex.y1[i])[ex.y2[i]];
      state = st.state;
      y1p = ex.y1[i];
      y2p = ex.y2[i];
      ++tokens;
    }
  }
  const double mean = nll / static_cast<double>(tokens);
  EXPECT_NEAR(loss<double>(m, batch, {}), mean, 1e-12);
  EXPECT_NEAR(perplexity<double>(m, batch), std::exp(mean), 1e-9 * std::exp(mean));
  EXPECT_GE(perplexity<double>(m, batch), 1.0);
}

TEST(Loss, MismatchedStreamsAreRejected) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  Example ex{{4}, {5, 2}, {0}, {}};
  EXPECT_THROW(loss<double>(m, std::vector<Example>{ex}, {}), InvalidInput);
}

TEST(Gradient, MatchesFiniteDifferencesEverywhere) {
  auto c = small_config();
  c.coverage = true;
  c.encoder_layers = 2;
  LossOptions opts;
  opts.label_smoothing = 0.1;
  const auto r = oracles::check_gradients(c, random_params(c, 5), oracles::random_examples(c, 2, 4, 6), opts,
                                          100000, 7);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_tensor;
  EXPECT_GT(r.checked, 1000u);
}

TEST(Gradient, AllMaskedBatchHasZeroGradient) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  auto batch = oracles::random_examples(c, 2, 4, 8);
  for (auto& ex : batch) ex.mask.assign(ex.y1.size(), 0);
  ModelParams<double> g;
  EXPECT_EQ(loss_and_gradient<double>(m, batch, {}, g), 0.0);
  double norm = 0;
  g.visit([&](const std::string&, const auto& t) { norm += t.squaredNorm(); });
  EXPECT_EQ(norm, 0.0);
}

TEST(Gradient, AblatedSecondFactorLeavesOutput2Untouched) {
  const auto c = small_config();
  const Model<double> m(c, random_params(c));
  LossOptions opts;
  opts.factor2_weight = 0;
  ModelParams<double> g;
  loss_and_gradient<double>(m, oracles::random_examples(c, 2, 4, 9), opts, g);
  EXPECT_EQ(g.output2.norm(), 0.0);
  EXPECT_GT(g.output1.norm(), 0.0);
}

TEST(Training, DecayRule) {
  PlateauDecay d(1e-3, 0.9);
  EXPECT_FALSE(d.observe(10));
  EXPECT_TRUE(d.observe(11));
  EXPECT_FALSE(d.observe(10.5));
  EXPECT_TRUE(d.observe(12));
  EXPECT_NEAR(d.learning_rate(), 0.001 * 0.81, 1e-18);
  EXPECT_FALSE(d.observe(12));  // equal is not an increase
}

namespace {

std::vector<Example> copy_task(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> id(4, 8), len(1, 4);
  std::vector<Example> out;
  for (std::size_t k = 0; k < n; ++k) {
    Example ex;
    for (int i = len(rng); i > 0; --i) {
      ex.source.push_back(id(rng));
      ex.y1.push_back(ex.source.back());
      ex.y2.push_back(ex.source.back() % 3);
    }
    ex.y1.push_back(kEosId);
    ex.y2.push_back(0);
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST(Training, LossDecreasesOnToyCopyTask) {
  auto c = ModelConfig::desk_scale(10, 10, 3);
  c.embedding_dim = 16;
  c.hidden_dim = 16;
  const auto data = copy_task(50, 1);
  TrainConfig tc;
  tc.max_steps = 200;
  tc.batch_size = 10;
  tc.validate_every = 50;
  const auto r = train(c, data, data, tc);
  ASSERT_EQ(r.step_losses.size(), 200u);
  double first = 0, last = 0;
  for (int i = 0; i < 20; ++i) {
    first += r.step_losses[static_cast<std::size_t>(i)];
    last += r.step_losses[r.step_losses.size() - 1 - static_cast<std::size_t>(i)];
  }
  EXPECT_LT(last, 0.8 * first);
  EXPECT_LT(r.log.back().valid_perplexity, r.log.front().valid_perplexity);
}

TEST(Training, DeterministicGivenSeed) {
  auto c = small_config();
  const auto data = copy_task(20, 2);
  TrainConfig tc;
  tc.max_steps = 30;
  tc.batch_size = 4;
  tc.validate_every = 10;
  const auto a = train(c, data, data, tc);
  const auto b = train(c, data, data, tc);
  EXPECT_EQ(a.step_losses, b.step_losses);
  EXPECT_EQ(a.params.output1, b.params.output1);
  tc.seed = 3;
  EXPECT_NE(train(c, data, data, tc).step_losses, a.step_losses);
}

TEST(Training, CallbackStopsEarly) {
  const auto c = small_config();
  const auto data = copy_task(20, 2);
  TrainConfig tc;
  tc.max_steps = 100;
  tc.batch_size = 4;
  tc.validate_every = 10;
  const auto r = train(c, data, data, tc, [](const TrainLogEntry& e, const Model<float>&) { return e.step >= 20; });
  EXPECT_EQ(r.steps, 20u);
  EXPECT_EQ(r.log.size(), 2u);
}

TEST(Training, DivergenceAborts) {
  const auto c = small_config();
  const auto data = copy_task(20, 2);
  TrainConfig tc;
  tc.max_steps = 50;
  tc.batch_size = 4;
  tc.learning_rate = 1e36;
  EXPECT_THROW(train(c, data, data, tc), DivergenceError);
}

TEST(Config, ValidationAndJson) {
  auto c = small_config();
  c.layerwise_pretraining = true;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = small_config();
  c.coverage = true;
  nlohmann::json j = c;
  EXPECT_EQ(j.get<ModelConfig>(), c);
  const auto full = ModelConfig::full_scale(50000, 45000, 4);
  EXPECT_EQ(full.embedding_dim, 620u);
  EXPECT_EQ(full.hidden_dim, 1000u);
  EXPECT_EQ(full.encoder_layers, 4u);
  EXPECT_EQ(factor_vocab_size(Application::kOsnmt), 11u);
}

TEST(ModelIo, RoundTrip) {
  const auto dir = temp_dir("roundtrip");
  auto c = small_config(4);
  c.source_vocab = 6;
  c.target_vocab = 5;
  ModelBundle b{Application::kCasing, c, Vocab({"<pad>", "<s>", "</s>", "<unk>", "a", "b"}),
                Vocab({"<pad>", "<s>", "</s>", "<unk>", "x"}), ModelParams<float>::random(c, 3)};
  save_model(dir, b);
  const auto back = load_model(dir);
  EXPECT_EQ(back.application, Application::kCasing);
  EXPECT_EQ(back.config, c);
  EXPECT_EQ(back.target_vocab.tokens(), b.target_vocab.tokens());
  b.params.visit([&](const std::string& name, const auto& t) {
    back.params.visit([&](const std::string& n2, const auto& t2) {
      if (name == n2) {
        ASSERT_EQ(t.rows(), t2.rows());
        ASSERT_EQ(t.cols(), t2.cols());
        ASSERT_TRUE(t.isApprox(t2, 0.0f));
      }
    });
  });
  EXPECT_EQ(std::filesystem::file_size(dir / "weights.bin"), b.params.size() * 4);
}

TEST(ModelIo, Errors) {
  EXPECT_THROW(load_model(temp_dir("missing")), IoError);
  const auto dir = temp_dir("truncated");
  auto c = small_config(4);
  c.source_vocab = 5;
  c.target_vocab = 5;
  const Vocab v({"<pad>", "<s>", "</s>", "<unk>", "x"});
  save_model(dir, {Application::kCasing, c, v, v, ModelParams<float>::random(c, 3)});
  std::filesystem::resize_file(dir / "weights.bin", 8);
  EXPECT_THROW(load_model(dir), FormatError);
  std::ofstream(dir / "manifest.json") << "{ not json";
  EXPECT_THROW(load_model(dir), FormatError);
}
