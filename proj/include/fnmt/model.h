#pragma once

// Attentional encoder-decoder with a two-factor output layer.
//
// Encoder: stacked bidirectional LSTMs over source embeddings; the top layer's
// concatenated states are the annotations.
// Decoder, per step:
//   alpha   = softmax_j( v . tanh(W_a s' + U_a a_j + b_a [+ w_cov cov_j]) )
//   c       = sum_j alpha_j a_j
//   s       = LSTM(s', [E1 y1' ; E2 y2' ; c])
//   t       = tanh(W_t [s ; c] + b_t)
//   p(y1)   = softmax(W_o1 t)
//   p(y2)   = softmax(W_o2 [t ; E1 y1])
// At the first step y1' is the begin-of-sequence id and E2 y2' is the zero
// vector. Dropout, when training, is applied to t before both softmaxes.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fnmt/error.h"
#include "fnmt/model_config.h"
#include "fnmt/vocab.h"

namespace fnmt {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Previous second factor at the first decoding step.
inline constexpr int kNoFactor = -1;

template <typename T>
struct LstmWeights {
  Mat<T> input;      // 4H x in, gate rows ordered i, f, g, o
  Mat<T> recurrent;  // 4H x H
  Vec<T> bias;       // 4H
};

template <typename T>
struct ModelParams {
  Mat<T> source_embedding;  // Vs x E
  std::vector<LstmWeights<T>> encoder_fwd;
  std::vector<LstmWeights<T>> encoder_bwd;
  Mat<T> init_weight;  // H x A
  Vec<T> init_bias;
  Mat<T> att_state;       // H x H
  Mat<T> att_annotation;  // H x A
  Vec<T> att_bias;
  Vec<T> att_score;
  Vec<T> att_coverage;
  LstmWeights<T> decoder;  // input is 2E + A
  Mat<T> readout_weight;   // E x (H + A)
  Vec<T> readout_bias;
  Mat<T> output1;     // V1 x E
  Mat<T> output2;     // V2 x 2E
  Mat<T> embedding1;  // V1 x E
  Mat<T> embedding2;  // V2 x E

  // Calls f(name, tensor) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) { visit_impl(*this, f); }
  template <typename F>
  void visit(F&& f) const { visit_impl(*this, f); }

  static ModelParams zeros(const ModelConfig& config);
  // uniform(-0.08, 0.08); embeddings uniform(-1/sqrt(E), 1/sqrt(E)); forget-gate bias 1.
  static ModelParams random(const ModelConfig& config, std::uint64_t seed);

  template <typename U>
  ModelParams<U> cast() const;

  std::size_t size() const {
    std::size_t n = 0;
    visit([&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& p, F& f) {
    f("source_embedding", p.source_embedding);
    for (std::size_t l = 0; l < p.encoder_fwd.size(); ++l) {
      for (int dir = 0; dir < 2; ++dir) {
        auto& w = dir == 0 ? p.encoder_fwd[l] : p.encoder_bwd[l];
        const std::string prefix = "encoder." + std::to_string(l) + (dir == 0 ? ".fwd." : ".bwd.");
        f(prefix + "input", w.input);
        f(prefix + "recurrent", w.recurrent);
        f(prefix + "bias", w.bias);
      }
    }
    f("init.weight", p.init_weight);
    f("init.bias", p.init_bias);
    f("attention.state", p.att_state);
    f("attention.annotation", p.att_annotation);
    f("attention.bias", p.att_bias);
    f("attention.score", p.att_score);
    f("attention.coverage", p.att_coverage);
    f("decoder.input", p.decoder.input);
    f("decoder.recurrent", p.decoder.recurrent);
    f("decoder.bias", p.decoder.bias);
    f("readout.weight", p.readout_weight);
    f("readout.bias", p.readout_bias);
    f("output1", p.output1);
    f("output2", p.output2);
    f("embedding1", p.embedding1);
    f("embedding2", p.embedding2);
  }
};

// One training pair. The target streams include the final end-of-sequence
// step. An empty mask weights every step 1; masked steps weigh 0.
struct Example {
  std::vector<int> source;
  std::vector<int> y1;
  std::vector<int> y2;
  std::vector<std::uint8_t> mask;
};

struct LossOptions {
  double label_smoothing = 0.0;
  // 0 ablates the second-factor cross-entropy.
  double factor2_weight = 1.0;
};

template <typename T>
class Model {
 public:
  struct Encoded {
    Mat<T> annotations;  // A x J
    Mat<T> projected;    // H x J, U_a a_j + b_a
    Vec<T> mean;         // mean annotation
  };

  struct Attention {
    Vec<T> context;
    Vec<T> weights;
  };

  struct DecoderState {
    Vec<T> h;
    Vec<T> c;
    Vec<T> coverage;  // accumulated attention per source position
  };

  struct Step {
    DecoderState state;
    Vec<T> readout;
    Vec<T> attention;
  };

  Model(ModelConfig config, ModelParams<T> params);

  const ModelConfig& config() const { return config_; }
  const ModelParams<T>& params() const { return params_; }
  ModelParams<T>& mutable_params() { return params_; }

  Encoded encode(std::span<const int> source) const;
  Attention attend(const Vec<T>& prev_state, const Encoded& enc, const Vec<T>& coverage) const;
  DecoderState initial_state(const Encoded& enc) const;

  // s = f(s', [E1 y1' ; E2 y2'], c) and the readout t; coverage is carried over unchanged.
  std::pair<DecoderState, Vec<T>> decoder_step(const DecoderState& prev, int y1_prev, int y2_prev,
                                               const Vec<T>& context) const;

  // attend + decoder_step + coverage update.
  Step advance(const Encoded& enc, const DecoderState& prev, int y1_prev, int y2_prev) const;

  Vec<T> output_factor1(const Vec<T>& readout) const;
  Vec<T> output_factor2(const Vec<T>& readout, int y1) const;
  Vec<T> log_factor1(const Vec<T>& readout) const;
  Vec<T> log_factor2(const Vec<T>& readout, int y1) const;

 private:
  void check_y1(int id) const;
  void check_y2(int id) const;

  ModelConfig config_;
  ModelParams<T> params_;
};

// Token-mean of the (label-smoothed) cross-entropies of both factors.
// `rng` enables dropout; pass nullptr for a deterministic evaluation.
template <typename T>
T loss(const Model<T>& model, std::span<const Example> batch, const LossOptions& options,
       std::mt19937_64* rng = nullptr);

// As loss(), additionally writing d loss / d params into `grads` (overwritten).
template <typename T>
T loss_and_gradient(const Model<T>& model, std::span<const Example> batch,
                    const LossOptions& options, ModelParams<T>& grads,
                    std::mt19937_64* rng = nullptr);

// exp(mean per-token joint negative log-likelihood), no smoothing or dropout.
template <typename T>
double perplexity(const Model<T>& model, std::span<const Example> corpus);

}  // namespace fnmt

#include "fnmt/model_impl.h"
