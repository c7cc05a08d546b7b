#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fnmt/model.h"

namespace fnmt {

// Multiplies the learning rate by `factor` whenever the observed validation
// perplexity is higher than the previous observation.
class PlateauDecay {
 public:
  explicit PlateauDecay(double initial_lr = 1e-3, double factor = 0.9)
      : lr_(initial_lr), factor_(factor) {}

  // Returns true if the rate was decayed.
  bool observe(double perplexity);
  double learning_rate() const { return lr_; }

 private:
  double lr_;
  double factor_;
  double last_ = 0;
  bool seen_ = false;
};

template <typename T>
class Adam {
 public:
  Adam(const ModelConfig& config, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(ModelParams<T>::zeros(config)), v_(ModelParams<T>::zeros(config)),
        beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void update(ModelParams<T>& params, const ModelParams<T>& grads, double lr);

 private:
  ModelParams<T> m_, v_;
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  std::size_t max_steps = 2000;
  std::size_t batch_size = 32;
  std::size_t validate_every = 100;
  double learning_rate = 1e-3;
  double decay_factor = 0.9;
  double factor2_weight = 1.0;
  std::uint64_t seed = 1;
};

struct TrainLogEntry {
  std::size_t step = 0;
  double train_loss = 0;      // mean over the steps since the last entry
  double valid_perplexity = 0;
  double learning_rate = 0;   // after this validation
  bool decayed = false;
};

struct TrainResult {
  ModelParams<float> params;
  std::vector<TrainLogEntry> log;
  std::vector<double> step_losses;
  std::size_t steps = 0;
};

// Called after every validation; returning true stops training.
using TrainCallback = std::function<bool(const TrainLogEntry&, const Model<float>&)>;

// Adam on mini-batches in a seeded shuffled order, dropout from a second
// seeded stream, validation every `validate_every` steps. Throws
// DivergenceError on a non-finite loss.
TrainResult train(const ModelConfig& config, std::span<const Example> corpus,
                  std::span<const Example> validation, const TrainConfig& train_config,
                  const TrainCallback& callback = {});

}  // namespace fnmt
