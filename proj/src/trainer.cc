#include "fnmt/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fnmt {

bool PlateauDecay::observe(double perplexity) {
  const bool worse = seen_ && perplexity > last_;
  if (worse) lr_ *= factor_;
  last_ = perplexity;
  seen_ = true;
  return worse;
}

namespace {

template <typename T>
std::vector<std::pair<T*, Eigen::Index>> flatten(ModelParams<T>& p) {
  std::vector<std::pair<T*, Eigen::Index>> out;
  p.visit([&](const std::string&, auto& t) { out.emplace_back(t.data(), t.size()); });
  return out;
}

template <typename T>
std::vector<std::pair<const T*, Eigen::Index>> flatten(const ModelParams<T>& p) {
  std::vector<std::pair<const T*, Eigen::Index>> out;
  p.visit([&](const std::string&, const auto& t) { out.emplace_back(t.data(), t.size()); });
  return out;
}

}  // namespace

template <typename T>
void Adam<T>::update(ModelParams<T>& params, const ModelParams<T>& grads, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = flatten(params);
  auto g = flatten(grads);
  auto m = flatten(m_);
  auto v = flatten(v_);
  const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
  const T step = static_cast<T>(lr * std::sqrt(c2) / c1);
  const T eps = static_cast<T>(eps_ * std::sqrt(c2));
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (Eigen::Index i = 0; i < p[k].second; ++i) {
      const T gi = g[k].first[i];
      T& mi = m[k].first[i];
      T& vi = v[k].first[i];
      mi = b1 * mi + (T(1) - b1) * gi;
      vi = b2 * vi + (T(1) - b2) * gi * gi;
      p[k].first[i] -= step * mi / (std::sqrt(vi) + eps);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

TrainResult train(const ModelConfig& config, std::span<const Example> corpus,
                  std::span<const Example> validation, const TrainConfig& tc,
                  const TrainCallback& callback) {
  config.validate();
  if (corpus.empty() || validation.empty()) throw InvalidInput("training and validation corpora must be non-empty");
  if (tc.batch_size == 0 || tc.validate_every == 0) throw InvalidInput("batch size and validation interval must be positive");

  Model<float> model(config, ModelParams<float>::random(config, config.seed));
  Adam<float> adam(config);
  PlateauDecay schedule(tc.learning_rate, tc.decay_factor);
  std::mt19937_64 order_rng(tc.seed);
  std::mt19937_64 dropout_rng(tc.seed ^ 0x9E3779B97F4A7C15ULL);

  LossOptions opts;
  opts.label_smoothing = config.label_smoothing;
  opts.factor2_weight = tc.factor2_weight;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  TrainResult result;
  ModelParams<float> grads;
  std::vector<Example> batch;
  double window_loss = 0;
  std::size_t window = 0;

  for (std::size_t step = 1; step <= tc.max_steps; ++step) {
    batch.clear();
    while (batch.size() < tc.batch_size) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      batch.push_back(corpus[order[cursor++]]);
      if (batch.size() == corpus.size()) break;
    }
    const float l = loss_and_gradient<float>(model, batch, opts, grads, &dropout_rng);
    if (!std::isfinite(l))
      throw DivergenceError("non-finite training loss at step " + std::to_string(step));
    adam.update(model.mutable_params(), grads, schedule.learning_rate());
    result.step_losses.push_back(l);
    window_loss += l;
    ++window;
    result.steps = step;

    if (step % tc.validate_every == 0 || step == tc.max_steps) {
      TrainLogEntry entry;
      entry.step = step;
      entry.train_loss = window_loss / static_cast<double>(window);
      entry.valid_perplexity = perplexity(model, validation);
      if (!std::isfinite(entry.valid_perplexity))
        throw DivergenceError("non-finite validation perplexity at step " + std::to_string(step));
      entry.decayed = schedule.observe(entry.valid_perplexity);
      entry.learning_rate = schedule.learning_rate();
      result.log.push_back(entry);
      window_loss = 0;
      window = 0;
      if (callback && callback(entry, model)) break;
    }
  }
  result.params = model.params();
  return result;
}

}  // namespace fnmt
