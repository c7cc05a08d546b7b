#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace fnmt {

// Which target factorization a model predicts.
enum class Application { kCasing, kSegmentation, kOsnmt, kNone };

Application parse_application(std::string_view name);
std::string_view application_name(Application app);
// 4 casing classes, 2 segmentation flags, 0..10 pops, or a single dummy class.
std::size_t factor_vocab_size(Application app);

struct ModelConfig {
  std::size_t source_vocab = 0;
  std::size_t target_vocab = 0;  // first factor
  std::size_t factor_vocab = 1;  // second factor
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t encoder_layers = 1;
  double label_smoothing = 0.1;
  double dropout = 0.3;
  bool coverage = false;
  // Layer-wise pretraining is not supported; validate() rejects it.
  bool layerwise_pretraining = false;
  std::uint64_t seed = 1;

  // 620-dim embeddings, 4 bidirectional encoder layers and a decoder of 1000 units.
  static ModelConfig full_scale(std::size_t source_vocab, std::size_t target_vocab,
                                 std::size_t factor_vocab);
  static ModelConfig desk_scale(std::size_t source_vocab, std::size_t target_vocab,
                                std::size_t factor_vocab);

  std::size_t annotation_dim() const { return 2 * hidden_dim; }

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace fnmt
