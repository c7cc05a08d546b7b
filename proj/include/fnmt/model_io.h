#pragma once

#include <filesystem>

#include "fnmt/model.h"
#include "fnmt/vocab.h"

namespace fnmt {

inline constexpr int kModelFormatVersion = 1;

// Everything a model directory holds.
struct ModelBundle {
  Application application = Application::kNone;
  ModelConfig config;
  Vocab source_vocab;
  Vocab target_vocab;
  ModelParams<float> params;
};

// Directory layout: manifest.json (format version, application, config, seed,
// tensor names and shapes), weights.bin (little-endian float32, tensors in
// manifest order, each row-major), source.vocab and target.vocab.
void save_model(const std::filesystem::path& dir, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& dir);

}  // namespace fnmt
