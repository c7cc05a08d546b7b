#include "fnmt/model_config.h"

#include "fnmt/error.h"
#include "fnmt/osm.h"

namespace fnmt {

Application parse_application(std::string_view name) {
  if (name == "casing") return Application::kCasing;
  if (name == "segmentation") return Application::kSegmentation;
  if (name == "osnmt") return Application::kOsnmt;
  if (name == "none") return Application::kNone;
  throw InvalidInput("unknown application \"" + std::string(name) + "\"");
}

std::string_view application_name(Application app) {
  switch (app) {
    case Application::kCasing: return "casing";
    case Application::kSegmentation: return "segmentation";
    case Application::kOsnmt: return "osnmt";
    case Application::kNone: return "none";
  }
  return "none";
}

std::size_t factor_vocab_size(Application app) {
  switch (app) {
    case Application::kCasing: return 4;
    case Application::kSegmentation: return 2;
    case Application::kOsnmt: return osm::kDefaultMaxPops + 1;
    case Application::kNone: return 1;
  }
  return 1;
}

ModelConfig ModelConfig::full_scale(std::size_t source_vocab, std::size_t target_vocab,
                                     std::size_t factor_vocab) {
  ModelConfig c;
  c.source_vocab = source_vocab;
  c.target_vocab = target_vocab;
  c.factor_vocab = factor_vocab;
  c.embedding_dim = 620;
  c.hidden_dim = 1000;
  c.encoder_layers = 4;
  c.coverage = true;
  return c;
}

ModelConfig ModelConfig::desk_scale(std::size_t source_vocab, std::size_t target_vocab,
                                    std::size_t factor_vocab) {
  ModelConfig c;
  c.source_vocab = source_vocab;
  c.target_vocab = target_vocab;
  c.factor_vocab = factor_vocab;
  return c;
}

void ModelConfig::validate() const {
  if (source_vocab < 1 || target_vocab < 1 || factor_vocab < 1 || embedding_dim < 1 ||
      hidden_dim < 1 || encoder_layers < 1)
    throw InvalidInput("model dimensions must all be at least 1");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
    throw InvalidInput("label smoothing must lie in [0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must lie in [0, 1)");
  if (layerwise_pretraining) throw InvalidInput("layer-wise pretraining is not supported");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"source_vocab", c.source_vocab},
                     {"target_vocab", c.target_vocab},
                     {"factor_vocab", c.factor_vocab},
                     {"embedding_dim", c.embedding_dim},
                     {"hidden_dim", c.hidden_dim},
                     {"encoder_layers", c.encoder_layers},
                     {"label_smoothing", c.label_smoothing},
                     {"dropout", c.dropout},
                     {"coverage", c.coverage},
                     {"layerwise_pretraining", c.layerwise_pretraining},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("source_vocab").get_to(c.source_vocab);
  j.at("target_vocab").get_to(c.target_vocab);
  j.at("factor_vocab").get_to(c.factor_vocab);
  j.at("embedding_dim").get_to(c.embedding_dim);
  j.at("hidden_dim").get_to(c.hidden_dim);
  j.at("encoder_layers").get_to(c.encoder_layers);
  j.at("label_smoothing").get_to(c.label_smoothing);
  j.at("dropout").get_to(c.dropout);
  j.at("coverage").get_to(c.coverage);
  c.layerwise_pretraining = j.value("layerwise_pretraining", false);
  j.at("seed").get_to(c.seed);
}

}  // namespace fnmt
