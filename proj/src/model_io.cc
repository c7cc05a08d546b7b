#include "fnmt/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "fnmt/error.h"

namespace fnmt {

static_assert(std::endian::native == std::endian::little, "weights.bin is written in host byte order");

namespace {

template <typename Tensor>
void write_row_major(std::ofstream& out, const Tensor& t) {
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      const float v = t(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

template <typename Tensor>
void read_row_major(std::ifstream& in, Tensor& t) {
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      t(r, c) = v;
    }
}

}  // namespace

void save_model(const std::filesystem::path& dir, const ModelBundle& b) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create model directory " + dir.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["application"] = std::string(application_name(b.application));
  manifest["config"] = b.config;
  manifest["seed"] = b.config.seed;
  manifest["tensors"] = nlohmann::json::array();
  b.params.visit([&](const std::string& name, const auto& t) {
    manifest["tensors"].push_back({{"name", name}, {"shape", {t.rows(), t.cols()}}});
  });
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "weights.bin", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "weights.bin").string());
    b.params.visit([&](const std::string&, const auto& t) { write_row_major(out, t); });
    if (!out) throw IoError("write error on " + (dir / "weights.bin").string());
  }
  b.source_vocab.save(dir / "source.vocab");
  b.target_vocab.save(dir / "target.vocab");
}

ModelBundle load_model(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw IoError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad manifest.json: " + std::string(e.what()));
  }

  ModelBundle b;
  try {
    if (manifest.at("format_version").get<int>() != kModelFormatVersion)
      throw FormatError("unsupported model format version");
    b.application = parse_application(manifest.at("application").get<std::string>());
    b.config = manifest.at("config").get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad manifest.json: " + std::string(e.what()));
  }
  b.config.validate();
  b.params = ModelParams<float>::zeros(b.config);

  const auto& tensors = manifest.at("tensors");
  std::size_t k = 0;
  b.params.visit([&](const std::string& name, const auto& t) {
    if (k >= tensors.size() || tensors[k].at("name").get<std::string>() != name ||
        tensors[k].at("shape")[0].get<Eigen::Index>() != t.rows() ||
        tensors[k].at("shape")[1].get<Eigen::Index>() != t.cols())
      throw FormatError("manifest tensor " + std::to_string(k) + " does not match the config (" + name + ")");
    ++k;
  });
  if (k != tensors.size()) throw FormatError("manifest lists extra tensors");

  std::ifstream in(dir / "weights.bin", std::ios::binary);
  if (!in) throw IoError("cannot open " + (dir / "weights.bin").string());
  b.params.visit([&](const std::string&, auto& t) { read_row_major(in, t); });
  if (!in) throw FormatError("weights.bin is shorter than the manifest declares");
  in.peek();
  if (!in.eof()) throw FormatError("weights.bin is longer than the manifest declares");

  b.source_vocab = Vocab::load(dir / "source.vocab");
  b.target_vocab = Vocab::load(dir / "target.vocab");
  if (b.source_vocab.size() != b.config.source_vocab || b.target_vocab.size() != b.config.target_vocab)
    throw FormatError("vocabulary sizes do not match the model config");
  return b;
}

}  // namespace fnmt
