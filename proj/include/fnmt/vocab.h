#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fnmt/text_io.h"

namespace fnmt {

inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr std::size_t kNumReserved = 4;

// Token <-> id map. Ids 0-3 are <pad>, <s>, </s>, <unk>; the end-of-sequence
// name coincides with the factored OSM sentinel.
class Vocab {
 public:
  Vocab();
  explicit Vocab(const std::vector<std::string>& tokens);

  // Most frequent tokens first, frequency ties in lexicographic order, reserved
  // ids prepended. `size` counts the reserved entries and must be >= 5.
  static Vocab build(const std::vector<std::string>& lines, std::size_t size);

  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  int id(std::string_view token) const;  // <unk> for unknown tokens
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const Tokens& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace fnmt
