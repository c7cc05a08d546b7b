#include "fnmt/vocab.h"

#include <algorithm>
#include <map>

#include "fnmt/error.h"

namespace fnmt {

namespace {
const std::vector<std::string> kReserved = {"<pad>", "<s>", "</s>", "<unk>"};
}

Vocab::Vocab() : Vocab(kReserved) {}

Vocab::Vocab(const std::vector<std::string>& tokens) : tokens_(tokens) {
  if (tokens_.size() < kNumReserved ||
      !std::equal(kReserved.begin(), kReserved.end(), tokens_.begin()))
    throw FormatError("vocabulary must start with <pad> <s> </s> <unk>");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw FormatError("duplicate vocabulary entry \"" + tokens_[i] + "\"");
  }
}

Vocab Vocab::build(const std::vector<std::string>& lines, std::size_t size) {
  if (size < kNumReserved + 1) throw InvalidInput("vocabulary size must be at least 5");
  std::map<std::string, std::size_t> counts;
  for (const auto& line : lines)
    for (auto& tok : split_tokens(line)) ++counts[std::move(tok)];
  for (const auto& r : kReserved) counts.erase(r);
  if (counts.empty()) throw InvalidInput("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens = kReserved;
  for (std::size_t i = 0; i < ranked.size() && tokens.size() < size; ++i)
    tokens.push_back(ranked[i].first);
  return Vocab(tokens);
}

Vocab Vocab::load(const std::filesystem::path& path) { return Vocab(read_lines(path)); }

void Vocab::save(const std::filesystem::path& path) const { write_lines(path, tokens_); }

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw InvalidInput("vocabulary id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const Tokens& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

}  // namespace fnmt
