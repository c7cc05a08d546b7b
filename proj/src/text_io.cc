#include "fnmt/text_io.h"

#include <fstream>

#include "fnmt/error.h"

namespace fnmt {

Tokens split_tokens(std::string_view line) {
  Tokens out;
  if (line.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(' ', start);
    const auto piece = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (piece.empty()) throw FormatError("empty token in line \"" + std::string(line) + "\"");
    out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_tokens(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("write error on " + path.string());
}

}  // namespace fnmt
