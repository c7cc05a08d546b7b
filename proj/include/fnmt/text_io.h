#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fnmt {

using Tokens = std::vector<std::string>;

// Splits on single spaces. An empty line yields no tokens; consecutive spaces
// are a format error because they would produce empty tokens.
Tokens split_tokens(std::string_view line);
std::string join_tokens(const Tokens& tokens, std::string_view sep = " ");

// Whole-file line I/O. Lines are returned without their terminator; a final
// newline does not produce an extra empty line.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace fnmt
