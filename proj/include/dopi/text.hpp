#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dopi {

// Lowercases ASCII letters and turns ASCII punctuation, underscores and
// whitespace into single spaces. Bytes >= 0x80 pass through untouched.
std::string normalize_text(std::string_view text);

// Whitespace tokens of normalize_text(text).
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// 1-based line number of a byte offset into text.
std::size_t line_of_offset(std::string_view text, std::size_t offset);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

} // namespace dopi
