#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fluency::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Splits on LF, dropping one trailing CR per line.
std::vector<std::string> split_lines(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);

}  // namespace fluency::io
