#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rocq::text {

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

// Splits on '\n'. A trailing newline does not produce an empty last line.
std::vector<std::string_view> split_lines(std::string_view s);

// Replaces every run of whitespace by a single space and trims both ends.
std::string collapse_whitespace(std::string_view s);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Reads a `key = value` document. Blank lines and lines starting with '#'
// are ignored; later keys override earlier ones.
std::map<std::string, std::string> parse_key_values(std::string_view doc);

// Lines of a data file with comments ('#' at line start) and blanks removed.
std::vector<std::string> data_lines(std::string_view doc);

}  // namespace rocq::text
