#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace coliee::io {

using json = nlohmann::json;

/// Reads a UTF-8, LF-terminated text file. Blank lines are skipped; the
/// callback receives the 1-based line number. A trailing CR is rejected.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

/// Like for_each_line, but parses every line as a JSON object.
void for_each_json(const std::filesystem::path& path,
                   const std::function<void(const json&, std::size_t)>& fn);

std::string read_file(const std::filesystem::path& path);

/// Writes atomically-enough for batch use: truncate + write + flush check.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal form that round-trips to the same double.
std::string format_real(double v);

/// Field accessors that raise ParseError naming the field and line.
const json& field(const json& obj, const char* key, std::size_t line);
std::string string_field(const json& obj, const char* key, std::size_t line);
std::vector<std::string> string_list(const json& obj, const char* key, std::size_t line);
std::vector<double> real_list(const json& obj, const char* key, std::size_t line);

}  // namespace coliee::io
