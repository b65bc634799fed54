#include "coliee/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "coliee/error.hpp"

namespace coliee::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn) {
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') throw ParseError("CR line ending", line_no);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, line_no);
    pos = end + 1;
  }
}

void for_each_json(const std::filesystem::path& path,
                   const std::function<void(const json&, std::size_t)>& fn) {
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", no);
    fn(obj, no);
  });
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("cannot format real");
  return std::string(buf.data(), ptr);
}

const json& field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", line);
  return *it;
}

std::string string_field(const json& obj, const char* key, std::size_t line) {
  const json& v = field(obj, key, line);
  if (!v.is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", line);
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, std::size_t line) {
  const json& v = field(obj, key, line);
  if (!v.is_array()) throw ParseError(std::string("field \"") + key + "\" must be an array", line);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_string()) throw ParseError(std::string("field \"") + key + "\" must hold strings", line);
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> real_list(const json& obj, const char* key, std::size_t line) {
  const json& v = field(obj, key, line);
  if (!v.is_array()) throw ParseError(std::string("field \"") + key + "\" must be an array", line);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw ParseError(std::string("field \"") + key + "\" must hold numbers", line);
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace coliee::io
