#include "coliee/config.hpp"

#include <charconv>

#include "coliee/error.hpp"
#include "coliee/io.hpp"

namespace coliee {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  cfg.text_ = text;
  std::string section;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    cfg.values_[section.empty() ? key : section + "." + key] = trim(std::string_view(line).substr(eq + 1));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("config " + key + ": not a number: " + s);
  return v;
}

std::uint64_t ConfigFile::get(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("config " + key + ": not an integer: " + s);
  return v;
}

PipelineConfig PipelineConfig::from(const ConfigFile& f) {
  PipelineConfig c;
  c.stopwords = f.get("paths.stopwords", c.stopwords);
  c.gazetteer = f.get("paths.gazetteer", c.gazetteer);
  c.lexical.k1 = f.get("lexical.k1", c.lexical.k1);
  c.lexical.b = f.get("lexical.b", c.lexical.b);
  c.lexical.lambda = f.get("lexical.lambda", c.lexical.lambda);
  c.lexical.mu = f.get("lexical.mu", c.lexical.mu);
  c.lexical.lambda_b = f.get("lexical.lambda_b", c.lexical.lambda_b);
  c.lexical.epsilon = f.get("lexical.epsilon", c.lexical.epsilon);
  c.cascade_k = f.get("cascade.k", c.cascade_k);
  c.max_rows = f.get("pli.max_rows", c.max_rows);
  c.max_cols = f.get("pli.max_cols", c.max_cols);
  c.hidden = f.get("pli.hidden", c.hidden);
  c.pli_lr = f.get("pli.lr", c.pli_lr);
  c.pli_weight_decay = f.get("pli.weight_decay", c.pli_weight_decay);
  c.pli_epochs = f.get("pli.epochs", c.pli_epochs);
  c.encoder_dim = f.get("pli.encoder_dim", c.encoder_dim);
  c.pli_threshold = f.get("pli.threshold", c.pli_threshold);
  c.duet_lr = f.get("duet.lr", c.duet_lr);
  c.duet_weight_decay = f.get("duet.weight_decay", c.duet_weight_decay);
  c.duet_epochs = f.get("duet.epochs", c.duet_epochs);
  c.duet_top_k = f.get("duet.top_k", c.duet_top_k);
  c.c_task1 = f.get("ltr.c_task1", c.c_task1);
  c.c_task2 = f.get("ltr.c_task2", c.c_task2);
  c.svm_iterations = f.get("ltr.iterations", c.svm_iterations);
  c.svm_batch = f.get("ltr.batch", c.svm_batch);
  c.ratio = f.get("split.ratio", c.ratio);
  c.seed = f.get("run.seed", c.seed);
  c.workers = f.get("run.workers", c.workers);

  if (!(c.lexical.lambda > 0.0 && c.lexical.lambda < 1.0)) throw Error("lexical.lambda must lie in (0, 1)");
  if (!(c.lexical.lambda_b > 0.0 && c.lexical.lambda_b < 1.0)) throw Error("lexical.lambda_b must lie in (0, 1)");
  if (!(c.lexical.mu > 0.0)) throw Error("lexical.mu must be positive");
  if (c.cascade_k < 1) throw Error("cascade.k must be at least 1");
  if (c.max_rows < 1 || c.max_cols < 1) throw Error("pli.max_rows and pli.max_cols must be positive");
  if (!(c.ratio > 0.0 && c.ratio < 1.0)) throw Error("split.ratio must lie in (0, 1)");
  if (!(c.c_task1 > 0.0 && c.c_task2 > 0.0)) throw Error("ltr C values must be positive");
  return c;
}

std::string PipelineConfig::describe() const {
  std::map<std::string, std::string> kv = {
      {"paths.stopwords", stopwords},
      {"paths.gazetteer", gazetteer},
      {"lexical.k1", io::format_real(lexical.k1)},
      {"lexical.b", io::format_real(lexical.b)},
      {"lexical.lambda", io::format_real(lexical.lambda)},
      {"lexical.mu", io::format_real(lexical.mu)},
      {"lexical.lambda_b", io::format_real(lexical.lambda_b)},
      {"lexical.epsilon", io::format_real(lexical.epsilon)},
      {"cascade.k", std::to_string(cascade_k)},
      {"pli.max_rows", std::to_string(max_rows)},
      {"pli.max_cols", std::to_string(max_cols)},
      {"pli.hidden", std::to_string(hidden)},
      {"pli.lr", io::format_real(pli_lr)},
      {"pli.weight_decay", io::format_real(pli_weight_decay)},
      {"pli.epochs", std::to_string(pli_epochs)},
      {"pli.encoder_dim", std::to_string(encoder_dim)},
      {"pli.threshold", io::format_real(pli_threshold)},
      {"duet.lr", io::format_real(duet_lr)},
      {"duet.weight_decay", io::format_real(duet_weight_decay)},
      {"duet.epochs", std::to_string(duet_epochs)},
      {"duet.top_k", std::to_string(duet_top_k)},
      {"ltr.c_task1", io::format_real(c_task1)},
      {"ltr.c_task2", io::format_real(c_task2)},
      {"ltr.iterations", std::to_string(svm_iterations)},
      {"ltr.batch", std::to_string(svm_batch)},
      {"split.ratio", io::format_real(ratio)},
      {"run.seed", std::to_string(seed)},
      {"run.workers", std::to_string(workers)},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string run_metadata(const std::string& command_line, const ConfigFile& file, const PipelineConfig& cfg) {
  std::string out = "# command\n" + command_line + "\n# config file\n" + file.text();
  if (!file.text().empty() && file.text().back() != '\n') out += "\n";
  out += "# resolved\n" + cfg.describe();
  return out;
}

}  // namespace coliee
