#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "coliee/lexical.hpp"

namespace coliee {

/// Line-based config: "[section]" headers, "key = value" entries, '#'
/// comments. Keys are addressed as "section.key".
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& text() const { return text_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  std::uint64_t get(const std::string& key, std::uint64_t fallback) const;

 private:
  std::string text_;
  std::map<std::string, std::string> values_;
};

/// Every tunable of the pipeline with its resolved value.
struct PipelineConfig {
  // [paths]
  std::string stopwords;  // empty: shipped list
  std::string gazetteer;  // empty: built from capitalized spans of the corpus
  // [lexical]
  LexicalParams lexical;
  // [cascade]
  std::uint64_t cascade_k = 30;
  // [pli]
  std::uint64_t max_rows = 54;
  std::uint64_t max_cols = 40;
  std::uint64_t hidden = 256;
  double pli_lr = 1e-4;
  double pli_weight_decay = 1e-6;
  std::uint64_t pli_epochs = 60;
  std::uint64_t encoder_dim = 32;
  double pli_threshold = 0.5;
  // [duet]
  double duet_lr = 1e-4;
  double duet_weight_decay = 0.0;
  std::uint64_t duet_epochs = 20;
  std::uint64_t duet_top_k = 5;
  // [ltr]
  double c_task1 = 20.0;
  double c_task2 = 1.0;
  std::uint64_t svm_iterations = 2000;
  std::uint64_t svm_batch = 1024;
  // [split]
  double ratio = 0.2;
  // [run]
  std::uint64_t seed = 0;
  std::uint64_t workers = 0;

  static PipelineConfig from(const ConfigFile& file);

  /// Resolved values as "section.key = value" lines, sorted by key.
  std::string describe() const;
};

/// Contents of the run-metadata file: the invocation, the config file text
/// verbatim, and the resolved values.
std::string run_metadata(const std::string& command_line, const ConfigFile& file, const PipelineConfig& cfg);

}  // namespace coliee
