#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace coliee {

struct RankedItem {
  std::string id;
  double score = 0.0;
};

/// Per-query selections (case ids or 1-based paragraph indices as strings),
/// optionally with the full scored ranking.
struct RunResult {
  std::map<std::string, std::vector<std::string>> selections;
  std::map<std::string, std::vector<RankedItem>> rankings;
};

using Qrels = std::map<std::string, std::set<std::string>>;

struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t retrieved = 0;
  std::size_t labeled = 0;
};

/// Micro-averaged P/R/F1: counts are summed over the run's queries before
/// dividing. 0/0 yields 0. Throws if a run query has no qrels entry or a
/// query selects the same id twice.
MetricReport micro_metrics(const RunResult& run, const Qrels& qrels);

/// "qid\tid" per line, queries in id order, selection order preserved.
std::string serialize_selection(const RunResult& run);
/// "qid\tid\trank\tscore" per line (rank is 1-based).
std::string serialize_ranking(const RunResult& run);
std::string serialize(const MetricReport& report);

RunResult load_selection(const std::filesystem::path& path);
RunResult load_ranking(const std::filesystem::path& path);

/// Accepts either labels layout: {"qid","relevant":[...]} or {"qid","entailing":[...]}.
Qrels load_qrels(const std::filesystem::path& path);

}  // namespace coliee
