#include "coliee/eval.hpp"

#include <charconv>

#include "coliee/error.hpp"
#include "coliee/io.hpp"

namespace coliee {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

MetricReport micro_metrics(const RunResult& run, const Qrels& qrels) {
  MetricReport r;
  for (const auto& [qid, selected] : run.selections) {
    auto it = qrels.find(qid);
    if (it == qrels.end()) throw Error("query " + qid + " has no qrels entry");
    std::set<std::string> seen;
    for (const auto& id : selected) {
      if (!seen.insert(id).second) throw ValidationError("query " + qid + " selects " + id + " twice");
      if (it->second.count(id)) ++r.tp;
    }
    r.retrieved += selected.size();
    r.labeled += it->second.size();
  }
  r.precision = ratio(r.tp, r.retrieved);
  r.recall = ratio(r.tp, r.labeled);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::string serialize_selection(const RunResult& run) {
  std::string out;
  for (const auto& [qid, ids] : run.selections)
    for (const auto& id : ids) out += qid + "\t" + id + "\n";
  return out;
}

std::string serialize_ranking(const RunResult& run) {
  std::string out;
  for (const auto& [qid, items] : run.rankings)
    for (std::size_t i = 0; i < items.size(); ++i)
      out += qid + "\t" + items[i].id + "\t" + std::to_string(i + 1) + "\t" + io::format_real(items[i].score) + "\n";
  return out;
}

std::string serialize(const MetricReport& r) {
  io::json obj = {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                  {"tp", r.tp}, {"retrieved", r.retrieved}, {"labeled", r.labeled}};
  return obj.dump(2) + "\n";
}

RunResult load_selection(const std::filesystem::path& path) {
  RunResult run;
  io::for_each_line(path, [&](std::string_view line, std::size_t no) {
    const auto cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) throw ParseError("expected \"qid\\tid\"", no);
    run.selections[std::string(cols[0])].emplace_back(cols[1]);
  });
  return run;
}

RunResult load_ranking(const std::filesystem::path& path) {
  RunResult run;
  io::for_each_line(path, [&](std::string_view line, std::size_t no) {
    const auto cols = split_tabs(line);
    if (cols.size() != 4) throw ParseError("expected \"qid\\tid\\trank\\tscore\"", no);
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), score);
    if (ec != std::errc{} || ptr != cols[3].data() + cols[3].size()) throw ParseError("bad score", no);
    auto& items = run.rankings[std::string(cols[0])];
    std::size_t rank = 0;
    std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), rank);
    if (rank != items.size() + 1) throw ParseError("ranks must be consecutive from 1", no);
    items.push_back({std::string(cols[1]), score});
  });
  return run;
}

Qrels load_qrels(const std::filesystem::path& path) {
  Qrels out;
  io::for_each_json(path, [&](const io::json& obj, std::size_t line) {
    const auto qid = io::string_field(obj, "qid", line);
    std::set<std::string> ids;
    if (obj.contains("relevant")) {
      for (auto& s : io::string_list(obj, "relevant", line)) ids.insert(std::move(s));
    } else {
      const auto& arr = io::field(obj, "entailing", line);
      if (!arr.is_array()) throw ParseError("field \"entailing\" must be an array", line);
      for (const auto& v : arr) {
        if (!v.is_number_integer()) throw ParseError("entailing indices must be integers", line);
        ids.insert(std::to_string(v.get<long long>()));
      }
    }
    if (!out.emplace(qid, std::move(ids)).second) throw ValidationError("duplicate qrels for " + qid);
  });
  return out;
}

}  // namespace coliee
