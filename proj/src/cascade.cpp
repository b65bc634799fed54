#include "coliee/cascade.hpp"

#include <algorithm>

#include "coliee/error.hpp"
#include "coliee/parallel.hpp"

namespace coliee {

CascadeResult cascade_topk(const TokenizedDoc& query, std::span<const TokenizedDoc> candidates,
                           const CollectionStats& stats, std::size_t k, const LexicalParams& params) {
  if (k < 1) throw Error("cascade k must be at least 1");
  CascadeResult result;
  result.qid = query.doc_id;
  result.k = k;
  result.kept.resize(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    result.kept[i] = {candidates[i].doc_id, bigram_lmir(query, candidates[i], stats, params)};
  });
  std::sort(result.kept.begin(), result.kept.end(), [](const RankedItem& a, const RankedItem& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  if (result.kept.size() > k) result.kept.resize(k);
  return result;
}

std::string serialize(const std::vector<CascadeResult>& results) {
  RunResult run;
  for (const auto& r : results) run.rankings[r.qid] = r.kept;
  return serialize_ranking(run);
}

std::vector<CascadeResult> load_cascade(const std::filesystem::path& path) {
  const RunResult run = load_ranking(path);
  std::vector<CascadeResult> out;
  for (const auto& [qid, items] : run.rankings) out.push_back({qid, items, items.size()});
  return out;
}

}  // namespace coliee
