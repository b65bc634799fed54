#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coliee/eval.hpp"
#include "coliee/lexical.hpp"

namespace coliee {

inline constexpr std::size_t kDefaultCascadeK = 30;

/// First-stage survivors of one query, best first.
struct CascadeResult {
  std::string qid;
  std::vector<RankedItem> kept;  // (cid, bigram LMIR score), non-increasing
  std::size_t k = kDefaultCascadeK;
};

/// Scores every candidate with bigram LMIR (in parallel), sorts by score
/// descending with cid ascending on ties, and keeps the first k.
CascadeResult cascade_topk(const TokenizedDoc& query, std::span<const TokenizedDoc> candidates,
                           const CollectionStats& stats, std::size_t k = kDefaultCascadeK,
                           const LexicalParams& params = {});

/// "qid\tcid\trank\tscore" lines.
std::string serialize(const std::vector<CascadeResult>& results);
std::vector<CascadeResult> load_cascade(const std::filesystem::path& path);

}  // namespace coliee
