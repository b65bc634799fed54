#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coliee/eval.hpp"
#include "coliee/lexical.hpp"

namespace coliee {

inline constexpr std::size_t kTask1Dim = 17;
inline constexpr std::size_t kTask2Dim = 7;
inline constexpr const char* kTask1Layout = "task1-v1";
inline constexpr const char* kTask2Layout = "task2-v1";

using Probs = std::array<double, 2>;

/// 1-11 duet, 12 SDR-word, 13 SDR-entity, 14-15 PLI softmax,
/// 16-17 first-paragraph pair softmax.
using Task1Features = std::array<double, kTask1Dim>;
/// 1-2 symmetric-run softmax, 3-4 asymmetric-run softmax, 5 BM25,
/// 6 position (1-based), 7 paragraph length.
using Task2Features = std::array<double, kTask2Dim>;

Task1Features assemble_task1(const DuetFeatures& duet, double sdr_w, double sdr_e, const Probs& pli_probs,
                             const Probs& firstpara_probs);
Task2Features assemble_task2(const Probs& sym_probs, const Probs& asym_probs, double bm25, std::size_t para_idx,
                             std::size_t para_len);

/// Linear pairwise ranker over min-max scaled features.
struct RankModel {
  std::vector<double> w;
  double C = 1.0;
  std::vector<std::pair<double, double>> scaler;  // (min, max) per feature

  std::size_t dim() const { return w.size(); }
};

/// Candidates of one query with binary relevance.
struct RankQuery {
  std::string qid;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

/// Pegasos-style solver for ½‖w‖² + C·Σ max(0, 1 − w·(x⁺ − x⁻)) over
/// within-query preference pairs, with λ = 1/(C·P) for P pairs:
///   η_t = 1/(λ t)
///   w ← (1 − η_t λ) w + (η_t/|B|) Σ_{p ∈ B, w·d_p < 1} d_p
///   w ← min(1, (1/√λ)/‖w‖) w
/// B is every pair when P ≤ batch_size, otherwise batch_size pairs drawn
/// with replacement from Pcg32(seed). The returned weights are the running
/// average of all iterates.
struct RankSvmConfig {
  double C = 1.0;
  std::size_t iterations = 2000;
  std::size_t batch_size = 1024;
  std::uint64_t seed = 0;
  std::size_t checkpoints = 20;  // objective samples recorded over training
};

struct RankTrainResult {
  RankModel model;
  std::size_t pairs = 0;
  std::vector<double> objective;  // primal objective of the averaged iterate at each checkpoint
};

RankTrainResult ranksvm_train(const std::vector<RankQuery>& queries, const RankSvmConfig& cfg);

/// Primal objective on the scaled training pairs.
double ranksvm_objective(const RankModel& model, const std::vector<RankQuery>& queries);

std::vector<double> scale(const RankModel& model, std::span<const double> features);
double predict(const RankModel& model, std::span<const double> features);

/// Non-negative scores first, then the best negatives until three are chosen
/// (or candidates run out). Output is ordered by score, ties by id.
std::vector<std::string> select_task1(const std::vector<RankedItem>& scores);

/// Non-negative scores (1-based); when all are negative, the argmax only.
std::set<std::size_t> select_task2(const std::vector<double>& scores);

/// Feature file: a header {"layout":...} then rows
/// {"qid","cid"|"para_idx","features":[...],"label":0|1}.
struct FeatureRow {
  std::string qid;
  std::string id;  // cid, or the paragraph index in decimal
  std::vector<double> features;
  std::optional<int> label;
};

struct FeatureFile {
  std::string layout;
  std::vector<FeatureRow> rows;
};

std::string serialize(const FeatureFile& file);
FeatureFile load_feature_file(const std::filesystem::path& path);

/// Groups rows by qid (first-seen order) for training or prediction.
std::vector<RankQuery> group_queries(const FeatureFile& file);

std::string serialize(const RankModel& model);
RankModel load_rank_model(const std::filesystem::path& path);

}  // namespace coliee
