#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "coliee/eval.hpp"
#include "coliee/lexical.hpp"

namespace coliee {

/// Linear scorer squashed by a sigmoid: f(q,d) = σ(w·v + b).
struct DuetModel {
  DuetFeatures w{};
  double b = 0.0;
};

struct DuetTrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  std::size_t max_epochs = 20;
  std::uint64_t seed = 0;
  std::size_t top_k = 5;
};

/// Feature vectors of every candidate of one query, with its labels.
struct DuetTopic {
  std::string qid;
  std::vector<std::string> cids;
  std::vector<DuetFeatures> features;
  std::set<std::string> relevant;
};

struct DuetGradient {
  DuetFeatures w{};
  double b = 0.0;
};

struct DuetTrainResult {
  DuetModel model;
  std::size_t best_epoch = 0;       // 1-based
  std::vector<double> train_loss;   // Σ hinge over training topics after each epoch
  std::vector<double> validation_f1;
};

double linear_score(const DuetModel& model, const DuetFeatures& v);
double score(const DuetModel& model, const DuetFeatures& v);

/// Σ_{d+} Σ_{d-} max(0, 1 − f(d+) + f(d−)).
double hinge_loss(const DuetModel& model, std::span<const DuetFeatures> pos, std::span<const DuetFeatures> neg);

/// Subgradient of hinge_loss; inactive pairs contribute zero.
DuetGradient hinge_gradient(const DuetModel& model, std::span<const DuetFeatures> pos,
                            std::span<const DuetFeatures> neg);

/// Full-batch-per-topic subgradient descent from w = 0, b = 0. Topics are
/// visited in a seeded shuffled order each epoch. The snapshot with the best
/// validation micro-F1 of the top-k selection is returned (earliest on ties);
/// with no validation topics the last epoch wins. Topics lacking a relevant
/// or an irrelevant candidate are skipped with a warning on stderr.
DuetTrainResult train_duet(const std::vector<DuetTopic>& train, const DuetTrainConfig& cfg,
                           const std::vector<DuetTopic>& validation);

/// Total hinge loss over all usable topics.
double training_loss(const DuetModel& model, const std::vector<DuetTopic>& topics);

/// Candidates sorted by score descending, ties by cid ascending.
std::vector<RankedItem> rank_candidates(const DuetModel& model, const DuetTopic& topic);

/// Top min(k, n) of rank_candidates.
std::vector<RankedItem> rank_top5(const DuetModel& model, const DuetTopic& topic, std::size_t k = 5);

std::string serialize(const DuetModel& model);
DuetModel load_duet_model(const std::filesystem::path& path);

}  // namespace coliee
