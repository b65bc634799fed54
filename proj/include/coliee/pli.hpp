#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coliee/corpus.hpp"
#include "coliee/encoder.hpp"

namespace coliee {

inline constexpr std::size_t kDefaultMaxQueryParagraphs = 54;
inline constexpr std::size_t kDefaultMaxCandidateParagraphs = 40;
inline constexpr std::size_t kDefaultPliHidden = 256;

/// rows × cols grid of encoder vectors for one (query, candidate) pair.
struct InteractionMap {
  std::string qid;
  std::string cid;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t dim = 0;
  std::vector<double> data;  // row-major cells, each `dim` long

  Eigen::Map<const Eigen::VectorXd> cell(std::size_t i, std::size_t j) const {
    return {data.data() + (i * cols + j) * dim, static_cast<Eigen::Index>(dim)};
  }
};

/// Downstream BERT-PLI parameters.
///
/// GRU gates are stacked [reset; update; new] in wx (3h×d), wh (3h×h),
/// bx and bh (3h):
///   r = σ(Wx_r x + bx_r + Wh_r h + bh_r)
///   z = σ(Wx_z x + bx_z + Wh_z h + bh_z)
///   n = tanh(Wx_n x + bx_n + r ⊙ (Wh_n h + bh_n))
///   h' = (1 − z) ⊙ n + z ⊙ h
/// Attention: u_t = tanh(wa h_t + ba), α = softmax_t(u_t · uw), d = Σ α_t h_t.
/// Head: probs = softmax(wo d + bo), index 1 = relevant.
struct PliModel {
  Eigen::MatrixXd wx, wh;
  Eigen::VectorXd bx, bh;
  Eigen::MatrixXd wa;
  Eigen::VectorXd ba, uw;
  Eigen::MatrixXd wo;
  Eigen::VectorXd bo;

  std::size_t input_dim() const { return static_cast<std::size_t>(wx.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(wh.cols()); }

  /// Zero-valued model of the given shape.
  static PliModel zeros(std::size_t input_dim, std::size_t hidden);

  /// Visits every parameter tensor as (name, flat mutable view) in a fixed order.
  void for_each_param(const std::function<void(const char*, Eigen::Map<Eigen::VectorXd>)>& fn);
};

/// Uniform(−0.08, 0.08) initialization from Pcg32(seed).
PliModel init_pli_model(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

/// Intermediate values of one forward pass, kept for backpropagation.
struct PliForward {
  std::vector<Eigen::VectorXd> h;  // h[0] = 0, h[t] for t = 1..T
  std::vector<Eigen::VectorXd> r, z, n, hn;  // per step (index t-1)
  std::vector<Eigen::VectorXd> u;
  Eigen::VectorXd alpha;
  Eigen::VectorXd output;  // d_qk
  Eigen::VectorXd logits;
  std::array<double, 2> probs{};
};

/// Uses the first min(n, max_rows) query paragraphs and min(m, max_cols)
/// candidate paragraphs; cell (i, j) encodes (query_i, candidate_j).
InteractionMap build_interaction_map(const CaseDocument& query, const CaseDocument& cand, const EncoderProvider& enc,
                                     std::size_t max_rows = kDefaultMaxQueryParagraphs,
                                     std::size_t max_cols = kDefaultMaxCandidateParagraphs);

/// Same truncation applied to a precomputed grid from an embeddings file.
InteractionMap interaction_map_from_grid(const std::string& qid, const std::string& cid, const EncodingGrid& grid,
                                         std::size_t dim, std::size_t max_rows = kDefaultMaxQueryParagraphs,
                                         std::size_t max_cols = kDefaultMaxCandidateParagraphs);

/// Elementwise max over the candidate axis; column i is query paragraph i.
Eigen::MatrixXd maxpool_rows(const InteractionMap& map);

/// Full forward pass over a (dim × T) sequence.
PliForward pli_forward(const PliModel& model, const Eigen::MatrixXd& seq);

Eigen::VectorXd gru_attend(const PliModel& model, const Eigen::MatrixXd& seq);
std::array<double, 2> classify(const PliModel& model, const Eigen::VectorXd& d_qk);

/// Cross-entropy −ln probs[label] and its gradient w.r.t. every parameter.
double pli_loss_and_gradient(const PliModel& model, const Eigen::MatrixXd& seq, int label, PliModel& grad);

struct PliTrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-6;
  std::size_t max_epochs = 60;
  std::size_t hidden = kDefaultPliHidden;
  std::uint64_t seed = 0;
  double threshold = 0.5;
};

/// A maxpooled interaction sequence with its label.
struct PliExample {
  std::string qid;
  std::string cid;
  Eigen::MatrixXd seq;
  int label = 0;
};

PliExample make_pli_example(const InteractionMap& map, int label);

struct PliTrainResult {
  PliModel model;
  std::size_t best_epoch = 0;
  std::vector<double> train_loss;  // mean cross-entropy per epoch
  std::vector<double> validation_f1;
};

/// Per-example SGD with decoupled L2 (θ −= lr·(∇ + wd·θ)), seeded shuffle per
/// epoch. Returns the snapshot with the best validation F1 of the
/// probs[1] ≥ threshold decision (earliest on ties; last epoch without
/// validation). Throws when the training set has a single class.
PliTrainResult train_pli(const std::vector<PliExample>& train, const PliTrainConfig& cfg,
                         const std::vector<PliExample>& validation);

double pli_accuracy(const PliModel& model, const std::vector<PliExample>& examples, double threshold = 0.5);

std::string serialize(const PliModel& model);
PliModel load_pli_model(const std::filesystem::path& path);

}  // namespace coliee
