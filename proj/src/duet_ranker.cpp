#include "coliee/duet_ranker.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "coliee/error.hpp"
#include "coliee/io.hpp"
#include "coliee/rng.hpp"

namespace coliee {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Partition {
  std::vector<DuetFeatures> pos, neg;
};

Partition partition(const DuetTopic& t) {
  Partition p;
  for (std::size_t i = 0; i < t.cids.size(); ++i)
    (t.relevant.count(t.cids[i]) ? p.pos : p.neg).push_back(t.features[i]);
  return p;
}

double validation_f1(const DuetModel& model, const std::vector<DuetTopic>& topics, std::size_t k) {
  RunResult run;
  Qrels qrels;
  for (const auto& t : topics) {
    auto& sel = run.selections[t.qid];
    for (const auto& item : rank_top5(model, t, k)) sel.push_back(item.id);
    qrels[t.qid] = t.relevant;
  }
  return micro_metrics(run, qrels).f1;
}

}  // namespace

double linear_score(const DuetModel& model, const DuetFeatures& v) {
  double s = model.b;
  for (std::size_t k = 0; k < kDuetDim; ++k) s += model.w[k] * v[k];
  return s;
}

double score(const DuetModel& model, const DuetFeatures& v) { return sigmoid(linear_score(model, v)); }

double hinge_loss(const DuetModel& model, std::span<const DuetFeatures> pos, std::span<const DuetFeatures> neg) {
  double loss = 0.0;
  for (const auto& p : pos) {
    const double fp = score(model, p);
    for (const auto& n : neg) loss += std::max(0.0, 1.0 - fp + score(model, n));
  }
  return loss;
}

DuetGradient hinge_gradient(const DuetModel& model, std::span<const DuetFeatures> pos,
                            std::span<const DuetFeatures> neg) {
  DuetGradient g;
  std::vector<double> fneg(neg.size());
  for (std::size_t j = 0; j < neg.size(); ++j) fneg[j] = score(model, neg[j]);
  for (const auto& p : pos) {
    const double fp = score(model, p);
    const double dp = fp * (1.0 - fp);
    for (std::size_t j = 0; j < neg.size(); ++j) {
      if (1.0 - fp + fneg[j] <= 0.0) continue;
      const double dn = fneg[j] * (1.0 - fneg[j]);
      for (std::size_t k = 0; k < kDuetDim; ++k) g.w[k] += -dp * p[k] + dn * neg[j][k];
      g.b += -dp + dn;
    }
  }
  return g;
}

double training_loss(const DuetModel& model, const std::vector<DuetTopic>& topics) {
  double loss = 0.0;
  for (const auto& t : topics) {
    const auto p = partition(t);
    if (!p.pos.empty() && !p.neg.empty()) loss += hinge_loss(model, p.pos, p.neg);
  }
  return loss;
}

DuetTrainResult train_duet(const std::vector<DuetTopic>& train, const DuetTrainConfig& cfg,
                           const std::vector<DuetTopic>& validation) {
  if (cfg.max_epochs < 1) throw Error("max_epochs must be at least 1");
  if (!(cfg.learning_rate > 0.0)) throw Error("learning rate must be positive");

  std::vector<Partition> batches;
  for (const auto& t : train) {
    if (t.cids.size() != t.features.size()) throw Error("topic " + t.qid + ": cid/feature count mismatch");
    auto p = partition(t);
    if (p.pos.empty() || p.neg.empty()) {
      std::cerr << "warning: skipping topic " << t.qid << " (needs relevant and irrelevant candidates)\n";
      continue;
    }
    batches.push_back(std::move(p));
  }
  if (batches.empty()) throw Error("no usable training topic");

  Pcg32 rng(cfg.seed);
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);

  DuetTrainResult result;
  DuetModel model;
  double best_f1 = -1.0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t idx : order) {
      const auto g = hinge_gradient(model, batches[idx].pos, batches[idx].neg);
      for (std::size_t k = 0; k < kDuetDim; ++k)
        model.w[k] -= cfg.learning_rate * (g.w[k] + cfg.weight_decay * model.w[k]);
      model.b -= cfg.learning_rate * g.b;
    }
    double loss = 0.0;
    for (const auto& b : batches) loss += hinge_loss(model, b.pos, b.neg);
    result.train_loss.push_back(loss);
    const double f1 = validation.empty() ? 0.0 : validation_f1(model, validation, cfg.top_k);
    result.validation_f1.push_back(f1);
    if (validation.empty() ? true : f1 > best_f1) {
      best_f1 = f1;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::vector<RankedItem> rank_candidates(const DuetModel& model, const DuetTopic& topic) {
  // sort on the pre-sigmoid value so saturated scores do not tie
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(topic.cids.size());
  for (std::size_t i = 0; i < topic.cids.size(); ++i) keyed.emplace_back(linear_score(model, topic.features[i]), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : topic.cids[a.second] < topic.cids[b.second];
  });
  std::vector<RankedItem> items;
  items.reserve(keyed.size());
  for (const auto& [z, i] : keyed) items.push_back({topic.cids[i], score(model, topic.features[i])});
  return items;
}

std::vector<RankedItem> rank_top5(const DuetModel& model, const DuetTopic& topic, std::size_t k) {
  auto items = rank_candidates(model, topic);
  if (items.size() > k) items.resize(k);
  return items;
}

std::string serialize(const DuetModel& model) {
  io::json obj = {{"w", model.w}, {"b", model.b}, {"feature_order", "duet-v1"}};
  return obj.dump() + "\n";
}

DuetModel load_duet_model(const std::filesystem::path& path) {
  io::json obj;
  try {
    obj = io::json::parse(io::read_file(path));
  } catch (const io::json::parse_error& e) {
    throw ParseError(std::string("invalid duet model: ") + e.what(), 0);
  }
  if (io::string_field(obj, "feature_order", 0) != "duet-v1") throw ValidationError("unknown duet feature order");
  const auto w = io::real_list(obj, "w", 0);
  if (w.size() != kDuetDim) throw ValidationError("duet model needs 11 weights");
  DuetModel m;
  std::copy(w.begin(), w.end(), m.w.begin());
  m.b = io::field(obj, "b", 0).get<double>();
  for (double v : m.w)
    if (!std::isfinite(v)) throw ValidationError("non-finite duet weight");
  if (!std::isfinite(m.b)) throw ValidationError("non-finite duet bias");
  return m;
}

}  // namespace coliee
