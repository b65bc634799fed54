#pragma once

// Constructed datasets and gradient checkers shared by the unit tests and
// the acceptance run.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "coliee/duet_ranker.hpp"
#include "coliee/ltr.hpp"
#include "coliee/pli.hpp"
#include "coliee/rng.hpp"

namespace fixtures {

using coliee::DuetFeatures;
using coliee::Pcg32;

inline std::string id(const char* prefix, std::size_t i) {
  std::string s = std::to_string(i);
  return prefix + std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s;
}

// Feature 1 is a signed relevance indicator at the magnitude of raw
// lexical scores; the other ten features are noise in [-1, 1].
inline std::vector<coliee::DuetTopic> duet_separable(std::uint64_t seed, std::size_t topics = 6,
                                                     std::size_t pos = 3, std::size_t neg = 7) {
  Pcg32 rng(seed);
  std::vector<coliee::DuetTopic> out;
  for (std::size_t t = 0; t < topics; ++t) {
    coliee::DuetTopic topic;
    topic.qid = id("q", t);
    for (std::size_t c = 0; c < pos + neg; ++c) {
      const bool rel = c < pos;
      DuetFeatures v{};
      v[0] = rel ? 1000.0 : -1000.0;
      for (std::size_t k = 1; k < coliee::kDuetDim; ++k) v[k] = rng.uniform(-1.0, 1.0);
      topic.cids.push_back(id("c", t * 100 + c));
      topic.features.push_back(v);
      if (rel) topic.relevant.insert(topic.cids.back());
    }
    out.push_back(std::move(topic));
  }
  return out;
}

// Largest relative error between the analytic hinge gradient and central
// differences (step h) over every weight and the bias.
inline double duet_gradient_error(std::uint64_t seed, double h = 1e-6) {
  Pcg32 rng(seed);
  coliee::DuetModel m;
  for (auto& w : m.w) w = rng.uniform(-0.5, 0.5);
  m.b = rng.uniform(-0.5, 0.5);
  auto draw = [&](std::size_t n) {
    std::vector<DuetFeatures> v(n);
    for (auto& f : v)
      for (auto& x : f) x = rng.uniform(-1.0, 1.0);
    return v;
  };
  const auto pos = draw(2 + rng.bounded(3));
  const auto neg = draw(2 + rng.bounded(4));
  const auto g = coliee::hinge_gradient(m, pos, neg);
  auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8}); };
  double worst = 0.0;
  for (std::size_t k = 0; k <= coliee::kDuetDim; ++k) {
    coliee::DuetModel up = m, down = m;
    if (k < coliee::kDuetDim) {
      up.w[k] += h;
      down.w[k] -= h;
    } else {
      up.b += h;
      down.b -= h;
    }
    const double num = (coliee::hinge_loss(up, pos, neg) - coliee::hinge_loss(down, pos, neg)) / (2 * h);
    worst = std::max(worst, rel(k < coliee::kDuetDim ? g.w[k] : g.b, num));
  }
  return worst;
}

// Largest relative error of the PLI backward pass against central
// differences on a random d=6, h=5 model and a sequence of 1..4 steps.
inline double pli_gradient_error(std::uint64_t seed, double h = 1e-5) {
  Pcg32 rng(seed);
  coliee::PliModel m = coliee::PliModel::zeros(6, 5);
  m.for_each_param([&](const char*, Eigen::Map<Eigen::VectorXd> p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(-0.6, 0.6);
  });
  const auto steps = static_cast<Eigen::Index>(1 + rng.bounded(4));
  Eigen::MatrixXd seq(6, steps);
  for (Eigen::Index i = 0; i < seq.size(); ++i) seq.data()[i] = rng.uniform(-1.0, 1.0);
  const int label = static_cast<int>(rng.bounded(2));

  coliee::PliModel grad;
  coliee::pli_loss_and_gradient(m, seq, label, grad);
  std::vector<double> analytic;
  grad.for_each_param([&](const char*, Eigen::Map<Eigen::VectorXd> g) {
    for (Eigen::Index i = 0; i < g.size(); ++i) analytic.push_back(g[i]);
  });

  auto loss_of = [&](const coliee::PliModel& mm) {
    coliee::PliModel scratch;
    return coliee::pli_loss_and_gradient(mm, seq, label, scratch);
  };
  double worst = 0.0;
  std::size_t k = 0;
  coliee::PliModel probe = m;
  probe.for_each_param([&](const char*, Eigen::Map<Eigen::VectorXd> p) {
    for (Eigen::Index i = 0; i < p.size(); ++i, ++k) {
      const double keep = p[i];
      p[i] = keep + h;
      const double up = loss_of(probe);
      p[i] = keep - h;
      const double down = loss_of(probe);
      p[i] = keep;
      const double num = (up - down) / (2 * h);
      const double a = analytic[k];
      // entries whose true gradient is ~0 are judged on the absolute scale
      worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6}));
    }
  });
  return worst;
}

// Interaction maps whose label is the sign of the mean over all cells.
inline std::vector<coliee::PliExample> pli_separable(std::uint64_t seed, std::size_t n = 60, std::size_t dim = 4) {
  Pcg32 rng(seed);
  std::vector<coliee::PliExample> out;
  for (std::size_t e = 0; e < n; ++e) {
    coliee::InteractionMap map;
    map.qid = id("q", e);
    map.cid = id("c", e);
    map.rows = 2 + rng.bounded(3);
    map.cols = 2 + rng.bounded(3);
    map.dim = dim;
    const int label = static_cast<int>(e % 2);
    const double shift = label ? 0.5 : -0.5;
    map.data.resize(map.rows * map.cols * dim);
    for (auto& x : map.data) x = shift + rng.uniform(-0.4, 0.4);
    double mean = 0.0;
    for (double x : map.data) mean += x;
    mean /= static_cast<double>(map.data.size());
    out.push_back(coliee::make_pli_example(map, mean > 0.0 ? 1 : 0));
  }
  return out;
}

// Ranking data where relevance = (feature 1 > 0.5).
inline std::vector<coliee::RankQuery> rank_separable(std::uint64_t seed, std::size_t queries = 8,
                                                     std::size_t per_query = 12, std::size_t dim = 5) {
  Pcg32 rng(seed);
  std::vector<coliee::RankQuery> out;
  for (std::size_t q = 0; q < queries; ++q) {
    coliee::RankQuery rq;
    rq.qid = id("q", q);
    for (std::size_t c = 0; c < per_query; ++c) {
      std::vector<double> f(dim);
      for (auto& x : f) x = rng.uniform();
      // keep both classes present in every query
      if (c == 0) f[0] = 0.9;
      if (c == 1) f[0] = 0.1;
      rq.ids.push_back(id("c", q * 100 + c));
      rq.labels.push_back(f[0] > 0.5 ? 1 : 0);
      rq.features.push_back(std::move(f));
    }
    out.push_back(std::move(rq));
  }
  return out;
}

// Kendall tau between predicted scores and binary labels over all
// within-query pairs with different labels: 1 when every such pair is
// ordered correctly.
inline double pairwise_tau(const coliee::RankModel& model, const std::vector<coliee::RankQuery>& queries) {
  std::size_t concordant = 0, discordant = 0;
  for (const auto& q : queries)
    for (std::size_t i = 0; i < q.ids.size(); ++i)
      for (std::size_t j = 0; j < q.ids.size(); ++j) {
        if (q.labels[i] != 1 || q.labels[j] != 0) continue;
        const double si = coliee::predict(model, q.features[i]);
        const double sj = coliee::predict(model, q.features[j]);
        (si > sj ? concordant : discordant) += 1;
      }
  const double total = static_cast<double>(concordant + discordant);
  return total == 0 ? 0.0 : (static_cast<double>(concordant) - static_cast<double>(discordant)) / total;
}

}  // namespace fixtures
