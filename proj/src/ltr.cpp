#include "coliee/ltr.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "coliee/error.hpp"
#include "coliee/io.hpp"
#include "coliee/rng.hpp"

namespace coliee {
namespace {

void check_probs(const Probs& p, const char* what) {
  if (!(p[0] >= 0.0 && p[1] >= 0.0) || std::abs(p[0] + p[1] - 1.0) > 1e-6)
    throw ValidationError(std::string(what) + " must be a probability pair");
}

void check_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError("non-finite feature value");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct PairSet {
  std::size_t dim = 0;
  std::vector<double> diffs;  // row-major P × dim

  std::size_t size() const { return dim ? diffs.size() / dim : 0; }
  std::span<const double> row(std::size_t p) const { return {diffs.data() + p * dim, dim}; }
};

PairSet build_pairs(const RankModel& model, const std::vector<RankQuery>& queries) {
  PairSet ps;
  ps.dim = model.dim();
  for (const auto& q : queries) {
    std::vector<std::vector<double>> scaled;
    scaled.reserve(q.features.size());
    for (const auto& f : q.features) scaled.push_back(scale(model, f));
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      if (q.labels[i] != 1) continue;
      for (std::size_t j = 0; j < scaled.size(); ++j) {
        if (q.labels[j] != 0) continue;
        for (std::size_t k = 0; k < ps.dim; ++k) ps.diffs.push_back(scaled[i][k] - scaled[j][k]);
      }
    }
  }
  return ps;
}

double objective(const std::vector<double>& w, double C, const PairSet& ps) {
  double reg = 0.0;
  for (double x : w) reg += x * x;
  double hinge = 0.0;
  for (std::size_t p = 0; p < ps.size(); ++p) hinge += std::max(0.0, 1.0 - dot(w, ps.row(p)));
  return 0.5 * reg + C * hinge;
}

}  // namespace

Task1Features assemble_task1(const DuetFeatures& duet, double sdr_w, double sdr_e, const Probs& pli_probs,
                             const Probs& firstpara_probs) {
  check_probs(pli_probs, "PLI probabilities");
  check_probs(firstpara_probs, "first-paragraph probabilities");
  Task1Features f{};
  std::copy(duet.begin(), duet.end(), f.begin());
  f[11] = sdr_w;
  f[12] = sdr_e;
  f[13] = pli_probs[0];
  f[14] = pli_probs[1];
  f[15] = firstpara_probs[0];
  f[16] = firstpara_probs[1];
  check_finite(f);
  return f;
}

Task2Features assemble_task2(const Probs& sym_probs, const Probs& asym_probs, double bm25, std::size_t para_idx,
                             std::size_t para_len) {
  check_probs(sym_probs, "symmetric-run probabilities");
  check_probs(asym_probs, "asymmetric-run probabilities");
  if (para_idx < 1 || para_len < 1) throw ValidationError("position and length must be positive");
  Task2Features f{sym_probs[0], sym_probs[1], asym_probs[0], asym_probs[1], bm25,
                  static_cast<double>(para_idx), static_cast<double>(para_len)};
  check_finite(f);
  return f;
}

std::vector<double> scale(const RankModel& model, std::span<const double> features) {
  if (features.size() != model.scaler.size())
    throw Error("feature dimension " + std::to_string(features.size()) + " != model dimension " +
                std::to_string(model.scaler.size()));
  std::vector<double> out(features.size());
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto [lo, hi] = model.scaler[k];
    out[k] = hi > lo ? (features[k] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

double predict(const RankModel& model, std::span<const double> features) {
  const auto x = scale(model, features);
  return dot(model.w, x);
}

double ranksvm_objective(const RankModel& model, const std::vector<RankQuery>& queries) {
  return objective(model.w, model.C, build_pairs(model, queries));
}

RankTrainResult ranksvm_train(const std::vector<RankQuery>& queries, const RankSvmConfig& cfg) {
  if (!(cfg.C > 0.0)) throw Error("RankSVM C must be positive");
  if (cfg.iterations < 1) throw Error("RankSVM needs at least one iteration");
  std::size_t dim = 0;
  for (const auto& q : queries) {
    if (q.features.size() != q.labels.size()) throw Error("query " + q.qid + ": feature/label count mismatch");
    for (const auto& f : q.features) {
      if (dim == 0) dim = f.size();
      if (f.size() != dim || dim == 0) throw Error("inconsistent feature dimension in " + q.qid);
      check_finite(f);
    }
  }
  if (dim == 0) throw Error("no training features");

  RankTrainResult result;
  RankModel& model = result.model;
  model.C = cfg.C;
  model.w.assign(dim, 0.0);
  model.scaler.assign(dim, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  for (const auto& q : queries)
    for (const auto& f : q.features)
      for (std::size_t k = 0; k < dim; ++k) {
        model.scaler[k].first = std::min(model.scaler[k].first, f[k]);
        model.scaler[k].second = std::max(model.scaler[k].second, f[k]);
      }

  const PairSet ps = build_pairs(model, queries);
  const std::size_t P = ps.size();
  if (P == 0) throw Error("no within-query preference pair to train on");
  result.pairs = P;

  const double lambda = 1.0 / (cfg.C * static_cast<double>(P));
  const double radius = 1.0 / std::sqrt(lambda);
  const bool full_batch = P <= cfg.batch_size;
  const std::size_t batch = full_batch ? P : cfg.batch_size;
  const std::size_t every = std::max<std::size_t>(1, cfg.iterations / std::max<std::size_t>(1, cfg.checkpoints));

  Pcg32 rng(cfg.seed);
  std::vector<double> w(dim, 0.0), avg(dim, 0.0), step(dim);
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    std::fill(step.begin(), step.end(), 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t p = full_batch ? b : rng.bounded(static_cast<std::uint32_t>(P));
      const auto d = ps.row(p);
      if (dot(w, d) < 1.0)
        for (std::size_t k = 0; k < dim; ++k) step[k] += d[k];
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      w[k] = (1.0 - eta * lambda) * w[k] + eta / static_cast<double>(batch) * step[k];
      norm += w[k] * w[k];
    }
    norm = std::sqrt(norm);
    if (norm > radius)
      for (double& x : w) x *= radius / norm;
    for (std::size_t k = 0; k < dim; ++k) avg[k] += (w[k] - avg[k]) / static_cast<double>(t);
    if (t % every == 0 || t == cfg.iterations) result.objective.push_back(objective(avg, cfg.C, ps));
  }
  model.w = avg;
  return result;
}

std::vector<std::string> select_task1(const std::vector<RankedItem>& scores) {
  std::vector<RankedItem> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), [](const RankedItem& a, const RankedItem& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  std::vector<std::string> out;
  for (const auto& item : sorted)
    if (item.score >= 0.0 || out.size() < 3) out.push_back(item.id);
  return out;
}

std::set<std::size_t> select_task2(const std::vector<double>& scores) {
  if (scores.empty()) throw Error("no paragraph scores");
  std::set<std::size_t> out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= 0.0) out.insert(i + 1);
    if (scores[i] > scores[best]) best = i;
  }
  if (out.empty()) out.insert(best + 1);
  return out;
}

std::string serialize(const FeatureFile& file) {
  const bool task2 = file.layout == kTask2Layout;
  std::string out = io::json{{"layout", file.layout}}.dump() + "\n";
  for (const auto& r : file.rows) {
    io::json obj = {{"qid", r.qid}, {"features", r.features}};
    if (task2) {
      obj["para_idx"] = std::stoull(r.id);
    } else {
      obj["cid"] = r.id;
    }
    if (r.label) obj["label"] = *r.label;
    out += obj.dump() + "\n";
  }
  return out;
}

FeatureFile load_feature_file(const std::filesystem::path& path) {
  FeatureFile file;
  bool first = true;
  std::size_t dim = 0;
  io::for_each_json(path, [&](const io::json& obj, std::size_t line) {
    if (first) {
      file.layout = io::string_field(obj, "layout", line);
      if (file.layout == kTask1Layout) {
        dim = kTask1Dim;
      } else if (file.layout == kTask2Layout) {
        dim = kTask2Dim;
      } else {
        throw ParseError("unknown feature layout " + file.layout, line);
      }
      first = false;
      return;
    }
    FeatureRow r;
    r.qid = io::string_field(obj, "qid", line);
    if (dim == kTask2Dim) {
      const auto& idx = io::field(obj, "para_idx", line);
      if (!idx.is_number_unsigned()) throw ParseError("para_idx must be a positive integer", line);
      r.id = std::to_string(idx.get<std::size_t>());
    } else {
      r.id = io::string_field(obj, "cid", line);
    }
    r.features = io::real_list(obj, "features", line);
    if (r.features.size() != dim) throw ParseError("feature vector has the wrong dimension", line);
    if (obj.contains("label")) {
      const auto& l = obj["label"];
      if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) throw ParseError("label must be 0 or 1", line);
      r.label = l.get<int>();
    }
    file.rows.push_back(std::move(r));
  });
  if (first) throw ParseError("feature file has no header", 0);
  return file;
}

std::vector<RankQuery> group_queries(const FeatureFile& file) {
  std::vector<RankQuery> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : file.rows) {
    auto [it, fresh] = index.emplace(r.qid, out.size());
    if (fresh) out.push_back({r.qid, {}, {}, {}});
    auto& q = out[it->second];
    q.ids.push_back(r.id);
    q.features.push_back(r.features);
    q.labels.push_back(r.label ? *r.label : -1);
  }
  return out;
}

std::string serialize(const RankModel& model) {
  io::json scaler = io::json::array();
  for (const auto& [lo, hi] : model.scaler) scaler.push_back({lo, hi});
  io::json obj = {{"w", model.w}, {"C", model.C}, {"scaler", scaler}};
  return obj.dump() + "\n";
}

RankModel load_rank_model(const std::filesystem::path& path) {
  io::json obj;
  try {
    obj = io::json::parse(io::read_file(path));
  } catch (const io::json::parse_error& e) {
    throw ParseError(std::string("invalid rank model: ") + e.what(), 0);
  }
  RankModel m;
  m.w = io::real_list(obj, "w", 0);
  m.C = io::field(obj, "C", 0).get<double>();
  for (const auto& pair : io::field(obj, "scaler", 0)) {
    if (!pair.is_array() || pair.size() != 2) throw ValidationError("scaler entries must be [min, max]");
    m.scaler.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  if (m.scaler.size() != m.w.size()) throw ValidationError("scaler and weight dimensions differ");
  if (!(m.C > 0.0)) throw ValidationError("C must be positive");
  check_finite(m.w);
  return m;
}

}  // namespace coliee
