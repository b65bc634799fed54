#include "coliee/pli.hpp"

#include <cmath>
#include <numeric>

#include "coliee/error.hpp"
#include "coliee/io.hpp"
#include "coliee/parallel.hpp"
#include "coliee/rng.hpp"

namespace coliee {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd sigmoid(const VectorXd& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

std::array<double, 2> softmax2(const VectorXd& logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m), e1 = std::exp(logits[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

Eigen::Map<VectorXd> flat(MatrixXd& m) { return {m.data(), m.size()}; }
Eigen::Map<VectorXd> flat(VectorXd& v) { return {v.data(), v.size()}; }

double f1_of(std::size_t tp, std::size_t predicted, std::size_t labeled) {
  const double p = predicted ? static_cast<double>(tp) / predicted : 0.0;
  const double r = labeled ? static_cast<double>(tp) / labeled : 0.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double decision_f1(const PliModel& model, const std::vector<PliExample>& examples, double threshold) {
  std::size_t tp = 0, predicted = 0, labeled = 0;
  for (const auto& ex : examples) {
    const bool pos = classify(model, gru_attend(model, ex.seq))[1] >= threshold;
    predicted += pos;
    labeled += ex.label == 1;
    tp += pos && ex.label == 1;
  }
  return f1_of(tp, predicted, labeled);
}

}  // namespace

PliModel PliModel::zeros(std::size_t d, std::size_t h) {
  const auto D = static_cast<Eigen::Index>(d), H = static_cast<Eigen::Index>(h);
  PliModel m;
  m.wx = MatrixXd::Zero(3 * H, D);
  m.wh = MatrixXd::Zero(3 * H, H);
  m.bx = VectorXd::Zero(3 * H);
  m.bh = VectorXd::Zero(3 * H);
  m.wa = MatrixXd::Zero(H, H);
  m.ba = VectorXd::Zero(H);
  m.uw = VectorXd::Zero(H);
  m.wo = MatrixXd::Zero(2, H);
  m.bo = VectorXd::Zero(2);
  return m;
}

void PliModel::for_each_param(const std::function<void(const char*, Eigen::Map<Eigen::VectorXd>)>& fn) {
  fn("wx", flat(wx));
  fn("wh", flat(wh));
  fn("bx", flat(bx));
  fn("bh", flat(bh));
  fn("wa", flat(wa));
  fn("ba", flat(ba));
  fn("uw", flat(uw));
  fn("wo", flat(wo));
  fn("bo", flat(bo));
}

PliModel init_pli_model(std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
  if (input_dim == 0 || hidden == 0) throw Error("PLI dimensions must be positive");
  PliModel m = PliModel::zeros(input_dim, hidden);
  Pcg32 rng(seed);
  m.for_each_param([&](const char*, Eigen::Map<VectorXd> p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(-0.08, 0.08);
  });
  return m;
}

InteractionMap build_interaction_map(const CaseDocument& query, const CaseDocument& cand, const EncoderProvider& enc,
                                     std::size_t max_rows, std::size_t max_cols) {
  if (query.paragraphs.empty() || cand.paragraphs.empty()) throw Error("interaction map needs non-empty documents");
  InteractionMap map;
  map.qid = query.id;
  map.cid = cand.id;
  map.rows = std::min(query.paragraphs.size(), max_rows);
  map.cols = std::min(cand.paragraphs.size(), max_cols);
  map.dim = enc.dim();
  map.data.assign(map.rows * map.cols * map.dim, 0.0);
  parallel_for(map.rows * map.cols, [&](std::size_t cell) {
    const std::size_t i = cell / map.cols, j = cell % map.cols;
    PairEncoding e;
    try {
      e = enc.encode_pair(query.paragraphs[i], cand.paragraphs[j]);
      validate_encoding(e, map.dim);
    } catch (const std::exception& ex) {
      throw Error("encoder failed at cell (" + std::to_string(i) + ", " + std::to_string(j) + ") of " + query.id +
                  "/" + cand.id + ": " + ex.what());
    }
    std::copy(e.vec.begin(), e.vec.end(), map.data.begin() + static_cast<std::ptrdiff_t>(cell * map.dim));
  });
  return map;
}

InteractionMap interaction_map_from_grid(const std::string& qid, const std::string& cid, const EncodingGrid& grid,
                                         std::size_t dim, std::size_t max_rows, std::size_t max_cols) {
  if (grid.rows == 0 || grid.cols == 0) throw Error("empty embedding grid for " + qid + "/" + cid);
  InteractionMap map{qid, cid, std::min(grid.rows, max_rows), std::min(grid.cols, max_cols), dim, {}};
  map.data.reserve(map.rows * map.cols * dim);
  for (std::size_t i = 0; i < map.rows; ++i)
    for (std::size_t j = 0; j < map.cols; ++j) {
      const auto& v = grid.at(i, j).vec;
      map.data.insert(map.data.end(), v.begin(), v.end());
    }
  return map;
}

MatrixXd maxpool_rows(const InteractionMap& map) {
  MatrixXd out(static_cast<Eigen::Index>(map.dim), static_cast<Eigen::Index>(map.rows));
  for (std::size_t i = 0; i < map.rows; ++i) {
    VectorXd best = map.cell(i, 0);
    for (std::size_t j = 1; j < map.cols; ++j) best = best.cwiseMax(map.cell(i, j));
    out.col(static_cast<Eigen::Index>(i)) = best;
  }
  return out;
}

PliForward pli_forward(const PliModel& m, const MatrixXd& seq) {
  if (seq.cols() == 0) throw Error("GRU input sequence is empty");
  if (seq.rows() != m.wx.cols()) throw Error("GRU input dimension mismatch");
  const Eigen::Index H = m.wh.cols();
  const auto T = static_cast<std::size_t>(seq.cols());
  PliForward f;
  f.h.reserve(T + 1);
  f.h.push_back(VectorXd::Zero(H));
  for (std::size_t t = 0; t < T; ++t) {
    const VectorXd& hp = f.h.back();
    const VectorXd gx = m.wx * seq.col(static_cast<Eigen::Index>(t)) + m.bx;
    const VectorXd gh = m.wh * hp + m.bh;
    VectorXd r = sigmoid(gx.segment(0, H) + gh.segment(0, H));
    VectorXd z = sigmoid(gx.segment(H, H) + gh.segment(H, H));
    VectorXd hn = gh.segment(2 * H, H);
    VectorXd n = (gx.segment(2 * H, H) + r.cwiseProduct(hn)).array().tanh().matrix();
    VectorXd h = (VectorXd::Ones(H) - z).cwiseProduct(n) + z.cwiseProduct(hp);
    f.r.push_back(std::move(r));
    f.z.push_back(std::move(z));
    f.n.push_back(std::move(n));
    f.hn.push_back(std::move(hn));
    f.h.push_back(std::move(h));
  }
  VectorXd scores(static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) {
    f.u.push_back((m.wa * f.h[t + 1] + m.ba).array().tanh().matrix());
    scores[static_cast<Eigen::Index>(t)] = f.u.back().dot(m.uw);
  }
  f.alpha = (scores.array() - scores.maxCoeff()).exp().matrix();
  f.alpha /= f.alpha.sum();
  f.output = VectorXd::Zero(H);
  for (std::size_t t = 0; t < T; ++t) f.output += f.alpha[static_cast<Eigen::Index>(t)] * f.h[t + 1];
  f.logits = m.wo * f.output + m.bo;
  f.probs = softmax2(f.logits);
  return f;
}

VectorXd gru_attend(const PliModel& model, const MatrixXd& seq) { return pli_forward(model, seq).output; }

std::array<double, 2> classify(const PliModel& model, const VectorXd& d_qk) { return softmax2(model.wo * d_qk + model.bo); }

double pli_loss_and_gradient(const PliModel& m, const MatrixXd& seq, int label, PliModel& g) {
  const PliForward f = pli_forward(m, seq);
  const Eigen::Index H = m.wh.cols();
  const auto T = f.r.size();
  g = PliModel::zeros(m.input_dim(), m.hidden());

  VectorXd dlogits(2);
  dlogits << f.probs[0], f.probs[1];
  dlogits[label] -= 1.0;
  g.wo = dlogits * f.output.transpose();
  g.bo = dlogits;
  const VectorXd dout = m.wo.transpose() * dlogits;

  // attention
  VectorXd dalpha(static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) dalpha[static_cast<Eigen::Index>(t)] = dout.dot(f.h[t + 1]);
  const double mean = f.alpha.dot(dalpha);
  std::vector<VectorXd> dh(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    const double ds = f.alpha[ti] * (dalpha[ti] - mean);
    g.uw += ds * f.u[t];
    const VectorXd da = (ds * m.uw).cwiseProduct((VectorXd::Ones(H) - f.u[t].cwiseProduct(f.u[t])));
    g.wa += da * f.h[t + 1].transpose();
    g.ba += da;
    dh[t] = f.alpha[ti] * dout + m.wa.transpose() * da;
  }

  // backpropagation through time
  VectorXd carry = VectorXd::Zero(H);
  VectorXd dgx(3 * H), dgh(3 * H);
  for (std::size_t s = T; s-- > 0;) {
    const VectorXd& hp = f.h[s];
    const VectorXd dht = dh[s] + carry;
    const VectorXd& z = f.z[s];
    const VectorXd& r = f.r[s];
    const VectorXd& n = f.n[s];
    const VectorXd dn = dht.cwiseProduct(VectorXd::Ones(H) - z);
    const VectorXd dz = dht.cwiseProduct(hp - n);
    const VectorXd dan = dn.cwiseProduct(VectorXd::Ones(H) - n.cwiseProduct(n));
    const VectorXd dar = dan.cwiseProduct(f.hn[s]).cwiseProduct(r.cwiseProduct(VectorXd::Ones(H) - r));
    const VectorXd daz = dz.cwiseProduct(z.cwiseProduct(VectorXd::Ones(H) - z));
    dgx << dar, daz, dan;
    dgh << dar, daz, dan.cwiseProduct(r);
    g.wx += dgx * seq.col(static_cast<Eigen::Index>(s)).transpose();
    g.bx += dgx;
    g.wh += dgh * hp.transpose();
    g.bh += dgh;
    carry = dht.cwiseProduct(z) + m.wh.transpose() * dgh;
  }
  return -std::log(std::max(f.probs[static_cast<std::size_t>(label)], 1e-300));
}

PliExample make_pli_example(const InteractionMap& map, int label) {
  return {map.qid, map.cid, maxpool_rows(map), label};
}

double pli_accuracy(const PliModel& model, const std::vector<PliExample>& examples, double threshold) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    const bool pos = classify(model, gru_attend(model, ex.seq))[1] >= threshold;
    correct += pos == (ex.label == 1);
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

PliTrainResult train_pli(const std::vector<PliExample>& train, const PliTrainConfig& cfg,
                         const std::vector<PliExample>& validation) {
  if (train.empty()) throw Error("empty PLI training set");
  if (cfg.learning_rate < 0.0) throw Error("learning rate must be non-negative");
  if (cfg.max_epochs < 1) throw Error("max_epochs must be at least 1");
  bool has0 = false, has1 = false;
  for (const auto& ex : train) {
    if (ex.label != 0 && ex.label != 1) throw Error("labels must be 0 or 1");
    (ex.label ? has1 : has0) = true;
  }
  if (!(has0 && has1)) throw Error("PLI training data must contain both classes");

  const auto dim = static_cast<std::size_t>(train.front().seq.rows());
  PliModel model = init_pli_model(dim, cfg.hidden, cfg.seed);
  Pcg32 rng(cfg.seed, 0x5eed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  PliTrainResult result;
  result.model = model;
  double best = -1.0;
  PliModel grad;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    double loss = 0.0;
    for (std::size_t idx : order) {
      loss += pli_loss_and_gradient(model, train[idx].seq, train[idx].label, grad);
      std::vector<Eigen::Map<VectorXd>> gviews;
      grad.for_each_param([&](const char*, Eigen::Map<VectorXd> g) { gviews.push_back(g); });
      std::size_t k = 0;
      model.for_each_param([&](const char*, Eigen::Map<VectorXd> p) {
        p -= cfg.learning_rate * (gviews[k++] + cfg.weight_decay * p);
      });
    }
    result.train_loss.push_back(loss / static_cast<double>(train.size()));
    const double f1 = validation.empty() ? 0.0 : decision_f1(model, validation, cfg.threshold);
    result.validation_f1.push_back(f1);
    if (validation.empty() || f1 > best) {
      best = f1;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::string serialize(const PliModel& model) {
  PliModel copy = model;
  io::json params = io::json::object();
  auto shape_of = [&](const char* name) -> std::array<Eigen::Index, 2> {
    const std::string n = name;
    if (n == "wx") return {model.wx.rows(), model.wx.cols()};
    if (n == "wh") return {model.wh.rows(), model.wh.cols()};
    if (n == "wa") return {model.wa.rows(), model.wa.cols()};
    if (n == "wo") return {model.wo.rows(), model.wo.cols()};
    return {-1, -1};
  };
  copy.for_each_param([&](const char* name, Eigen::Map<VectorXd> p) {
    auto shape = shape_of(name);
    io::json entry;
    entry["shape"] = shape[0] < 0 ? io::json::array({p.size()}) : io::json::array({shape[0], shape[1]});
    entry["data"] = std::vector<double>(p.data(), p.data() + p.size());  // column-major
    params[name] = std::move(entry);
  });
  io::json obj = {{"format", "pli-v1"}, {"layout", "column-major"},
                  {"input_dim", model.input_dim()}, {"hidden", model.hidden()}, {"params", params}};
  return obj.dump() + "\n";
}

PliModel load_pli_model(const std::filesystem::path& path) {
  io::json obj;
  try {
    obj = io::json::parse(io::read_file(path));
  } catch (const io::json::parse_error& e) {
    throw ParseError(std::string("invalid PLI model: ") + e.what(), 0);
  }
  if (io::string_field(obj, "format", 0) != "pli-v1") throw ValidationError("unknown PLI model format");
  PliModel m = PliModel::zeros(io::field(obj, "input_dim", 0).get<std::size_t>(),
                               io::field(obj, "hidden", 0).get<std::size_t>());
  const io::json& params = io::field(obj, "params", 0);
  m.for_each_param([&](const char* name, Eigen::Map<VectorXd> p) {
    const auto data = io::real_list(io::field(params, name, 0), "data", 0);
    if (static_cast<Eigen::Index>(data.size()) != p.size())
      throw ValidationError(std::string("parameter ") + name + " has the wrong size");
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i])) throw ValidationError(std::string("non-finite value in ") + name);
      p[static_cast<Eigen::Index>(i)] = data[i];
    }
  });
  return m;
}

}  // namespace coliee
