#include <doctest.h>

#include <cmath>
#include <set>

#include "coliee/error.hpp"
#include "coliee/pli.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace coliee;

namespace {

InteractionMap random_map(std::uint64_t seed, std::size_t rows, std::size_t cols, std::size_t dim) {
  Pcg32 rng(seed);
  InteractionMap m{"q", "c", rows, cols, dim, {}};
  m.data.resize(rows * cols * dim);
  for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
  return m;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

CaseDocument doc_with(const std::string& id, std::size_t n) {
  CaseDocument d;
  d.id = id;
  for (std::size_t i = 0; i < n; ++i) d.paragraphs.push_back(id + " paragraph number " + std::to_string(i));
  return d;
}

}  // namespace

TEST_CASE("maxpool over candidate paragraphs") {
  InteractionMap m{"q", "c", 1, 2, 2, {1, 4, 3, 2}};
  const auto p = maxpool_rows(m);
  REQUIRE(p.rows() == 2);
  REQUIRE(p.cols() == 1);
  CHECK(p(0, 0) == 3.0);
  CHECK(p(1, 0) == 4.0);

  const auto r = random_map(3, 3, 4, 5);
  const auto pr = maxpool_rows(r);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 5; ++k) {
      double best = -1e300;
      for (std::size_t j = 0; j < 4; ++j) best = std::max(best, r.data[(i * 4 + j) * 5 + k]);
      CHECK(pr(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) == best);
    }

  // permuting candidate paragraphs leaves the result unchanged
  InteractionMap perm = r;
  const std::size_t order[] = {2, 0, 3, 1};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 5; ++k) perm.data[(i * 4 + j) * 5 + k] = r.data[(i * 4 + order[j]) * 5 + k];
  CHECK(maxpool_rows(perm) == pr);
}

TEST_CASE("gru_attend on a single step returns h1") {
  Pcg32 rng(4);
  PliModel m = PliModel::zeros(3, 2);
  m.for_each_param([&](const char*, Eigen::Map<Eigen::VectorXd> p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(-1.0, 1.0);
  });
  Eigen::MatrixXd seq(3, 1);
  seq << 0.3, -0.2, 0.9;
  const auto f = pli_forward(m, seq);
  REQUIRE(f.alpha.size() == 1);
  CHECK(f.alpha[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((gru_attend(m, seq) - f.h[1]).norm() < 1e-15);
}

TEST_CASE("gru_attend scalar hand computation") {
  PliModel m = PliModel::zeros(1, 1);
  m.wx << 0.5, -0.3, 0.8;
  m.wh << 0.2, 0.4, -0.6;
  m.bx << 0.1, 0.0, -0.1;
  m.bh << 0.0, 0.2, 0.05;
  m.wa << 1.5;
  m.ba << -0.2;
  m.uw << 0.7;
  Eigen::MatrixXd seq(1, 2);
  seq << 1.0, -2.0;

  double h = 0.0;
  double hs[2];
  for (int t = 0; t < 2; ++t) {
    const double x = seq(0, t);
    const double r = sig(0.5 * x + 0.1 + 0.2 * h + 0.0);
    const double z = sig(-0.3 * x + 0.0 + 0.4 * h + 0.2);
    const double n = std::tanh(0.8 * x - 0.1 + r * (-0.6 * h + 0.05));
    h = (1 - z) * n + z * h;
    hs[t] = h;
  }
  const double e0 = std::exp(0.7 * std::tanh(1.5 * hs[0] - 0.2));
  const double e1 = std::exp(0.7 * std::tanh(1.5 * hs[1] - 0.2));
  const double expected = (e0 * hs[0] + e1 * hs[1]) / (e0 + e1);
  CHECK(gru_attend(m, seq)[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("classify head") {
  PliModel m = PliModel::zeros(2, 2);
  m.bo << 0.0, std::log(3.0);
  const auto p = classify(m, Eigen::VectorXd::Zero(2));
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));
  const auto half = classify(PliModel::zeros(2, 2), Eigen::VectorXd::Ones(2));
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);
}

TEST_CASE("backward pass matches central differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    INFO("seed " << seed);
    CHECK(fixtures::pli_gradient_error(seed) <= 1e-4);
  }
}

TEST_CASE("training separates constructed maps") {
  const auto train = fixtures::pli_separable(11);
  PliTrainConfig cfg;
  cfg.hidden = 8;
  cfg.learning_rate = 0.05;
  cfg.seed = 2;
  const auto res = train_pli(train, cfg, {});
  REQUIRE(res.train_loss.size() == 60);
  CHECK(pli_accuracy(res.model, train) >= 0.95);
  CHECK(res.train_loss.back() < res.train_loss.front());

  const auto again = train_pli(train, cfg, {});
  CHECK(serialize(again.model) == serialize(res.model));
}

TEST_CASE("zero learning rate leaves parameters at their initial values") {
  const auto train = fixtures::pli_separable(12, 10);
  PliTrainConfig cfg;
  cfg.hidden = 4;
  cfg.learning_rate = 0.0;
  cfg.max_epochs = 3;
  cfg.seed = 5;
  const auto res = train_pli(train, cfg, {});
  CHECK(serialize(res.model) == serialize(init_pli_model(4, 4, 5)));
}

TEST_CASE("train_pli errors") {
  auto train = fixtures::pli_separable(13, 6);
  for (auto& e : train) e.label = 1;
  PliTrainConfig cfg;
  cfg.hidden = 4;
  CHECK_THROWS_AS(train_pli(train, cfg, {}), Error);
  CHECK_THROWS_AS(train_pli({}, cfg, {}), Error);
}

TEST_CASE("interaction map truncation") {
  const auto enc = toy_hash_encoder(8, 1);
  const auto big = build_interaction_map(doc_with("q", 60), doc_with("c", 50), enc);
  CHECK(big.rows == 54);
  CHECK(big.cols == 40);
  CHECK(big.data.size() == 2160 * 8);
  const auto cell = enc.encode_pair("q paragraph number 7", "c paragraph number 3");
  for (std::size_t k = 0; k < 8; ++k) CHECK(big.cell(7, 3)[static_cast<Eigen::Index>(k)] == cell.vec[k]);

  const auto tiny = build_interaction_map(doc_with("q", 1), doc_with("c", 1), enc);
  CHECK(tiny.rows == 1);
  CHECK(tiny.cols == 1);
  CHECK_THROWS_AS(build_interaction_map(doc_with("q", 0), doc_with("c", 1), enc), Error);
}

TEST_CASE("toy hash encoder") {
  const auto enc = toy_hash_encoder(32, 7);
  const auto a = enc.encode_pair("The court held", "appeal dismissed");
  const auto b = toy_hash_encoder(32, 7).encode_pair("The court held", "appeal dismissed");
  CHECK(a.vec == b.vec);
  CHECK(a.probs == b.probs);
  double norm = 0.0;
  for (double x : a.vec) norm += x * x;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-9);
  CHECK(a.probs[0] + a.probs[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_NOTHROW(validate_encoding(a, 32));

  std::size_t equal = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = enc.encode_pair("alpha" + std::to_string(i), "");
    const auto y = enc.encode_pair("beta" + std::to_string(i), "");
    if (x.vec == y.vec) ++equal;
  }
  CHECK(equal < 50);
  CHECK(toy_hash_encoder(32, 8).encode_pair("The court held", "appeal dismissed").vec != a.vec);
  CHECK_THROWS_AS(toy_hash_encoder(1, 0), Error);
}

TEST_CASE("embeddings file loading") {
  testing::TempDir dir;
  auto cell = [](const std::string& q, const std::string& c, int i, int j, const std::string& vec,
                 const std::string& probs = "[0.4,0.6]") {
    return R"({"qid":")" + q + R"(","cid":")" + c + R"(","i":)" + std::to_string(i) + R"(,"j":)" +
           std::to_string(j) + R"(,"vec":)" + vec + R"(,"probs":)" + probs + "}\n";
  };
  const std::string header = "{\"dim\":2,\"encoder\":\"x\"}\n";

  std::string full = header;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) full += cell("q1", "c1", i, j, "[" + std::to_string(i) + "," + std::to_string(j) + "]");
  const auto store = load_embeddings(dir.write("ok.jsonl", full));
  const auto* g = store.find("q1", "c1");
  REQUIRE(g != nullptr);
  CHECK(g->rows == 2);
  CHECK(g->cols == 3);
  CHECK(g->at(1, 2).vec == std::vector<double>{1.0, 2.0});
  CHECK(store.find("q1", "c9") == nullptr);

  const auto back = load_embeddings(dir.write("rt.jsonl", serialize(store)));
  CHECK(back.find("q1", "c1")->at(0, 1).vec == g->at(0, 1).vec);

  // one missing cell
  std::string holey = header;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (i != 1 || j != 0) holey += cell("q1", "c1", i, j, "[0,0]");
  try {
    load_embeddings(dir.write("holey.jsonl", holey));
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("q1") != std::string::npos);
    CHECK(msg.find("c1") != std::string::npos);
    CHECK(msg.find("1, 0)") != std::string::npos);
  }

  CHECK_THROWS_AS(load_embeddings(dir.write("dim.jsonl", header + cell("q", "c", 0, 0, "[1,2,3]"))), Error);
  CHECK_THROWS_AS(load_embeddings(dir.write("probs.jsonl", header + cell("q", "c", 0, 0, "[1,2]", "[0.7,0.2]"))),
                  Error);
  CHECK_THROWS_AS(load_embeddings(dir.write("empty.jsonl", "")), Error);
  CHECK_THROWS_AS(load_embeddings(dir.write("dup.jsonl", header + cell("q", "c", 0, 0, "[1,2]") +
                                                              cell("q", "c", 0, 0, "[1,2]"))),
                  Error);

  std::string big = "{\"dim\":2,\"encoder\":\"x\",\"index\":[{\"qid\":\"q\",\"cid\":\"c\",\"rows\":54,\"cols\":40}]}\n";
  for (int i = 0; i < 54; ++i)
    for (int j = 0; j < 40; ++j) big += cell("q", "c", i, j, "[0.5,-0.5]");
  const auto bs = load_embeddings(dir.write("big.jsonl", big));
  CHECK(bs.find("q", "c")->cells.size() == 2160);
  const auto map = interaction_map_from_grid("q", "c", *bs.find("q", "c"), 2, 10, 5);
  CHECK(map.rows == 10);
  CHECK(map.cols == 5);
}

TEST_CASE("pli model file round trip") {
  testing::TempDir dir;
  const auto m = init_pli_model(5, 3, 21);
  const auto back = load_pli_model(dir.write("m.json", serialize(m)));
  CHECK(back.wx == m.wx);
  CHECK(back.wh == m.wh);
  CHECK(back.uw == m.uw);
  CHECK(back.bo == m.bo);
  CHECK(serialize(back) == serialize(m));
}
