#include <doctest.h>

#include <algorithm>

#include "coliee/cascade.hpp"
#include "coliee/error.hpp"
#include "coliee/rng.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace coliee;

namespace {

std::vector<TokenizedDoc> random_docs(std::uint64_t seed, std::size_t n, std::size_t vocab) {
  Pcg32 rng(seed);
  std::vector<TokenizedDoc> out;
  for (std::size_t i = 0; i < n; ++i) {
    TokenizedDoc d;
    d.doc_id = "c" + std::to_string(1000 + i);
    const std::size_t len = 3 + rng.bounded(15);
    for (std::size_t k = 0; k < len; ++k) d.flat_tokens.push_back("w" + std::to_string(rng.bounded(static_cast<std::uint32_t>(vocab))));
    d.paragraphs_tokens.push_back(d.flat_tokens);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

TEST_CASE("cascade keeps the k best by brute force") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto docs = random_docs(seed, 50, 6);
    const auto stats = build_stats(docs);
    const TokenizedDoc& q = docs[seed];
    const auto res = cascade_topk(q, docs, stats, 30);
    REQUIRE(res.kept.size() == 30);

    std::vector<std::pair<double, std::string>> all;
    for (const auto& d : docs) all.emplace_back(oracle::lmir(q, d, docs), d.doc_id);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(res.kept[i].id == all[i].second);
      CHECK(res.kept[i].score == doctest::Approx(all[i].first).epsilon(1e-12));
      if (i) CHECK(res.kept[i - 1].score >= res.kept[i].score);
    }
  }
}

TEST_CASE("cascade boundaries") {
  const auto fx = oracle::five_doc_fixture();
  const auto stats = build_stats(fx.docs);
  const auto all = cascade_topk(fx.queries[0], fx.docs, stats, 30);
  CHECK(all.kept.size() == 5);
  for (std::size_t i = 1; i < all.kept.size(); ++i) CHECK(all.kept[i - 1].score >= all.kept[i].score);

  TokenizedDoc short_q;
  short_q.doc_id = "q";
  short_q.flat_tokens = {"one"};
  CHECK_THROWS_AS(cascade_topk(short_q, fx.docs, stats, 30), Error);
  CHECK_THROWS_AS(cascade_topk(fx.queries[0], fx.docs, stats, 0), Error);
}

TEST_CASE("cascade on a 200-candidate topic keeps 30") {
  const auto docs = random_docs(42, 200, 20);
  const auto stats = build_stats(docs);
  CHECK(cascade_topk(docs[0], docs, stats).kept.size() == 30);
}

TEST_CASE("cascade dump round trip") {
  testing::TempDir dir;
  const auto docs = random_docs(8, 12, 5);
  const auto stats = build_stats(docs);
  std::vector<CascadeResult> rs = {cascade_topk(docs[0], docs, stats, 4), cascade_topk(docs[1], docs, stats, 4)};
  rs[0].qid = "qa";
  rs[1].qid = "qb";
  const std::string text = serialize(rs);
  const auto back = load_cascade(dir.write("c.tsv", text));
  REQUIRE(back.size() == 2);
  CHECK(back[1].kept.size() == 4);
  CHECK(back[0].kept[2].score == rs[0].kept[2].score);
  CHECK(serialize(back) == text);
}
