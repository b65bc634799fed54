// Runs every primary acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "coliee/cli.hpp"
#include "coliee/corpus.hpp"
#include "coliee/duet_ranker.hpp"
#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/eval.hpp"
#include "coliee/lexical.hpp"
#include "coliee/ltr.hpp"
#include "coliee/pli.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace coliee;

namespace {

// Collects failed sub-checks of one criterion.
struct Probe {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); }

TokenizedDoc doc_of(const std::string& id, TokenList toks) {
  TokenizedDoc d;
  d.doc_id = id;
  d.paragraphs_tokens.push_back(toks);
  d.flat_tokens = std::move(toks);
  return d;
}

void metric_oracle(Probe& p) {
  RunResult run;
  run.selections["a"] = {"1", "2", "3", "4", "5"};
  run.selections["b"] = {"6", "7", "8", "9", "10"};
  const Qrels q = {{"a", {"1", "2", "x", "y"}}, {"b", {"6", "z"}}};
  const auto r = micro_metrics(run, q);
  p.expect(std::abs(r.precision - 0.3) <= 1e-12, "precision " + std::to_string(r.precision));
  p.expect(std::abs(r.recall - 0.5) <= 1e-12, "recall " + std::to_string(r.recall));
  p.expect(std::abs(r.f1 - 0.375) <= 1e-12, "f1 " + std::to_string(r.f1));

  RunResult skew;
  skew.selections["a"] = {"1"};
  skew.selections["b"] = {"2", "3", "4", "5"};
  const auto m = micro_metrics(skew, {{"a", {"1"}}, {"b", {"9"}}});
  // micro 1/5, macro would be 1/2
  p.expect(std::abs(m.precision - 0.2) <= 1e-12, "micro precision on skewed fixture");
}

void scorer_oracle(Probe& p) {
  const auto fx = oracle::five_doc_fixture();
  const auto stats = build_lexical_stats(fx.docs, fx.queries);
  for (const auto& q : fx.queries)
    for (const auto& d : fx.docs) {
      const auto got = duet_features(q, d, stats);
      const auto want = oracle::duet(q, d, fx.docs, fx.queries);
      for (std::size_t i = 0; i < kDuetDim; ++i)
        p.expect(close(got[i], want[i], 1e-12), "duet " + q.doc_id + "/" + d.doc_id + " #" + std::to_string(i + 1));
      p.expect(close(sdr_similarity(q, d, stats, SdrSpace::word), oracle::sdr(q, d, fx.docs, true), 1e-12),
               "sdr word " + d.doc_id);
      p.expect(close(sdr_similarity(q, d, stats, SdrSpace::entity), oracle::sdr(q, d, fx.docs, false), 1e-12),
               "sdr entity " + d.doc_id);
      p.expect(close(bigram_lmir(q, d, stats.word), oracle::lmir(q, d, fx.docs), 1e-12), "lmir " + d.doc_id);
    }
  const auto d = doc_of("d", {"x", "x", "y"});
  const auto s = build_stats({d, doc_of("o", {"y"})});
  const double v = bm25(word_view(doc_of("q", {"x"})), word_view(d), s);
  p.expect(std::abs(v - std::log(2.0) * 4.4 / 3.65) <= 1e-9, "bm25 hand example");
}

void lm_normalization(Probe& p) {
  Pcg32 rng(5);
  std::vector<std::string> vocab;
  for (int i = 0; i < 50; ++i) vocab.push_back("t" + std::to_string(i));
  std::vector<TokenizedDoc> docs;
  for (int k = 0; k < 6; ++k) {
    TokenList toks;
    const std::size_t len = 5 + rng.bounded(60);
    for (std::size_t i = 0; i < len; ++i) toks.push_back(vocab[rng.bounded(50)]);
    docs.push_back(doc_of("d" + std::to_string(k), toks));
  }
  docs.push_back(doc_of("all", vocab));
  const auto s = build_stats(docs);
  for (const auto& d : docs) {
    const TermView v = word_view(d);
    for (LmMode m : {LmMode::mle, LmMode::jm, LmMode::dirichlet, LmMode::twoway}) {
      double sum = 0.0;
      for (const auto& t : vocab) sum += lm_term_probability(v.count(t), v.length, s.coll_freq(t), s.total_tokens, m);
      p.expect(std::abs(sum - 1.0) <= 1e-9, "mode " + std::to_string(static_cast<int>(m)) + " doc " + d.doc_id);
    }
  }
}

void gradient_checks(Probe& p) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double de = fixtures::duet_gradient_error(seed);
    const double pe = fixtures::pli_gradient_error(seed);
    p.expect(de <= 1e-4, "duet seed " + std::to_string(seed) + " err " + std::to_string(de));
    p.expect(pe <= 1e-4, "pli seed " + std::to_string(seed) + " err " + std::to_string(pe));
  }
}

void learning_sanity(Probe& p) {
  const auto topics = fixtures::duet_separable(3);
  DuetTrainConfig dc;
  dc.seed = 9;
  const auto duet = train_duet(topics, dc, {});
  p.expect(training_loss(duet.model, topics) == 0.0, "duet hinge loss after 20 epochs");

  const auto maps = fixtures::pli_separable(11);
  PliTrainConfig pc;
  pc.hidden = 8;
  pc.learning_rate = 0.05;
  pc.seed = 2;
  const auto pli = train_pli(maps, pc, {});
  const double acc = pli_accuracy(pli.model, maps);
  p.expect(acc >= 0.95, "pli train accuracy " + std::to_string(acc));

  const auto qs = fixtures::rank_separable(1);
  RankSvmConfig rc;
  rc.C = 100.0;
  rc.iterations = 500;
  rc.seed = 3;
  const double tau = fixtures::pairwise_tau(ranksvm_train(qs, rc).model, qs);
  p.expect(tau == 1.0, "ranksvm tau " + std::to_string(tau));
}

void selection_rules(Probe& p) {
  using V = std::vector<std::string>;
  p.expect(select_task1({{"a", 0.5}, {"b", -0.1}, {"c", 0.2}, {"d", -0.3}}) == V{"a", "c", "b"}, "task1 pad to 3");
  p.expect(select_task1({{"a", 0.1}, {"b", 0.0}, {"c", 0.4}, {"d", 0.2}, {"e", 0.3}}).size() == 5,
           "task1 keeps all non-negative");
  p.expect(select_task1({{"a", -0.5}, {"b", -0.1}}) == V{"b", "a"}, "task1 fewer than 3 candidates");
  p.expect(select_task2({-0.4, -0.1, -0.9}) == std::set<std::size_t>{2}, "task2 fallback");
  p.expect(select_task2({0.0, -1.0}) == std::set<std::size_t>{1}, "task2 zero counts");
  p.expect(select_task2({0.2, 0.3}) == std::set<std::size_t>{1, 2}, "task2 all non-negative");
  using L = std::pair<std::size_t, std::size_t>;
  p.expect(asymmetric_lengths(200, 500) == L{128, 381}, "asymmetric 200/500");
  p.expect(symmetric_lengths(200, 500) == L{200, 309}, "symmetric 200/500");
  p.expect(symmetric_lengths(600, 600) == L{254, 255}, "symmetric 600/600");
}

// ---- end to end ----

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run_command(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "  coliee " << args.front() << " failed: " << e.str();
  return code;
}

const std::vector<std::string> kOutputs = {"corpus/task1_corpus.jsonl", "corpus/task1_labels.jsonl",
                                           "split.json",  "features.jsonl", "duet.json", "duet.run",
                                           "cascade.tsv", "pli.json",       "pli_scores.jsonl",
                                           "combined.jsonl", "svm.json",    "combined.run", "combined.rank"};

bool run_pipeline(const std::filesystem::path& dir) {
  const std::string conf = std::string(COLIEE_CONFIG_DIR) + "/synthetic.conf";
  auto at = [&](const char* f) { return (dir / f).string(); };
  const std::string corpus = at("corpus/task1_corpus.jsonl"), labels = at("corpus/task1_labels.jsonl");
  const std::vector<std::vector<std::string>> steps = {
      {"gen-synthetic", "--queries", "20", "--candidates", "50", "--entail-queries", "2", "--out", at("corpus")},
      {"split", "--task", "1", "--corpus", corpus, "--out", at("split.json")},
      {"features-duet", "--corpus", corpus, "--out", at("features.jsonl")},
      {"train-duet", "--features", at("features.jsonl"), "--labels", labels, "--split", at("split.json"), "--out",
       at("duet.json")},
      {"rank-duet", "--features", at("features.jsonl"), "--model", at("duet.json"), "--out", at("duet.run")},
      {"cascade", "--corpus", corpus, "--out", at("cascade.tsv")},
      {"pli-train", "--corpus", corpus, "--labels", labels, "--cascade", at("cascade.tsv"), "--split",
       at("split.json"), "--out", at("pli.json")},
      {"pli-score", "--corpus", corpus, "--cascade", at("cascade.tsv"), "--model", at("pli.json"), "--out",
       at("pli_scores.jsonl")},
      {"combine-train", "--task", "1", "--corpus", corpus, "--labels", labels, "--features", at("features.jsonl"),
       "--cascade", at("cascade.tsv"), "--pli-scores", at("pli_scores.jsonl"), "--split", at("split.json"),
       "--out-features", at("combined.jsonl"), "--out", at("svm.json")},
      {"combine-apply", "--combined", at("combined.jsonl"), "--model", at("svm.json"), "--out", at("combined.run"),
       "--ranking", at("combined.rank")},
  };
  for (auto args : steps) {
    args.insert(args.end(), {"--config", conf});
    std::string ignored;
    if (cli(args, &ignored) != 0) return false;
  }
  return true;
}

double micro_f1(const std::map<std::string, std::vector<std::string>>& sel, const Qrels& q) {
  RunResult r;
  r.selections = sel;
  return micro_metrics(r, q).f1;
}

void end_to_end(Probe& p) {
  testing::TempDir dir;
  const auto first = dir / "first", second = dir / "second";
  const auto t0 = std::chrono::steady_clock::now();
  const bool ok = run_pipeline(first);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  p.expect(ok, "pipeline stages exit 0");
  if (!ok) return;
  p.expect(secs < 60.0, "pipeline took " + std::to_string(secs) + " s");
  std::cout << "  pipeline wall time " << secs << " s\n";

  // run files are well formed and refer to real candidates
  auto corpus = load_retrieval_corpus(first / "corpus/task1_corpus.jsonl");
  attach_labels(corpus, load_retrieval_labels(first / "corpus/task1_labels.jsonl"));
  const auto run = load_selection(first / "combined.run");
  const auto ranking = load_ranking(first / "combined.rank");
  const auto duet_run = load_selection(first / "duet.run");
  Qrels qrels;
  std::map<std::string, std::vector<std::string>> pool;
  for (const auto& t : corpus.topics) {
    qrels[t.query.id] = *t.relevant_ids;
    for (const auto& c : t.candidates) pool[t.query.id].push_back(c.id);
  }
  p.expect(run.selections.size() == corpus.topics.size(), "combined run covers every query");
  p.expect(duet_run.selections.size() == corpus.topics.size(), "duet run covers every query");
  for (const auto& [qid, ids] : run.selections) {
    const auto& cands = pool[qid];
    std::set<std::string> seen;
    for (const auto& id : ids) {
      p.expect(std::find(cands.begin(), cands.end(), id) != cands.end(), qid + " selects unknown " + id);
      p.expect(seen.insert(id).second, qid + " selects " + id + " twice");
    }
    p.expect(ids.size() >= 3, qid + " selects fewer than 3");
    p.expect(ranking.rankings.count(qid) && ranking.rankings.at(qid).size() == 30, qid + " ranking size");
  }

  // random baseline: same number of picks per query, uniform over the candidates
  const double f1 = micro_f1(run.selections, qrels);
  Pcg32 rng(12345);
  const int trials = 1000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::map<std::string, std::vector<std::string>> rnd;
    for (const auto& [qid, ids] : run.selections) {
      auto cands = pool[qid];
      shuffle(std::span<std::string>(cands), rng);
      rnd[qid].assign(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(ids.size()));
    }
    const double x = micro_f1(rnd, qrels);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / trials;
  const double sd = std::sqrt(std::max(0.0, sum2 / trials - mean * mean));
  std::cout << "  combined micro-F1 " << f1 << ", random " << mean << " +/- " << sd << "\n";
  p.expect(f1 > mean + 3.0 * sd, "combined F1 does not beat random mean + 3 sd");

  // second run with the same seed
  p.expect(run_pipeline(second), "second pipeline run exits 0");
  for (const auto& f : kOutputs) {
    p.expect(testing::slurp(first / f) == testing::slurp(second / f), f + " differs between runs");
    std::string m1 = testing::slurp((first / f).string() + ".meta"), m2 = testing::slurp((second / f).string() + ".meta");
    // metadata records the command line, which names the output directory
    for (std::size_t pos; (pos = m1.find(first.string())) != std::string::npos;) m1.replace(pos, first.string().size(), "D");
    for (std::size_t pos; (pos = m2.find(second.string())) != std::string::npos;)
      m2.replace(pos, second.string().size(), "D");
    if (f.rfind("corpus/task1_labels", 0) != 0) p.expect(m1 == m2, f + ".meta differs between runs");
  }
}

std::string topic_line(const std::string& qid, std::size_t n) {
  std::string s = R"({"qid":")" + qid + R"(","query_paragraphs":["Query text."],"candidates":[)";
  for (std::size_t i = 0; i < n; ++i)
    s += (i ? "," : "") + std::string(R"({"cid":"c)") + std::to_string(i) + R"(","paragraphs":["Candidate."]})";
  return s + "]}\n";
}

void candidate_profile(Probe& p) {
  testing::TempDir dir;
  const std::string header = "{\"format\":\"task1-corpus-v1\",\"profile\":\"coliee2020\"}\n";
  const auto ok = load_retrieval_corpus(dir.write("ok.jsonl", header + topic_line("q1", 200) + topic_line("q2", 200)));
  p.expect(ok.topics.size() == 2 && ok.topics[1].candidates.size() == 200, "200-candidate topics load");
  for (std::size_t n : {199, 201, 50}) {
    bool threw = false;
    try {
      load_retrieval_corpus(dir.write("bad.jsonl", header + topic_line("q1", n)));
    } catch (const ValidationError&) {
      threw = true;
    }
    p.expect(threw, std::to_string(n) + " candidates accepted under the coliee2020 profile");
  }
  // without the profile any count is fine
  p.expect(load_retrieval_corpus(dir.write("free.jsonl", topic_line("q1", 50))).topics.size() == 1, "unprofiled load");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Probe&)>>> criteria = {
      {"metric-oracle", metric_oracle},
      {"scorer-oracle-equivalence", scorer_oracle},
      {"lm-normalization", lm_normalization},
      {"gradient-checks", gradient_checks},
      {"learning-sanity", learning_sanity},
      {"selection-and-truncation", selection_rules},
      {"end-to-end-synthetic", end_to_end},
      {"candidate-count-profile", candidate_profile},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Probe p;
    try {
      fn(p);
    } catch (const std::exception& e) {
      p.failures.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (p.failures.empty() ? "PASS " : "FAIL ") << name << "\n";
    for (std::size_t i = 0; i < p.failures.size() && i < 10; ++i) std::cout << "  " << p.failures[i] << "\n";
    failed += p.failures.empty() ? 0 : 1;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
