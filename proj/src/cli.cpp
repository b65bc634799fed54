#include "coliee/cli.hpp"

#include <map>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "coliee/cascade.hpp"
#include "coliee/config.hpp"
#include "coliee/corpus.hpp"
#include "coliee/duet_ranker.hpp"
#include "coliee/encoder.hpp"
#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/eval.hpp"
#include "coliee/io.hpp"
#include "coliee/lexical.hpp"
#include "coliee/ltr.hpp"
#include "coliee/parallel.hpp"
#include "coliee/pli.hpp"
#include "coliee/synthetic.hpp"
#include "coliee/textproc.hpp"

namespace coliee {
namespace {

namespace fs = std::filesystem;

// Options shared by every subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> workers;
  std::string stopwords;
  std::string gazetteer;
};

struct Context {
  std::string command_line;
  ConfigFile file;
  PipelineConfig cfg;
  std::ostream& out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "pipeline config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "seed for every stochastic step");
  sub->add_option("--workers", c.workers, "worker threads (0 = all cores)");
  sub->add_option("--stopwords", c.stopwords, "stopword file")->check(CLI::ExistingFile);
  sub->add_option("--gazetteer", c.gazetteer, "gazetteer file")->check(CLI::ExistingFile);
}

void write_output(const Context& ctx, const fs::path& path, const std::string& content) {
  io::write_file(path, content);
  io::write_file(path.string() + ".meta", run_metadata(ctx.command_line, ctx.file, ctx.cfg));
}

// ---------------------------------------------------------------- text prep

struct TokenizedTopic {
  TokenizedDoc query;
  std::vector<TokenizedDoc> candidates;
};

struct RetrievalData {
  RetrievalCorpus corpus;
  StopwordSet stopwords;
  Gazetteer gazetteer;
  std::vector<TokenizedTopic> topics;
  LexicalStats stats;
};

StopwordSet load_stopword_config(const PipelineConfig& cfg) {
  return load_stopwords(cfg.stopwords.empty() ? default_stopwords_path() : fs::path(cfg.stopwords));
}

RetrievalData prepare_retrieval(const fs::path& corpus_path, const std::string& labels_path, const PipelineConfig& cfg,
                                bool with_stats) {
  RetrievalData d;
  d.corpus = load_retrieval_corpus(corpus_path);
  if (!labels_path.empty()) attach_labels(d.corpus, load_retrieval_labels(labels_path));
  d.stopwords = load_stopword_config(cfg);
  if (!cfg.gazetteer.empty()) {
    d.gazetteer = load_gazetteer(cfg.gazetteer, d.stopwords);
  } else {
    std::vector<std::string> raw;
    for (const auto& t : d.corpus.topics) {
      raw.insert(raw.end(), t.query.paragraphs.begin(), t.query.paragraphs.end());
      for (const auto& c : t.candidates) raw.insert(raw.end(), c.paragraphs.begin(), c.paragraphs.end());
    }
    d.gazetteer = auto_gazetteer(raw, d.stopwords);
  }

  std::vector<const CaseDocument*> docs;
  for (const auto& t : d.corpus.topics) {
    docs.push_back(&t.query);
    for (const auto& c : t.candidates) docs.push_back(&c);
  }
  std::vector<TokenizedDoc> tokenized(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { tokenized[i] = tokenize_document(*docs[i], d.stopwords, d.gazetteer); });

  std::size_t k = 0;
  std::vector<TokenizedDoc> collection, queries;
  std::set<std::string> seen;
  for (const auto& t : d.corpus.topics) {
    TokenizedTopic tt;
    tt.query = std::move(tokenized[k++]);
    for (std::size_t c = 0; c < t.candidates.size(); ++c) {
      tt.candidates.push_back(std::move(tokenized[k++]));
      if (with_stats && seen.insert(tt.candidates.back().doc_id).second) collection.push_back(tt.candidates.back());
    }
    if (with_stats) queries.push_back(tt.query);
    d.topics.push_back(std::move(tt));
  }
  if (with_stats) d.stats = build_lexical_stats(collection, queries);
  return d;
}

std::set<std::string> subset_ids(const std::string& split_path, const std::string& subset) {
  if (split_path.empty() || subset.empty() || subset == "all") return {};
  const DatasetSplit split = load_split(split_path);
  if (subset == "train") return split.train_topic_ids;
  if (subset == "validation") return split.validation_topic_ids;
  throw Error("unknown subset " + subset + " (train|validation|all)");
}

bool in_subset(const std::set<std::string>& ids, const std::string& split_path, const std::string& subset,
               const std::string& qid) {
  if (split_path.empty() || subset.empty() || subset == "all") return true;
  return ids.count(qid) > 0;
}

// ---------------------------------------------------------------- encoders

struct EncoderSource {
  std::unique_ptr<ToyHashEncoder> toy;
  std::optional<EmbeddingStore> store;

  std::size_t dim() const { return store ? store->dim : toy->dim(); }

  InteractionMap map(const CaseDocument& q, const CaseDocument& c, const PipelineConfig& cfg) const {
    if (store) {
      const EncodingGrid* grid = store->find(q.id, c.id);
      if (!grid) throw Error("embeddings missing for " + q.id + "/" + c.id);
      return interaction_map_from_grid(q.id, c.id, *grid, store->dim, cfg.max_rows, cfg.max_cols);
    }
    return build_interaction_map(q, c, *toy, cfg.max_rows, cfg.max_cols);
  }

  Probs first_paragraph(const CaseDocument& q, const CaseDocument& c) const {
    if (store) {
      const EncodingGrid* grid = store->find(q.id, c.id);
      if (!grid) throw Error("embeddings missing for " + q.id + "/" + c.id);
      return grid->at(0, 0).probs;
    }
    return toy->encode_pair(q.paragraphs.front(), c.paragraphs.front()).probs;
  }
};

EncoderSource make_encoder(const std::string& embeddings, std::uint64_t encoder_seed, const PipelineConfig& cfg) {
  EncoderSource src;
  if (!embeddings.empty()) {
    src.store = load_embeddings(embeddings);
  } else {
    src.toy = std::make_unique<ToyHashEncoder>(cfg.encoder_dim, encoder_seed);
  }
  return src;
}

const CaseDocument& find_candidate(const RetrievalTopic& topic, const std::string& cid) {
  for (const auto& c : topic.candidates)
    if (c.id == cid) return c;
  throw Error("topic " + topic.query.id + " has no candidate " + cid);
}

std::vector<PliExample> pli_examples(const RetrievalCorpus& corpus, const std::vector<CascadeResult>& cascade,
                                     const std::set<std::string>& qids, const EncoderSource& enc,
                                     const PipelineConfig& cfg) {
  struct Job {
    const RetrievalTopic* topic;
    const CaseDocument* cand;
  };
  std::vector<Job> jobs;
  for (const auto& r : cascade) {
    if (!qids.count(r.qid)) continue;
    const RetrievalTopic* topic = corpus.find(r.qid);
    if (!topic) throw Error("cascade query " + r.qid + " not in corpus");
    for (const auto& item : r.kept) jobs.push_back({topic, &find_candidate(*topic, item.id)});
  }
  std::vector<PliExample> out(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& [topic, cand] = jobs[i];
    const int label = topic->relevant_ids && topic->relevant_ids->count(cand->id) ? 1 : 0;
    out[i] = make_pli_example(enc.map(topic->query, *cand, cfg), label);
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_ingest(const Context& ctx, int task, const std::string& corpus, const std::string& labels,
               const std::string& out_dir) {
  const fs::path dir(out_dir);
  io::json summary;
  if (task == 1) {
    RetrievalCorpus c = load_retrieval_corpus(corpus);
    if (!labels.empty()) attach_labels(c, load_retrieval_labels(labels));
    std::size_t cands = 0, rel = 0, labeled = 0;
    for (const auto& t : c.topics) {
      cands += t.candidates.size();
      if (t.relevant_ids) {
        rel += t.relevant_ids->size();
        ++labeled;
      }
    }
    write_output(ctx, dir / "corpus.jsonl", serialize(c));
    if (!labels.empty()) io::write_file(dir / "labels.jsonl", serialize_labels(c));
    summary = {{"task", 1}, {"queries", c.topics.size()}, {"candidates", cands}, {"labeled_queries", labeled},
               {"relevant", rel}};
  } else {
    EntailmentCorpus c = load_entailment_corpus(corpus);
    if (!labels.empty()) attach_labels(c, load_entailment_labels(labels));
    std::size_t paras = 0, ent = 0, labeled = 0;
    for (const auto& t : c.topics) {
      paras += t.paragraphs.size();
      if (t.entailing_idx) {
        ent += t.entailing_idx->size();
        ++labeled;
      }
    }
    write_output(ctx, dir / "corpus.jsonl", serialize(c));
    if (!labels.empty()) io::write_file(dir / "labels.jsonl", serialize_labels(c));
    summary = {{"task", 2}, {"queries", c.topics.size()}, {"paragraphs", paras}, {"labeled_queries", labeled},
               {"entailing", ent}};
  }
  io::write_file(dir / "summary.json", summary.dump(2) + "\n");
  ctx.out << summary.dump() << "\n";
  return 0;
}

int cmd_split(const Context& ctx, int task, const std::string& corpus, const std::string& out) {
  std::vector<std::string> ids;
  if (task == 1) {
    for (const auto& t : load_retrieval_corpus(corpus).topics) ids.push_back(t.query.id);
  } else {
    for (const auto& t : load_entailment_corpus(corpus).topics) ids.push_back(t.id);
  }
  const DatasetSplit split = split_dataset(ids, ctx.cfg.ratio, ctx.cfg.seed);
  write_output(ctx, out, serialize(split));
  ctx.out << "train " << split.train_topic_ids.size() << " validation " << split.validation_topic_ids.size() << "\n";
  return 0;
}

int cmd_features_duet(const Context& ctx, const std::string& corpus, const std::string& out) {
  const RetrievalData d = prepare_retrieval(corpus, "", ctx.cfg, true);
  struct Job {
    std::size_t topic, cand;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < d.topics.size(); ++t)
    for (std::size_t c = 0; c < d.topics[t].candidates.size(); ++c) jobs.push_back({t, c});
  std::vector<FeatureRecord> records(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto& q = d.topics[jobs[i].topic].query;
    const auto& c = d.topics[jobs[i].topic].candidates[jobs[i].cand];
    FeatureRecord& r = records[i];
    r.qid = q.doc_id;
    r.cid = c.doc_id;
    r.duet = duet_features(q, c, d.stats, ctx.cfg.lexical);
    r.sdr_w = sdr_similarity(q, c, d.stats, SdrSpace::word);
    r.sdr_e = sdr_similarity(q, c, d.stats, SdrSpace::entity);
    r.lmir = q.flat_tokens.size() >= 2 ? bigram_lmir(q, c, d.stats.word, ctx.cfg.lexical) : 0.0;
  });
  write_output(ctx, out, serialize(records));
  ctx.out << records.size() << " feature records\n";
  return 0;
}

std::vector<DuetTopic> duet_topics(const std::vector<FeatureRecord>& records, const Qrels& qrels) {
  std::vector<DuetTopic> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, fresh] = index.emplace(r.qid, out.size());
    if (fresh) {
      DuetTopic t;
      t.qid = r.qid;
      if (auto q = qrels.find(r.qid); q != qrels.end()) t.relevant = q->second;
      out.push_back(std::move(t));
    }
    out[it->second].cids.push_back(r.cid);
    out[it->second].features.push_back(r.duet);
  }
  return out;
}

int cmd_train_duet(const Context& ctx, const std::string& features, const std::string& labels,
                   const std::string& split_path, const std::string& out) {
  const auto topics = duet_topics(load_feature_dump(features), load_qrels(labels));
  const DatasetSplit split = load_split(split_path);
  std::vector<DuetTopic> train, validation;
  for (const auto& t : topics) {
    if (split.train_topic_ids.count(t.qid)) train.push_back(t);
    if (split.validation_topic_ids.count(t.qid)) validation.push_back(t);
  }
  DuetTrainConfig tc;
  tc.learning_rate = ctx.cfg.duet_lr;
  tc.weight_decay = ctx.cfg.duet_weight_decay;
  tc.max_epochs = ctx.cfg.duet_epochs;
  tc.seed = ctx.cfg.seed;
  tc.top_k = ctx.cfg.duet_top_k;
  const DuetTrainResult res = train_duet(train, tc, validation);
  for (std::size_t e = 0; e < res.train_loss.size(); ++e)
    ctx.out << "epoch " << e + 1 << " loss " << io::format_real(res.train_loss[e]) << " val_f1 "
            << io::format_real(res.validation_f1[e]) << "\n";
  ctx.out << "selected epoch " << res.best_epoch << "\n";
  write_output(ctx, out, serialize(res.model));
  return 0;
}

int cmd_rank_duet(const Context& ctx, const std::string& features, const std::string& model_path,
                  const std::string& out, const std::string& ranking, const std::string& split_path,
                  const std::string& subset) {
  const DuetModel model = load_duet_model(model_path);
  const auto ids = subset_ids(split_path, subset);
  RunResult run;
  for (const auto& t : duet_topics(load_feature_dump(features), {})) {
    if (!in_subset(ids, split_path, subset, t.qid)) continue;
    auto ranked = rank_candidates(model, t);
    auto& sel = run.selections[t.qid];
    for (std::size_t i = 0; i < std::min<std::size_t>(ctx.cfg.duet_top_k, ranked.size()); ++i) sel.push_back(ranked[i].id);
    run.rankings[t.qid] = std::move(ranked);
  }
  write_output(ctx, out, serialize_selection(run));
  if (!ranking.empty()) io::write_file(ranking, serialize_ranking(run));
  return 0;
}

int cmd_cascade(const Context& ctx, const std::string& corpus, const std::string& out) {
  const RetrievalData d = prepare_retrieval(corpus, "", ctx.cfg, true);
  std::vector<CascadeResult> results;
  for (const auto& t : d.topics)
    results.push_back(cascade_topk(t.query, t.candidates, d.stats.word, ctx.cfg.cascade_k, ctx.cfg.lexical));
  write_output(ctx, out, serialize(results));
  return 0;
}

int cmd_pli_pairs(const Context& ctx, const std::string& corpus_path, const std::string& cascade_path,
                  const std::string& out) {
  const RetrievalCorpus corpus = load_retrieval_corpus(corpus_path);
  std::string text;
  for (const auto& r : load_cascade(cascade_path)) {
    const RetrievalTopic* topic = corpus.find(r.qid);
    if (!topic) throw Error("cascade query " + r.qid + " not in corpus");
    for (const auto& item : r.kept) {
      const CaseDocument& cand = find_candidate(*topic, item.id);
      const std::size_t rows = std::min<std::size_t>(topic->query.paragraphs.size(), ctx.cfg.max_rows);
      const std::size_t cols = std::min<std::size_t>(cand.paragraphs.size(), ctx.cfg.max_cols);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          io::json obj = {{"qid", r.qid}, {"cid", cand.id}, {"i", i}, {"j", j},
                          {"text_a", topic->query.paragraphs[i]}, {"text_b", cand.paragraphs[j]}};
          text += obj.dump() + "\n";
        }
    }
  }
  write_output(ctx, out, text);
  return 0;
}

int cmd_pli_train(const Context& ctx, const std::string& corpus_path, const std::string& labels,
                  const std::string& cascade_path, const std::string& split_path, const std::string& embeddings,
                  std::uint64_t encoder_seed, const std::string& out) {
  RetrievalCorpus corpus = load_retrieval_corpus(corpus_path);
  attach_labels(corpus, load_retrieval_labels(labels));
  const auto cascade = load_cascade(cascade_path);
  const DatasetSplit split = load_split(split_path);
  const EncoderSource enc = make_encoder(embeddings, encoder_seed, ctx.cfg);
  const auto train = pli_examples(corpus, cascade, split.train_topic_ids, enc, ctx.cfg);
  const auto validation = pli_examples(corpus, cascade, split.validation_topic_ids, enc, ctx.cfg);
  PliTrainConfig tc;
  tc.learning_rate = ctx.cfg.pli_lr;
  tc.weight_decay = ctx.cfg.pli_weight_decay;
  tc.max_epochs = ctx.cfg.pli_epochs;
  tc.hidden = ctx.cfg.hidden;
  tc.seed = ctx.cfg.seed;
  tc.threshold = ctx.cfg.pli_threshold;
  const PliTrainResult res = train_pli(train, tc, validation);
  for (std::size_t e = 0; e < res.train_loss.size(); ++e)
    ctx.out << "epoch " << e + 1 << " loss " << io::format_real(res.train_loss[e]) << " val_f1 "
            << io::format_real(res.validation_f1[e]) << "\n";
  ctx.out << "selected epoch " << res.best_epoch << "\n";
  write_output(ctx, out, serialize(res.model));
  return 0;
}

struct PliScore {
  std::string qid, cid;
  Probs probs{}, firstpara{};
};

std::map<std::pair<std::string, std::string>, PliScore> load_pli_scores(const fs::path& path) {
  std::map<std::pair<std::string, std::string>, PliScore> out;
  io::for_each_json(path, [&](const io::json& obj, std::size_t line) {
    PliScore s;
    s.qid = io::string_field(obj, "qid", line);
    s.cid = io::string_field(obj, "cid", line);
    const auto p = io::real_list(obj, "probs", line);
    const auto f = io::real_list(obj, "firstpara_probs", line);
    if (p.size() != 2 || f.size() != 2) throw ParseError("probability pairs must have 2 values", line);
    s.probs = {p[0], p[1]};
    s.firstpara = {f[0], f[1]};
    out[{s.qid, s.cid}] = s;
  });
  return out;
}

int cmd_pli_score(const Context& ctx, const std::string& corpus_path, const std::string& cascade_path,
                  const std::string& model_path, const std::string& embeddings, std::uint64_t encoder_seed,
                  const std::string& out, const std::string& run_path) {
  const RetrievalCorpus corpus = load_retrieval_corpus(corpus_path);
  const PliModel model = load_pli_model(model_path);
  const EncoderSource enc = make_encoder(embeddings, encoder_seed, ctx.cfg);
  if (enc.dim() != model.input_dim()) throw Error("encoder dimension does not match the PLI model");
  std::string text;
  RunResult run;
  for (const auto& r : load_cascade(cascade_path)) {
    const RetrievalTopic* topic = corpus.find(r.qid);
    if (!topic) throw Error("cascade query " + r.qid + " not in corpus");
    std::vector<RankedItem> ranked;
    for (const auto& item : r.kept) {
      const CaseDocument& cand = find_candidate(*topic, item.id);
      const auto map = enc.map(topic->query, cand, ctx.cfg);
      const Probs probs = classify(model, gru_attend(model, maxpool_rows(map)));
      const Probs first = enc.first_paragraph(topic->query, cand);
      io::json obj = {{"qid", r.qid}, {"cid", cand.id}, {"probs", probs}, {"firstpara_probs", first}};
      text += obj.dump() + "\n";
      ranked.push_back({cand.id, probs[1]});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedItem& a, const RankedItem& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    auto& sel = run.selections[r.qid];
    for (const auto& item : ranked)
      if (item.score >= ctx.cfg.pli_threshold) sel.push_back(item.id);
    run.rankings[r.qid] = std::move(ranked);
  }
  write_output(ctx, out, text);
  if (!run_path.empty()) io::write_file(run_path, serialize_selection(run));
  return 0;
}

TruncationMode parse_mode(const std::string& mode) {
  if (mode == "symmetric" || mode == "sym") return TruncationMode::symmetric;
  if (mode == "asymmetric" || mode == "asym") return TruncationMode::asymmetric;
  throw Error("unknown truncation mode " + mode);
}

int cmd_entail_pairs(const Context& ctx, const std::string& corpus_path, const std::string& mode,
                     const std::string& out) {
  const EntailmentCorpus corpus = load_entailment_corpus(corpus_path);
  std::vector<PairRequest> all;
  for (const auto& t : corpus.topics) {
    auto pairs = build_entail_pairs(t, parse_mode(mode));
    all.insert(all.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
  }
  write_output(ctx, out, serialize(all));
  return 0;
}

int cmd_entail_score(const Context& ctx, const std::string& corpus_path, const std::string& mode,
                     const std::string& embeddings, std::uint64_t encoder_seed, const std::string& out,
                     const std::string& run_path) {
  const EntailmentCorpus corpus = load_entailment_corpus(corpus_path);
  std::vector<ParagraphScore> scores;
  if (!embeddings.empty()) {
    scores = scores_from_embeddings(corpus, load_embeddings(embeddings));
  } else {
    const ToyHashEncoder enc(ctx.cfg.encoder_dim, encoder_seed);
    for (const auto& t : corpus.topics) {
      const auto pairs = build_entail_pairs(t, parse_mode(mode));
      const auto probs = classify_pairs(pairs, enc);
      for (std::size_t i = 0; i < pairs.size(); ++i) scores.push_back({t.id, pairs[i].para_idx, probs[i]});
    }
  }
  RunResult run;
  std::map<std::string, std::vector<Probs>> by_topic;
  for (const auto& s : scores) by_topic[s.qid].push_back(s.probs);
  for (const auto& [qid, probs] : by_topic) {
    const EntailDecision d = decide_standalone(qid, probs);
    for (std::size_t idx : d.selected_idx) run.selections[qid].push_back(std::to_string(idx));
  }
  write_output(ctx, out, serialize(scores));
  if (!run_path.empty()) io::write_file(run_path, serialize_selection(run));
  return 0;
}

struct CombineInputs {
  int task = 1;
  std::string corpus, labels, features, cascade, pli_scores, sym_scores, asym_scores;
};

FeatureFile build_task1_features(const CombineInputs& in) {
  RetrievalCorpus corpus = load_retrieval_corpus(in.corpus);
  if (!in.labels.empty()) attach_labels(corpus, load_retrieval_labels(in.labels));
  std::map<std::pair<std::string, std::string>, FeatureRecord> lex;
  for (auto& r : load_feature_dump(in.features)) lex[{r.qid, r.cid}] = std::move(r);
  const auto pli = load_pli_scores(in.pli_scores);
  FeatureFile file;
  file.layout = kTask1Layout;
  for (const auto& r : load_cascade(in.cascade)) {
    const RetrievalTopic* topic = corpus.find(r.qid);
    if (!topic) throw Error("cascade query " + r.qid + " not in corpus");
    for (const auto& item : r.kept) {
      auto l = lex.find({r.qid, item.id});
      auto p = pli.find({r.qid, item.id});
      if (l == lex.end()) throw Error("no lexical features for " + r.qid + "/" + item.id);
      if (p == pli.end()) throw Error("no PLI scores for " + r.qid + "/" + item.id);
      const auto f = assemble_task1(l->second.duet, l->second.sdr_w, l->second.sdr_e, p->second.probs,
                                    p->second.firstpara);
      FeatureRow row{r.qid, item.id, std::vector<double>(f.begin(), f.end()), std::nullopt};
      if (topic->relevant_ids) row.label = topic->relevant_ids->count(item.id) ? 1 : 0;
      file.rows.push_back(std::move(row));
    }
  }
  return file;
}

FeatureFile build_task2_features(const CombineInputs& in, const PipelineConfig& cfg) {
  EntailmentCorpus corpus = load_entailment_corpus(in.corpus);
  if (!in.labels.empty()) attach_labels(corpus, load_entailment_labels(in.labels));
  std::map<std::pair<std::string, std::size_t>, Probs> sym, asym;
  for (const auto& s : load_paragraph_scores(in.sym_scores)) sym[{s.qid, s.para_idx}] = s.probs;
  for (const auto& s : load_paragraph_scores(in.asym_scores)) asym[{s.qid, s.para_idx}] = s.probs;
  const StopwordSet stopwords = load_stopword_config(cfg);
  FeatureFile file;
  file.layout = kTask2Layout;
  for (const auto& t : corpus.topics) {
    // BM25 collection = the paragraphs of this case.
    std::vector<TokenizedDoc> paras;
    for (std::size_t i = 0; i < t.paragraphs.size(); ++i) {
      TokenizedDoc d;
      d.doc_id = std::to_string(i + 1);
      d.flat_tokens = tokenize(t.paragraphs[i], stopwords);
      d.paragraphs_tokens.push_back(d.flat_tokens);
      paras.push_back(std::move(d));
    }
    CollectionStats stats;
    try {
      stats = build_stats(paras);
    } catch (const Error&) {
      stats.num_docs = paras.size();
    }
    TokenizedDoc frag;
    frag.flat_tokens = tokenize(t.fragment, stopwords);
    const TermView q = word_view(frag);
    for (std::size_t i = 0; i < t.paragraphs.size(); ++i) {
      auto s = sym.find({t.id, i + 1});
      auto a = asym.find({t.id, i + 1});
      if (s == sym.end() || a == asym.end())
        throw Error("missing entailment scores for " + t.id + " paragraph " + std::to_string(i + 1));
      const double bm = stats.total_tokens ? bm25(q, word_view(paras[i]), stats, cfg.lexical) : 0.0;
      // punctuation-only paragraphs count as one token
      const std::size_t len = std::max<std::size_t>(1, encoder_tokens(t.paragraphs[i]).size());
      const auto f = assemble_task2(s->second, a->second, bm, i + 1, len);
      FeatureRow row{t.id, std::to_string(i + 1), std::vector<double>(f.begin(), f.end()), std::nullopt};
      if (t.entailing_idx) row.label = t.entailing_idx->count(i + 1) ? 1 : 0;
      file.rows.push_back(std::move(row));
    }
  }
  return file;
}

int cmd_combine_train(const Context& ctx, const CombineInputs& in, const std::string& split_path,
                      const std::string& out_features, const std::string& out) {
  const FeatureFile file = in.task == 1 ? build_task1_features(in) : build_task2_features(in, ctx.cfg);
  if (!out_features.empty()) io::write_file(out_features, serialize(file));
  const DatasetSplit split = load_split(split_path);
  std::vector<RankQuery> train;
  for (auto& q : group_queries(file))
    if (split.train_topic_ids.count(q.qid)) train.push_back(std::move(q));
  RankSvmConfig sc;
  sc.C = in.task == 1 ? ctx.cfg.c_task1 : ctx.cfg.c_task2;
  sc.iterations = ctx.cfg.svm_iterations;
  sc.batch_size = ctx.cfg.svm_batch;
  sc.seed = ctx.cfg.seed;
  const RankTrainResult res = ranksvm_train(train, sc);
  ctx.out << "pairs " << res.pairs << " objective " << io::format_real(res.objective.back()) << "\n";
  write_output(ctx, out, serialize(res.model));
  return 0;
}

int cmd_combine_apply(const Context& ctx, const CombineInputs& in, const std::string& combined,
                      const std::string& model_path, const std::string& out, const std::string& ranking,
                      const std::string& split_path, const std::string& subset) {
  const FeatureFile file = !combined.empty() ? load_feature_file(combined)
                           : in.task == 1    ? build_task1_features(in)
                                             : build_task2_features(in, ctx.cfg);
  const RankModel model = load_rank_model(model_path);
  const auto ids = subset_ids(split_path, subset);
  const bool task2 = file.layout == kTask2Layout;
  RunResult run;
  for (const auto& q : group_queries(file)) {
    if (!in_subset(ids, split_path, subset, q.qid)) continue;
    std::vector<RankedItem> scored;
    for (std::size_t i = 0; i < q.ids.size(); ++i) scored.push_back({q.ids[i], predict(model, q.features[i])});
    auto& sel = run.selections[q.qid];
    if (task2) {
      std::vector<double> scores;
      for (const auto& s : scored) scores.push_back(s.score);
      for (std::size_t idx : select_task2(scores)) sel.push_back(q.ids[idx - 1]);
    } else {
      sel = select_task1(scored);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const RankedItem& a, const RankedItem& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    run.rankings[q.qid] = std::move(scored);
  }
  write_output(ctx, out, serialize_selection(run));
  if (!ranking.empty()) io::write_file(ranking, serialize_ranking(run));
  return 0;
}

int cmd_evaluate(const Context& ctx, const std::string& run_path, const std::string& qrels_path,
                 const std::string& out, const std::string& split_path, const std::string& subset) {
  RunResult run = load_selection(run_path);
  const Qrels qrels = load_qrels(qrels_path);
  // A query with an empty selection has no line in the run file but still
  // counts its labels, so the query set comes from the subset or the qrels.
  // With a subset, run queries outside it are dropped.
  std::set<std::string> ids = subset_ids(split_path, subset);
  if (split_path.empty() || subset.empty() || subset == "all") {
    for (const auto& [qid, rel] : qrels) ids.insert(qid);
    for (const auto& [qid, sel] : run.selections)
      if (!ids.count(qid)) throw Error("run query " + qid + " has no qrels entry");
  }
  RunResult filtered;
  for (const auto& qid : ids) {
    auto it = run.selections.find(qid);
    filtered.selections[qid] = it == run.selections.end() ? std::vector<std::string>{} : it->second;
  }
  run = std::move(filtered);
  const MetricReport report = micro_metrics(run, qrels);
  ctx.out << serialize(report);
  if (!out.empty()) write_output(ctx, out, serialize(report));
  return 0;
}

int cmd_gen_synthetic(const Context& ctx, const SyntheticSpec& spec, const std::string& out_dir) {
  const SyntheticData data = generate_synthetic(spec, load_stopword_config(ctx.cfg));
  const fs::path dir(out_dir);
  write_output(ctx, dir / "task1_corpus.jsonl", serialize(data.retrieval));
  io::write_file(dir / "task1_labels.jsonl", serialize_labels(data.retrieval));
  io::write_file(dir / "task2_corpus.jsonl", serialize(data.entailment));
  io::write_file(dir / "task2_labels.jsonl", serialize_labels(data.entailment));
  ctx.out << data.retrieval.topics.size() << " retrieval topics, " << data.entailment.topics.size()
          << " entailment topics\n";
  return 0;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "coliee";
  for (const auto& a : args) s += " " + a;
  return s;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Legal case retrieval and entailment pipeline"};
  app.name("coliee");
  app.require_subcommand(1);

  Common common;
  int task = 1;
  std::string corpus, labels, out_path, features, model, split, subset, run_path, ranking, cascade_path,
      embeddings, qrels, mode = "symmetric", combined, out_features;
  std::optional<double> ratio;
  std::optional<std::uint64_t> k;
  std::uint64_t encoder_seed = 0;
  CombineInputs combine;
  SyntheticSpec spec;

  auto task_opt = [&](CLI::App* s, int* dst) {
    s->add_option("--task", *dst, "1 = retrieval, 2 = entailment")->check(CLI::IsMember({1, 2}));
  };
  auto existing = [](CLI::App* s, const char* name, std::string& dst, const char* help, bool required) {
    auto* o = s->add_option(name, dst, help)->check(CLI::ExistingFile);
    if (required) o->required();
  };

  auto* ingest = app.add_subcommand("ingest", "validate a corpus and write its canonical form");
  task_opt(ingest, &task);
  existing(ingest, "--corpus", corpus, "corpus file", true);
  existing(ingest, "--labels", labels, "labels file", false);
  ingest->add_option("--out", out_path, "output directory")->required();

  auto* split_cmd = app.add_subcommand("split", "train/validation split of topic ids");
  task_opt(split_cmd, &task);
  existing(split_cmd, "--corpus", corpus, "corpus file", true);
  split_cmd->add_option("--ratio", ratio, "validation fraction");
  split_cmd->add_option("--out", out_path, "split file")->required();

  auto* feat = app.add_subcommand("features-duet", "duet, SDR and LMIR features for every pair");
  existing(feat, "--corpus", corpus, "retrieval corpus", true);
  feat->add_option("--out", out_path, "feature dump")->required();

  auto* train_duet_cmd = app.add_subcommand("train-duet", "train the duet ranker");
  existing(train_duet_cmd, "--features", features, "feature dump", true);
  existing(train_duet_cmd, "--labels", labels, "labels file", true);
  existing(train_duet_cmd, "--split", split, "split file", true);
  train_duet_cmd->add_option("--out", out_path, "model file")->required();

  auto* rank_duet_cmd = app.add_subcommand("rank-duet", "top-5 run from a duet model");
  existing(rank_duet_cmd, "--features", features, "feature dump", true);
  existing(rank_duet_cmd, "--model", model, "duet model", true);
  rank_duet_cmd->add_option("--out", out_path, "selection run file")->required();
  rank_duet_cmd->add_option("--ranking", ranking, "ranking file");
  existing(rank_duet_cmd, "--split", split, "split file", false);
  rank_duet_cmd->add_option("--subset", subset, "train|validation|all");

  auto* cascade_cmd = app.add_subcommand("cascade", "bigram LMIR first stage");
  existing(cascade_cmd, "--corpus", corpus, "retrieval corpus", true);
  cascade_cmd->add_option("--k", k, "candidates kept per query");
  cascade_cmd->add_option("--out", out_path, "cascade dump")->required();

  auto* pli_pairs_cmd = app.add_subcommand("pli-pairs", "paragraph pair requests for an external encoder");
  existing(pli_pairs_cmd, "--corpus", corpus, "retrieval corpus", true);
  existing(pli_pairs_cmd, "--cascade", cascade_path, "cascade dump", true);
  pli_pairs_cmd->add_option("--out", out_path, "pair request file")->required();

  auto* pli_train_cmd = app.add_subcommand("pli-train", "train the paragraph-interaction classifier");
  existing(pli_train_cmd, "--corpus", corpus, "retrieval corpus", true);
  existing(pli_train_cmd, "--labels", labels, "labels file", true);
  existing(pli_train_cmd, "--cascade", cascade_path, "cascade dump", true);
  existing(pli_train_cmd, "--split", split, "split file", true);
  existing(pli_train_cmd, "--embeddings", embeddings, "embeddings file (default: toy hash encoder)", false);
  pli_train_cmd->add_option("--encoder-seed", encoder_seed, "toy encoder seed");
  pli_train_cmd->add_option("--out", out_path, "model file")->required();

  auto* pli_score_cmd = app.add_subcommand("pli-score", "score cascade survivors with a PLI model");
  existing(pli_score_cmd, "--corpus", corpus, "retrieval corpus", true);
  existing(pli_score_cmd, "--cascade", cascade_path, "cascade dump", true);
  existing(pli_score_cmd, "--model", model, "PLI model", true);
  existing(pli_score_cmd, "--embeddings", embeddings, "embeddings file (default: toy hash encoder)", false);
  pli_score_cmd->add_option("--encoder-seed", encoder_seed, "toy encoder seed");
  pli_score_cmd->add_option("--out", out_path, "score file")->required();
  pli_score_cmd->add_option("--run", run_path, "standalone selection run file");

  auto* entail_pairs_cmd = app.add_subcommand("entail-pairs", "truncated fragment/paragraph pairs");
  existing(entail_pairs_cmd, "--corpus", corpus, "entailment corpus", true);
  entail_pairs_cmd->add_option("--mode", mode, "symmetric|asymmetric");
  entail_pairs_cmd->add_option("--out", out_path, "pair dump")->required();

  auto* entail_score_cmd = app.add_subcommand("entail-score", "paragraph entailment probabilities");
  existing(entail_score_cmd, "--corpus", corpus, "entailment corpus", true);
  entail_score_cmd->add_option("--mode", mode, "symmetric|asymmetric");
  existing(entail_score_cmd, "--embeddings", embeddings, "embeddings file (default: toy hash encoder)", false);
  entail_score_cmd->add_option("--encoder-seed", encoder_seed, "toy encoder seed");
  entail_score_cmd->add_option("--out", out_path, "score file")->required();
  entail_score_cmd->add_option("--run", run_path, "standalone selection run file");

  auto combine_inputs = [&](CLI::App* s) {
    task_opt(s, &combine.task);
    existing(s, "--corpus", combine.corpus, "corpus file", false);
    existing(s, "--labels", combine.labels, "labels file", false);
    existing(s, "--features", combine.features, "task 1: duet feature dump", false);
    existing(s, "--cascade", combine.cascade, "task 1: cascade dump", false);
    existing(s, "--pli-scores", combine.pli_scores, "task 1: PLI score file", false);
    existing(s, "--sym-scores", combine.sym_scores, "task 2: symmetric-run score file", false);
    existing(s, "--asym-scores", combine.asym_scores, "task 2: asymmetric-run score file", false);
  };
  auto* combine_train_cmd = app.add_subcommand("combine-train", "assemble combined features and train RankSVM");
  combine_inputs(combine_train_cmd);
  existing(combine_train_cmd, "--split", split, "split file", true);
  combine_train_cmd->add_option("--out-features", out_features, "combined feature file");
  combine_train_cmd->add_option("--out", out_path, "rank model file")->required();

  auto* combine_apply_cmd = app.add_subcommand("combine-apply", "rank and select with a RankSVM model");
  combine_inputs(combine_apply_cmd);
  existing(combine_apply_cmd, "--combined", combined, "combined feature file", false);
  existing(combine_apply_cmd, "--model", model, "rank model", true);
  combine_apply_cmd->add_option("--out", out_path, "selection run file")->required();
  combine_apply_cmd->add_option("--ranking", ranking, "ranking file");
  existing(combine_apply_cmd, "--split", split, "split file", false);
  combine_apply_cmd->add_option("--subset", subset, "train|validation|all");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "micro precision/recall/F1 of a run");
  existing(evaluate_cmd, "--run", run_path, "selection run file", true);
  existing(evaluate_cmd, "--qrels", qrels, "labels file", true);
  evaluate_cmd->add_option("--out", out_path, "report file");
  existing(evaluate_cmd, "--split", split, "split file", false);
  evaluate_cmd->add_option("--subset", subset, "train|validation|all");

  auto* gen_cmd = app.add_subcommand("gen-synthetic", "generate a synthetic corpus with planted relevance");
  gen_cmd->add_option("--queries", spec.queries, "retrieval queries");
  gen_cmd->add_option("--candidates", spec.candidates, "candidates per query");
  gen_cmd->add_option("--entail-queries", spec.entail_queries, "entailment queries");
  gen_cmd->add_option("--out", out_path, "output directory")->required();

  for (auto* s : app.get_subcommands([](const CLI::App*) { return true; })) add_common(s, common);

  std::vector<std::string> argv_store{"coliee"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    Context ctx{join_args(args), {}, {}, out};
    if (!common.config.empty()) ctx.file = ConfigFile::load(common.config);
    ctx.cfg = PipelineConfig::from(ctx.file);
    if (common.seed) ctx.cfg.seed = *common.seed;
    if (common.workers) ctx.cfg.workers = *common.workers;
    if (!common.stopwords.empty()) ctx.cfg.stopwords = common.stopwords;
    if (!common.gazetteer.empty()) ctx.cfg.gazetteer = common.gazetteer;
    if (ratio) ctx.cfg.ratio = *ratio;
    if (k) ctx.cfg.cascade_k = *k;
    if (!(ctx.cfg.ratio > 0.0 && ctx.cfg.ratio < 1.0)) throw Error("ratio must lie in (0, 1)");
    if (ctx.cfg.cascade_k < 1) throw Error("k must be at least 1");
    set_worker_count(static_cast<unsigned>(ctx.cfg.workers));
    spec.seed = ctx.cfg.seed;

    auto need = [](const std::string& v, const char* flag) {
      if (v.empty()) throw Error(std::string(flag) + " is required here");
    };
    auto check_combine = [&](bool allow_combined) {
      if (allow_combined && !combined.empty()) return;
      need(combine.corpus, "--corpus");
      if (combine.task == 1) {
        need(combine.features, "--features");
        need(combine.cascade, "--cascade");
        need(combine.pli_scores, "--pli-scores");
      } else {
        need(combine.sym_scores, "--sym-scores");
        need(combine.asym_scores, "--asym-scores");
      }
    };

    if (ingest->parsed()) return cmd_ingest(ctx, task, corpus, labels, out_path);
    if (split_cmd->parsed()) return cmd_split(ctx, task, corpus, out_path);
    if (feat->parsed()) return cmd_features_duet(ctx, corpus, out_path);
    if (train_duet_cmd->parsed()) return cmd_train_duet(ctx, features, labels, split, out_path);
    if (rank_duet_cmd->parsed()) return cmd_rank_duet(ctx, features, model, out_path, ranking, split, subset);
    if (cascade_cmd->parsed()) return cmd_cascade(ctx, corpus, out_path);
    if (pli_pairs_cmd->parsed()) return cmd_pli_pairs(ctx, corpus, cascade_path, out_path);
    if (pli_train_cmd->parsed())
      return cmd_pli_train(ctx, corpus, labels, cascade_path, split, embeddings, encoder_seed, out_path);
    if (pli_score_cmd->parsed())
      return cmd_pli_score(ctx, corpus, cascade_path, model, embeddings, encoder_seed, out_path, run_path);
    if (entail_pairs_cmd->parsed()) return cmd_entail_pairs(ctx, corpus, mode, out_path);
    if (entail_score_cmd->parsed())
      return cmd_entail_score(ctx, corpus, mode, embeddings, encoder_seed, out_path, run_path);
    if (combine_train_cmd->parsed()) {
      check_combine(false);
      return cmd_combine_train(ctx, combine, split, out_features, out_path);
    }
    if (combine_apply_cmd->parsed()) {
      check_combine(true);
      return cmd_combine_apply(ctx, combine, combined, model, out_path, ranking, split, subset);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(ctx, run_path, qrels, out_path, split, subset);
    if (gen_cmd->parsed()) return cmd_gen_synthetic(ctx, spec, out_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace coliee
