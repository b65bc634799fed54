#include "coliee/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "coliee/error.hpp"
#include "coliee/io.hpp"

namespace coliee {
namespace {

std::string join(std::span<const std::string> toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

void accumulate(CollectionStats& stats, const TermView& view) {
  ++stats.num_docs;
  stats.total_tokens += view.length;
  for (const auto& [unit, n] : view.tf) {
    ++stats.df[unit];
    stats.cf[unit] += n;
  }
}

void finish(CollectionStats& stats) {
  stats.avg_doc_len =
      stats.num_docs ? static_cast<double>(stats.total_tokens) / static_cast<double>(stats.num_docs) : 0.0;
}

double collection_prob(std::size_t cf, std::size_t total) {
  return total ? static_cast<double>(cf) / static_cast<double>(total) : 0.0;
}

}  // namespace

std::size_t CollectionStats::doc_freq(const std::string& unit) const {
  auto it = df.find(unit);
  return it == df.end() ? 0 : it->second;
}

std::size_t CollectionStats::coll_freq(const std::string& unit) const {
  auto it = cf.find(unit);
  return it == cf.end() ? 0 : it->second;
}

std::size_t CollectionStats::bigram_freq(const Bigram& g) const {
  auto it = bigram_cf.find(g);
  return it == bigram_cf.end() ? 0 : it->second;
}

std::size_t TermView::count(const std::string& unit) const {
  auto it = tf.find(unit);
  return it == tf.end() ? 0 : it->second;
}

TermView word_view(const TokenizedDoc& doc) {
  TermView v;
  v.kind = UnitKind::word;
  v.units = doc.flat_tokens;
  for (const auto& t : doc.flat_tokens) ++v.tf[t];
  v.length = doc.flat_tokens.size();
  return v;
}

TermView entity_view(const TokenizedDoc& doc) {
  TermView v;
  v.kind = UnitKind::entity_as_query;
  for (const auto& e : doc.entities) {
    std::string key = e.key();
    if (v.tf.emplace(key, 1).second) v.units.push_back(std::move(key));
  }
  v.length = v.units.size();
  return v;
}

TermView phrase_presence_view(const TokenizedDoc& doc, const TermView& query_entities) {
  TermView v;
  v.kind = UnitKind::entity_as_query;
  v.length = doc.flat_tokens.size();
  if (query_entities.units.empty()) return v;
  Gazetteer phrases;
  for (const auto& key : query_entities.units) phrases.insert(tokenize(key, {}));
  const std::span<const std::string> words(doc.flat_tokens);
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t len : phrases.all_matches(words, i)) v.tf[join(words.subspan(i, len))] = 1;
  }
  v.units.reserve(v.tf.size());
  for (const auto& key : query_entities.units)
    if (v.tf.count(key)) v.units.push_back(key);
  return v;
}

TermView entity_token_view(const TokenizedDoc& doc) {
  TermView v;
  v.kind = UnitKind::entity_as_doc;
  for (const auto& e : doc.entities)
    for (const auto& t : e.surface_tokens)
      if (v.tf.emplace(t, 1).second) v.units.push_back(t);
  v.length = v.units.size();
  return v;
}

CollectionStats build_stats(const std::vector<TokenizedDoc>& docs) {
  if (docs.empty()) throw Error("cannot build collection statistics over an empty corpus");
  CollectionStats stats;
  for (const auto& d : docs) {
    accumulate(stats, word_view(d));
    for (const auto& g : bigrams(d.flat_tokens)) ++stats.bigram_cf[g];
    if (d.flat_tokens.size() > 1) stats.total_bigrams += d.flat_tokens.size() - 1;
  }
  if (stats.total_tokens == 0) throw Error("collection has zero tokens");
  finish(stats);
  return stats;
}

LexicalStats build_lexical_stats(const std::vector<TokenizedDoc>& collection,
                                 const std::vector<TokenizedDoc>& queries) {
  LexicalStats s;
  s.word = build_stats(collection);

  Gazetteer phrases;
  auto add_phrases = [&](const std::vector<TokenizedDoc>& docs) {
    for (const auto& d : docs)
      for (const auto& e : d.entities) phrases.insert(e.surface_tokens);
  };
  add_phrases(collection);
  add_phrases(queries);

  for (const auto& d : collection) {
    accumulate(s.entities, entity_view(d));
    accumulate(s.entity_tokens, entity_token_view(d));

    TermView present;
    const std::span<const std::string> words(d.flat_tokens);
    for (std::size_t i = 0; i < words.size(); ++i)
      for (std::size_t len : phrases.all_matches(words, i)) present.tf[join(words.subspan(i, len))] = 1;
    present.length = present.tf.size();
    accumulate(s.entity_in_words, present);
  }
  finish(s.entities);
  finish(s.entity_tokens);
  // Qe-Dw documents are measured in words; the collection model stays a
  // distribution over phrases (total = Σ cf).
  s.entity_in_words.avg_doc_len = s.word.avg_doc_len;
  return s;
}

double bm25(const TermView& query, const TermView& doc, const CollectionStats& stats, const LexicalParams& p) {
  const double n = static_cast<double>(stats.num_docs);
  double score = 0.0;
  for (const auto& t : query.units) {
    const std::size_t tf = doc.count(t);
    if (tf == 0) continue;
    const double df = static_cast<double>(stats.doc_freq(t));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double f = static_cast<double>(tf);
    const double norm = p.k1 * (1.0 - p.b + p.b * static_cast<double>(doc.length) / stats.avg_doc_len);
    score += idf * f * (p.k1 + 1.0) / (f + norm);
  }
  return score;
}

double tfidf(const TermView& query, const TermView& doc, const CollectionStats& stats) {
  const double n = static_cast<double>(stats.num_docs);
  double score = 0.0;
  for (const auto& t : query.units) {
    const std::size_t tf = doc.count(t);
    if (tf == 0) continue;
    score += static_cast<double>(tf) * std::log((n + 1.0) / (static_cast<double>(stats.doc_freq(t)) + 1.0));
  }
  return score;
}

double lm_term_probability(std::size_t tf, std::size_t doc_len, std::size_t cf, std::size_t total, LmMode mode,
                           const LexicalParams& p) {
  const double pc = collection_prob(cf, total);
  const double f = static_cast<double>(tf);
  const double len = static_cast<double>(doc_len);
  switch (mode) {
    case LmMode::mle:
      if (doc_len == 0) throw Error("language model over an empty document");
      return f / len;
    case LmMode::jm:
      if (doc_len == 0) throw Error("language model over an empty document");
      return p.lambda * f / len + (1.0 - p.lambda) * pc;
    case LmMode::dirichlet:
      return (f + p.mu * pc) / (len + p.mu);
    case LmMode::twoway:
      return p.lambda * ((f + p.mu * pc) / (len + p.mu)) + (1.0 - p.lambda) * pc;
  }
  return 0.0;
}

double lm_score(const TermView& query, const TermView& doc, const CollectionStats& stats, LmMode mode,
                const LexicalParams& p) {
  if (doc.length == 0 && (mode == LmMode::mle || mode == LmMode::jm))
    throw Error("language model over an empty document");
  double score = 0.0;
  for (const auto& t : query.units) {
    const double prob = lm_term_probability(doc.count(t), doc.length, stats.coll_freq(t), stats.total_tokens, mode, p);
    score += std::log(std::max(prob, p.epsilon));
  }
  return score;
}

DuetFeatures duet_features(const TokenizedDoc& query, const TokenizedDoc& doc, const LexicalStats& stats,
                           const LexicalParams& p) {
  if (query.flat_tokens.empty()) throw Error("query " + query.doc_id + " has no tokens");
  const TermView qw = word_view(query);
  const TermView qe = entity_view(query);
  const TermView dw = word_view(doc);
  const TermView dw_phrase = phrase_presence_view(doc, qe);
  const TermView de = entity_token_view(doc);

  DuetFeatures f{};
  f[0] = bm25(qw, dw, stats.word, p);
  f[1] = tfidf(qw, dw, stats.word);
  if (dw.length) {
    f[2] = lm_score(qw, dw, stats.word, LmMode::mle, p);
    f[3] = lm_score(qw, dw, stats.word, LmMode::jm, p);
  } else {
    // All-stopword candidate: the document part of mle/jm is taken as zero.
    for (const auto& t : qw.units) {
      const double pc = collection_prob(stats.word.coll_freq(t), stats.word.total_tokens);
      f[2] += std::log(p.epsilon);
      f[3] += std::log(std::max((1.0 - p.lambda) * pc, p.epsilon));
    }
  }
  f[4] = lm_score(qw, dw, stats.word, LmMode::dirichlet, p);
  f[5] = lm_score(qw, dw, stats.word, LmMode::twoway, p);
  f[6] = bm25(qe, dw_phrase, stats.entity_in_words, p);
  f[7] = tfidf(qe, dw_phrase, stats.entity_in_words);
  f[8] = lm_score(qe, dw_phrase, stats.entity_in_words, LmMode::dirichlet, p);
  f[9] = tfidf(qw, de, stats.entity_tokens);
  f[10] = lm_score(qw, de, stats.entity_tokens, LmMode::dirichlet, p);
  return f;
}

double sdr_similarity(const TokenizedDoc& query, const TokenizedDoc& doc, const LexicalStats& stats,
                      SdrSpace space) {
  const bool words = space == SdrSpace::word;
  const CollectionStats& cs = words ? stats.word : stats.entities;
  const TermView a = words ? word_view(query) : entity_view(query);
  const TermView b = words ? word_view(doc) : entity_view(doc);
  const double n = static_cast<double>(cs.num_docs);
  auto weight = [&](const std::string& t, std::size_t tf) {
    return static_cast<double>(tf) * std::log((n + 1.0) / (static_cast<double>(cs.doc_freq(t)) + 1.0));
  };
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, tf] : a.tf) {
    const double wa = weight(t, tf);
    na += wa * wa;
    const std::size_t tfb = b.count(t);
    if (tfb) dot += wa * weight(t, tfb);
  }
  for (const auto& [t, tf] : b.tf) {
    const double wb = weight(t, tf);
    nb += wb * wb;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double bigram_lmir(const TokenizedDoc& query, const TokenizedDoc& doc, const CollectionStats& stats,
                   const LexicalParams& p) {
  if (query.flat_tokens.size() < 2) throw Error("bigram LMIR needs a query with at least 2 tokens");
  std::unordered_map<Bigram, std::size_t, BigramHash> doc_counts;
  for (auto& g : bigrams(doc.flat_tokens)) ++doc_counts[std::move(g)];
  const double doc_bigrams = std::max<double>(1.0, doc.flat_tokens.size() > 1 ? doc.flat_tokens.size() - 1.0 : 0.0);
  double score = 0.0;
  for (const auto& g : bigrams(query.flat_tokens)) {
    auto it = doc_counts.find(g);
    const double tf = it == doc_counts.end() ? 0.0 : static_cast<double>(it->second);
    const double pc = collection_prob(stats.bigram_freq(g), stats.total_bigrams);
    score += std::log(p.lambda_b * tf / doc_bigrams + (1.0 - p.lambda_b) * pc + p.epsilon);
  }
  return score;
}

std::string serialize(const std::vector<FeatureRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    io::json obj = {{"qid", r.qid}, {"cid", r.cid}, {"duet", r.duet},
                    {"sdr_w", r.sdr_w}, {"sdr_e", r.sdr_e}, {"lmir", r.lmir}};
    out += obj.dump() + "\n";
  }
  return out;
}

std::vector<FeatureRecord> load_feature_dump(const std::filesystem::path& path) {
  std::vector<FeatureRecord> out;
  io::for_each_json(path, [&](const io::json& obj, std::size_t line) {
    FeatureRecord r;
    r.qid = io::string_field(obj, "qid", line);
    r.cid = io::string_field(obj, "cid", line);
    const auto duet = io::real_list(obj, "duet", line);
    if (duet.size() != kDuetDim) throw ParseError("duet vector must have 11 values", line);
    std::copy(duet.begin(), duet.end(), r.duet.begin());
    r.sdr_w = io::field(obj, "sdr_w", line).get<double>();
    r.sdr_e = io::field(obj, "sdr_e", line).get<double>();
    r.lmir = io::field(obj, "lmir", line).get<double>();
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace coliee
