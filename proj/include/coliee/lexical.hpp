#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "coliee/textproc.hpp"

namespace coliee {

struct BigramHash {
  std::size_t operator()(const Bigram& g) const noexcept {
    const std::size_t h1 = std::hash<std::string>{}(g.first);
    const std::size_t h2 = std::hash<std::string>{}(g.second);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};

/// Exact counts over one unit space of a document collection.
struct CollectionStats {
  std::size_t num_docs = 0;
  double avg_doc_len = 0.0;
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_map<std::string, std::size_t> cf;
  std::size_t total_tokens = 0;
  std::unordered_map<Bigram, std::size_t, BigramHash> bigram_cf;
  std::size_t total_bigrams = 0;

  std::size_t doc_freq(const std::string& unit) const;
  std::size_t coll_freq(const std::string& unit) const;
  std::size_t bigram_freq(const Bigram& g) const;
};

enum class UnitKind { word, entity_as_query, entity_as_doc };

/// A bag of matchable units. `units` keeps query-side multiplicity in order;
/// `tf` is the document-side count used for matching.
struct TermView {
  UnitKind kind = UnitKind::word;
  std::vector<std::string> units;
  std::unordered_map<std::string, std::size_t> tf;
  std::size_t length = 0;

  std::size_t count(const std::string& unit) const;
};

/// Word tokens with raw frequencies.
TermView word_view(const TokenizedDoc& doc);
/// Distinct entity surface forms, presence-capped (Qe side, also SDR-entity).
TermView entity_view(const TokenizedDoc& doc);
/// Qe-Dw document side: presence of each query entity phrase as a contiguous
/// subsequence of the document word stream. Length is the word count.
TermView phrase_presence_view(const TokenizedDoc& doc, const TermView& query_entities);
/// Qw-De document side: distinct tokens of the document's entities.
TermView entity_token_view(const TokenizedDoc& doc);

/// Statistics for every unit space used by the duet, SDR and LMIR scorers.
struct LexicalStats {
  CollectionStats word;             // Qw-Dw, SDR-word, bigram LMIR
  CollectionStats entity_in_words;  // Qe-Dw: entity phrases found in word streams
  CollectionStats entity_tokens;    // Qw-De: words inside entity spans
  CollectionStats entities;         // SDR-entity: extracted entity surface forms
};

struct LexicalParams {
  double k1 = 1.2;
  double b = 0.75;
  double lambda = 0.1;     // JM and two-way interpolation weight on the document model
  double mu = 2000.0;      // Dirichlet prior
  double lambda_b = 0.8;   // bigram LMIR document weight
  double epsilon = 1e-10;  // probability floor
};

enum class LmMode { mle, jm, dirichlet, twoway };

inline constexpr std::size_t kDuetDim = 11;
using DuetFeatures = std::array<double, kDuetDim>;

/// Word-space statistics. Throws on an empty collection or zero total tokens.
CollectionStats build_stats(const std::vector<TokenizedDoc>& docs);

/// Builds all four spaces over `collection`. Entity phrases for the Qe-Dw
/// space are drawn from the entities of `collection` and `queries`.
LexicalStats build_lexical_stats(const std::vector<TokenizedDoc>& collection,
                                 const std::vector<TokenizedDoc>& queries);

double bm25(const TermView& query, const TermView& doc, const CollectionStats& stats,
            const LexicalParams& params = {});
double tfidf(const TermView& query, const TermView& doc, const CollectionStats& stats);

/// p(t|d) before the epsilon floor.
double lm_term_probability(std::size_t tf, std::size_t doc_len, std::size_t cf, std::size_t total,
                           LmMode mode, const LexicalParams& params = {});

/// Σ over query units of ln(max(p(t|d), ε)). mle and jm divide by |d| and
/// throw on empty documents; dirichlet and two-way stay defined.
double lm_score(const TermView& query, const TermView& doc, const CollectionStats& stats, LmMode mode,
                const LexicalParams& params = {});

/// The eleven word-entity duet features in their fixed wire order.
DuetFeatures duet_features(const TokenizedDoc& query, const TokenizedDoc& doc, const LexicalStats& stats,
                           const LexicalParams& params = {});

enum class SdrSpace { word, entity };

/// Cosine of tf-idf vectors, idf = ln((N+1)/(df+1)); 0 if either is all-zero.
double sdr_similarity(const TokenizedDoc& query, const TokenizedDoc& doc, const LexicalStats& stats,
                      SdrSpace space);

/// Σ over query bigrams of ln(λ_b·tf(g,d)/max(1,|bigrams(d)|) + (1−λ_b)·cf(g)/total + ε).
double bigram_lmir(const TokenizedDoc& query, const TokenizedDoc& doc, const CollectionStats& stats,
                   const LexicalParams& params = {});

/// One line of the feature dump.
struct FeatureRecord {
  std::string qid;
  std::string cid;
  DuetFeatures duet{};
  double sdr_w = 0.0;
  double sdr_e = 0.0;
  double lmir = 0.0;
};

std::string serialize(const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> load_feature_dump(const std::filesystem::path& path);

}  // namespace coliee
