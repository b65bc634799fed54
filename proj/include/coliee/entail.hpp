#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/encoder.hpp"
#include "coliee/textproc.hpp"

namespace coliee {

inline constexpr std::size_t kPairBudgetTotal = 512;
inline constexpr std::size_t kPairBudgetSpecials = 3;  // [CLS], [SEP], [SEP]
inline constexpr std::size_t kPairContentBudget = kPairBudgetTotal - kPairBudgetSpecials;  // 509
inline constexpr std::size_t kFragmentCap = 128;

enum class TruncationMode { symmetric, asymmetric };

/// One (fragment, paragraph) encoder input after truncation.
struct PairRequest {
  std::string qid;
  std::size_t para_idx = 0;  // 1-based
  TokenList text_a;
  TokenList text_b;
};

struct EntailDecision {
  std::string qid;
  std::set<std::size_t> selected_idx;  // 1-based, never empty
  std::vector<double> scores;          // probs[1] per paragraph
};

/// Under budget: unchanged. Otherwise each side gets floor(509/2) = 254, the
/// odd remainder token goes to the paragraph side, and slack left by a short
/// side transfers to the other. Heads are kept.
std::pair<TokenList, TokenList> truncate_symmetric(const TokenList& frag, const TokenList& para);

/// Fragment capped at 128 first, then the paragraph capped so the pair fits
/// in 509 tokens.
std::pair<TokenList, TokenList> truncate_asymmetric(const TokenList& frag, const TokenList& para);

/// Token counts for both policies, used by the list versions above.
std::pair<std::size_t, std::size_t> symmetric_lengths(std::size_t frag, std::size_t para);
std::pair<std::size_t, std::size_t> asymmetric_lengths(std::size_t frag, std::size_t para);

/// Encoder-side tokens: tokenize() with no stopwords, so budgets count every word.
TokenList encoder_tokens(const std::string& text);

/// One request per paragraph, in paragraph order.
std::vector<PairRequest> build_entail_pairs(const EntailmentTopic& topic, TruncationMode mode);

/// probs from the encoder for each request, in request order.
std::vector<std::array<double, 2>> classify_pairs(const std::vector<PairRequest>& pairs, const EncoderProvider& enc);

/// probs[1] ≥ 0.5 selected; when none qualifies, the single argmax
/// (smallest index on ties).
EntailDecision decide_standalone(const std::string& qid, const std::vector<std::array<double, 2>>& probs);

std::string serialize(const std::vector<PairRequest>& pairs);

/// Score file: {"qid","para_idx","probs":[p0,p1]} per line.
struct ParagraphScore {
  std::string qid;
  std::size_t para_idx = 0;
  std::array<double, 2> probs{};
};

std::string serialize(const std::vector<ParagraphScore>& scores);
std::vector<ParagraphScore> load_paragraph_scores(const std::filesystem::path& path);

/// Entailment pairs inside an embeddings file use cid = qid, i = 0,
/// j = para_idx − 1.
std::vector<ParagraphScore> scores_from_embeddings(const EntailmentCorpus& corpus, const EmbeddingStore& store);

}  // namespace coliee
