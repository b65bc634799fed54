#include "coliee/entail.hpp"

#include <algorithm>

#include "coliee/error.hpp"
#include "coliee/io.hpp"
#include "coliee/parallel.hpp"

namespace coliee {
namespace {

TokenList head(const TokenList& t, std::size_t n) {
  return TokenList(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(std::min(n, t.size())));
}

std::string join(const TokenList& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out.push_back(' ');
    out += t[i];
  }
  return out;
}

}  // namespace

std::pair<std::size_t, std::size_t> symmetric_lengths(std::size_t frag, std::size_t para) {
  if (frag + para <= kPairContentBudget) return {frag, para};
  const std::size_t cap_a = kPairContentBudget / 2;        // 254
  const std::size_t cap_b = kPairContentBudget - cap_a;    // 255
  if (frag < cap_a) return {frag, kPairContentBudget - frag};
  if (para < cap_b) return {kPairContentBudget - para, para};
  return {cap_a, cap_b};
}

std::pair<std::size_t, std::size_t> asymmetric_lengths(std::size_t frag, std::size_t para) {
  const std::size_t a = std::min(frag, kFragmentCap);
  return {a, std::min(para, kPairContentBudget - a)};
}

std::pair<TokenList, TokenList> truncate_symmetric(const TokenList& frag, const TokenList& para) {
  const auto [a, b] = symmetric_lengths(frag.size(), para.size());
  return {head(frag, a), head(para, b)};
}

std::pair<TokenList, TokenList> truncate_asymmetric(const TokenList& frag, const TokenList& para) {
  const auto [a, b] = asymmetric_lengths(frag.size(), para.size());
  return {head(frag, a), head(para, b)};
}

TokenList encoder_tokens(const std::string& text) { return tokenize(text, {}); }

std::vector<PairRequest> build_entail_pairs(const EntailmentTopic& topic, TruncationMode mode) {
  const TokenList frag = encoder_tokens(topic.fragment);
  std::vector<PairRequest> out;
  out.reserve(topic.paragraphs.size());
  for (std::size_t i = 0; i < topic.paragraphs.size(); ++i) {
    auto [a, b] = mode == TruncationMode::symmetric ? truncate_symmetric(frag, encoder_tokens(topic.paragraphs[i]))
                                                    : truncate_asymmetric(frag, encoder_tokens(topic.paragraphs[i]));
    out.push_back({topic.id, i + 1, std::move(a), std::move(b)});
  }
  return out;
}

std::vector<std::array<double, 2>> classify_pairs(const std::vector<PairRequest>& pairs, const EncoderProvider& enc) {
  std::vector<std::array<double, 2>> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    try {
      PairEncoding e = enc.encode_pair(join(pairs[i].text_a), join(pairs[i].text_b));
      validate_encoding(e, enc.dim());
      out[i] = e.probs;
    } catch (const std::exception& ex) {
      throw Error("encoder failed on " + pairs[i].qid + " paragraph " + std::to_string(pairs[i].para_idx) + ": " +
                  ex.what());
    }
  });
  return out;
}

EntailDecision decide_standalone(const std::string& qid, const std::vector<std::array<double, 2>>& probs) {
  if (probs.empty()) throw Error("no paragraph scores for " + qid);
  EntailDecision d;
  d.qid = qid;
  std::size_t best = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d.scores.push_back(probs[i][1]);
    if (probs[i][1] >= 0.5) d.selected_idx.insert(i + 1);
    if (probs[i][1] > probs[best][1]) best = i;
  }
  if (d.selected_idx.empty()) d.selected_idx.insert(best + 1);
  return d;
}

std::string serialize(const std::vector<PairRequest>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    io::json obj = {{"qid", p.qid}, {"para_idx", p.para_idx}, {"text_a", join(p.text_a)}, {"text_b", join(p.text_b)}};
    out += obj.dump() + "\n";
  }
  return out;
}

std::string serialize(const std::vector<ParagraphScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    io::json obj = {{"qid", s.qid}, {"para_idx", s.para_idx}, {"probs", s.probs}};
    out += obj.dump() + "\n";
  }
  return out;
}

std::vector<ParagraphScore> load_paragraph_scores(const std::filesystem::path& path) {
  std::vector<ParagraphScore> out;
  io::for_each_json(path, [&](const io::json& obj, std::size_t line) {
    ParagraphScore s;
    s.qid = io::string_field(obj, "qid", line);
    const auto& idx = io::field(obj, "para_idx", line);
    if (!idx.is_number_unsigned() || idx.get<std::size_t>() == 0) throw ParseError("para_idx must be >= 1", line);
    s.para_idx = idx.get<std::size_t>();
    const auto probs = io::real_list(obj, "probs", line);
    if (probs.size() != 2) throw ParseError("probs must have 2 values", line);
    s.probs = {probs[0], probs[1]};
    PairEncoding check{{}, s.probs};
    try {
      validate_encoding(check, 0);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<ParagraphScore> scores_from_embeddings(const EntailmentCorpus& corpus, const EmbeddingStore& store) {
  std::vector<ParagraphScore> out;
  for (const auto& t : corpus.topics) {
    const EncodingGrid* grid = store.find(t.id, t.id);
    if (!grid || grid->rows < 1 || grid->cols < t.paragraphs.size())
      throw ValidationError("embeddings do not cover every paragraph of " + t.id);
    for (std::size_t j = 0; j < t.paragraphs.size(); ++j) out.push_back({t.id, j + 1, grid->at(0, j).probs});
  }
  return out;
}

}  // namespace coliee
