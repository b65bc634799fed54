#pragma once

#include <cstddef>
#include <cstdint>

#include "coliee/corpus.hpp"
#include "coliee/textproc.hpp"

namespace coliee {

/// Shape of a generated dataset. Relevance is planted: every query owns a
/// theme (rare words, bigram phrases, and a capitalized entity name) that
/// its relevant candidates and entailing paragraphs repeat, while
/// irrelevant ones draw from other themes and a shared common vocabulary.
struct SyntheticSpec {
  std::size_t queries = 20;
  std::size_t candidates = 50;
  std::size_t min_relevant = 3;
  std::size_t max_relevant = 7;
  std::size_t entail_queries = 20;
  std::size_t min_paragraphs = 8;   // entailment candidate paragraphs
  std::size_t max_paragraphs = 30;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  RetrievalCorpus retrieval;  // labels attached
  EntailmentCorpus entailment;
};

/// Deterministic for a fixed spec. Generated words never collide with
/// `stopwords`.
SyntheticData generate_synthetic(const SyntheticSpec& spec, const StopwordSet& stopwords);

}  // namespace coliee
