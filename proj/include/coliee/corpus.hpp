#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace coliee {

/// A case as an ordered list of raw-text paragraphs.
struct CaseDocument {
  std::string id;
  std::vector<std::string> paragraphs;
};

/// Task 1 unit: one query case with its candidate pool.
struct RetrievalTopic {
  CaseDocument query;
  std::vector<CaseDocument> candidates;
  std::optional<std::set<std::string>> relevant_ids;  // nullopt = unlabeled
};

/// Task 2 unit: a decision fragment and the paragraphs of one relevant case.
struct EntailmentTopic {
  std::string id;
  std::string fragment;
  std::vector<std::string> paragraphs;
  std::optional<std::set<std::size_t>> entailing_idx;  // 1-based
};

/// Optional first line of a corpus file, e.g.
/// {"format":"task1-corpus-v1","profile":"coliee2020","candidates_per_query":200}
struct CorpusHeader {
  std::string format;
  std::string profile;  // empty when absent
  std::optional<std::size_t> candidates_per_query;
};

inline constexpr const char* kColieeProfile = "coliee2020";
inline constexpr std::size_t kColieeCandidatesPerQuery = 200;

struct RetrievalCorpus {
  std::optional<CorpusHeader> header;
  std::vector<RetrievalTopic> topics;

  const RetrievalTopic* find(const std::string& qid) const;
};

struct EntailmentCorpus {
  std::optional<CorpusHeader> header;
  std::vector<EntailmentTopic> topics;

  const EntailmentTopic* find(const std::string& qid) const;
};

struct DatasetSplit {
  std::set<std::string> train_topic_ids;
  std::set<std::string> validation_topic_ids;
  std::uint64_t seed = 0;
  double ratio = 0.2;
};

/// Topic order is file order. Throws ParseError (with line) on malformed
/// records and ValidationError on invariant violations.
RetrievalCorpus load_retrieval_corpus(const std::filesystem::path& path);
EntailmentCorpus load_entailment_corpus(const std::filesystem::path& path);

/// Labels files: {"qid","relevant":[cid,...]} / {"qid","entailing":[int,...]}.
std::map<std::string, std::set<std::string>> load_retrieval_labels(const std::filesystem::path& path);
std::map<std::string, std::set<std::size_t>> load_entailment_labels(const std::filesystem::path& path);

/// Attaches labels, checking that every labeled qid exists and every label
/// refers to a candidate id / paragraph index of its topic.
void attach_labels(RetrievalCorpus& corpus, const std::map<std::string, std::set<std::string>>& labels);
void attach_labels(EntailmentCorpus& corpus, const std::map<std::string, std::set<std::size_t>>& labels);

/// Canonical serialization: header (when present) then one record per topic,
/// keys sorted, compact separators, LF endings. load∘serialize is the identity
/// on canonical files.
std::string serialize(const RetrievalCorpus& corpus);
std::string serialize(const EntailmentCorpus& corpus);
std::string serialize_labels(const RetrievalCorpus& corpus);
std::string serialize_labels(const EntailmentCorpus& corpus);

void validate(const RetrievalCorpus& corpus);
void validate(const EntailmentCorpus& corpus);

/// Sorts ids, Fisher-Yates shuffles them with Pcg32(seed), and takes the
/// first round(ratio * n) as validation. Topics carry all their candidates.
DatasetSplit split_dataset(std::vector<std::string> topic_ids, double ratio, std::uint64_t seed);

std::string serialize(const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& path);

}  // namespace coliee
