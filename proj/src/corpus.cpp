#include "coliee/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "coliee/error.hpp"
#include "coliee/io.hpp"
#include "coliee/rng.hpp"

namespace coliee {

using io::json;

namespace {

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\n\r\f\v") == std::string::npos;
}

void validate_document(const CaseDocument& doc, const std::string& where) {
  if (doc.id.empty()) throw ValidationError(where + ": empty document id");
  if (doc.paragraphs.empty()) throw ValidationError(where + ": document " + doc.id + " has no paragraphs");
  for (std::size_t i = 0; i < doc.paragraphs.size(); ++i) {
    if (blank(doc.paragraphs[i]))
      throw ValidationError(where + ": document " + doc.id + " paragraph " + std::to_string(i + 1) + " is blank");
  }
}

bool is_header(const json& obj) { return obj.contains("format") && !obj.contains("qid"); }

CorpusHeader parse_header(const json& obj, std::size_t line) {
  CorpusHeader h;
  h.format = io::string_field(obj, "format", line);
  if (obj.contains("profile")) h.profile = io::string_field(obj, "profile", line);
  if (obj.contains("candidates_per_query")) {
    const json& n = obj["candidates_per_query"];
    if (!n.is_number_unsigned()) throw ParseError("candidates_per_query must be a non-negative integer", line);
    h.candidates_per_query = n.get<std::size_t>();
  }
  if (h.profile == kColieeProfile) {
    if (h.candidates_per_query && *h.candidates_per_query != kColieeCandidatesPerQuery)
      throw ValidationError("profile coliee2020 requires 200 candidates per query");
    h.candidates_per_query = kColieeCandidatesPerQuery;
  }
  return h;
}

json header_json(const CorpusHeader& h) {
  json obj = {{"format", h.format}};
  if (!h.profile.empty()) obj["profile"] = h.profile;
  if (h.candidates_per_query) obj["candidates_per_query"] = *h.candidates_per_query;
  return obj;
}

}  // namespace

const RetrievalTopic* RetrievalCorpus::find(const std::string& qid) const {
  for (const auto& t : topics)
    if (t.query.id == qid) return &t;
  return nullptr;
}

const EntailmentTopic* EntailmentCorpus::find(const std::string& qid) const {
  for (const auto& t : topics)
    if (t.id == qid) return &t;
  return nullptr;
}

void validate(const RetrievalCorpus& corpus) {
  std::unordered_set<std::string> qids;
  for (const auto& topic : corpus.topics) {
    const std::string where = "topic " + topic.query.id;
    validate_document(topic.query, where);
    if (!qids.insert(topic.query.id).second) throw ValidationError("duplicate topic id " + topic.query.id);
    std::unordered_set<std::string> cids;
    for (const auto& c : topic.candidates) {
      validate_document(c, where);
      if (!cids.insert(c.id).second) throw ValidationError(where + ": duplicate candidate id " + c.id);
    }
    if (corpus.header && corpus.header->candidates_per_query &&
        topic.candidates.size() != *corpus.header->candidates_per_query) {
      throw ValidationError(where + ": " + std::to_string(topic.candidates.size()) +
                            " candidates, header declares " +
                            std::to_string(*corpus.header->candidates_per_query));
    }
    if (topic.relevant_ids) {
      for (const auto& r : *topic.relevant_ids)
        if (!cids.count(r)) throw ValidationError(where + ": relevant id " + r + " is not a candidate");
    }
  }
}

void validate(const EntailmentCorpus& corpus) {
  std::unordered_set<std::string> qids;
  for (const auto& topic : corpus.topics) {
    const std::string where = "topic " + topic.id;
    if (topic.id.empty()) throw ValidationError("empty topic id");
    if (!qids.insert(topic.id).second) throw ValidationError("duplicate topic id " + topic.id);
    if (blank(topic.fragment)) throw ValidationError(where + ": empty fragment");
    validate_document(CaseDocument{topic.id, topic.paragraphs}, where);
    if (topic.entailing_idx) {
      for (std::size_t idx : *topic.entailing_idx)
        if (idx < 1 || idx > topic.paragraphs.size())
          throw ValidationError(where + ": entailing index " + std::to_string(idx) + " out of range 1.." +
                                std::to_string(topic.paragraphs.size()));
    }
  }
}

RetrievalCorpus load_retrieval_corpus(const std::filesystem::path& path) {
  RetrievalCorpus corpus;
  bool first = true;
  io::for_each_json(path, [&](const json& obj, std::size_t line) {
    if (first && is_header(obj)) {
      corpus.header = parse_header(obj, line);
      first = false;
      return;
    }
    first = false;
    RetrievalTopic topic;
    topic.query.id = io::string_field(obj, "qid", line);
    topic.query.paragraphs = io::string_list(obj, "query_paragraphs", line);
    const json& cands = io::field(obj, "candidates", line);
    if (!cands.is_array()) throw ParseError("field \"candidates\" must be an array", line);
    for (const auto& c : cands) {
      if (!c.is_object()) throw ParseError("candidate must be an object", line);
      topic.candidates.push_back({io::string_field(c, "cid", line), io::string_list(c, "paragraphs", line)});
    }
    corpus.topics.push_back(std::move(topic));
  });
  validate(corpus);
  return corpus;
}

EntailmentCorpus load_entailment_corpus(const std::filesystem::path& path) {
  EntailmentCorpus corpus;
  bool first = true;
  io::for_each_json(path, [&](const json& obj, std::size_t line) {
    if (first && is_header(obj)) {
      corpus.header = parse_header(obj, line);
      first = false;
      return;
    }
    first = false;
    EntailmentTopic topic;
    topic.id = io::string_field(obj, "qid", line);
    topic.fragment = io::string_field(obj, "fragment", line);
    topic.paragraphs = io::string_list(obj, "paragraphs", line);
    corpus.topics.push_back(std::move(topic));
  });
  validate(corpus);
  return corpus;
}

std::map<std::string, std::set<std::string>> load_retrieval_labels(const std::filesystem::path& path) {
  std::map<std::string, std::set<std::string>> out;
  io::for_each_json(path, [&](const json& obj, std::size_t line) {
    const auto qid = io::string_field(obj, "qid", line);
    auto ids = io::string_list(obj, "relevant", line);
    if (!out.emplace(qid, std::set<std::string>(ids.begin(), ids.end())).second)
      throw ValidationError("duplicate labels for " + qid);
  });
  return out;
}

std::map<std::string, std::set<std::size_t>> load_entailment_labels(const std::filesystem::path& path) {
  std::map<std::string, std::set<std::size_t>> out;
  io::for_each_json(path, [&](const json& obj, std::size_t line) {
    const auto qid = io::string_field(obj, "qid", line);
    const json& arr = io::field(obj, "entailing", line);
    if (!arr.is_array()) throw ParseError("field \"entailing\" must be an array", line);
    std::set<std::size_t> idx;
    for (const auto& v : arr) {
      if (!v.is_number_integer()) throw ParseError("entailing indices must be integers", line);
      const auto i = v.get<long long>();
      if (i < 1) throw ValidationError("line " + std::to_string(line) + ": entailing index must be >= 1");
      idx.insert(static_cast<std::size_t>(i));
    }
    if (!out.emplace(qid, std::move(idx)).second) throw ValidationError("duplicate labels for " + qid);
  });
  return out;
}

void attach_labels(RetrievalCorpus& corpus, const std::map<std::string, std::set<std::string>>& labels) {
  for (const auto& [qid, ids] : labels) {
    auto it = std::find_if(corpus.topics.begin(), corpus.topics.end(),
                           [&](const RetrievalTopic& t) { return t.query.id == qid; });
    if (it == corpus.topics.end()) throw ValidationError("labels for unknown topic " + qid);
    it->relevant_ids = ids;
  }
  validate(corpus);
}

void attach_labels(EntailmentCorpus& corpus, const std::map<std::string, std::set<std::size_t>>& labels) {
  for (const auto& [qid, idx] : labels) {
    auto it = std::find_if(corpus.topics.begin(), corpus.topics.end(),
                           [&](const EntailmentTopic& t) { return t.id == qid; });
    if (it == corpus.topics.end()) throw ValidationError("labels for unknown topic " + qid);
    it->entailing_idx = idx;
  }
  validate(corpus);
}

std::string serialize(const RetrievalCorpus& corpus) {
  std::string out;
  if (corpus.header) out += header_json(*corpus.header).dump() + "\n";
  for (const auto& t : corpus.topics) {
    json cands = json::array();
    for (const auto& c : t.candidates) cands.push_back({{"cid", c.id}, {"paragraphs", c.paragraphs}});
    json obj = {{"qid", t.query.id}, {"query_paragraphs", t.query.paragraphs}, {"candidates", std::move(cands)}};
    out += obj.dump() + "\n";
  }
  return out;
}

std::string serialize(const EntailmentCorpus& corpus) {
  std::string out;
  if (corpus.header) out += header_json(*corpus.header).dump() + "\n";
  for (const auto& t : corpus.topics) {
    json obj = {{"qid", t.id}, {"fragment", t.fragment}, {"paragraphs", t.paragraphs}};
    out += obj.dump() + "\n";
  }
  return out;
}

std::string serialize_labels(const RetrievalCorpus& corpus) {
  std::string out;
  for (const auto& t : corpus.topics) {
    if (!t.relevant_ids) continue;
    json obj = {{"qid", t.query.id}, {"relevant", *t.relevant_ids}};
    out += obj.dump() + "\n";
  }
  return out;
}

std::string serialize_labels(const EntailmentCorpus& corpus) {
  std::string out;
  for (const auto& t : corpus.topics) {
    if (!t.entailing_idx) continue;
    json obj = {{"qid", t.id}, {"entailing", *t.entailing_idx}};
    out += obj.dump() + "\n";
  }
  return out;
}

DatasetSplit split_dataset(std::vector<std::string> topic_ids, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must lie in (0, 1)");
  if (topic_ids.size() < 2) throw Error("cannot split fewer than 2 topics");
  std::sort(topic_ids.begin(), topic_ids.end());
  if (std::adjacent_find(topic_ids.begin(), topic_ids.end()) != topic_ids.end())
    throw ValidationError("duplicate topic id in split input");
  Pcg32 rng(seed);
  shuffle(std::span<std::string>(topic_ids), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(topic_ids.size())));
  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  for (std::size_t i = 0; i < topic_ids.size(); ++i)
    (i < n_val ? split.validation_topic_ids : split.train_topic_ids).insert(topic_ids[i]);
  return split;
}

std::string serialize(const DatasetSplit& split) {
  json obj = {{"seed", split.seed},
              {"ratio", split.ratio},
              {"train", split.train_topic_ids},
              {"validation", split.validation_topic_ids}};
  return obj.dump() + "\n";
}

DatasetSplit load_split(const std::filesystem::path& path) {
  json obj;
  try {
    obj = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid split file: ") + e.what(), 0);
  }
  DatasetSplit split;
  split.seed = io::field(obj, "seed", 0).get<std::uint64_t>();
  split.ratio = io::field(obj, "ratio", 0).get<double>();
  for (auto& s : io::string_list(obj, "train", 0)) split.train_topic_ids.insert(std::move(s));
  for (auto& s : io::string_list(obj, "validation", 0)) split.validation_topic_ids.insert(std::move(s));
  for (const auto& id : split.validation_topic_ids)
    if (split.train_topic_ids.count(id)) throw ValidationError("split sets overlap on " + id);
  return split;
}

}  // namespace coliee
