#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coliee/corpus.hpp"

namespace coliee {

using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;
using Bigram = std::pair<std::string, std::string>;

/// A gazetteer hit inside a tokenized document.
struct Entity {
  TokenList surface_tokens;
  std::size_t paragraph = 0;
  std::size_t offset = 0;  // token offset within the paragraph

  /// Surface tokens joined by single spaces; the unit key in entity spaces.
  std::string key() const;
};

struct TokenizedDoc {
  std::string doc_id;
  std::vector<TokenList> paragraphs_tokens;
  TokenList flat_tokens;
  std::vector<Entity> entities;
};

/// Token-sequence dictionary queried with leftmost-longest matching.
class Gazetteer {
 public:
  Gazetteer() = default;

  /// Empty sequences are ignored.
  void insert(const TokenList& entry);
  std::size_t size() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_ == 0; }

  /// Length of the longest entry that is a prefix of tokens[pos..]; 0 if none.
  std::size_t longest_match(std::span<const std::string> tokens, std::size_t pos) const;

  /// Lengths of every entry that is a prefix of tokens[pos..], ascending.
  std::vector<std::size_t> all_matches(std::span<const std::string> tokens, std::size_t pos) const;

 private:
  struct Node {
    std::unordered_map<std::string, std::size_t> children;
    bool terminal = false;
  };
  std::vector<Node> nodes_{Node{}};
  std::size_t entries_ = 0;
};

/// Splits on Unicode whitespace, strips leading/trailing punctuation from
/// each piece, lowercases (ASCII and Latin-1), and drops empty pieces and
/// stopwords. Order is preserved.
TokenList tokenize(std::string_view text, const StopwordSet& stopwords);

/// Leftmost-longest, non-overlapping gazetteer matches. Spans carry
/// paragraph 0; tokenize_document fills in the paragraph index.
std::vector<Entity> extract_entities(std::span<const std::string> tokens, const Gazetteer& gazetteer);

std::vector<Bigram> bigrams(std::span<const std::string> tokens);

/// Tokenizes every paragraph, then extracts entities paragraph by paragraph
/// from the stopword-filtered stream.
TokenizedDoc tokenize_document(const CaseDocument& doc, const StopwordSet& stopwords, const Gazetteer& gazetteer);

/// Stopword file: one token per line. The shipped list lives at
/// data/stopwords-en-v1.txt.
StopwordSet load_stopwords(const std::filesystem::path& path);
std::filesystem::path default_stopwords_path();

/// Gazetteer file: one space-separated token sequence per line. Lines are
/// normalized with tokenize(line, stopwords) so they match the filtered stream.
Gazetteer load_gazetteer(const std::filesystem::path& path, const StopwordSet& stopwords);

/// Builds a gazetteer from raw text: maximal runs of two or more consecutive
/// capitalized words, where a run ends at a non-capitalized word or right
/// after a word carrying trailing punctuation. Runs that keep fewer than two
/// tokens after tokenize() are discarded.
Gazetteer auto_gazetteer(std::span<const std::string> raw_texts, const StopwordSet& stopwords);

/// Candidate entries found by auto_gazetteer, in first-seen order.
std::vector<TokenList> capitalized_spans(std::string_view text, const StopwordSet& stopwords);

}  // namespace coliee
