#include <doctest.h>

#include "coliee/textproc.hpp"
#include "support.hpp"

using namespace coliee;

TEST_CASE("tokenize strips punctuation, lowercases and drops stopwords") {
  CHECK(tokenize("The Court, dismissed.", {"the"}) == TokenList{"court", "dismissed"});
  CHECK(tokenize("", {}).empty());
  CHECK(tokenize("FRAUD fraud", {}) == TokenList{"fraud", "fraud"});
  CHECK(tokenize("  (a)  --  b's\t\n\"quoted\" ", {}) == TokenList{"a", "b's", "quoted"});
  CHECK(tokenize("s. 5 ÉCOLE", {}) == TokenList{"s", "5", "école"});
  CHECK(tokenize("«Crown» … [2020]", {}) == TokenList{"crown", "2020"});
}

TEST_CASE("tokenize is idempotent on its joined output") {
  const StopwordSet stop = {"of", "the", "and"};
  const std::string text = "Minister of Citizenship and Immigration v. Smith, 2019 FCA 12 (CanLII).";
  const TokenList once = tokenize(text, stop);
  std::string joined;
  for (const auto& t : once) joined += t + " ";
  CHECK(tokenize(joined, stop) == once);
}

TEST_CASE("shipped stopword list") {
  const StopwordSet s = load_stopwords(default_stopwords_path());
  CHECK(s.size() == 179);
  CHECK(s.count("the"));
  CHECK(s.count("ourselves"));
  CHECK_FALSE(s.count("court"));
}

TEST_CASE("extract_entities uses leftmost-longest matching") {
  Gazetteer g;
  g.insert({"federal", "court"});
  const TokenList toks = {"federal", "court", "of", "canada"};
  const auto ents = extract_entities(toks, g);
  REQUIRE(ents.size() == 1);
  CHECK(ents[0].offset == 0);
  CHECK(ents[0].surface_tokens == TokenList{"federal", "court"});

  CHECK(extract_entities(toks, Gazetteer{}).empty());

  Gazetteer ab;
  ab.insert({"a"});
  ab.insert({"a", "b"});
  const TokenList t2 = {"a", "b"};
  const auto e2 = extract_entities(t2, ab);
  REQUIRE(e2.size() == 1);
  CHECK(e2[0].key() == "a b");
}

TEST_CASE("extracted spans never overlap and are sorted") {
  Gazetteer g;
  g.insert({"x", "y"});
  g.insert({"y", "z"});
  g.insert({"z"});
  const TokenList toks = {"x", "y", "z", "y", "z", "x", "y"};
  const auto ents = extract_entities(toks, g);
  REQUIRE(ents.size() == 4);
  std::size_t end = 0;
  for (const auto& e : ents) {
    CHECK(e.offset >= end);
    end = e.offset + e.surface_tokens.size();
    for (std::size_t k = 0; k < e.surface_tokens.size(); ++k) CHECK(toks[e.offset + k] == e.surface_tokens[k]);
  }
  CHECK(ents[0].key() == "x y");
  CHECK(ents[1].key() == "z");
  CHECK(ents[2].key() == "y z");
  CHECK(ents[3].offset == 5);
}

TEST_CASE("bigrams") {
  CHECK(bigrams(TokenList{"a", "b", "c"}) == std::vector<Bigram>{{"a", "b"}, {"b", "c"}});
  CHECK(bigrams(TokenList{"a"}).empty());
  CHECK(bigrams(TokenList{}).empty());
  CHECK(bigrams(TokenList{"a", "a", "a"}) == std::vector<Bigram>{{"a", "a"}, {"a", "a"}});
}

TEST_CASE("tokenize_document keeps paragraph structure") {
  Gazetteer g;
  g.insert({"federal", "court"});
  const CaseDocument doc{"d1", {"The Federal Court ruled.", "Appeal to the Federal Court dismissed."}};
  const auto td = tokenize_document(doc, {"the", "to"}, g);
  CHECK(td.doc_id == "d1");
  REQUIRE(td.paragraphs_tokens.size() == 2);
  CHECK(td.flat_tokens == TokenList{"federal", "court", "ruled", "appeal", "federal", "court", "dismissed"});
  REQUIRE(td.entities.size() == 2);
  CHECK(td.entities[0].paragraph == 0);
  CHECK(td.entities[1].paragraph == 1);
  CHECK(td.entities[1].offset == 1);
}

TEST_CASE("auto gazetteer collects capitalized runs") {
  const StopwordSet stop = {"of", "the"};
  const auto spans = capitalized_spans("The Federal Court of Appeal heard it. Then Justice Smith, Mr. Brown left.", stop);
  // "Mr." and "Brown" end up as single-word runs and are dropped.
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == TokenList{"federal", "court"});
  CHECK(spans[1] == TokenList{"then", "justice", "smith"});

  const std::vector<std::string> texts = {"Tax Court ruled.", "tax court again."};
  const Gazetteer g = auto_gazetteer(texts, stop);
  CHECK(g.size() == 1);
  const TokenList toks = {"tax", "court", "again"};
  CHECK(g.longest_match(toks, 0) == 2);
}

TEST_CASE("load_gazetteer normalizes entries") {
  testing::TempDir dir;
  const auto p = dir.write("g.txt", "Federal Court of Appeal\n\nSupreme Court\n");
  const Gazetteer g = load_gazetteer(p, {"of"});
  CHECK(g.size() == 2);
  const TokenList toks = {"federal", "court", "appeal"};
  CHECK(g.longest_match(toks, 0) == 3);
}
