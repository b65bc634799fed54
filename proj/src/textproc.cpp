#include "coliee/textproc.hpp"

#include <set>

#include "coliee/io.hpp"

namespace coliee {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t length;
};

// Malformed bytes decode as themselves (one byte, never space/punctuation).
std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xC0 && b0 < 0xE0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if (b0 >= 0xE0 && b0 < 0xF0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len == 1 || i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      len = 1;
      cp = 0xFFFD0000u | b0;  // private marker outside Unicode
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0xFF01 && c <= 0xFF0F);
}

bool is_upper(char32_t c) {
  return (c >= 'A' && c <= 'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7);
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Piece {
  std::string text;      // lowercased, punctuation stripped
  bool capitalized;      // first kept code point is upper case
  bool trailing_punct;   // punctuation was stripped from the end
};

std::vector<Piece> pieces(std::string_view text) {
  const auto cps = decode(text);
  std::vector<Piece> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i].value)) ++i;
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].value)) ++j;
    if (j > i) {
      std::size_t b = i, e = j;
      while (b < e && is_punct(cps[b].value)) ++b;
      while (e > b && is_punct(cps[e - 1].value)) --e;
      Piece p{{}, b < e && is_upper(cps[b].value), e < j};
      for (std::size_t k = b; k < e; ++k) {
        const char32_t c = cps[k].value;
        if (c >= 0xFFFD0000u) {
          p.text.push_back(static_cast<char>(c & 0xFF));
        } else {
          append_utf8(p.text, is_upper(c) ? c + 0x20 : c);
        }
      }
      out.push_back(std::move(p));
    }
    i = j;
  }
  return out;
}

}  // namespace

std::string Entity::key() const {
  std::string k;
  for (std::size_t i = 0; i < surface_tokens.size(); ++i) {
    if (i) k.push_back(' ');
    k += surface_tokens[i];
  }
  return k;
}

void Gazetteer::insert(const TokenList& entry) {
  if (entry.empty()) return;
  std::size_t node = 0;
  for (const auto& tok : entry) {
    auto it = nodes_[node].children.find(tok);
    if (it == nodes_[node].children.end()) {
      nodes_.emplace_back();
      it = nodes_[node].children.emplace(tok, nodes_.size() - 1).first;
    }
    node = it->second;
  }
  if (!nodes_[node].terminal) {
    nodes_[node].terminal = true;
    ++entries_;
  }
}

std::vector<std::size_t> Gazetteer::all_matches(std::span<const std::string> tokens, std::size_t pos) const {
  std::vector<std::size_t> out;
  std::size_t node = 0;
  for (std::size_t k = pos; k < tokens.size(); ++k) {
    auto it = nodes_[node].children.find(tokens[k]);
    if (it == nodes_[node].children.end()) break;
    node = it->second;
    if (nodes_[node].terminal) out.push_back(k - pos + 1);
  }
  return out;
}

std::size_t Gazetteer::longest_match(std::span<const std::string> tokens, std::size_t pos) const {
  const auto m = all_matches(tokens, pos);
  return m.empty() ? 0 : m.back();
}

TokenList tokenize(std::string_view text, const StopwordSet& stopwords) {
  TokenList out;
  for (auto& p : pieces(text)) {
    if (p.text.empty() || stopwords.count(p.text)) continue;
    out.push_back(std::move(p.text));
  }
  return out;
}

std::vector<Entity> extract_entities(std::span<const std::string> tokens, const Gazetteer& gazetteer) {
  std::vector<Entity> out;
  if (gazetteer.empty()) return out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t len = gazetteer.longest_match(tokens, i);
    if (len == 0) {
      ++i;
      continue;
    }
    out.push_back({TokenList(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                             tokens.begin() + static_cast<std::ptrdiff_t>(i + len)),
                   0, i});
    i += len;
  }
  return out;
}

std::vector<Bigram> bigrams(std::span<const std::string> tokens) {
  std::vector<Bigram> out;
  if (tokens.size() < 2) return out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.emplace_back(tokens[i], tokens[i + 1]);
  return out;
}

TokenizedDoc tokenize_document(const CaseDocument& doc, const StopwordSet& stopwords, const Gazetteer& gazetteer) {
  TokenizedDoc out;
  out.doc_id = doc.id;
  out.paragraphs_tokens.reserve(doc.paragraphs.size());
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    TokenList toks = tokenize(doc.paragraphs[p], stopwords);
    for (auto& e : extract_entities(toks, gazetteer)) {
      e.paragraph = p;
      out.entities.push_back(std::move(e));
    }
    out.flat_tokens.insert(out.flat_tokens.end(), toks.begin(), toks.end());
    out.paragraphs_tokens.push_back(std::move(toks));
  }
  return out;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  StopwordSet out;
  io::for_each_line(path, [&](std::string_view line, std::size_t) {
    const auto b = line.find_first_not_of(" \t");
    const auto e = line.find_last_not_of(" \t");
    out.emplace(line.substr(b, e - b + 1));
  });
  return out;
}

std::filesystem::path default_stopwords_path() {
  return std::filesystem::path(COLIEE_DATA_DIR) / "stopwords-en-v1.txt";
}

Gazetteer load_gazetteer(const std::filesystem::path& path, const StopwordSet& stopwords) {
  Gazetteer g;
  io::for_each_line(path, [&](std::string_view line, std::size_t) { g.insert(tokenize(line, stopwords)); });
  return g;
}

std::vector<TokenList> capitalized_spans(std::string_view text, const StopwordSet& stopwords) {
  std::vector<TokenList> out;
  std::vector<std::string> run;
  auto flush = [&] {
    if (run.size() >= 2) {
      TokenList toks;
      for (const auto& w : run)
        if (!stopwords.count(w)) toks.push_back(w);
      if (toks.size() >= 2) out.push_back(std::move(toks));
    }
    run.clear();
  };
  for (auto& p : pieces(text)) {
    if (p.text.empty() || !p.capitalized) {
      flush();
      continue;
    }
    run.push_back(std::move(p.text));
    if (p.trailing_punct) flush();
  }
  flush();
  return out;
}

Gazetteer auto_gazetteer(std::span<const std::string> raw_texts, const StopwordSet& stopwords) {
  Gazetteer g;
  for (const auto& text : raw_texts)
    for (const auto& span : capitalized_spans(text, stopwords)) g.insert(span);
  return g;
}

}  // namespace coliee
