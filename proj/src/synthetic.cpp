#include "coliee/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "coliee/error.hpp"
#include "coliee/rng.hpp"

namespace coliee {
namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "pl"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
constexpr const char* kCodas[] = {"", "n", "r", "s", "l", "x", "m"};
constexpr const char* kGlue[] = {"the", "of", "and", "to", "in", "that", "was", "by", "for", "with", "on", "which"};

struct Theme {
  std::vector<std::string> words;
  std::vector<std::string> entity;  // capitalized surface words
};

class Generator {
 public:
  Generator(std::uint64_t seed, const StopwordSet& stopwords) : rng_(seed), stopwords_(stopwords) {}

  std::string fresh_word(std::size_t syllables) {
    for (;;) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng_.bounded(std::size(kOnsets))];
        w += kVowels[rng_.bounded(std::size(kVowels))];
        w += kCodas[rng_.bounded(std::size(kCodas))];
      }
      if (!stopwords_.count(w) && used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> common(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(fresh_word(2));
    return out;
  }

  Theme theme() {
    Theme t;
    for (int i = 0; i < 10; ++i) t.words.push_back(fresh_word(3));
    for (int i = 0; i < 2; ++i) {
      std::string w = fresh_word(2);
      w[0] = static_cast<char>(w[0] - 'a' + 'A');
      t.entity.push_back(w);
    }
    t.entity.push_back(rng_.bounded(2) ? "Tribunal" : "Board");
    return t;
  }

  std::size_t range(std::size_t lo, std::size_t hi) {
    return lo + rng_.bounded(static_cast<std::uint32_t>(hi - lo + 1));
  }

  double uniform() { return rng_.uniform(); }

  /// A sentence of common words (Zipf-like pick) with glue stopwords, an
  /// optional entity mention, and theme words injected at `theme_rate`.
  std::string sentence(const std::vector<std::string>& vocab, const Theme* theme, double theme_rate,
                       bool mention_entity) {
    const std::size_t len = range(8, 16);
    std::string s;
    auto add = [&](const std::string& w) {
      if (!s.empty()) s.push_back(' ');
      s += w;
    };
    const std::size_t entity_at = mention_entity ? range(0, len - 1) : len;
    for (std::size_t i = 0; i < len; ++i) {
      if (i == entity_at) {
        for (const auto& w : theme->entity) add(w);
        if (rng_.bounded(2)) s += ",";
        continue;
      }
      const double u = uniform();
      if (theme && u < theme_rate) {
        // theme words come in adjacent pairs often enough to plant bigrams
        const std::size_t k = rng_.bounded(static_cast<std::uint32_t>(theme->words.size() - 1));
        add(theme->words[k]);
        if (rng_.bounded(2)) add(theme->words[k + 1]);
      } else if (u < theme_rate + 0.25) {
        add(kGlue[rng_.bounded(std::size(kGlue))]);
      } else {
        const double z = uniform();
        add(vocab[static_cast<std::size_t>(z * z * static_cast<double>(vocab.size()))]);
      }
    }
    if (rng_.bounded(4) == 0) s += ",";
    return s + ".";
  }

  std::string paragraph(const std::vector<std::string>& vocab, const Theme* theme, double theme_rate,
                        double entity_rate) {
    const std::size_t n = range(2, 4);
    std::string p;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) p.push_back(' ');
      const bool mention = theme && uniform() < entity_rate;
      p += sentence(vocab, theme, theme_rate, mention);
    }
    return p;
  }

  Pcg32& rng() { return rng_; }

 private:
  Pcg32 rng_;
  const StopwordSet& stopwords_;
  std::set<std::string> used_;
};

std::string make_id(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, n);
  return buf;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec, const StopwordSet& stopwords) {
  if (spec.candidates < 1 || spec.min_relevant < 1 || spec.min_relevant > spec.max_relevant ||
      spec.max_relevant > spec.candidates)
    throw Error("invalid synthetic relevance bounds");
  if (spec.min_paragraphs < 1 || spec.min_paragraphs > spec.max_paragraphs) throw Error("invalid paragraph bounds");

  Generator gen(spec.seed, stopwords);
  const auto vocab = gen.common(400);
  const std::size_t n_themes = std::max<std::size_t>(spec.queries, 1) + 8;
  std::vector<Theme> themes;
  for (std::size_t i = 0; i < n_themes; ++i) themes.push_back(gen.theme());

  SyntheticData data;
  data.retrieval.header = CorpusHeader{"task1-corpus-v1", "synthetic", spec.candidates};
  std::size_t next_cid = 0;
  for (std::size_t q = 0; q < spec.queries; ++q) {
    RetrievalTopic topic;
    topic.query.id = make_id("q", q + 1);
    const Theme& own = themes[q];
    const std::size_t n_query_paras = gen.range(4, 8);
    for (std::size_t p = 0; p < n_query_paras; ++p)
      topic.query.paragraphs.push_back(gen.paragraph(vocab, &own, 0.12, 0.3));

    const std::size_t n_rel = gen.range(spec.min_relevant, spec.max_relevant);
    std::vector<bool> relevant(spec.candidates, false);
    for (std::size_t i = 0; i < n_rel; ++i) relevant[i] = true;
    for (std::size_t i = spec.candidates; i > 1; --i) {
      const std::size_t j = gen.rng().bounded(static_cast<std::uint32_t>(i));
      const bool tmp = relevant[i - 1];
      relevant[i - 1] = relevant[j];
      relevant[j] = tmp;
    }

    topic.relevant_ids.emplace();
    for (std::size_t c = 0; c < spec.candidates; ++c) {
      CaseDocument cand;
      cand.id = make_id("c", ++next_cid);
      const std::size_t n_paras = gen.range(3, 10);
      const Theme* theme = nullptr;
      double rate = 0.0;
      if (relevant[c]) {
        theme = &own;
        rate = 0.04 + 0.08 * gen.uniform();
      } else if (gen.uniform() < 0.3) {
        // distractor: a faint trace of the query theme
        theme = &own;
        rate = 0.01;
      } else {
        theme = &themes[spec.queries + gen.rng().bounded(static_cast<std::uint32_t>(n_themes - spec.queries))];
        rate = 0.06;
      }
      for (std::size_t p = 0; p < n_paras; ++p) {
        const bool themed = relevant[c] ? gen.uniform() < 0.6 : true;
        cand.paragraphs.push_back(gen.paragraph(vocab, themed ? theme : nullptr, rate, relevant[c] ? 0.25 : 0.05));
      }
      if (relevant[c]) topic.relevant_ids->insert(cand.id);
      topic.candidates.push_back(std::move(cand));
    }
    data.retrieval.topics.push_back(std::move(topic));
  }

  data.entailment.header = CorpusHeader{"task2-corpus-v1", "synthetic", std::nullopt};
  for (std::size_t q = 0; q < spec.entail_queries; ++q) {
    EntailmentTopic topic;
    topic.id = make_id("e", q + 1);
    const Theme& own = themes[q % n_themes];
    topic.fragment = gen.sentence(vocab, &own, 0.3, false) + " " + gen.sentence(vocab, &own, 0.3, false);
    const std::size_t n = gen.range(spec.min_paragraphs, spec.max_paragraphs);
    const std::size_t n_ent = gen.uniform() < 0.85 ? 1 : 2;
    std::set<std::size_t> entailing;
    while (entailing.size() < n_ent) entailing.insert(gen.range(1, n));
    for (std::size_t p = 1; p <= n; ++p) {
      if (entailing.count(p)) {
        topic.paragraphs.push_back(gen.paragraph(vocab, &own, 0.2, 0.2));
      } else {
        const Theme* other = &themes[(q + 1 + gen.rng().bounded(static_cast<std::uint32_t>(n_themes - 1))) % n_themes];
        topic.paragraphs.push_back(gen.paragraph(vocab, gen.uniform() < 0.3 ? &own : other, 0.03, 0.05));
      }
    }
    topic.entailing_idx = entailing;
    data.entailment.topics.push_back(std::move(topic));
  }
  validate(data.retrieval);
  validate(data.entailment);
  return data;
}

}  // namespace coliee
