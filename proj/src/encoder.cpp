#include "coliee/encoder.hpp"

#include <cmath>
#include <set>

#include "coliee/error.hpp"
#include "coliee/io.hpp"

namespace coliee {
namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  // final avalanche so that bucket and sign bits are well mixed
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

void add_tokens(std::string_view text, std::vector<double>& v, std::uint64_t seed) {
  std::size_t i = 0;
  std::string tok;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    tok.clear();
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
      char c = text[i++];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      tok.push_back(c);
    }
    if (tok.empty()) continue;
    const std::uint64_t h = fnv1a(tok, seed);
    v[h % v.size()] += (h >> 63) ? -1.0 : 1.0;
  }
}

}  // namespace

ToyHashEncoder::ToyHashEncoder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 2) throw Error("toy encoder dimension must be at least 2");
}

std::string ToyHashEncoder::name() const { return "toy-hash-" + std::to_string(dim_) + "-" + std::to_string(seed_); }

PairEncoding ToyHashEncoder::encode_pair(std::string_view text_a, std::string_view text_b) const {
  PairEncoding out;
  out.vec.assign(dim_, 0.0);
  add_tokens(text_a, out.vec, seed_);
  add_tokens(text_b, out.vec, seed_);
  double norm = 0.0;
  for (double x : out.vec) norm += x * x;
  norm = std::sqrt(norm);
  double sum = 0.0;
  if (norm > 0.0) {
    for (double& x : out.vec) {
      x /= norm;
      sum += x;
    }
  }
  const double p1 = 1.0 / (1.0 + std::exp(-sum));
  out.probs = {1.0 - p1, p1};
  return out;
}

ToyHashEncoder toy_hash_encoder(std::size_t dim, std::uint64_t seed) { return ToyHashEncoder(dim, seed); }

void validate_encoding(const PairEncoding& enc, std::size_t dim) {
  if (enc.vec.size() != dim)
    throw ValidationError("vector dimension " + std::to_string(enc.vec.size()) + " != " + std::to_string(dim));
  for (double x : enc.vec)
    if (!std::isfinite(x)) throw ValidationError("non-finite vector component");
  for (double p : enc.probs)
    if (!std::isfinite(p) || p < 0.0) throw ValidationError("probabilities must be finite and non-negative");
  if (std::abs(enc.probs[0] + enc.probs[1] - 1.0) > 1e-6) throw ValidationError("probabilities must sum to 1");
}

const EncodingGrid* EmbeddingStore::find(const std::string& qid, const std::string& cid) const {
  auto it = grids.find({qid, cid});
  return it == grids.end() ? nullptr : &it->second;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  EmbeddingStore store;
  bool have_header = false;
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> declared;
  bool indexed = false;
  std::map<std::pair<std::string, std::string>, std::map<std::pair<std::size_t, std::size_t>, PairEncoding>> cells;

  io::for_each_json(path, [&](const io::json& obj, std::size_t line) {
    if (!have_header) {
      const io::json& d = io::field(obj, "dim", line);
      if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) throw ParseError("header dim must be positive", line);
      store.dim = d.get<std::size_t>();
      store.encoder = io::string_field(obj, "encoder", line);
      if (obj.contains("index")) {
        indexed = true;
        for (const auto& e : obj["index"]) {
          const auto key = std::make_pair(io::string_field(e, "qid", line), io::string_field(e, "cid", line));
          declared[key] = {io::field(e, "rows", line).get<std::size_t>(), io::field(e, "cols", line).get<std::size_t>()};
        }
      }
      have_header = true;
      return;
    }
    const auto key = std::make_pair(io::string_field(obj, "qid", line), io::string_field(obj, "cid", line));
    const io::json& ji = io::field(obj, "i", line);
    const io::json& jj = io::field(obj, "j", line);
    if (!ji.is_number_unsigned() || !jj.is_number_unsigned()) throw ParseError("i and j must be non-negative integers", line);
    const auto i = ji.get<std::size_t>(), j = jj.get<std::size_t>();
    PairEncoding enc;
    enc.vec = io::real_list(obj, "vec", line);
    const auto probs = io::real_list(obj, "probs", line);
    if (probs.size() != 2) throw ParseError("probs must have 2 values", line);
    enc.probs = {probs[0], probs[1]};
    try {
      validate_encoding(enc, store.dim);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    if (indexed) {
      auto it = declared.find(key);
      if (it == declared.end() || i >= it->second.first || j >= it->second.second)
        throw ValidationError("line " + std::to_string(line) + ": cell outside the header index");
    }
    if (!cells[key].emplace(std::make_pair(i, j), std::move(enc)).second)
      throw ValidationError("line " + std::to_string(line) + ": duplicate cell");
  });
  if (!have_header) throw ParseError("embeddings file is empty", 0);

  if (indexed) {
    for (const auto& [key, shape] : declared) cells[key];
  }
  for (auto& [key, grid_cells] : cells) {
    std::size_t rows = 0, cols = 0;
    if (indexed) {
      std::tie(rows, cols) = declared.at(key);
    } else {
      for (const auto& [ij, _] : grid_cells) {
        rows = std::max(rows, ij.first + 1);
        cols = std::max(cols, ij.second + 1);
      }
    }
    EncodingGrid grid{rows, cols, {}};
    grid.cells.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        auto it = grid_cells.find({i, j});
        if (it == grid_cells.end())
          throw ValidationError("missing cell (" + key.first + ", " + key.second + ", " + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
        grid.cells.push_back(std::move(it->second));
      }
    }
    store.grids.emplace(key, std::move(grid));
  }
  return store;
}

std::string serialize(const EmbeddingStore& store) {
  io::json index = io::json::array();
  for (const auto& [key, grid] : store.grids)
    index.push_back({{"qid", key.first}, {"cid", key.second}, {"rows", grid.rows}, {"cols", grid.cols}});
  std::string out = io::json{{"dim", store.dim}, {"encoder", store.encoder}, {"index", index}}.dump() + "\n";
  for (const auto& [key, grid] : store.grids) {
    for (std::size_t i = 0; i < grid.rows; ++i) {
      for (std::size_t j = 0; j < grid.cols; ++j) {
        const auto& c = grid.at(i, j);
        io::json obj = {{"qid", key.first}, {"cid", key.second}, {"i", i}, {"j", j},
                        {"vec", c.vec}, {"probs", c.probs}};
        out += obj.dump() + "\n";
      }
    }
  }
  return out;
}

}  // namespace coliee
