#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coliee {

/// Pair representation plus the two-way softmax of the encoder's own head.
struct PairEncoding {
  std::vector<double> vec;
  std::array<double, 2> probs{0.5, 0.5};
};

/// Frozen sentence-pair encoder. Implementations must be pure: the same
/// pair always yields the same encoding, and concurrent calls are safe.
class EncoderProvider {
 public:
  virtual ~EncoderProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual PairEncoding encode_pair(std::string_view text_a, std::string_view text_b) const = 0;
};

/// Test stand-in for a transformer. Whitespace tokens of text_a and text_b
/// (lowercased ASCII) are hashed with seeded FNV-1a 64; the low bits pick a
/// bucket in [0, dim) and bit 63 picks the sign. The signed counts are
/// L2-normalized. probs = (1 − σ(Σ v), σ(Σ v)).
///
/// Two different tokens collide on bucket and sign with probability about
/// 1/(2·dim); disjoint token sets of size ≥ 1 yield equal vectors only when
/// every token collides, which is negligible for dim ≥ 16.
class ToyHashEncoder final : public EncoderProvider {
 public:
  ToyHashEncoder(std::size_t dim, std::uint64_t seed);
  std::size_t dim() const override { return dim_; }
  std::string name() const override;
  PairEncoding encode_pair(std::string_view text_a, std::string_view text_b) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

ToyHashEncoder toy_hash_encoder(std::size_t dim, std::uint64_t seed);

/// Throws ValidationError unless probs are non-negative, finite and sum to 1
/// within 1e-6, and vec is finite with the expected dimension.
void validate_encoding(const PairEncoding& enc, std::size_t dim);

/// A complete rows × cols grid of pair encodings for one (qid, cid).
struct EncodingGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<PairEncoding> cells;  // row-major

  const PairEncoding& at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
};

/// Contents of an embeddings interchange file.
///
/// Header: {"dim":d,"encoder":name[,"index":[{"qid","cid","rows","cols"},...]]}
/// Cells:  {"qid","cid","i","j","vec":[d reals],"probs":[2 reals]} (zero-based)
///
/// When the header carries an index, every listed grid must be complete and
/// no cell may fall outside it; otherwise each pair's grid is inferred from
/// its largest i and j and must still be complete.
struct EmbeddingStore {
  std::size_t dim = 0;
  std::string encoder;
  std::map<std::pair<std::string, std::string>, EncodingGrid> grids;

  const EncodingGrid* find(const std::string& qid, const std::string& cid) const;
};

EmbeddingStore load_embeddings(const std::filesystem::path& path);
std::string serialize(const EmbeddingStore& store);

}  // namespace coliee
