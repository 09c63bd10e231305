#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "whinpjf/autodiff/matrix.hpp"
#include "whinpjf/graph/store.hpp"

namespace whinpjf::text {

using ad::Matrix;
using TokenSeq = std::vector<std::string>;

inline constexpr std::size_t kDefaultMaxTokens = 128;

/// Lowercased runs of ASCII letters and digits, truncated to max_tokens.
TokenSeq tokenize(std::string_view text, std::size_t max_tokens = kDefaultMaxTokens);

enum class Provider { hashed, file };

struct EmbedderConfig {
  std::size_t dim = 32;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::uint64_t seed = 0;
  Provider provider = Provider::hashed;
  std::filesystem::path vocab_file;  ///< used by Provider::file
};

/// Maps a token to a fixed vector.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual std::size_t dim() const noexcept = 0;
  virtual void embed(std::string_view token, std::span<float> out) const = 0;
};

/// Feature hashing: the token's hash, mixed with the seed, expands to dim
/// values uniform in [-1, 1], scaled by 1/sqrt(dim).
class HashedEmbedder final : public TokenEmbedder {
 public:
  HashedEmbedder(std::size_t dim, std::uint64_t seed);
  std::size_t dim() const noexcept override { return dim_; }
  void embed(std::string_view token, std::span<float> out) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  float scale_;
};

/// Precomputed vectors, one `token v1 ... v_dim` per line. Unknown tokens map
/// to the `<unk>` row when the file has one, otherwise to zeros.
class FileEmbedder final : public TokenEmbedder {
 public:
  static FileEmbedder load(const std::filesystem::path& path, std::size_t dim);
  std::size_t dim() const noexcept override { return dim_; }
  void embed(std::string_view token, std::span<float> out) const override;
  std::size_t vocabulary_size() const noexcept { return rows_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<float>> rows_;
};

std::unique_ptr<TokenEmbedder> make_embedder(const EmbedderConfig& cfg);

/// len x dim matrix of token vectors c_i (0 x dim for an empty sequence).
Matrix<float> token_vectors(const TokenSeq& tokens, const TokenEmbedder& embedder);

/// Mean token vector; empty input gives the zero vector and logs a warning.
std::vector<float> init_entity_embedding(const TokenSeq& tokens, const TokenEmbedder& embedder);

/// Token matrices and mean-pooled initial features for every entity.
struct TextTable {
  std::size_t dim = 0;
  /// Per kind, one token matrix per entity.
  std::array<std::vector<Matrix<float>>, graph::kEntityKindCount> tokens;
  /// Per kind, count(kind) x dim matrix of mean token vectors.
  std::array<Matrix<float>, graph::kEntityKindCount> mean;

  const Matrix<float>& tokens_of(graph::EntityRef e) const {
    return tokens[graph::index_of(e.kind)][e.id];
  }
  std::span<const float> mean_of(graph::EntityRef e) const {
    return mean[graph::index_of(e.kind)].row(e.id);
  }
};

TextTable build_text_table(const graph::WhinStore& store, const TokenEmbedder& embedder,
                           std::size_t max_tokens = kDefaultMaxTokens);

}  // namespace whinpjf::text
