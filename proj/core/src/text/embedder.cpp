#include "whinpjf/text/embedder.hpp"

#include <cmath>
#include <sstream>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/log.hpp"
#include "whinpjf/common/random.hpp"

namespace whinpjf::text {
namespace {

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

void mean_into(const TokenSeq& tokens, const TokenEmbedder& embedder, std::span<float> out) {
  std::vector<double> acc(embedder.dim(), 0.0);
  std::vector<float> row(embedder.dim());
  for (const auto& t : tokens) {
    embedder.embed(t, row);
    for (std::size_t k = 0; k < row.size(); ++k) acc[k] += row[k];
  }
  const double n = tokens.empty() ? 1.0 : static_cast<double>(tokens.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<float>(acc[k] / n);
}

}  // namespace

TokenSeq tokenize(std::string_view text, std::size_t max_tokens) {
  TokenSeq out;
  std::string current;
  for (char c : text) {
    if (is_token_char(c)) {
      current += lower(c);
      continue;
    }
    if (!current.empty()) {
      if (out.size() == max_tokens) return out;
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty() && out.size() < max_tokens) out.push_back(std::move(current));
  return out;
}

HashedEmbedder::HashedEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed), scale_(static_cast<float>(1.0 / std::sqrt(static_cast<double>(dim)))) {
  if (dim == 0) throw ConfigError("embedding dim must be positive");
}

void HashedEmbedder::embed(std::string_view token, std::span<float> out) const {
  if (out.size() != dim_) throw DimensionError("hashed embedder: output span has wrong size");
  const std::uint64_t key = splitmix64(fnv1a64(token) ^ splitmix64(seed_));
  for (std::size_t k = 0; k < dim_; ++k) {
    const double u = static_cast<double>(splitmix64(key + k) >> 11) * 0x1.0p-53;
    out[k] = static_cast<float>(2.0 * u - 1.0) * scale_;
  }
}

FileEmbedder FileEmbedder::load(const std::filesystem::path& path, std::size_t dim) {
  if (!std::filesystem::exists(path)) throw IoError("missing vocabulary file " + path.string());
  FileEmbedder e;
  e.dim_ = dim;
  std::istringstream in(binary::read_text(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<float> row;
    float v;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) throw ParseError(path.string(), line_no, "non-numeric vector entry");
    if (row.size() != dim) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(dim) + " values, got " + std::to_string(row.size()));
    }
    e.rows_[token] = std::move(row);
  }
  return e;
}

void FileEmbedder::embed(std::string_view token, std::span<float> out) const {
  if (out.size() != dim_) throw DimensionError("file embedder: output span has wrong size");
  auto it = rows_.find(std::string(token));
  if (it == rows_.end()) it = rows_.find("<unk>");
  if (it == rows_.end()) {
    std::fill(out.begin(), out.end(), 0.0f);
    return;
  }
  std::copy(it->second.begin(), it->second.end(), out.begin());
}

std::unique_ptr<TokenEmbedder> make_embedder(const EmbedderConfig& cfg) {
  if (cfg.dim == 0) throw ConfigError("embedding dim must be positive");
  if (cfg.provider == Provider::file) {
    return std::make_unique<FileEmbedder>(FileEmbedder::load(cfg.vocab_file, cfg.dim));
  }
  return std::make_unique<HashedEmbedder>(cfg.dim, cfg.seed);
}

Matrix<float> token_vectors(const TokenSeq& tokens, const TokenEmbedder& embedder) {
  Matrix<float> out(tokens.size(), embedder.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) embedder.embed(tokens[i], out.row(i));
  return out;
}

std::vector<float> init_entity_embedding(const TokenSeq& tokens, const TokenEmbedder& embedder) {
  std::vector<float> out(embedder.dim(), 0.0f);
  if (tokens.empty()) {
    log::warn("empty_text", {{"action", "zero_embedding"}});
    return out;
  }
  mean_into(tokens, embedder, out);
  return out;
}

TextTable build_text_table(const graph::WhinStore& store, const TokenEmbedder& embedder,
                           std::size_t max_tokens) {
  TextTable table;
  table.dim = embedder.dim();
  std::size_t empty = 0;
  for (graph::EntityKind kind : graph::kAllEntityKinds) {
    const std::uint32_t n = store.count(kind);
    auto& toks = table.tokens[graph::index_of(kind)];
    auto& mean = table.mean[graph::index_of(kind)];
    toks.reserve(n);
    mean = Matrix<float>(n, embedder.dim());
    for (std::uint32_t id = 0; id < n; ++id) {
      const TokenSeq seq = tokenize(store.text({kind, id}), max_tokens);
      if (seq.empty()) ++empty;
      mean_into(seq, embedder, mean.row(id));
      toks.push_back(token_vectors(seq, embedder));
    }
  }
  if (empty > 0) log::warn("empty_text", {{"entities", empty}, {"action", "zero_embedding"}});
  return table;
}

}  // namespace whinpjf::text
