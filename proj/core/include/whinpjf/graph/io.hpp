#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "whinpjf/graph/store.hpp"

namespace whinpjf::graph {

inline constexpr std::uint32_t kStoreFormatVersion = 1;

/// Escapes backslash, tab and newline as \\, \t and \n.
std::string escape_field(std::string_view text);
/// Inverse of escape_field; unknown escapes raise ParseError.
std::string unescape_field(std::string_view text, const std::string& file, std::size_t line);

/// Parses the three TSV inputs (entities, natural relations, candidate
/// pairs). Metapaths are not materialized.
WhinStore ingest(const std::filesystem::path& entities, const std::filesystem::path& relations,
                 const std::filesystem::path& pairs);

/// Same as ingest() over in-memory file contents.
WhinStore ingest_text(std::string_view entities, std::string_view relations,
                      std::string_view pairs);

/// Writes entities.tsv, relations.tsv (natural relations only) and pairs.tsv.
void write_tsv(const WhinStore& store, const std::filesystem::path& dir);

/// Reads a dataset directory holding entities.tsv, relations.tsv, pairs.tsv.
WhinStore read_tsv_dir(const std::filesystem::path& dir);

/// Binary store directory: manifest.txt, entities.tsv, pairs.tsv and one
/// edges_<relation>.bin per relation (including metapaths).
void save_store(const WhinStore& store, const std::filesystem::path& dir);
WhinStore load_store(const std::filesystem::path& dir);

}  // namespace whinpjf::graph
