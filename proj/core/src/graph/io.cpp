#include "whinpjf/graph/io.hpp"

#include <charconv>
#include <vector>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/manifest.hpp"

namespace whinpjf::graph {
namespace {

constexpr std::string_view kEdgeMagic = "WHINEDG1";

/// Calls fn(fields, line_no) for each non-empty line.
template <typename Fn>
void for_each_row(std::string_view text, const std::string& file, std::size_t expected, Fn&& fn) {
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != expected) {
      throw ParseError(file, line_no,
                       "expected " + std::to_string(expected) + " tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    fn(fields, line_no);
  }
}

std::uint32_t parse_id(std::string_view s, const std::string& file, std::size_t line,
                       std::string_view what) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(file, line, "invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

void parse_entities(StoreBuilder& b, std::string_view text, const std::string& file) {
  for_each_row(text, file, 3, [&](const auto& f, std::size_t line) {
    const auto kind = parse_entity_kind(f[0]);
    if (!kind) throw ParseError(file, line, "unknown entity kind '" + std::string(f[0]) + "'");
    b.add_entity(*kind, parse_id(f[1], file, line, "id"), unescape_field(f[2], file, line));
  });
}

void parse_relations(StoreBuilder& b, std::string_view text, const std::string& file) {
  for_each_row(text, file, 3, [&](const auto& f, std::size_t line) {
    const auto rel = parse_relation(f[0]);
    if (!rel || info(*rel).metapath) {
      throw ParseError(file, line, "unknown natural relation '" + std::string(f[0]) + "'");
    }
    b.add_edge(*rel, parse_id(f[1], file, line, "source id"),
               parse_id(f[2], file, line, "destination id"));
  });
}

void parse_pairs(StoreBuilder& b, std::string_view text, const std::string& file) {
  for_each_row(text, file, 3, [&](const auto& f, std::size_t line) {
    const std::uint32_t label = parse_id(f[2], file, line, "label");
    if (label > 1) throw ParseError(file, line, "label must be 0 or 1");
    b.add_pair(parse_id(f[0], file, line, "member id"), parse_id(f[1], file, line, "job id"),
               static_cast<std::uint8_t>(label));
  });
}

std::string entities_text(const WhinStore& store) {
  std::string out;
  for (EntityKind kind : kAllEntityKinds) {
    for (std::uint32_t id = 0; id < store.count(kind); ++id) {
      out += to_string(kind);
      out += '\t';
      out += std::to_string(id);
      out += '\t';
      out += escape_field(store.text({kind, id}));
      out += '\n';
    }
  }
  return out;
}

std::string pairs_text(const WhinStore& store) {
  std::string out;
  for (const CandidatePair& p : store.pairs()) {
    out += std::to_string(p.member) + '\t' + std::to_string(p.job) + '\t' +
           std::to_string(p.label) + '\n';
  }
  return out;
}

std::string read_required(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DependencyError("missing file " + path.string());
  return binary::read_text(path);
}

}  // namespace

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text, const std::string& file, std::size_t line) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (i + 1 == text.size()) throw ParseError(file, line, "dangling backslash");
    switch (text[++i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      default: throw ParseError(file, line, std::string("unknown escape \\") + text[i]);
    }
  }
  return out;
}

WhinStore ingest_text(std::string_view entities, std::string_view relations,
                      std::string_view pairs) {
  StoreBuilder b;
  parse_entities(b, entities, "entities.tsv");
  parse_relations(b, relations, "relations.tsv");
  parse_pairs(b, pairs, "pairs.tsv");
  return b.build();
}

WhinStore ingest(const std::filesystem::path& entities, const std::filesystem::path& relations,
                 const std::filesystem::path& pairs) {
  StoreBuilder b;
  parse_entities(b, read_required(entities), entities.string());
  parse_relations(b, read_required(relations), relations.string());
  parse_pairs(b, read_required(pairs), pairs.string());
  return b.build();
}

WhinStore read_tsv_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DependencyError("missing data directory " + dir.string());
  return ingest(dir / "entities.tsv", dir / "relations.tsv", dir / "pairs.tsv");
}

void write_tsv(const WhinStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  binary::write_text(dir / "entities.tsv", entities_text(store));
  std::string rel;
  for (Relation r : natural_relations()) {
    for (const auto& [s, d] : store.edges(r)) {
      rel += std::string(to_string(r)) + '\t' + std::to_string(s) + '\t' + std::to_string(d) + '\n';
    }
  }
  binary::write_text(dir / "relations.tsv", rel);
  binary::write_text(dir / "pairs.tsv", pairs_text(store));
}

void save_store(const WhinStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.set("format", "whin-store");
  m.set("format_version", std::uint64_t{kStoreFormatVersion});
  for (EntityKind kind : kAllEntityKinds) {
    m.set("count." + std::string(to_string(kind)), std::uint64_t{store.count(kind)});
  }
  std::string vocab;
  for (Relation r : all_relations()) {
    if (!vocab.empty()) vocab += ',';
    vocab += to_string(r);
  }
  m.set("relations", vocab);
  for (Relation r : all_relations()) {
    m.set("edges." + std::string(to_string(r)), std::uint64_t{store.edge_count(r)});
  }
  m.set("pairs", std::uint64_t{store.pairs().size()});
  m.set("metapaths.materialized", std::string(store.metapaths().materialized ? "1" : "0"));
  m.set("metapaths.cap", std::uint64_t{store.metapaths().cap});
  m.set("metapaths.seed", store.metapaths().seed);
  m.save(dir / "manifest.txt");

  binary::write_text(dir / "entities.tsv", entities_text(store));
  binary::write_text(dir / "pairs.tsv", pairs_text(store));
  for (Relation r : all_relations()) {
    const auto edges = store.edges(r);
    binary::Writer w;
    w.magic(kEdgeMagic);
    w.u32(static_cast<std::uint32_t>(edges.size()));
    for (const auto& [s, d] : edges) {
      w.u32(s);
      w.u32(d);
    }
    binary::write_file(dir / ("edges_" + std::string(to_string(r)) + ".bin"), w.bytes());
  }
}

WhinStore load_store(const std::filesystem::path& dir) {
  const Manifest m = Manifest::load(dir / "manifest.txt");
  if (m.get("format") != "whin-store") throw FormatError(dir.string() + ": not a store directory");
  if (m.get_u64("format_version") != kStoreFormatVersion) {
    throw FormatError(dir.string() + ": unsupported store format version " +
                      m.get("format_version"));
  }
  std::string vocab;
  for (Relation r : all_relations()) {
    if (!vocab.empty()) vocab += ',';
    vocab += to_string(r);
  }
  if (m.get("relations") != vocab) {
    throw FormatError(dir.string() + ": relation vocabulary mismatch: " + m.get("relations"));
  }

  StoreBuilder b;
  const auto entities_path = dir / "entities.tsv";
  parse_entities(b, read_required(entities_path), entities_path.string());
  const auto pairs_path = dir / "pairs.tsv";
  parse_pairs(b, read_required(pairs_path), pairs_path.string());
  for (Relation r : all_relations()) {
    const auto path = dir / ("edges_" + std::string(to_string(r)) + ".bin");
    if (!std::filesystem::exists(path)) throw DependencyError("missing file " + path.string());
    binary::Reader in(binary::read_file(path), path.string());
    in.expect_magic(kEdgeMagic);
    const std::uint32_t n = in.u32();
    if (n != m.get_u64("edges." + std::string(to_string(r)))) {
      throw FormatError(path.string() + ": edge count disagrees with manifest");
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t s = in.u32();
      b.add_edge(r, s, in.u32());
    }
    in.expect_end();
  }
  MetapathSettings settings;
  settings.materialized = m.get("metapaths.materialized") == "1";
  settings.cap = static_cast<std::uint32_t>(m.get_u64("metapaths.cap"));
  settings.seed = m.get_u64("metapaths.seed");
  b.set_metapath_settings(settings);
  WhinStore store = b.build();
  for (EntityKind kind : kAllEntityKinds) {
    if (store.count(kind) != m.get_u64("count." + std::string(to_string(kind)))) {
      throw FormatError(dir.string() + ": entity count mismatch for " + std::string(to_string(kind)));
    }
  }
  return store;
}

}  // namespace whinpjf::graph
