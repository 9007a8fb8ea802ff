#include "kgpath/kg_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <tuple>

#include "kgpath/errors.hpp"

namespace kgpath {

std::uint32_t Vocabulary::intern(std::string_view label) {
  if (auto it = index_.find(label); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

bool Vocabulary::find(std::string_view label, std::uint32_t& out) const {
  auto it = index_.find(label);
  if (it == index_.end()) return false;
  out = it->second;
  return true;
}

bool Vocabulary::contains(std::string_view label) const {
  return index_.find(label) != index_.end();
}

const std::string& Vocabulary::label(std::uint32_t handle) const {
  if (handle >= labels_.size())
    throw ContractError("handle " + std::to_string(handle) + " out of range [0, " +
                        std::to_string(labels_.size()) + ")");
  return labels_[handle];
}

GraphStats KnowledgeGraph::stats() const {
  return {entities_.size(), relations_.size(), edge_tail_.size()};
}

const std::string& KnowledgeGraph::entity_label(EntityId e) const {
  return entities_.label(e.value);
}

const std::string& KnowledgeGraph::relation_label(RelationId r) const {
  return relations_.label(r.value);
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view label) const {
  std::uint32_t id;
  if (!entities_.find(label, id)) return std::nullopt;
  return EntityId{id};
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view label) const {
  std::uint32_t id;
  if (!relations_.find(label, id)) return std::nullopt;
  return RelationId{id};
}

namespace {

void check(const KnowledgeGraph& g, EntityId e) {
  if (!g.valid(e))
    throw ContractError("invalid entity handle " + std::to_string(e.value));
}

void check(const KnowledgeGraph& g, RelationId r) {
  if (!g.valid(r))
    throw ContractError("invalid relation handle " + std::to_string(r.value));
}

}  // namespace

std::span<const RelationId> KnowledgeGraph::out_relations(EntityId head) const {
  check(*this, head);
  const auto lo = out_offsets_[head.value];
  const auto hi = out_offsets_[head.value + 1];
  return {edge_relation_.data() + lo, static_cast<std::size_t>(hi - lo)};
}

std::span<const EntityId> KnowledgeGraph::out_tails(EntityId head) const {
  check(*this, head);
  const auto lo = out_offsets_[head.value];
  const auto hi = out_offsets_[head.value + 1];
  return {edge_tail_.data() + lo, static_cast<std::size_t>(hi - lo)};
}

std::span<const RelationId> KnowledgeGraph::in_relations(EntityId tail) const {
  check(*this, tail);
  const auto lo = in_offsets_[tail.value];
  const auto hi = in_offsets_[tail.value + 1];
  return {in_relation_.data() + lo, static_cast<std::size_t>(hi - lo)};
}

std::span<const EntityId> KnowledgeGraph::in_heads(EntityId tail) const {
  check(*this, tail);
  const auto lo = in_offsets_[tail.value];
  const auto hi = in_offsets_[tail.value + 1];
  return {in_head_.data() + lo, static_cast<std::size_t>(hi - lo)};
}

std::span<const EntityId> KnowledgeGraph::neighbors(EntityId head, RelationId relation) const {
  check(*this, head);
  check(*this, relation);
  const auto rels = out_relations(head);
  const auto [first, last] = std::equal_range(rels.begin(), rels.end(), relation);
  const auto base = out_offsets_[head.value];
  const auto lo = base + static_cast<std::uint64_t>(first - rels.begin());
  return {edge_tail_.data() + lo, static_cast<std::size_t>(last - first)};
}

std::vector<RelationId> KnowledgeGraph::relations_of(EntityId head) const {
  const auto rels = out_relations(head);
  std::vector<RelationId> out;
  std::unique_copy(rels.begin(), rels.end(), std::back_inserter(out));
  return out;
}

bool KnowledgeGraph::contains(const Triple& t) const {
  if (!valid(t.head) || !valid(t.relation) || !valid(t.tail)) return false;
  const auto tails = neighbors(t.head, t.relation);
  return std::binary_search(tails.begin(), tails.end(), t.tail);
}

std::vector<Triple> KnowledgeGraph::triples() const {
  std::vector<Triple> out;
  out.reserve(triple_count());
  for (std::uint32_t h = 0; h < entity_count(); ++h) {
    for (auto i = out_offsets_[h]; i < out_offsets_[h + 1]; ++i)
      out.push_back({EntityId{h}, edge_relation_[i], edge_tail_[i]});
  }
  return out;
}

void GraphBuilder::add(std::string_view head, std::string_view relation,
                       std::string_view tail) {
  const EntityId h{entities_.intern(head)};
  const RelationId r{relations_.intern(relation)};
  const EntityId t{entities_.intern(tail)};
  triples_.push_back({h, r, t});
  if (options_.add_inverse) {
    std::string inverse = options_.inverse_prefix;
    inverse.append(relation);
    triples_.push_back({t, RelationId{relations_.intern(inverse)}, h});
  }
}

EntityId GraphBuilder::add_entity(std::string_view label) {
  return EntityId{entities_.intern(label)};
}

KnowledgeGraph GraphBuilder::build() && {
  KnowledgeGraph g;
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

  const std::size_t n = entities_.size();
  g.out_offsets_.assign(n + 1, 0);
  g.edge_relation_.reserve(triples_.size());
  g.edge_tail_.reserve(triples_.size());
  for (const auto& t : triples_) {
    ++g.out_offsets_[t.head.value + 1];
    g.edge_relation_.push_back(t.relation);
    g.edge_tail_.push_back(t.tail);
  }
  for (std::size_t i = 0; i < n; ++i) g.out_offsets_[i + 1] += g.out_offsets_[i];

  // Reverse index, sorted by (tail, relation, head).
  std::sort(triples_.begin(), triples_.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.tail, a.relation, a.head) < std::tie(b.tail, b.relation, b.head);
  });
  g.in_offsets_.assign(n + 1, 0);
  g.in_relation_.reserve(triples_.size());
  g.in_head_.reserve(triples_.size());
  for (const auto& t : triples_) {
    ++g.in_offsets_[t.tail.value + 1];
    g.in_relation_.push_back(t.relation);
    g.in_head_.push_back(t.head);
  }
  for (std::size_t i = 0; i < n; ++i) g.in_offsets_[i + 1] += g.in_offsets_[i];

  g.entities_ = std::move(entities_);
  g.relations_ = std::move(relations_);
  triples_.clear();
  return g;
}

namespace {

bool is_gzip(std::string_view bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string gunzip(std::string_view compressed, const std::string& source) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw DataError(source + ": cannot initialise gzip decoder");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());

  std::string out;
  char buffer[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof(buffer);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw DataError(source + ": corrupt gzip stream");
    }
    out.append(buffer, sizeof(buffer) - zs.avail_out);
    // Concatenated gzip members.
    if (rc == Z_STREAM_END && zs.avail_in > 0) {
      inflateReset(&zs);
      rc = Z_OK;
    }
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw DataError(source + ": truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

KnowledgeGraph parse_tsv(std::string_view text, const LoadOptions& options,
                         const std::string& source) {
  GraphBuilder builder(options);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;

    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos)
      throw ParseError(source, line_no, "expected exactly 3 tab-separated fields");
    const auto head = line.substr(0, t1);
    const auto relation = line.substr(t1 + 1, t2 - t1 - 1);
    const auto tail = line.substr(t2 + 1);
    if (head.empty() || relation.empty() || tail.empty())
      throw ParseError(source, line_no, "empty field");
    builder.add(head, relation, tail);
  }
  return std::move(builder).build();
}

}  // namespace

KnowledgeGraph load_graph(std::istream& in, const LoadOptions& options,
                          const std::string& source_name) {
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw DataError(source_name + ": read failure");
  if (is_gzip(bytes)) bytes = gunzip(bytes, source_name);
  return parse_tsv(bytes, options, source_name);
}

KnowledgeGraph load_graph_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return load_graph(in, options, path.string());
}

KnowledgeGraph load_graph_string(std::string_view text, const LoadOptions& options) {
  std::istringstream in{std::string(text)};
  return load_graph(in, options);
}

void save_graph(const KnowledgeGraph& g, std::ostream& out) {
  // Label order, so the file does not depend on how handles were assigned.
  using Row = std::tuple<const std::string*, const std::string*, const std::string*>;
  std::vector<Row> rows;
  rows.reserve(g.triple_count());
  for (const auto& t : g.triples())
    rows.emplace_back(&g.entity_label(t.head), &g.relation_label(t.relation), &g.entity_label(t.tail));
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(*std::get<0>(a), *std::get<1>(a), *std::get<2>(a)) <
           std::tie(*std::get<0>(b), *std::get<1>(b), *std::get<2>(b));
  });
  for (const auto& [h, r, t] : rows) out << *h << '\t' << *r << '\t' << *t << '\n';
}

void save_graph_file(const KnowledgeGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  save_graph(g, out);
}

KnowledgeGraph extract_subgraph(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                                int max_hops) {
  if (seeds.empty()) throw ContractError("extract_subgraph: empty seed set");
  if (max_hops < 1) throw ContractError("extract_subgraph: max_hops must be >= 1");
  for (auto s : seeds) {
    if (!g.valid(s)) throw ContractError("unknown seed handle " + std::to_string(s.value));
  }

  // Heads at distance <= max_hops - 1 contribute all their out-edges.
  std::vector<int> dist(g.entity_count(), -1);
  std::vector<EntityId> frontier;
  for (auto s : seeds) {
    if (dist[s.value] < 0) {
      dist[s.value] = 0;
      frontier.push_back(s);
    }
  }
  std::vector<EntityId> heads = frontier;
  for (int depth = 1; depth < max_hops && !frontier.empty(); ++depth) {
    std::vector<EntityId> next;
    for (auto h : frontier) {
      for (auto t : g.out_tails(h)) {
        if (dist[t.value] < 0) {
          dist[t.value] = depth;
          next.push_back(t);
        }
      }
    }
    heads.insert(heads.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(heads.begin(), heads.end());

  GraphBuilder builder;
  for (auto s : seeds) builder.add_entity(g.entity_label(s));
  for (auto h : heads) {
    const auto rels = g.out_relations(h);
    const auto tails = g.out_tails(h);
    for (std::size_t i = 0; i < rels.size(); ++i)
      builder.add(g.entity_label(h), g.relation_label(rels[i]), g.entity_label(tails[i]));
  }
  return std::move(builder).build();
}

}  // namespace kgpath
