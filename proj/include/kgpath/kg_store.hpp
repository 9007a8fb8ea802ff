#pragma once
// In-memory triple store.
//
// Entities and relations are interned into dense integer handles. Outgoing
// edges are kept in a CSR layout grouped by head, sorted by (relation, tail),
// so neighbors(h, r) is a binary search followed by a contiguous span.
// A reverse CSR (grouped by tail) serves backward distance queries.
//
// A KnowledgeGraph is immutable once built and safe to share across threads.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgpath {

template <typename Tag>
struct Handle {
  std::uint32_t value = 0;

  constexpr Handle() = default;
  constexpr explicit Handle(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(Handle, Handle) = default;
};

struct EntityTag;
struct RelationTag;
using EntityId = Handle<EntityTag>;
using RelationId = Handle<RelationTag>;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend constexpr auto operator<=>(const Triple&, const Triple&) = default;
};

// Bidirectional label <-> dense handle mapping.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view label);
  // Returns false if the label is unknown.
  bool find(std::string_view label, std::uint32_t& out) const;
  bool contains(std::string_view label) const;
  const std::string& label(std::uint32_t handle) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
  std::vector<std::string> labels_;
};

struct GraphStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t triples = 0;
};

struct LoadOptions {
  // Materialize (t, prefix + r, h) for every (h, r, t).
  bool add_inverse = false;
  std::string inverse_prefix = "~";
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  GraphStats stats() const;
  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t triple_count() const { return edge_tail_.size(); }

  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }

  const std::string& entity_label(EntityId e) const;
  const std::string& relation_label(RelationId r) const;
  std::optional<EntityId> find_entity(std::string_view label) const;
  std::optional<RelationId> find_relation(std::string_view label) const;

  bool valid(EntityId e) const { return e.value < entities_.size(); }
  bool valid(RelationId r) const { return r.value < relations_.size(); }

  // Tails t with (head, relation, t) in the graph, ascending.
  // Throws ContractError on invalid handles.
  std::span<const EntityId> neighbors(EntityId head, RelationId relation) const;

  // All outgoing edges of head, sorted by (relation, tail). The two spans
  // are parallel.
  std::span<const RelationId> out_relations(EntityId head) const;
  std::span<const EntityId> out_tails(EntityId head) const;
  // Distinct relations leaving head, ascending.
  std::vector<RelationId> relations_of(EntityId head) const;

  // Incoming edges of tail, sorted by (relation, head).
  std::span<const RelationId> in_relations(EntityId tail) const;
  std::span<const EntityId> in_heads(EntityId tail) const;

  bool contains(const Triple& t) const;
  // Every triple, ordered by (head, relation, tail) handle.
  std::vector<Triple> triples() const;

 private:
  friend class GraphBuilder;

  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<std::uint64_t> out_offsets_;  // entity_count + 1
  std::vector<RelationId> edge_relation_;
  std::vector<EntityId> edge_tail_;
  std::vector<std::uint64_t> in_offsets_;
  std::vector<RelationId> in_relation_;
  std::vector<EntityId> in_head_;
};

// Single-writer construction. Duplicate triples collapse at build().
class GraphBuilder {
 public:
  GraphBuilder() = default;
  explicit GraphBuilder(LoadOptions options) : options_(std::move(options)) {}

  void add(std::string_view head, std::string_view relation, std::string_view tail);
  // Registers an entity without edges (isolated nodes survive the build).
  EntityId add_entity(std::string_view label);
  KnowledgeGraph build() &&;

 private:
  LoadOptions options_;
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
};

// Tab-separated `head<TAB>relation<TAB>tail` per line, '#' comments and blank
// lines skipped. Gzip input is detected from its magic bytes. Malformed lines
// raise ParseError carrying the 1-based line number.
KnowledgeGraph load_graph(std::istream& in, const LoadOptions& options = {},
                          const std::string& source_name = "<stream>");
KnowledgeGraph load_graph_file(const std::filesystem::path& path,
                               const LoadOptions& options = {});
KnowledgeGraph load_graph_string(std::string_view text, const LoadOptions& options = {});

// Writes the triple set as TSV in (head, relation, tail) handle order.
void save_graph(const KnowledgeGraph& g, std::ostream& out);
void save_graph_file(const KnowledgeGraph& g, const std::filesystem::path& path);

// Every triple reachable by a forward walk of at most max_hops edges from a
// seed, re-interned into a fresh graph.
KnowledgeGraph extract_subgraph(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                                int max_hops);

}  // namespace kgpath
