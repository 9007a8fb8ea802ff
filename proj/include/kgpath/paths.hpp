#pragma once
// Relation paths (abstract plans), reasoning paths (grounded walks), the
// plan text format, plan-constrained retrieval and shortest-path supervision.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgpath/kg_store.hpp"

namespace kgpath {

struct RelationPath {
  std::vector<RelationId> relations;

  std::size_t size() const { return relations.size(); }
  bool empty() const { return relations.empty(); }
  friend auto operator<=>(const RelationPath&, const RelationPath&) = default;
};

struct ReasoningStep {
  RelationId relation;
  EntityId entity;

  friend constexpr auto operator<=>(const ReasoningStep&, const ReasoningStep&) = default;
};

// e0 -r1-> e1 -r2-> ... -rl-> el
struct ReasoningPath {
  EntityId start;
  std::vector<ReasoningStep> steps;

  EntityId end() const { return steps.empty() ? start : steps.back().entity; }
  std::size_t size() const { return steps.size(); }
  RelationPath relation_path() const;

  friend auto operator<=>(const ReasoningPath&, const ReasoningPath&) = default;
};

// A plan as plain relation labels, before it is checked against a graph.
using LabelPath = std::vector<std::string>;

struct PlannedPath {
  LabelPath relations;
  std::optional<double> score;  // log-probability, <= 0

  friend bool operator==(const PlannedPath&, const PlannedPath&) = default;
};

// Ranked plans for one question, best first.
struct PlanSet {
  std::vector<PlannedPath> plans;

  std::size_t size() const { return plans.size(); }
  bool empty() const { return plans.empty(); }
  bool has_scores() const;
  friend bool operator==(const PlanSet&, const PlanSet&) = default;
};

LabelPath to_labels(const RelationPath& path, const KnowledgeGraph& g);
// ["e0", "r1", "e1", ...]
std::vector<std::string> to_labels(const ReasoningPath& path, const KnowledgeGraph& g);

// Every hop is an edge of g.
bool validates(const ReasoningPath& path, const KnowledgeGraph& g);

struct Grounding {
  std::optional<RelationPath> path;   // set iff every label is known
  std::vector<std::string> unknown;   // labels missing from the graph
};
Grounding ground_plan(const LabelPath& labels, const KnowledgeGraph& g);

// ---------------------------------------------------------------------------
// Plan text format: "<PATH> r1 <SEP> r2 <SEP> ... </PATH>"

inline constexpr std::string_view kPathOpen = "<PATH>";
inline constexpr std::string_view kPathSep = "<SEP>";
inline constexpr std::string_view kPathClose = "</PATH>";

std::string serialize_plan(const LabelPath& plan);
std::string serialize_plan(const RelationPath& plan, const KnowledgeGraph& g);

// First well-delimited <PATH>...</PATH> span in arbitrary text, names trimmed.
// nullopt when no such span exists or a relation name is blank.
std::optional<LabelPath> parse_plan_labels(std::string_view text);

enum class PlanStatus { kGrounded, kUngrounded, kStructuralFailure };

struct PlanParse {
  PlanStatus status = PlanStatus::kStructuralFailure;
  LabelPath labels;
  std::optional<RelationPath> path;  // when grounded
  std::vector<std::string> unknown;  // when ungrounded
};
PlanParse parse_plan(std::string_view text, const KnowledgeGraph& g);

// ---------------------------------------------------------------------------
// Retrieval

struct RetrievalOptions {
  // Abort expansion once a frontier would exceed this many paths.
  std::size_t max_paths = 100000;
};

struct RetrievalResult {
  std::vector<ReasoningPath> paths;
  bool truncated = false;
};

// All walks of length |plan| that start at a question entity and whose i-th
// edge carries plan[i]. Entity revisits are allowed. Output is sorted and
// duplicate-free. Throws UngroundedPlanError if the plan holds a relation
// handle the graph does not know, ContractError for bad start handles.
RetrievalResult retrieve_reasoning_paths(const KnowledgeGraph& g,
                                         std::span<const EntityId> question_entities,
                                         const RelationPath& plan,
                                         const RetrievalOptions& options = {});
// Label-level convenience; grounds the plan first.
RetrievalResult retrieve_reasoning_paths(const KnowledgeGraph& g,
                                         std::span<const EntityId> question_entities,
                                         const LabelPath& plan,
                                         const RetrievalOptions& options = {});

// ---------------------------------------------------------------------------
// Shortest-path supervision

struct ShortestPathOptions {
  int max_len = 4;
  // Cap on distinct relation prefixes alive during enumeration.
  std::size_t max_prefixes = 100000;
};

struct ShortestPathResult {
  std::vector<RelationPath> paths;  // sorted by handle sequence
  std::optional<int> distance;      // nullopt when unreachable within max_len
  bool truncated = false;
};

// Relation sequences of every minimum-length walk from any question entity to
// any answer entity. The minimum is taken over all (question, answer) pairs.
ShortestPathResult shortest_relation_paths(const KnowledgeGraph& g,
                                           std::span<const EntityId> question_entities,
                                           std::span<const EntityId> answer_entities,
                                           const ShortestPathOptions& options = {});

}  // namespace kgpath
