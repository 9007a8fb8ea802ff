#include "kgpath/paths.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

#include "kgpath/errors.hpp"

namespace kgpath {

RelationPath ReasoningPath::relation_path() const {
  RelationPath out;
  out.relations.reserve(steps.size());
  for (const auto& s : steps) out.relations.push_back(s.relation);
  return out;
}

bool PlanSet::has_scores() const {
  return !plans.empty() &&
         std::all_of(plans.begin(), plans.end(), [](const auto& p) { return p.score.has_value(); });
}

LabelPath to_labels(const RelationPath& path, const KnowledgeGraph& g) {
  LabelPath out;
  out.reserve(path.size());
  for (auto r : path.relations) out.push_back(g.relation_label(r));
  return out;
}

std::vector<std::string> to_labels(const ReasoningPath& path, const KnowledgeGraph& g) {
  std::vector<std::string> out;
  out.reserve(1 + 2 * path.size());
  out.push_back(g.entity_label(path.start));
  for (const auto& s : path.steps) {
    out.push_back(g.relation_label(s.relation));
    out.push_back(g.entity_label(s.entity));
  }
  return out;
}

bool validates(const ReasoningPath& path, const KnowledgeGraph& g) {
  if (!g.valid(path.start)) return false;
  EntityId at = path.start;
  for (const auto& s : path.steps) {
    if (!g.contains({at, s.relation, s.entity})) return false;
    at = s.entity;
  }
  return true;
}

Grounding ground_plan(const LabelPath& labels, const KnowledgeGraph& g) {
  Grounding out;
  RelationPath path;
  for (const auto& label : labels) {
    if (auto r = g.find_relation(label)) {
      path.relations.push_back(*r);
    } else {
      out.unknown.push_back(label);
    }
  }
  if (out.unknown.empty()) out.path = std::move(path);
  return out;
}

// ---------------------------------------------------------------------------

std::string serialize_plan(const LabelPath& plan) {
  std::string out(kPathOpen);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (i > 0) {
      out += ' ';
      out += kPathSep;
    }
    out += ' ';
    out += plan[i];
  }
  out += ' ';
  out += kPathClose;
  return out;
}

std::string serialize_plan(const RelationPath& plan, const KnowledgeGraph& g) {
  return serialize_plan(to_labels(plan, g));
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<LabelPath> parse_plan_labels(std::string_view text) {
  // The first </PATH> that has an opening tag before it; the nearest opening
  // tag wins so "<PATH> junk <PATH> a </PATH>" yields [a].
  std::size_t search_from = 0;
  std::size_t body_begin = std::string_view::npos;
  std::size_t body_end = std::string_view::npos;
  while (true) {
    const auto close = text.find(kPathClose, search_from);
    if (close == std::string_view::npos) return std::nullopt;
    const auto open = text.rfind(kPathOpen, close);
    if (open != std::string_view::npos && open >= search_from) {
      body_begin = open + kPathOpen.size();
      body_end = close;
      break;
    }
    search_from = close + kPathClose.size();
  }

  const auto body = trim(text.substr(body_begin, body_end - body_begin));
  LabelPath out;
  if (body.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto sep = body.find(kPathSep, pos);
    const auto name = trim(body.substr(pos, sep == std::string_view::npos ? sep : sep - pos));
    if (name.empty()) return std::nullopt;
    out.emplace_back(name);
    if (sep == std::string_view::npos) break;
    pos = sep + kPathSep.size();
  }
  return out;
}

PlanParse parse_plan(std::string_view text, const KnowledgeGraph& g) {
  PlanParse out;
  auto labels = parse_plan_labels(text);
  if (!labels) return out;
  out.labels = std::move(*labels);
  auto grounding = ground_plan(out.labels, g);
  if (grounding.path) {
    out.status = PlanStatus::kGrounded;
    out.path = std::move(grounding.path);
  } else {
    out.status = PlanStatus::kUngrounded;
    out.unknown = std::move(grounding.unknown);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<EntityId> sorted_unique(std::span<const EntityId> ids, const KnowledgeGraph& g) {
  std::vector<EntityId> out(ids.begin(), ids.end());
  for (auto e : out) {
    if (!g.valid(e)) throw ContractError("invalid entity handle " + std::to_string(e.value));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

RetrievalResult retrieve_reasoning_paths(const KnowledgeGraph& g,
                                         std::span<const EntityId> question_entities,
                                         const RelationPath& plan,
                                         const RetrievalOptions& options) {
  std::vector<std::string> unknown;
  for (auto r : plan.relations) {
    if (!g.valid(r)) unknown.push_back("#" + std::to_string(r.value));
  }
  if (!unknown.empty()) throw UngroundedPlanError(std::move(unknown));

  RetrievalResult result;
  // Level-synchronous form of the queue: each round extends every partial
  // path by one edge labelled with the next plan relation.
  std::vector<ReasoningPath> frontier;
  for (auto e : sorted_unique(question_entities, g)) frontier.push_back({e, {}});
  if (frontier.size() > options.max_paths) {
    frontier.resize(options.max_paths);
    result.truncated = true;
  }

  for (auto relation : plan.relations) {
    std::vector<ReasoningPath> next;
    for (const auto& partial : frontier) {
      for (auto tail : g.neighbors(partial.end(), relation)) {
        if (next.size() == options.max_paths) {
          result.truncated = true;
          break;
        }
        auto& extended = next.emplace_back(partial);
        extended.steps.push_back({relation, tail});
      }
      if (result.truncated) break;
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  result.paths = std::move(frontier);
  return result;
}

RetrievalResult retrieve_reasoning_paths(const KnowledgeGraph& g,
                                         std::span<const EntityId> question_entities,
                                         const LabelPath& plan,
                                         const RetrievalOptions& options) {
  auto grounding = ground_plan(plan, g);
  if (!grounding.path) throw UngroundedPlanError(std::move(grounding.unknown));
  return retrieve_reasoning_paths(g, question_entities, *grounding.path, options);
}

// ---------------------------------------------------------------------------

namespace {

// Per-thread BFS distances that reset in O(1) by bumping an epoch.
class DistanceMap {
 public:
  void reset(std::size_t n) {
    if (stamp_.size() < n) {
      stamp_.assign(n, 0);
      dist_.assign(n, 0);
      epoch_ = 0;
    }
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
  }
  bool seen(EntityId e) const { return stamp_[e.value] == epoch_; }
  int get(EntityId e) const { return seen(e) ? dist_[e.value] : -1; }
  void set(EntityId e, int d) {
    stamp_[e.value] = epoch_;
    dist_[e.value] = static_cast<std::int16_t>(d);
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int16_t> dist_;
  std::uint32_t epoch_ = 0;
};

struct PrefixGroup {
  std::vector<RelationId> prefix;
  std::vector<EntityId> ends;  // sorted, unique
};

}  // namespace

ShortestPathResult shortest_relation_paths(const KnowledgeGraph& g,
                                           std::span<const EntityId> question_entities,
                                           std::span<const EntityId> answer_entities,
                                           const ShortestPathOptions& options) {
  const auto sources = sorted_unique(question_entities, g);
  const auto targets = sorted_unique(answer_entities, g);
  if (sources.empty() || targets.empty())
    throw ContractError("shortest_relation_paths: empty entity set");
  if (options.max_len < 1) throw ContractError("shortest_relation_paths: max_len must be >= 1");

  ShortestPathResult result;
  std::vector<EntityId> common;
  std::set_intersection(sources.begin(), sources.end(), targets.begin(), targets.end(),
                        std::back_inserter(common));
  if (!common.empty()) {
    result.paths.push_back({});
    result.distance = 0;
    return result;
  }

  thread_local DistanceMap forward;
  thread_local DistanceMap backward;
  forward.reset(g.entity_count());
  backward.reset(g.entity_count());

  // Bidirectional BFS: grow whichever frontier is smaller until they meet.
  std::vector<EntityId> front_f = sources;
  std::vector<EntityId> front_b = targets;
  for (auto e : front_f) forward.set(e, 0);
  for (auto e : front_b) backward.set(e, 0);
  int depth_f = 0;
  int depth_b = 0;
  bool met = false;
  while (!met && depth_f + depth_b < options.max_len && !front_f.empty() && !front_b.empty()) {
    const bool grow_forward = front_f.size() <= front_b.size();
    std::vector<EntityId> next;
    if (grow_forward) {
      for (auto v : front_f) {
        for (auto t : g.out_tails(v)) {
          if (forward.seen(t)) continue;
          forward.set(t, depth_f + 1);
          next.push_back(t);
          met = met || backward.seen(t);
        }
      }
      ++depth_f;
      front_f = std::move(next);
    } else {
      for (auto v : front_b) {
        for (auto h : g.in_heads(v)) {
          if (backward.seen(h)) continue;
          backward.set(h, depth_b + 1);
          next.push_back(h);
          met = met || forward.seen(h);
        }
      }
      ++depth_b;
      front_b = std::move(next);
    }
  }
  if (!met) return result;

  const int d = depth_f + depth_b;
  result.distance = d;

  // A vertex at position i of a shortest walk has forward distance exactly i
  // and backward distance exactly d - i; each side is checked wherever its
  // distances are fully known.
  auto on_shortest_walk = [&](EntityId v, int position) {
    if (position <= depth_f && forward.get(v) != position) return false;
    if (d - position <= depth_b && backward.get(v) != d - position) return false;
    return true;
  };

  std::vector<PrefixGroup> groups;
  groups.push_back({{}, sources});
  for (int position = 1; position <= d; ++position) {
    std::vector<PrefixGroup> next_groups;
    for (const auto& group : groups) {
      std::map<RelationId, std::vector<EntityId>> children;
      for (auto v : group.ends) {
        const auto rels = g.out_relations(v);
        const auto tails = g.out_tails(v);
        for (std::size_t i = 0; i < rels.size(); ++i) {
          if (on_shortest_walk(tails[i], position)) children[rels[i]].push_back(tails[i]);
        }
      }
      for (auto& [relation, ends] : children) {
        if (next_groups.size() == options.max_prefixes) {
          result.truncated = true;
          break;
        }
        std::sort(ends.begin(), ends.end());
        ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
        auto& child = next_groups.emplace_back();
        child.prefix = group.prefix;
        child.prefix.push_back(relation);
        child.ends = std::move(ends);
      }
      if (result.truncated) break;
    }
    groups = std::move(next_groups);
  }

  for (auto& group : groups) result.paths.push_back({std::move(group.prefix)});
  std::sort(result.paths.begin(), result.paths.end());
  return result;
}

}  // namespace kgpath
