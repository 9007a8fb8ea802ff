#include "kgpath/planning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kgpath/errors.hpp"

namespace kgpath {

ResolvedQuestion resolve(const QAInstance& qa, const KnowledgeGraph& g) {
  ResolvedQuestion out;
  auto map_labels = [&](const std::vector<std::string>& labels, std::vector<EntityId>& dest) {
    for (const auto& label : labels) {
      if (auto e = g.find_entity(label)) {
        dest.push_back(*e);
      } else {
        ++out.unresolved;
      }
    }
    std::sort(dest.begin(), dest.end());
    dest.erase(std::unique(dest.begin(), dest.end()), dest.end());
  };
  map_labels(qa.question_entities, out.question_entities);
  map_labels(qa.answer_entities, out.answer_entities);
  return out;
}

std::string fill_template(std::string_view text,
                          std::span<const std::pair<std::string_view, std::string_view>> slots) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t best = std::string_view::npos;
    const std::pair<std::string_view, std::string_view>* hit = nullptr;
    for (const auto& slot : slots) {
      const auto at = text.find(slot.first, pos);
      if (at < best) {
        best = at;
        hit = &slot;
      }
    }
    if (hit == nullptr) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, best - pos));
    out.append(hit->second);
    pos = best + hit->first.size();
  }
  return out;
}

std::string build_planning_prompt(std::string_view question) {
  const std::pair<std::string_view, std::string_view> slots[] = {{"<Question>", question}};
  return fill_template(kPlanningTemplate, slots);
}

void rank_plans(std::vector<LabelPath>& plans) {
  std::sort(plans.begin(), plans.end(), [](const LabelPath& a, const LabelPath& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
}

GoldPlans gold_plans(const KnowledgeGraph& g, const ResolvedQuestion& q,
                     const ShortestPathOptions& options, std::size_t cap) {
  GoldPlans out;
  if (q.question_entities.empty() || q.answer_entities.empty()) return out;
  auto sp = shortest_relation_paths(g, q.question_entities, q.answer_entities, options);
  out.distance = sp.distance;
  out.truncated = sp.truncated;
  out.total = sp.paths.size();
  out.plans.reserve(sp.paths.size());
  for (const auto& p : sp.paths) out.plans.push_back(to_labels(p, g));
  rank_plans(out.plans);
  if (cap > 0 && out.plans.size() > cap) out.plans.resize(cap);
  return out;
}

PlanSet OraclePlanner::plan(const QAInstance& qa, std::size_t k) const {
  PlanSet out;
  if (k == 0) return out;
  const auto gold = gold_plans(graph_, resolve(qa, graph_), options_, k);
  for (const auto& p : gold.plans) out.plans.push_back({p, std::nullopt});
  return out;
}

PlanSet FilePlanner::plan(const QAInstance& qa, std::size_t k) const {
  auto it = plans_.find(qa.id);
  if (it == plans_.end()) return {};
  PlanSet out = it->second;
  if (out.plans.size() > k) out.plans.resize(k);
  return out;
}

PlanSet LlmPlanner::plan(const QAInstance& qa, std::size_t k) const {
  PlanSet out;
  if (k == 0) return out;
  const std::vector<Message> messages = {{"user", build_planning_prompt(qa.question)}};

  // One request for k candidates; endpoints that ignore n get topped up with
  // single-candidate requests.
  std::vector<Candidate> candidates = client_.chat(messages, static_cast<int>(k)).candidates;
  for (std::size_t extra = candidates.size(); extra < k; ++extra) {
    auto more = client_.chat(messages, 1).candidates;
    candidates.insert(candidates.end(), more.begin(), more.end());
  }

  std::vector<PlannedPath> parsed;
  for (const auto& c : candidates) {
    auto labels = parse_plan_labels(c.text);
    if (!labels) {
      ++structural_failures_;
      continue;
    }
    parsed.push_back({std::move(*labels), c.score});
  }
  const bool scored =
      !parsed.empty() && std::all_of(parsed.begin(), parsed.end(),
                                     [](const PlannedPath& p) { return p.score.has_value(); });
  if (scored) {
    std::stable_sort(parsed.begin(), parsed.end(),
                     [](const PlannedPath& a, const PlannedPath& b) { return *a.score > *b.score; });
  }
  std::set<LabelPath> seen;
  for (auto& p : parsed) {
    if (!seen.insert(p.relations).second) continue;
    out.plans.push_back(std::move(p));
    if (out.plans.size() == k) break;
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

PlanSet RandomPlanner::plan(const QAInstance& qa, std::size_t k) const {
  PlanSet out;
  const auto n_rel = graph_.relation_count();
  if (k == 0 || n_rel == 0 || max_len_ < 1) return out;
  std::mt19937_64 rng(seed_ ^ fnv1a64(qa.id));
  std::set<LabelPath> seen;
  // Bounded attempts so tiny vocabularies cannot loop forever on duplicates.
  for (std::size_t attempt = 0; attempt < 16 * k && out.plans.size() < k; ++attempt) {
    const auto len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_len_));
    LabelPath p;
    for (int i = 0; i < len; ++i)
      p.push_back(graph_.relation_label(RelationId{static_cast<std::uint32_t>(rng() % n_rel)}));
    if (seen.insert(p).second) out.plans.push_back({std::move(p), std::nullopt});
  }
  return out;
}

double planning_loss(std::span<const RelationPath> gold,
                     const std::function<double(const RelationPath&)>& logprob) {
  if (gold.empty()) throw DomainError("planning_loss: empty gold plan set");
  double sum = 0.0;
  for (const auto& z : gold) {
    const double lp = logprob(z);
    if (!std::isfinite(lp) || lp > 0.0)
      throw DomainError("planning_loss: log-probability must be finite and <= 0");
    sum += lp;
  }
  return -sum / static_cast<double>(gold.size());
}

std::optional<double> planning_loss(std::span<const LabelPath> gold, const PlanSet& scored) {
  if (gold.empty()) throw DomainError("planning_loss: empty gold plan set");
  double sum = 0.0;
  for (const auto& z : gold) {
    auto it = std::find_if(scored.plans.begin(), scored.plans.end(),
                           [&](const PlannedPath& p) { return p.relations == z; });
    if (it == scored.plans.end() || !it->score) return std::nullopt;
    if (!std::isfinite(*it->score) || *it->score > 0.0)
      throw DomainError("planning_loss: log-probability must be finite and <= 0");
    sum += *it->score;
  }
  return -sum / static_cast<double>(gold.size());
}

}  // namespace kgpath
