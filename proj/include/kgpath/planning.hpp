#pragma once
// Planners produce ranked relation-path plans for a question.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgpath/kg_store.hpp"
#include "kgpath/llm_client.hpp"
#include "kgpath/paths.hpp"

namespace kgpath {

struct QAInstance {
  std::string id;
  std::string question;
  std::vector<std::string> question_entities;
  std::vector<std::string> answer_entities;
  std::optional<int> hop_count;
};

// Entity labels mapped onto graph handles; unknown labels are counted.
struct ResolvedQuestion {
  std::vector<EntityId> question_entities;
  std::vector<EntityId> answer_entities;
  std::size_t unresolved = 0;
};
ResolvedQuestion resolve(const QAInstance& qa, const KnowledgeGraph& g);

inline constexpr std::string_view kPlanningTemplate =
    "Please generate a valid relation path that can be helpful for answering the following "
    "question: <Question>";

std::string build_planning_prompt(std::string_view question);

// Replaces each placeholder occurring in `text` once per occurrence, scanning
// left to right. Substituted values are never rescanned.
std::string fill_template(std::string_view text,
                          std::span<const std::pair<std::string_view, std::string_view>> slots);

// Orders plans by length, then by label sequence.
void rank_plans(std::vector<LabelPath>& plans);

struct GoldPlans {
  std::vector<LabelPath> plans;  // ranked, capped
  std::size_t total = 0;         // |Z*| before the cap
  std::optional<int> distance;
  bool truncated = false;
};

// Shortest relation paths from the question entities to the answers, ranked
// with rank_plans and cut to `cap` (0 = no cap).
GoldPlans gold_plans(const KnowledgeGraph& g, const ResolvedQuestion& q,
                     const ShortestPathOptions& options, std::size_t cap);

class Planner {
 public:
  virtual ~Planner() = default;
  // At most k plans, best first.
  virtual PlanSet plan(const QAInstance& qa, std::size_t k) const = 0;
  virtual std::string name() const = 0;
};

// Gold shortest paths; needs the answers, so only meaningful for evaluation.
class OraclePlanner final : public Planner {
 public:
  OraclePlanner(const KnowledgeGraph& g, ShortestPathOptions options = {})
      : graph_(g), options_(options) {}

  PlanSet plan(const QAInstance& qa, std::size_t k) const override;
  std::string name() const override { return "oracle"; }

 private:
  const KnowledgeGraph& graph_;
  ShortestPathOptions options_;
};

// Plans loaded ahead of time, keyed by question id.
class FilePlanner final : public Planner {
 public:
  explicit FilePlanner(std::unordered_map<std::string, PlanSet> plans)
      : plans_(std::move(plans)) {}

  PlanSet plan(const QAInstance& qa, std::size_t k) const override;
  std::string name() const override { return "file"; }

 private:
  std::unordered_map<std::string, PlanSet> plans_;
};

// Asks a chat endpoint for k candidates and parses each into a plan.
// Candidates without a <PATH>...</PATH> span are dropped and counted.
class LlmPlanner final : public Planner {
 public:
  explicit LlmPlanner(ChatClient& client) : client_(client) {}

  PlanSet plan(const QAInstance& qa, std::size_t k) const override;
  std::string name() const override { return "llm"; }

  std::size_t structural_failures() const { return structural_failures_.load(); }

 private:
  ChatClient& client_;
  mutable std::atomic<std::size_t> structural_failures_{0};
};

// Uniform random relation sequences: a length drawn from [1, max_len], then
// each relation drawn from the vocabulary. Seeded per question id.
class RandomPlanner final : public Planner {
 public:
  RandomPlanner(const KnowledgeGraph& g, std::uint64_t seed, int max_len = 4)
      : graph_(g), seed_(seed), max_len_(max_len) {}

  PlanSet plan(const QAInstance& qa, std::size_t k) const override;
  std::string name() const override { return "random"; }

 private:
  const KnowledgeGraph& graph_;
  std::uint64_t seed_;
  int max_len_;
};

// -(1/|gold|) * sum of logprob(z) over the gold plans. Throws DomainError on an
// empty gold set or a log-probability that is not finite or is positive.
double planning_loss(std::span<const RelationPath> gold,
                     const std::function<double(const RelationPath&)>& logprob);

// Same loss using the scores a planner attached to its plans. nullopt if any
// gold plan is missing from the set or unscored.
std::optional<double> planning_loss(std::span<const LabelPath> gold, const PlanSet& scored);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace kgpath
