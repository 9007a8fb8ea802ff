#include "kgpath/dataset.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "kgpath/parallel.hpp"
#include "kgpath/reasoning.hpp"

namespace kgpath {

namespace {

enum class Outcome { kKept, kUnresolved, kUnreachable };

struct PerQuestion {
  Outcome outcome = Outcome::kUnresolved;
  std::vector<InstructionRecord> records;
  RetainedQuestion summary;
  bool truncated = false;
};

struct Supervision {
  Outcome outcome = Outcome::kUnresolved;
  ResolvedQuestion resolved;
  GoldPlans gold;
};

Supervision supervise(const QAInstance& qa, const KnowledgeGraph& g, const DatasetOptions& options) {
  Supervision s;
  s.resolved = resolve(qa, g);
  if (s.resolved.question_entities.empty() || s.resolved.answer_entities.empty()) return s;
  ShortestPathOptions sp;
  sp.max_len = options.max_len;
  s.gold = gold_plans(g, s.resolved, sp, options.plan_cap);
  s.outcome = s.gold.plans.empty() ? Outcome::kUnreachable : Outcome::kKept;
  return s;
}

RetainedQuestion summarize(const QAInstance& qa, const Supervision& s) {
  std::vector<std::string> answers = qa.answer_entities;
  std::sort(answers.begin(), answers.end());
  answers.erase(std::unique(answers.begin(), answers.end()), answers.end());
  return {qa.id, answers.size(), s.gold.distance.value_or(0), s.gold.plans.size()};
}

template <typename Build>
DatasetBuild run(std::span<const QAInstance> split, const DatasetOptions& options,
                 Build&& build_one) {
  std::vector<PerQuestion> results(split.size());
  parallel_for(split.size(), options.parallelism, [&](std::size_t i) {
    results[i] = build_one(split[i]);
  });

  DatasetBuild out;
  out.questions = split.size();
  for (auto& r : results) {
    switch (r.outcome) {
      case Outcome::kUnresolved:
        ++out.skipped_unresolved;
        break;
      case Outcome::kUnreachable:
        ++out.skipped_unreachable;
        break;
      case Outcome::kKept:
        out.retained.push_back(std::move(r.summary));
        for (auto& rec : r.records) out.records.push_back(std::move(rec));
        break;
    }
    if (r.truncated) ++out.truncated;
  }
  return out;
}

}  // namespace

std::string reasoning_instruction() {
  const auto text = std::string_view(kReasoningTemplate);
  return std::string(text.substr(0, text.find("\n")));
}

DatasetBuild build_planning_instances(std::span<const QAInstance> split, const KnowledgeGraph& g,
                                      const DatasetOptions& options) {
  return run(split, options, [&](const QAInstance& qa) {
    PerQuestion r;
    const auto s = supervise(qa, g, options);
    r.outcome = s.outcome;
    r.truncated = s.gold.truncated;
    if (s.outcome != Outcome::kKept) return r;
    r.summary = summarize(qa, s);
    const auto instruction = build_planning_prompt(qa.question);
    for (const auto& plan : s.gold.plans)
      r.records.push_back({instruction, qa.question, serialize_plan(plan)});
    return r;
  });
}

DatasetBuild build_reasoning_instances(std::span<const QAInstance> split, const KnowledgeGraph& g,
                                       const DatasetOptions& options) {
  return run(split, options, [&](const QAInstance& qa) {
    PerQuestion r;
    const auto s = supervise(qa, g, options);
    r.outcome = s.outcome;
    r.truncated = s.gold.truncated;
    if (s.outcome != Outcome::kKept) return r;
    r.summary = summarize(qa, s);

    const auto& answers = s.resolved.answer_entities;
    std::vector<ReasoningPath> gold_paths;
    for (const auto& plan : s.gold.plans) {
      auto retrieved =
          retrieve_reasoning_paths(g, s.resolved.question_entities, plan, options.retrieval);
      r.truncated = r.truncated || retrieved.truncated;
      for (auto& p : retrieved.paths) {
        if (std::binary_search(answers.begin(), answers.end(), p.end()))
          gold_paths.push_back(std::move(p));
      }
    }
    const auto block = format_reasoning_paths(gold_paths, g);
    std::string input = "Reasoning Paths:\n" + block + "\n\nQuestion:\n" + qa.question;

    std::vector<std::string> labels = qa.answer_entities;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::string output;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0) output += '\n';
      output += labels[i];
    }
    r.records.push_back({reasoning_instruction(), std::move(input), std::move(output)});
    return r;
  });
}

std::string answer_bucket(std::size_t n) {
  if (n == 0) return "0";
  if (n == 1) return "1";
  if (n <= 4) return "2-4";
  if (n <= 9) return "5-9";
  return ">=10";
}

std::string hop_bucket(int hops) {
  if (hops <= 0) return "0";
  if (hops == 1) return "1";
  if (hops == 2) return "2";
  return ">=3";
}

DatasetStats dataset_stats(const DatasetBuild& planning, const DatasetBuild& reasoning) {
  DatasetStats s;
  for (const char* b : {"1", "2-4", "5-9", ">=10"}) s.answer_histogram[b] = 0;
  for (const char* b : {"1", "2", ">=3"}) s.hop_histogram[b] = 0;
  s.planning_records = planning.records.size();
  s.reasoning_records = reasoning.records.size();
  s.questions = std::max(planning.questions, reasoning.questions);
  s.skipped_unresolved = std::max(planning.skipped_unresolved, reasoning.skipped_unresolved);
  s.skipped_unreachable = std::max(planning.skipped_unreachable, reasoning.skipped_unreachable);
  const auto& retained = reasoning.retained.empty() ? planning.retained : reasoning.retained;
  for (const auto& q : retained) {
    ++s.answer_histogram[answer_bucket(q.answer_count)];
    ++s.hop_histogram[hop_bucket(q.hops)];
  }
  return s;
}

std::string format_stats_text(const DatasetStats& s) {
  std::ostringstream out;
  auto row = [&](const std::string& name, std::size_t value) {
    out << std::left;
    out.width(28);
    out << name << value << '\n';
  };
  row("questions", s.questions);
  row("skipped (unresolved)", s.skipped_unresolved);
  row("skipped (unreachable)", s.skipped_unreachable);
  row("planning records", s.planning_records);
  row("reasoning records", s.reasoning_records);
  for (const auto& [bucket, n] : s.answer_histogram) row("answers " + bucket, n);
  for (const auto& [bucket, n] : s.hop_histogram) row("hops " + bucket, n);
  return out.str();
}

std::string format_stats_json(const DatasetStats& s) {
  nlohmann::ordered_json doc;
  doc["questions"] = s.questions;
  doc["skipped_unresolved"] = s.skipped_unresolved;
  doc["skipped_unreachable"] = s.skipped_unreachable;
  doc["planning_records"] = s.planning_records;
  doc["reasoning_records"] = s.reasoning_records;
  doc["answer_histogram"] = s.answer_histogram;
  doc["hop_histogram"] = s.hop_histogram;
  return doc.dump(2);
}

}  // namespace kgpath
