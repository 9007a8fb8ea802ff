#pragma once
// Scoring, end-to-end pipeline runs, ablations and retrieval profiling.
//
// Metrics are macro-averaged: each question gets its own hit / precision /
// recall / F1 and the report holds their means. Matching uses
// normalize_answer on both sides. Hits@1 checks only the first prediction.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgpath/formats.hpp"
#include "kgpath/kg_store.hpp"
#include "kgpath/llm_client.hpp"
#include "kgpath/paths.hpp"
#include "kgpath/planning.hpp"
#include "kgpath/reasoning.hpp"

namespace kgpath {

struct QuestionScore {
  double hit = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

QuestionScore score_question(std::span<const std::string> predicted,
                             std::span<const std::string> gold);

struct MetricSummary {
  double hits_at_1 = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t n_questions = 0;
};

struct ProfileRow {
  std::size_t k = 0;
  double mean_paths = 0;
  double mean_seconds = 0;
  double coverage = 0;  // fraction of questions with a retrieved path ending in a gold answer
};

struct MetricReport {
  MetricSummary overall;
  std::map<std::string, MetricSummary> by_hops;     // hop_bucket, or "unknown"
  std::map<std::string, MetricSummary> by_answers;  // answer_bucket
  std::size_t failures = 0;
  std::vector<ProfileRow> retrieval_profile;
};

// Every prediction id must appear in gold; gold questions without a
// prediction score as empty. Duplicate or unknown ids raise DataError.
MetricReport score(std::span<const Prediction> predictions, std::span<const QAInstance> gold);

std::string format_report_text(const MetricReport& report, const std::string& title = "");
std::string format_report_json(const MetricReport& report);

struct PipelineOptions {
  AnswerMode mode = AnswerMode::kVote;
  std::size_t k = 3;
  std::size_t top_n = 5;
  // false: skip planning/retrieval and reason over an empty path block.
  bool use_paths = true;
  PromptMode prompt = PromptMode::kAnswer;
  std::string examples;
  RetrievalOptions retrieval;
  std::size_t parallelism = 1;
  ChatClient* client = nullptr;  // required for kLlm
};

struct PipelineCounters {
  std::size_t failures = 0;
  std::size_t plans = 0;
  std::size_t ungrounded_plans = 0;
  std::size_t questions_without_plans = 0;
  std::size_t truncated_retrievals = 0;
  std::size_t unresolved_questions = 0;
};

struct PipelineResult {
  std::vector<Prediction> predictions;  // split order
  MetricReport report;
  PipelineCounters counters;
};

// plan -> retrieve -> answer for every question. Planner or client failures
// on a question score it as empty and bump counters.failures.
PipelineResult run_pipeline(const KnowledgeGraph& g, std::span<const QAInstance> split,
                            const Planner& planner, const PipelineOptions& options);

// Retrieved paths for one question: union over the grounded plans, sorted.
struct QuestionRetrieval {
  std::vector<ReasoningPath> paths;
  std::size_t plans = 0;
  std::size_t ungrounded = 0;
  bool truncated = false;
};
QuestionRetrieval retrieve_for_plans(const KnowledgeGraph& g,
                                     std::span<const EntityId> question_entities,
                                     const PlanSet& plans, const RetrievalOptions& options);

struct AblationOptions {
  AnswerMode reasoning = AnswerMode::kVote;  // the "full" row's reasoning mode
  std::size_t k = 3;
  std::size_t top_n = 5;
  std::uint64_t seed = 0;
  int random_max_len = 4;
  RetrievalOptions retrieval;
  std::size_t parallelism = 1;
  ChatClient* client = nullptr;
};

struct AblationRow {
  std::string name;
  PipelineOptions options;
  bool random_plans = false;
  PipelineResult result;
};

// Rows: full, w/o planning, w/o reasoning, w/ random plans, w/ vote reasoning.
std::vector<AblationRow> run_ablation(const KnowledgeGraph& g, std::span<const QAInstance> split,
                                      const Planner& planner, const AblationOptions& options);

std::string format_ablation_text(const std::vector<AblationRow>& rows);
std::string format_ablation_json(const std::vector<AblationRow>& rows);

std::vector<ProfileRow> profile_retrieval(const KnowledgeGraph& g,
                                          std::span<const QAInstance> split,
                                          const Planner& planner,
                                          std::span<const std::size_t> k_values,
                                          const RetrievalOptions& retrieval = {});

std::string format_profile_text(const std::vector<ProfileRow>& rows);
std::string format_profile_json(const std::vector<ProfileRow>& rows);

}  // namespace kgpath
