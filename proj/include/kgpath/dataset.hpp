#pragma once
// Instruction-tuning datasets built from shortest-path supervision.
//
// Planning records: one per (question, gold plan)
//   instruction = planning prompt, input = question, output = "<PATH> ... </PATH>"
// Reasoning records: one per question
//   instruction = reasoning instruction text,
//   input  = "Reasoning Paths:\n<paths>\n\nQuestion:\n<question>",
//   output = gold answers joined by '\n'

#include <map>
#include <span>
#include <string>
#include <vector>

#include "kgpath/formats.hpp"
#include "kgpath/kg_store.hpp"
#include "kgpath/paths.hpp"
#include "kgpath/planning.hpp"

namespace kgpath {

struct DatasetOptions {
  int max_len = 4;
  std::size_t plan_cap = 10;  // 0 = keep every gold plan
  RetrievalOptions retrieval;
  std::size_t parallelism = 1;
};

struct RetainedQuestion {
  std::string id;
  std::size_t answer_count = 0;
  int hops = 0;  // shortest distance
  std::size_t plans = 0;
};

struct DatasetBuild {
  std::vector<InstructionRecord> records;
  std::vector<RetainedQuestion> retained;  // input order
  std::size_t questions = 0;
  std::size_t skipped_unresolved = 0;
  std::size_t skipped_unreachable = 0;
  std::size_t truncated = 0;
};

DatasetBuild build_planning_instances(std::span<const QAInstance> split, const KnowledgeGraph& g,
                                      const DatasetOptions& options = {});
DatasetBuild build_reasoning_instances(std::span<const QAInstance> split, const KnowledgeGraph& g,
                                       const DatasetOptions& options = {});

// Instruction preamble of the reasoning template (text before the paths).
std::string reasoning_instruction();

struct DatasetStats {
  std::size_t planning_records = 0;
  std::size_t reasoning_records = 0;
  std::size_t questions = 0;
  std::size_t skipped_unresolved = 0;
  std::size_t skipped_unreachable = 0;
  // Bucket label -> count; fixed bucket sets {1, 2-4, 5-9, >=10} and {1, 2, >=3}.
  std::map<std::string, std::size_t> answer_histogram;
  std::map<std::string, std::size_t> hop_histogram;
};

std::string answer_bucket(std::size_t answer_count);
std::string hop_bucket(int hops);

DatasetStats dataset_stats(const DatasetBuild& planning, const DatasetBuild& reasoning);
std::string format_stats_text(const DatasetStats& stats);
std::string format_stats_json(const DatasetStats& stats);

}  // namespace kgpath
