#pragma once
// JSONL files exchanged between pipeline stages.
//
//   QA        {"id", "question", "question_entities": [..], "answer_entities": [..],
//              "hop_count"?}   ("q_entity"/"a_entity"/"hop" accepted on read)
//   plans     {"question_id", "plans": [[rel, ..], ..], "scores"?: [..]}
//   paths     {"question_id", "paths": [["e0", "r1", "e1", ..], ..], "truncated"}
//   predicts  {"id", "prediction": [..], "mode", "raw_text"?}
//   records   {"instruction", "input", "output"}

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgpath/paths.hpp"
#include "kgpath/planning.hpp"
#include "kgpath/reasoning.hpp"

namespace kgpath {

struct QuestionPlans {
  std::string question_id;
  PlanSet plans;
};

struct QuestionPaths {
  std::string question_id;
  std::vector<std::vector<std::string>> paths;  // label sequences
  bool truncated = false;
};

struct Prediction {
  std::string id;
  AnswerSet answers;
  bool failed = false;  // scored as empty; error text in answers.raw_text
};

struct InstructionRecord {
  std::string instruction;
  std::string input;
  std::string output;

  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

// Line-oriented reader; blank lines skipped, errors carry line numbers.
std::vector<QAInstance> read_qa(std::istream& in, const std::string& source = "<qa>");
std::vector<QAInstance> read_qa_file(const std::filesystem::path& path);
void write_qa(std::ostream& out, const std::vector<QAInstance>& qa);

std::vector<QuestionPlans> read_plans(std::istream& in, const std::string& source = "<plans>");
std::vector<QuestionPlans> read_plans_file(const std::filesystem::path& path);
void write_plans_line(std::ostream& out, const QuestionPlans& plans);
// Indexed by question id; duplicate ids are a DataError.
std::unordered_map<std::string, PlanSet> index_plans(std::vector<QuestionPlans> plans);

std::vector<QuestionPaths> read_paths(std::istream& in, const std::string& source = "<paths>");
std::vector<QuestionPaths> read_paths_file(const std::filesystem::path& path);
void write_paths_line(std::ostream& out, const QuestionPaths& paths);

std::vector<Prediction> read_predictions(std::istream& in,
                                         const std::string& source = "<predictions>");
std::vector<Prediction> read_predictions_file(const std::filesystem::path& path);
void write_prediction_line(std::ostream& out, const Prediction& prediction);

std::vector<InstructionRecord> read_records(std::istream& in,
                                            const std::string& source = "<records>");
void write_record_line(std::ostream& out, const InstructionRecord& record);

// Converts a label sequence back into a reasoning path; nullopt when a label
// is unknown or the sequence has even length.
std::optional<ReasoningPath> reasoning_path_from_labels(const std::vector<std::string>& labels,
                                                        const KnowledgeGraph& g);

}  // namespace kgpath
