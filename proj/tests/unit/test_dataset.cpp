#include <gtest/gtest.h>

#include <sstream>

#include "kgpath/dataset.hpp"
#include "kgpath/errors.hpp"
#include "kgpath/formats.hpp"
#include "kgpath/synthetic.hpp"
#include "oracles.hpp"

using namespace kgpath;

namespace {

const char* kFamily = "Alice\tmarry_to\tBob\nBob\tfather_of\tCharlie\nBob\tfather_of\tDora\n";

QAInstance family_qa() {
  return {"family-1", "Who is the child of Alice?", {"Alice"}, {"Charlie"}, std::nullopt};
}

SyntheticBenchmark small_bench() {
  SyntheticOptions o;
  o.entities = 300;
  o.relations = 8;
  o.triples = 1200;
  o.questions = 100;
  o.seed = 21;
  return generate_benchmark(o);
}

}  // namespace

TEST(Dataset, FamilyPlanningRecord) {
  const auto g = load_graph_string(kFamily);
  const std::vector<QAInstance> split = {family_qa()};
  const auto b = build_planning_instances(split, g);
  ASSERT_EQ(b.records.size(), 1u);
  EXPECT_EQ(b.records[0].output, "<PATH> marry_to <SEP> father_of </PATH>");
  EXPECT_EQ(b.records[0].input, "Who is the child of Alice?");
  EXPECT_TRUE(b.records[0].instruction.starts_with("Please generate a valid relation path"));
}

TEST(Dataset, FamilyReasoningRecord) {
  const auto g = load_graph_string(kFamily);
  const std::vector<QAInstance> split = {family_qa()};
  const auto b = build_reasoning_instances(split, g);
  ASSERT_EQ(b.records.size(), 1u);
  EXPECT_NE(b.records[0].input.find("Alice → marry_to → Bob → father_of → Charlie"), std::string::npos);
  EXPECT_EQ(b.records[0].input.find("Dora"), std::string::npos);
  EXPECT_EQ(b.records[0].output, "Charlie");
}

TEST(Dataset, TwoAnswers) {
  const auto g = load_graph_string(kFamily);
  QAInstance qa = family_qa();
  qa.answer_entities = {"Dora", "Charlie"};
  const std::vector<QAInstance> split = {qa};
  EXPECT_EQ(build_reasoning_instances(split, g).records[0].output, "Charlie\nDora");
}

TEST(Dataset, UnreachableAndUnresolvedAreSkipped) {
  const auto g = load_graph_string(kFamily);
  const std::vector<QAInstance> split = {
      {"a", "?", {"Charlie"}, {"Alice"}, std::nullopt},
      {"b", "?", {"Nobody"}, {"Alice"}, std::nullopt},
  };
  const auto b = build_planning_instances(split, g);
  EXPECT_TRUE(b.records.empty());
  EXPECT_EQ(b.skipped_unreachable, 1u);
  EXPECT_EQ(b.skipped_unresolved, 1u);
}

TEST(Dataset, SyntheticRecordCountMatchesOracle) {
  const auto bench = small_bench();
  DatasetOptions o;
  o.plan_cap = 0;
  const auto b = build_planning_instances(bench.questions, bench.graph, o);
  const oracle::EdgeIndex index(bench.graph);
  std::size_t expected = 0;
  for (const auto& qa : bench.questions)
    expected += oracle::minimal_walks(index, qa.question_entities, qa.answer_entities, 4).plans.size();
  EXPECT_EQ(b.records.size(), expected);
}

TEST(Dataset, SyntheticReasoningPathsReachAnswers) {
  const auto bench = small_bench();
  const auto b = build_reasoning_instances(bench.questions, bench.graph);
  ASSERT_EQ(b.records.size(), bench.questions.size());
  for (const auto& r : b.records) {
    std::stringstream out(r.output);
    std::string answer;
    while (std::getline(out, answer)) {
      EXPECT_NE(r.input.find("→ " + answer + "\n"), std::string::npos) << r.input;
    }
  }
}

TEST(Dataset, StatsHistograms) {
  const auto empty = dataset_stats({}, {});
  EXPECT_EQ(empty.planning_records, 0u);
  for (const auto& [_, n] : empty.answer_histogram) EXPECT_EQ(n, 0u);
  EXPECT_EQ(empty.answer_histogram.size(), 4u);
  EXPECT_EQ(empty.hop_histogram.size(), 3u);

  const auto bench = small_bench();
  const auto p = build_planning_instances(bench.questions, bench.graph);
  const auto r = build_reasoning_instances(bench.questions, bench.graph);
  const auto s = dataset_stats(p, r);
  const oracle::EdgeIndex index(bench.graph);
  std::map<std::string, std::size_t> answers, hops;
  for (const auto& qa : bench.questions) {
    const auto n = std::set<std::string>(qa.answer_entities.begin(), qa.answer_entities.end()).size();
    answers[n == 1 ? "1" : n <= 4 ? "2-4" : n <= 9 ? "5-9" : ">=10"]++;
    const int h = oracle::minimal_walks(index, qa.question_entities, qa.answer_entities, 4).distance;
    hops[h == 1 ? "1" : h == 2 ? "2" : ">=3"]++;
  }
  for (const auto& [k, v] : answers) EXPECT_EQ(s.answer_histogram.at(k), v) << k;
  for (const auto& [k, v] : hops) EXPECT_EQ(s.hop_histogram.at(k), v) << k;
}

TEST(Formats, RecordsRoundTripAndReground) {
  const auto bench = small_bench();
  const auto p = build_planning_instances(bench.questions, bench.graph);
  std::stringstream buf;
  for (const auto& r : p.records) write_record_line(buf, r);
  const auto back = read_records(buf);
  ASSERT_EQ(back, p.records);
  for (const auto& r : back) {
    const auto parsed = parse_plan(r.output, bench.graph);
    EXPECT_EQ(parsed.status, PlanStatus::kGrounded) << r.output;
  }
}

TEST(Formats, QaAliasesAndErrors) {
  std::stringstream in(
      "{\"id\":\"1\",\"question\":\"q?\",\"q_entity\":[\"A\"],\"a_entity\":[\"B\"],\"hop\":2}\n\n");
  const auto qa = read_qa(in);
  ASSERT_EQ(qa.size(), 1u);
  EXPECT_EQ(qa[0].question_entities, std::vector<std::string>{"A"});
  EXPECT_EQ(qa[0].hop_count, 2);

  std::stringstream bad("{\"id\":\"1\",\"question\":\"q\",\"question_entities\":[],\"answer_entities\":[]}\n{oops\n");
  try {
    read_qa(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Formats, PredictionsRoundTrip) {
  Prediction p{"q1", {{"Charlie", "Dora"}, {}, std::string("raw"), AnswerMode::kLlm}, false};
  Prediction f{"q2", {{}, {}, std::string("timeout"), AnswerMode::kLlm}, true};
  std::stringstream buf;
  write_prediction_line(buf, p);
  write_prediction_line(buf, f);
  const auto back = read_predictions(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].answers.answers, p.answers.answers);
  EXPECT_EQ(back[0].answers.mode, AnswerMode::kLlm);
  EXPECT_TRUE(back[1].failed);
}
