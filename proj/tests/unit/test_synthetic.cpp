#include <gtest/gtest.h>

#include "kgpath/errors.hpp"
#include "kgpath/synthetic.hpp"
#include "oracles.hpp"

using namespace kgpath;

TEST(Synthetic, SeededAndConsistent) {
  SyntheticOptions o;
  o.entities = 500;
  o.relations = 10;
  o.triples = 2000;
  o.questions = 80;
  o.seed = 99;
  const auto a = generate_benchmark(o);
  const auto b = generate_benchmark(o);
  EXPECT_EQ(a.graph.triple_count(), 2000u);
  ASSERT_EQ(a.questions.size(), 80u);
  ASSERT_EQ(b.questions.size(), 80u);
  for (std::size_t i = 0; i < a.questions.size(); ++i) {
    EXPECT_EQ(a.questions[i].question, b.questions[i].question);
    EXPECT_EQ(a.questions[i].answer_entities, b.questions[i].answer_entities);
  }
  for (const auto& qa : a.questions) {
    const auto m = oracle::minimal_walks(a.graph, qa.question_entities, qa.answer_entities, 4);
    EXPECT_EQ(m.distance, qa.hop_count) << qa.id;
    // Multi-answer questions keep |Z*| within the budget so the oracle's
    // top plans reach every answer.
    if (qa.answer_entities.size() > 1) EXPECT_LE(m.plans.size(), o.plan_budget) << qa.id;
  }
}

TEST(Synthetic, RejectsImpossibleDensity) {
  SyntheticOptions o;
  o.entities = 3;
  o.relations = 1;
  o.triples = 100;
  EXPECT_THROW(generate_benchmark(o), Error);
}
