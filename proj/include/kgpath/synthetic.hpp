#pragma once
// Seeded synthetic KG + QA benchmark for closed-loop testing.
//
// The graph has `entities` nodes named e<i> and `relations` relations named
// r<j>; a share of the relations is functional (at most one tail per head).
// Each question starts at a random entity, follows a random walk of 1..max_hops
// edges, and asks for the walk's endpoint. The recorded hop count is the true
// shortest distance, and the oracle's top-`plan_budget` plans always reach
// every gold answer.

#include <cstdint>
#include <vector>

#include "kgpath/kg_store.hpp"
#include "kgpath/planning.hpp"

namespace kgpath {

struct SyntheticOptions {
  std::size_t entities = 2500;
  std::size_t relations = 24;
  std::size_t triples = 10000;
  std::size_t questions = 500;
  int max_hops = 4;
  double functional_share = 0.5;
  // Share of questions whose answer set is every endpoint of the walk's
  // relation path (rather than the single walk endpoint).
  double multi_answer_share = 0.3;
  std::size_t plan_budget = 3;
  std::uint64_t seed = 7;
};

struct SyntheticBenchmark {
  KnowledgeGraph graph;
  std::vector<QAInstance> questions;
};

SyntheticBenchmark generate_benchmark(const SyntheticOptions& options);

}  // namespace kgpath
