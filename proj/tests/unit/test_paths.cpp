#include <gtest/gtest.h>

#include <random>

#include "kgpath/errors.hpp"
#include "kgpath/paths.hpp"
#include "oracles.hpp"

using namespace kgpath;

namespace {

const char* kFamily = "Alice\tmarry_to\tBob\nBob\tfather_of\tCharlie\nBob\tfather_of\tDora\n";

std::set<oracle::Labels> label_set(const std::vector<ReasoningPath>& paths, const KnowledgeGraph& g) {
  std::set<oracle::Labels> out;
  for (const auto& p : paths) out.insert(to_labels(p, g));
  return out;
}

std::set<oracle::Labels> label_set(const std::vector<RelationPath>& paths, const KnowledgeGraph& g) {
  std::set<oracle::Labels> out;
  for (const auto& p : paths) out.insert(to_labels(p, g));
  return out;
}

}  // namespace

TEST(Retrieval, FamilyExample) {
  const auto g = load_graph_string(kFamily);
  const EntityId alice[] = {*g.find_entity("Alice")};
  const auto r = retrieve_reasoning_paths(g, alice, LabelPath{"marry_to", "father_of"});
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(label_set(r.paths, g),
            (std::set<oracle::Labels>{{"Alice", "marry_to", "Bob", "father_of", "Charlie"},
                                      {"Alice", "marry_to", "Bob", "father_of", "Dora"}}));
}

TEST(Retrieval, EmptyPlanIsZeroLengthWalk) {
  const auto g = load_graph_string(kFamily);
  const EntityId alice[] = {*g.find_entity("Alice")};
  const auto r = retrieve_reasoning_paths(g, alice, RelationPath{});
  ASSERT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(r.paths[0].start, alice[0]);
  EXPECT_TRUE(r.paths[0].steps.empty());
}

TEST(Retrieval, UngroundedPlanThrows) {
  const auto g = load_graph_string(kFamily);
  const EntityId alice[] = {*g.find_entity("Alice")};
  EXPECT_THROW(retrieve_reasoning_paths(g, alice, LabelPath{"marry_to", "sibling_of"}),
               UngroundedPlanError);
  EXPECT_THROW(retrieve_reasoning_paths(g, alice, RelationPath{{RelationId{42}}}),
               UngroundedPlanError);
}

TEST(Retrieval, CapSetsTruncated) {
  GraphBuilder b;
  for (int i = 0; i < 20; ++i) b.add("hub", "r", "x" + std::to_string(i));
  for (int i = 0; i < 20; ++i) b.add("x" + std::to_string(i), "r", "hub");
  const auto g = std::move(b).build();
  const EntityId hub[] = {*g.find_entity("hub")};
  RetrievalOptions o;
  o.max_paths = 50;
  const auto r = retrieve_reasoning_paths(g, hub, LabelPath{"r", "r", "r"}, o);
  EXPECT_TRUE(r.truncated);
  EXPECT_LE(r.paths.size(), 50u);
}

TEST(Retrieval, MatchesWalkEnumeration) {
  std::mt19937_64 rng(1);
  for (int round = 0; round < 40; ++round) {
    const auto g = oracle::random_graph(rng);
    std::vector<EntityId> starts;
    oracle::Labels start_labels;
    for (int i = 0; i < 2; ++i) {
      EntityId e{static_cast<std::uint32_t>(rng() % g.entity_count())};
      starts.push_back(e);
      start_labels.push_back(g.entity_label(e));
    }
    for (const auto& plan : oracle::all_plans(g.relations().labels(), 3)) {
      const auto r = retrieve_reasoning_paths(g, starts, plan);
      ASSERT_EQ(label_set(r.paths, g), oracle::plan_walks(g, start_labels, plan));
      ASSERT_TRUE(std::is_sorted(r.paths.begin(), r.paths.end()));
    }
  }
}

TEST(ShortestPaths, FamilyExample) {
  const auto g = load_graph_string(kFamily);
  const EntityId q[] = {*g.find_entity("Alice")};
  const EntityId a[] = {*g.find_entity("Charlie")};
  const auto r = shortest_relation_paths(g, q, a);
  EXPECT_EQ(r.distance, 2);
  EXPECT_EQ(label_set(r.paths, g), (std::set<oracle::Labels>{{"marry_to", "father_of"}}));
}

TEST(ShortestPaths, IdentityAndUnreachable) {
  const auto g = load_graph_string(kFamily);
  const EntityId alice[] = {*g.find_entity("Alice")};
  const auto same = shortest_relation_paths(g, alice, alice);
  ASSERT_EQ(same.paths.size(), 1u);
  EXPECT_TRUE(same.paths[0].empty());
  EXPECT_EQ(same.distance, 0);

  const EntityId charlie[] = {*g.find_entity("Charlie")};
  const auto none = shortest_relation_paths(g, charlie, alice);
  EXPECT_TRUE(none.paths.empty());
  EXPECT_FALSE(none.distance.has_value());

  ShortestPathOptions o;
  o.max_len = 1;
  const EntityId dora[] = {*g.find_entity("Dora")};
  EXPECT_FALSE(shortest_relation_paths(g, alice, dora, o).distance.has_value());
}

TEST(ShortestPaths, MatchesMinimalWalkOracle) {
  std::mt19937_64 rng(2);
  for (int round = 0; round < 60; ++round) {
    const auto g = oracle::random_graph(rng);
    for (int pair = 0; pair < 5; ++pair) {
      std::vector<EntityId> q, a;
      oracle::Labels ql, al;
      const int nq = 1 + static_cast<int>(rng() % 2), na = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < nq; ++i) q.push_back(EntityId{static_cast<std::uint32_t>(rng() % g.entity_count())});
      for (int i = 0; i < na; ++i) a.push_back(EntityId{static_cast<std::uint32_t>(rng() % g.entity_count())});
      for (auto e : q) ql.push_back(g.entity_label(e));
      for (auto e : a) al.push_back(g.entity_label(e));
      const auto r = shortest_relation_paths(g, q, a);
      const auto expected = oracle::minimal_walks(g, ql, al, 4);
      ASSERT_EQ(label_set(r.paths, g), expected.plans);
      ASSERT_EQ(r.distance.value_or(-1), expected.distance);
      for (const auto& p : r.paths) ASSERT_EQ(static_cast<int>(p.size()), expected.distance);
    }
  }
}

TEST(PlanFormat, Serialize) {
  EXPECT_EQ(serialize_plan(LabelPath{"marry_to", "father_of"}),
            "<PATH> marry_to <SEP> father_of </PATH>");
  EXPECT_EQ(serialize_plan(LabelPath{}), "<PATH> </PATH>");
}

TEST(PlanFormat, ParseEmbedded) {
  EXPECT_EQ(parse_plan_labels("answer: <PATH> location.country.official_language </PATH>"),
            LabelPath{"location.country.official_language"});
  EXPECT_EQ(parse_plan_labels("x <PATH> sports.mascot.team <SEP> "
                              "sports.sports_team.championships </PATH> y"),
            (LabelPath{"sports.mascot.team", "sports.sports_team.championships"}));
  EXPECT_EQ(parse_plan_labels("<PATH></PATH>"), LabelPath{});
  EXPECT_FALSE(parse_plan_labels("no plan here").has_value());
  EXPECT_FALSE(parse_plan_labels("<PATH> a <SEP> </PATH>").has_value());
  EXPECT_FALSE(parse_plan_labels("<PATH> a <SEP> b").has_value());
}

TEST(PlanFormat, RoundTripRandom) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "abcxyz._~0123";
  for (int i = 0; i < 1000; ++i) {
    LabelPath plan(rng() % 5);
    for (auto& r : plan) {
      const auto len = 1 + rng() % 12;
      for (std::size_t c = 0; c < len; ++c) r += alphabet[rng() % alphabet.size()];
    }
    ASSERT_EQ(parse_plan_labels(serialize_plan(plan)), plan);
  }
}

TEST(PlanFormat, ParseAgainstGraph) {
  const auto g = load_graph_string(kFamily);
  const auto ok = parse_plan("<PATH> marry_to <SEP> father_of </PATH>", g);
  EXPECT_EQ(ok.status, PlanStatus::kGrounded);
  ASSERT_TRUE(ok.path.has_value());
  EXPECT_EQ(ok.path->size(), 2u);
  const auto bad = parse_plan("<PATH> marry_to <SEP> sibling_of </PATH>", g);
  EXPECT_EQ(bad.status, PlanStatus::kUngrounded);
  EXPECT_EQ(bad.unknown, std::vector<std::string>{"sibling_of"});
  EXPECT_EQ(parse_plan("garbage", g).status, PlanStatus::kStructuralFailure);
}
