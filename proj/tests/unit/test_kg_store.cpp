#include <gtest/gtest.h>
#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kgpath/errors.hpp"
#include "kgpath/kg_store.hpp"
#include "oracles.hpp"

using namespace kgpath;

namespace {

const char* kFamily = "Alice\tmarry_to\tBob\nBob\tfather_of\tCharlie\nBob\tfather_of\tDora\n";

std::vector<std::string> labels(const KnowledgeGraph& g, std::span<const EntityId> ids) {
  std::vector<std::string> out;
  for (auto e : ids) out.push_back(g.entity_label(e));
  return out;
}

EntityId ent(const KnowledgeGraph& g, std::string_view s) { return *g.find_entity(s); }
RelationId rel(const KnowledgeGraph& g, std::string_view s) { return *g.find_relation(s); }

}  // namespace

TEST(KgStore, FamilyCounts) {
  const auto g = load_graph_string(kFamily);
  const auto s = g.stats();
  EXPECT_EQ(s.entities, 4u);
  EXPECT_EQ(s.relations, 2u);
  EXPECT_EQ(s.triples, 3u);
}

TEST(KgStore, DuplicateLineIsDropped) {
  const auto g = load_graph_string(std::string(kFamily) + "Bob\tfather_of\tDora\n");
  EXPECT_EQ(g.triple_count(), 3u);
}

TEST(KgStore, Neighbors) {
  const auto g = load_graph_string(kFamily);
  EXPECT_EQ(labels(g, g.neighbors(ent(g, "Alice"), rel(g, "marry_to"))),
            std::vector<std::string>{"Bob"});
  EXPECT_EQ(labels(g, g.neighbors(ent(g, "Bob"), rel(g, "father_of"))),
            (std::vector<std::string>{"Charlie", "Dora"}));
  EXPECT_TRUE(g.neighbors(ent(g, "Charlie"), rel(g, "marry_to")).empty());
  EXPECT_EQ(labels(g, g.in_heads(ent(g, "Dora"))), std::vector<std::string>{"Bob"});
}

TEST(KgStore, CommentsBlankLinesAndCarriageReturns) {
  const auto g = load_graph_string("# header\n\nA\tr\tB\r\n  \nB\tr\tC\n");
  EXPECT_EQ(g.triple_count(), 2u);
  EXPECT_TRUE(g.find_entity("B").has_value());
}

TEST(KgStore, MalformedLineReportsLineNumber) {
  try {
    load_graph_string("A\tr\tB\nA\tr\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_graph_string("A\t\tB\n"), ParseError);
  EXPECT_THROW(load_graph_string("A\tr\tB\tC\n"), ParseError);
}

TEST(KgStore, InverseRelations) {
  LoadOptions o;
  o.add_inverse = true;
  const auto g = load_graph_string(kFamily, o);
  EXPECT_EQ(g.relation_count(), 4u);
  EXPECT_EQ(g.triple_count(), 6u);
  EXPECT_EQ(labels(g, g.neighbors(ent(g, "Charlie"), rel(g, "~father_of"))),
            std::vector<std::string>{"Bob"});
}

TEST(KgStore, SaveLoadRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto g = oracle::random_graph(rng);
    std::ostringstream out;
    save_graph(g, out);
    const auto h = load_graph_string(out.str());
    std::set<std::tuple<std::string, std::string, std::string>> a, b;
    for (const auto& e : oracle::edges(g)) a.insert({e.head, e.relation, e.tail});
    for (const auto& e : oracle::edges(h)) b.insert({e.head, e.relation, e.tail});
    EXPECT_EQ(a, b);
    std::ostringstream again;
    save_graph(h, again);
    EXPECT_EQ(out.str(), again.str());
  }
}

TEST(KgStore, GzipFile) {
  const auto path = std::filesystem::temp_directory_path() / "kgpath_family.tsv.gz";
  gzFile f = gzopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzputs(f, kFamily);
  gzclose(f);
  const auto g = load_graph_file(path);
  EXPECT_EQ(g.triple_count(), 3u);
  std::filesystem::remove(path);
}

TEST(KgStore, MissingFileIsDataError) {
  EXPECT_THROW(load_graph_file("/nonexistent/kg.tsv"), DataError);
}

TEST(Subgraph, FamilyHops) {
  const auto g = load_graph_string(kFamily);
  const EntityId seeds[] = {ent(g, "Alice")};
  const auto one = extract_subgraph(g, seeds, 1);
  EXPECT_EQ(one.triple_count(), 1u);
  EXPECT_TRUE(one.contains({ent(one, "Alice"), rel(one, "marry_to"), ent(one, "Bob")}));
  EXPECT_EQ(extract_subgraph(g, seeds, 2).triple_count(), 3u);
}

TEST(Subgraph, Contracts) {
  const auto g = load_graph_string(kFamily);
  const EntityId seeds[] = {ent(g, "Alice")};
  EXPECT_THROW(extract_subgraph(g, {}, 1), ContractError);
  EXPECT_THROW(extract_subgraph(g, seeds, 0), ContractError);
  const EntityId bad[] = {EntityId{999}};
  EXPECT_THROW(extract_subgraph(g, bad, 1), ContractError);
}

TEST(Subgraph, MatchesTwoRoundExpansion) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto g = oracle::random_graph(rng, 100, 4, 300);
    std::vector<EntityId> seeds = {EntityId{static_cast<std::uint32_t>(rng() % g.entity_count())}};
    const auto sub = extract_subgraph(g, seeds, 2);
    std::set<std::tuple<std::string, std::string, std::string>> got;
    for (const auto& e : oracle::edges(sub)) got.insert({e.head, e.relation, e.tail});
    EXPECT_EQ(got, oracle::hop_triples(g, {g.entity_label(seeds[0])}, 2));
  }
}
