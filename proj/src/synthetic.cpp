#include "kgpath/synthetic.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <unordered_set>

#include "kgpath/errors.hpp"
#include "kgpath/paths.hpp"

namespace kgpath {

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::size_t n) { return rng() % n; }

double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

KnowledgeGraph generate_graph(const SyntheticOptions& o, std::mt19937_64& rng) {
  const std::uint64_t max_triples =
      static_cast<std::uint64_t>(o.entities) * o.entities * o.relations;
  if (o.entities == 0 || o.relations == 0 || o.triples > max_triples / 2)
    throw ContractError("synthetic graph is too dense for the requested triple count");

  const auto n_functional = static_cast<std::size_t>(o.functional_share * static_cast<double>(o.relations));
  GraphBuilder builder;
  for (std::size_t i = 0; i < o.entities; ++i) builder.add_entity("e" + std::to_string(i));

  std::unordered_set<std::uint64_t> seen;
  std::unordered_set<std::uint64_t> functional_heads;
  seen.reserve(o.triples * 2);
  std::size_t added = 0;
  std::size_t attempts = 0;
  while (added < o.triples) {
    if (++attempts > 50 * o.triples + 1000)
      throw ContractError("synthetic graph generation could not reach the triple count");
    const auto h = pick(rng, o.entities);
    const auto r = pick(rng, o.relations);
    const auto t = pick(rng, o.entities);
    const std::uint64_t key = (h * o.relations + r) * o.entities + t;
    if (seen.count(key)) continue;
    if (r < n_functional && !functional_heads.insert(h * o.relations + r).second) continue;
    seen.insert(key);
    builder.add("e" + std::to_string(h), "r" + std::to_string(r), "e" + std::to_string(t));
    ++added;
  }
  return std::move(builder).build();
}

std::string question_text(const KnowledgeGraph& g, EntityId start, const RelationPath& z) {
  std::string text = "what is";
  for (auto it = z.relations.rbegin(); it != z.relations.rend(); ++it)
    text += " the " + g.relation_label(*it) + " of";
  return text + " " + g.entity_label(start) + "?";
}

}  // namespace

SyntheticBenchmark generate_benchmark(const SyntheticOptions& o) {
  if (o.max_hops < 1) throw ContractError("max_hops must be >= 1");
  std::mt19937_64 rng(o.seed);
  SyntheticBenchmark bench;
  bench.graph = generate_graph(o, rng);
  const auto& g = bench.graph;

  ShortestPathOptions sp;
  for (std::size_t qi = 0; qi < o.questions; ++qi) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const EntityId start{static_cast<std::uint32_t>(pick(rng, g.entity_count()))};
      const int hops = 1 + static_cast<int>(pick(rng, static_cast<std::size_t>(o.max_hops)));
      RelationPath z;
      EntityId at = start;
      bool stuck = false;
      for (int i = 0; i < hops; ++i) {
        const auto rels = g.out_relations(at);
        if (rels.empty()) {
          stuck = true;
          break;
        }
        const auto e = pick(rng, rels.size());
        z.relations.push_back(rels[e]);
        at = g.out_tails(at)[e];
      }
      if (stuck) continue;

      const EntityId starts[] = {start};
      sp.max_len = hops;
      const EntityId end_only[] = {at};
      if (shortest_relation_paths(g, starts, end_only, sp).distance != hops) continue;

      std::vector<EntityId> answers = {at};
      if (unit(rng) < o.multi_answer_share) {
        answers.clear();
        for (const auto& p : retrieve_reasoning_paths(g, starts, z).paths) {
          const EntityId candidate[] = {p.end()};
          if (shortest_relation_paths(g, starts, candidate, sp).distance == hops)
            answers.push_back(p.end());
        }
        std::sort(answers.begin(), answers.end());
        answers.erase(std::unique(answers.begin(), answers.end()), answers.end());
        if (shortest_relation_paths(g, starts, answers, sp).paths.size() > o.plan_budget) continue;
      }

      QAInstance qa;
      qa.id = "q" + std::to_string(qi);
      qa.question = question_text(g, start, z);
      qa.question_entities = {g.entity_label(start)};
      for (auto a : answers) qa.answer_entities.push_back(g.entity_label(a));
      qa.hop_count = hops;
      bench.questions.push_back(std::move(qa));
      break;
    }
  }
  return bench;
}

}  // namespace kgpath
