// Python bindings. Everything crosses the boundary as labels (strings);
// integer handles stay on the C++ side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "kgpath/errors.hpp"
#include "kgpath/eval.hpp"
#include "kgpath/formats.hpp"
#include "kgpath/kg_store.hpp"
#include "kgpath/paths.hpp"
#include "kgpath/planning.hpp"
#include "kgpath/reasoning.hpp"

namespace py = pybind11;
using namespace kgpath;

namespace {

std::vector<EntityId> entities(const KnowledgeGraph& g, const std::vector<std::string>& labels) {
  std::vector<EntityId> out;
  for (const auto& l : labels) {
    auto e = g.find_entity(l);
    if (!e) throw py::key_error("unknown entity: " + l);
    out.push_back(*e);
  }
  return out;
}

std::vector<ReasoningPath> paths_from(const KnowledgeGraph& g,
                                      const std::vector<std::vector<std::string>>& seqs) {
  std::vector<ReasoningPath> out;
  for (const auto& s : seqs) {
    auto p = reasoning_path_from_labels(s, g);
    if (!p || !validates(*p, g)) throw py::value_error("reasoning path is not a walk in the graph");
    out.push_back(std::move(*p));
  }
  return out;
}

std::vector<std::pair<std::string, double>> ranked(const AnswerSet& a) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < a.answers.size(); ++i)
    out.emplace_back(a.answers[i], i < a.scores.size() ? a.scores[i] : 0.0);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relation-path retrieval over in-memory knowledge graphs";

  static py::exception<Error> base(m, "KgpathError", PyExc_RuntimeError);
  static py::exception<DataError> data(m, "DataError", base.ptr());
  static py::exception<TransportError> transport(m, "TransportError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DataError& e) {
      data(e.what());
    } catch (const TransportError& e) {
      transport(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::class_<KnowledgeGraph, std::shared_ptr<KnowledgeGraph>>(m, "Graph")
      .def_static(
          "load",
          [](const std::filesystem::path& path, bool inverse) {
            LoadOptions o;
            o.add_inverse = inverse;
            return std::make_shared<KnowledgeGraph>(load_graph_file(path, o));
          },
          py::arg("path"), py::arg("inverse") = false)
      .def_static(
          "from_tsv",
          [](const std::string& text, bool inverse) {
            LoadOptions o;
            o.add_inverse = inverse;
            return std::make_shared<KnowledgeGraph>(load_graph_string(text, o));
          },
          py::arg("text"), py::arg("inverse") = false)
      .def("stats",
           [](const KnowledgeGraph& g) {
             const auto s = g.stats();
             py::dict d;
             d["entities"] = s.entities;
             d["relations"] = s.relations;
             d["triples"] = s.triples;
             return d;
           })
      .def("neighbors",
           [](const KnowledgeGraph& g, const std::string& head, const std::string& relation) {
             std::vector<std::string> out;
             auto h = g.find_entity(head);
             auto r = g.find_relation(relation);
             if (!h || !r) return out;
             for (auto t : g.neighbors(*h, *r)) out.push_back(g.entity_label(t));
             return out;
           })
      .def("subgraph",
           [](const KnowledgeGraph& g, const std::vector<std::string>& seeds, int max_hops) {
             return std::make_shared<KnowledgeGraph>(extract_subgraph(g, entities(g, seeds), max_hops));
           },
           py::arg("seeds"), py::arg("max_hops"))
      .def("to_tsv",
           [](const KnowledgeGraph& g) {
             std::ostringstream out;
             save_graph(g, out);
             return out.str();
           })
      .def("has_entity", [](const KnowledgeGraph& g, const std::string& l) { return g.find_entity(l).has_value(); })
      .def("has_relation", [](const KnowledgeGraph& g, const std::string& l) { return g.find_relation(l).has_value(); })
      .def_property_readonly("relations", [](const KnowledgeGraph& g) { return g.relations().labels(); })
      .def("__len__", &KnowledgeGraph::triple_count);

  m.def(
      "retrieve",
      [](const KnowledgeGraph& g, const std::vector<std::string>& starts, const LabelPath& plan,
         std::size_t max_paths) {
        RetrievalOptions o;
        o.max_paths = max_paths;
        const auto r = retrieve_reasoning_paths(g, entities(g, starts), plan, o);
        std::vector<std::vector<std::string>> out;
        for (const auto& p : r.paths) out.push_back(to_labels(p, g));
        return py::make_tuple(out, r.truncated);
      },
      py::arg("graph"), py::arg("starts"), py::arg("plan"), py::arg("max_paths") = 100000,
      "Walks from `starts` following `plan`; returns (paths, truncated).");

  m.def(
      "shortest_relation_paths",
      [](const KnowledgeGraph& g, const std::vector<std::string>& q, const std::vector<std::string>& a,
         int max_len) {
        ShortestPathOptions o;
        o.max_len = max_len;
        const auto r = shortest_relation_paths(g, entities(g, q), entities(g, a), o);
        std::vector<LabelPath> plans;
        for (const auto& p : r.paths) plans.push_back(to_labels(p, g));
        py::dict d;
        d["paths"] = plans;
        d["distance"] = r.distance;
        d["truncated"] = r.truncated;
        return d;
      },
      py::arg("graph"), py::arg("question_entities"), py::arg("answer_entities"), py::arg("max_len") = 4);

  m.def("serialize_plan", py::overload_cast<const LabelPath&>(&serialize_plan));
  m.def("parse_plan", &parse_plan_labels, "Label list, or None when the text holds no plan.");
  m.def("planning_prompt", &build_planning_prompt);
  m.def(
      "reasoning_prompt",
      [](std::string_view question, std::string_view paths, bool explain, std::string_view examples) {
        return build_reasoning_prompt(question, paths, explain ? PromptMode::kExplain : PromptMode::kAnswer,
                                      examples);
      },
      py::arg("question"), py::arg("paths_block"), py::arg("explain") = false, py::arg("examples") = "");
  m.def("format_paths", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths) {
    return format_reasoning_paths(paths_from(g, paths), g);
  });
  m.def(
      "vote_answers",
      [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths, std::size_t top_n) {
        return ranked(vote_answers(paths_from(g, paths), g, top_n));
      },
      py::arg("graph"), py::arg("paths"), py::arg("top_n") = 5);
  m.def("raw_endpoint_answers", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths) {
    return ranked(raw_endpoint_answers(paths_from(g, paths), g));
  });
  m.def("parse_answer_list", &parse_answer_list);
  m.def("normalize_answer", &normalize_answer);

  m.def("score_question", [](const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
    const auto s = score_question(predicted, gold);
    py::dict d;
    d["hits_at_1"] = s.hit;
    d["precision"] = s.precision;
    d["recall"] = s.recall;
    d["f1"] = s.f1;
    return d;
  });
  m.def(
      "planning_loss",
      [](const std::vector<double>& gold_logprobs) {
        std::vector<RelationPath> gold(gold_logprobs.size());
        for (std::size_t i = 0; i < gold.size(); ++i)
          gold[i].relations = {RelationId{static_cast<std::uint32_t>(i)}};
        return planning_loss(gold, [&](const RelationPath& z) { return gold_logprobs[z.relations[0].value]; });
      },
      "Mean negated log-probability over the gold plans.");
  m.def("aggregate_scores", &aggregate_scores, py::arg("per_plan"),
        py::arg("floor_log_prob") = kDefaultFloorLogProb);
}
