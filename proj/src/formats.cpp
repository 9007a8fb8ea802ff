#include "kgpath/formats.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "kgpath/errors.hpp"

namespace kgpath {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!doc.is_object()) throw ParseError(source, line_no, "expected a JSON object");
    try {
      fn(doc);
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (in.bad()) throw DataError(source + ": read failure");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::vector<std::string> string_array(const json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  const auto& v = doc.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  std::vector<std::string> out;
  for (const auto& item : v) out.push_back(item.get<std::string>());
  return out;
}

std::string id_field(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.get<std::string>();
}

}  // namespace

std::vector<QAInstance> read_qa(std::istream& in, const std::string& source) {
  std::vector<QAInstance> out;
  for_each_json_line(in, source, [&](const json& doc) {
    QAInstance qa;
    qa.id = id_field(doc, "id");
    qa.question = doc.at("question").get<std::string>();
    if (qa.question.empty()) throw DataError("empty question text");
    qa.question_entities = doc.contains("question_entities")
                               ? string_array(doc, "question_entities")
                               : string_array(doc, "q_entity");
    qa.answer_entities = doc.contains("answer_entities") ? string_array(doc, "answer_entities")
                                                         : string_array(doc, "a_entity");
    if (doc.contains("hop_count") && !doc["hop_count"].is_null()) {
      qa.hop_count = doc["hop_count"].get<int>();
    } else if (doc.contains("hop") && !doc["hop"].is_null()) {
      qa.hop_count = doc["hop"].get<int>();
    }
    out.push_back(std::move(qa));
  });
  return out;
}

std::vector<QAInstance> read_qa_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_qa(in, path.string());
}

void write_qa(std::ostream& out, const std::vector<QAInstance>& qa) {
  for (const auto& q : qa) {
    json doc = {{"id", q.id},
                {"question", q.question},
                {"question_entities", q.question_entities},
                {"answer_entities", q.answer_entities}};
    if (q.hop_count) doc["hop_count"] = *q.hop_count;
    out << doc.dump() << '\n';
  }
}

std::vector<QuestionPlans> read_plans(std::istream& in, const std::string& source) {
  std::vector<QuestionPlans> out;
  for_each_json_line(in, source, [&](const json& doc) {
    QuestionPlans qp;
    qp.question_id = id_field(doc, "question_id");
    for (const auto& p : doc.at("plans")) qp.plans.plans.push_back({p.get<LabelPath>(), std::nullopt});
    if (doc.contains("scores") && !doc["scores"].is_null()) {
      const auto& scores = doc["scores"];
      if (scores.size() != qp.plans.plans.size())
        throw DataError("scores do not align with plans");
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = scores[i].get<double>();
        if (s > 0.0) throw DataError("plan score must be a log-probability (<= 0)");
        qp.plans.plans[i].score = s;
      }
    }
    out.push_back(std::move(qp));
  });
  return out;
}

std::vector<QuestionPlans> read_plans_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_plans(in, path.string());
}

void write_plans_line(std::ostream& out, const QuestionPlans& qp) {
  json doc;
  doc["question_id"] = qp.question_id;
  doc["plans"] = json::array();
  for (const auto& p : qp.plans.plans) doc["plans"].push_back(p.relations);
  if (qp.plans.has_scores()) {
    doc["scores"] = json::array();
    for (const auto& p : qp.plans.plans) doc["scores"].push_back(*p.score);
  }
  out << doc.dump() << '\n';
}

std::unordered_map<std::string, PlanSet> index_plans(std::vector<QuestionPlans> plans) {
  std::unordered_map<std::string, PlanSet> out;
  for (auto& qp : plans) {
    if (!out.emplace(qp.question_id, std::move(qp.plans)).second)
      throw DataError("duplicate plan entry for question " + qp.question_id);
  }
  return out;
}

std::vector<QuestionPaths> read_paths(std::istream& in, const std::string& source) {
  std::vector<QuestionPaths> out;
  for_each_json_line(in, source, [&](const json& doc) {
    QuestionPaths qp;
    qp.question_id = id_field(doc, "question_id");
    qp.paths = doc.at("paths").get<std::vector<std::vector<std::string>>>();
    qp.truncated = doc.value("truncated", false);
    out.push_back(std::move(qp));
  });
  return out;
}

std::vector<QuestionPaths> read_paths_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_paths(in, path.string());
}

void write_paths_line(std::ostream& out, const QuestionPaths& qp) {
  json doc = {{"question_id", qp.question_id}, {"paths", qp.paths}, {"truncated", qp.truncated}};
  out << doc.dump() << '\n';
}

std::vector<Prediction> read_predictions(std::istream& in, const std::string& source) {
  std::vector<Prediction> out;
  for_each_json_line(in, source, [&](const json& doc) {
    Prediction p;
    p.id = id_field(doc, "id");
    p.answers.answers = string_array(doc, "prediction");
    if (doc.contains("mode")) {
      const auto mode = parse_answer_mode(doc["mode"].get<std::string>());
      if (!mode) throw DataError("unknown answer mode " + doc["mode"].dump());
      p.answers.mode = *mode;
    }
    if (doc.contains("raw_text") && doc["raw_text"].is_string())
      p.answers.raw_text = doc["raw_text"].get<std::string>();
    p.failed = doc.value("failed", false);
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<Prediction> read_predictions_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_predictions(in, path.string());
}

void write_prediction_line(std::ostream& out, const Prediction& p) {
  json doc = {{"id", p.id},
              {"prediction", p.answers.answers},
              {"mode", std::string(to_string(p.answers.mode))}};
  if (p.answers.raw_text) doc["raw_text"] = *p.answers.raw_text;
  if (p.failed) doc["failed"] = true;
  out << doc.dump() << '\n';
}

std::vector<InstructionRecord> read_records(std::istream& in, const std::string& source) {
  std::vector<InstructionRecord> out;
  for_each_json_line(in, source, [&](const json& doc) {
    out.push_back({doc.at("instruction").get<std::string>(), doc.at("input").get<std::string>(),
                   doc.at("output").get<std::string>()});
  });
  return out;
}

void write_record_line(std::ostream& out, const InstructionRecord& r) {
  json doc = {{"instruction", r.instruction}, {"input", r.input}, {"output", r.output}};
  out << doc.dump() << '\n';
}

std::optional<ReasoningPath> reasoning_path_from_labels(const std::vector<std::string>& labels,
                                                        const KnowledgeGraph& g) {
  if (labels.empty() || labels.size() % 2 == 0) return std::nullopt;
  auto start = g.find_entity(labels[0]);
  if (!start) return std::nullopt;
  ReasoningPath path{*start, {}};
  for (std::size_t i = 1; i + 1 < labels.size(); i += 2) {
    auto r = g.find_relation(labels[i]);
    auto e = g.find_entity(labels[i + 1]);
    if (!r || !e) return std::nullopt;
    path.steps.push_back({*r, *e});
  }
  return path;
}

}  // namespace kgpath
