#include "kgpath/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "kgpath/dataset.hpp"
#include "kgpath/errors.hpp"
#include "kgpath/parallel.hpp"

namespace kgpath {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> normalized_unique(std::span<const std::string> items) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : items) {
    auto key = normalize_answer(s);
    if (key.empty()) continue;
    if (seen.insert(key).second) out.push_back(std::move(key));
  }
  return out;
}

struct Accumulator {
  double hit = 0, precision = 0, recall = 0, f1 = 0;
  std::size_t n = 0;

  void add(const QuestionScore& s) {
    hit += s.hit;
    precision += s.precision;
    recall += s.recall;
    f1 += s.f1;
    ++n;
  }
  MetricSummary summary() const {
    MetricSummary m;
    m.n_questions = n;
    if (n == 0) return m;
    const double d = static_cast<double>(n);
    m.hits_at_1 = hit / d;
    m.precision = precision / d;
    m.recall = recall / d;
    m.f1 = f1 / d;
    return m;
  }
};

}  // namespace

QuestionScore score_question(std::span<const std::string> predicted,
                             std::span<const std::string> gold) {
  const auto pred = normalized_unique(predicted);
  const auto truth = normalized_unique(gold);
  const std::unordered_set<std::string> truth_set(truth.begin(), truth.end());

  QuestionScore s;
  if (!pred.empty() && truth_set.count(pred.front())) s.hit = 1;
  std::size_t overlap = 0;
  for (const auto& p : pred) overlap += truth_set.count(p);
  if (!pred.empty()) s.precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  if (!truth.empty()) s.recall = static_cast<double>(overlap) / static_cast<double>(truth.size());
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

MetricReport score(std::span<const Prediction> predictions, std::span<const QAInstance> gold) {
  std::unordered_map<std::string, std::size_t> gold_index;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold_index.emplace(gold[i].id, i).second)
      throw DataError("duplicate gold question id " + gold[i].id);
  }
  std::vector<const Prediction*> by_gold(gold.size(), nullptr);
  MetricReport report;
  for (const auto& p : predictions) {
    auto it = gold_index.find(p.id);
    if (it == gold_index.end()) throw DataError("prediction for unknown question id " + p.id);
    if (by_gold[it->second] != nullptr) throw DataError("duplicate prediction id " + p.id);
    by_gold[it->second] = &p;
    if (p.failed) ++report.failures;
  }

  Accumulator overall;
  std::map<std::string, Accumulator> hops, answers;
  for (const auto& name : {"1", "2", ">=3"}) hops[name];
  for (const auto& name : {"1", "2-4", "5-9", ">=10"}) answers[name];
  const std::vector<std::string> empty;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& qa = gold[i];
    const auto& predicted = by_gold[i] ? by_gold[i]->answers.answers : empty;
    const auto s = score_question(predicted, qa.answer_entities);
    overall.add(s);
    hops[qa.hop_count ? hop_bucket(*qa.hop_count) : "unknown"].add(s);
    answers[answer_bucket(normalized_unique(qa.answer_entities).size())].add(s);
  }
  report.overall = overall.summary();
  for (const auto& [k, acc] : hops) report.by_hops[k] = acc.summary();
  for (const auto& [k, acc] : answers) report.by_answers[k] = acc.summary();
  return report;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // Column widths count code points, not bytes.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return cps >= width ? s + " " : s + std::string(width - cps, ' ');
}

void metric_row(std::ostringstream& out, const std::string& name, const MetricSummary& m) {
  out << pad(name, 22) << pad(pct(m.precision), 11) << pad(pct(m.recall), 9)
      << pad(pct(m.f1), 9) << pad(pct(m.hits_at_1), 9) << m.n_questions << '\n';
}

void metric_header(std::ostringstream& out, const std::string& first) {
  out << pad(first, 22) << pad("Precision", 11) << pad("Recall", 9) << pad("F1", 9)
      << pad("Hits@1", 9) << "N" << '\n';
}

constexpr const char* kAveraging =
    "# macro-averaged over questions; answers matched after trim, whitespace collapse and "
    "case-fold; Hits@1 uses the first prediction\n";

ordered_json summary_json(const MetricSummary& m) {
  ordered_json j;
  j["hits_at_1"] = m.hits_at_1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["n_questions"] = m.n_questions;
  return j;
}

ordered_json report_json(const MetricReport& r) {
  ordered_json j;
  j["averaging"] = "macro";
  j["overall"] = summary_json(r.overall);
  j["failures"] = r.failures;
  j["by_hops"] = ordered_json::object();
  for (const auto& [k, m] : r.by_hops) j["by_hops"][k] = summary_json(m);
  j["by_answers"] = ordered_json::object();
  for (const auto& [k, m] : r.by_answers) j["by_answers"][k] = summary_json(m);
  if (!r.retrieval_profile.empty()) {
    j["retrieval_profile"] = ordered_json::array();
    for (const auto& row : r.retrieval_profile)
      j["retrieval_profile"].push_back({{"k", row.k},
                                        {"mean_paths", row.mean_paths},
                                        {"mean_seconds", row.mean_seconds},
                                        {"coverage", row.coverage}});
  }
  return j;
}

}  // namespace

std::string format_report_text(const MetricReport& report, const std::string& title) {
  std::ostringstream out;
  out << kAveraging;
  metric_header(out, title.empty() ? "Split" : title);
  metric_row(out, "overall", report.overall);
  for (const auto& [k, m] : report.by_hops) {
    if (m.n_questions > 0) metric_row(out, "hops " + k, m);
  }
  for (const auto& [k, m] : report.by_answers) {
    if (m.n_questions > 0) metric_row(out, "answers " + k, m);
  }
  out << "failures: " << report.failures << '\n';
  return out.str();
}

std::string format_report_json(const MetricReport& report) {
  return report_json(report).dump(2) + "\n";
}

QuestionRetrieval retrieve_for_plans(const KnowledgeGraph& g,
                                     std::span<const EntityId> question_entities,
                                     const PlanSet& plans, const RetrievalOptions& options) {
  QuestionRetrieval out;
  std::set<ReasoningPath> unique;
  for (const auto& plan : plans.plans) {
    ++out.plans;
    auto grounding = ground_plan(plan.relations, g);
    if (!grounding.path) {
      ++out.ungrounded;
      continue;
    }
    if (question_entities.empty()) continue;
    auto r = retrieve_reasoning_paths(g, question_entities, *grounding.path, options);
    out.truncated = out.truncated || r.truncated;
    for (auto& p : r.paths) unique.insert(std::move(p));
  }
  out.paths.assign(unique.begin(), unique.end());
  return out;
}

PipelineResult run_pipeline(const KnowledgeGraph& g, std::span<const QAInstance> split,
                            const Planner& planner, const PipelineOptions& options) {
  if (options.mode == AnswerMode::kLlm && options.client == nullptr)
    throw ContractError("llm answer mode needs a chat client");

  struct Slot {
    Prediction prediction;
    PipelineCounters counters;
  };
  std::vector<Slot> slots(split.size());

  parallel_for(split.size(), options.parallelism, [&](std::size_t i) {
    const auto& qa = split[i];
    auto& slot = slots[i];
    auto& pred = slot.prediction;
    pred.id = qa.id;
    pred.answers.mode = options.mode;
    try {
      std::vector<ReasoningPath> paths;
      if (options.use_paths) {
        const auto resolved = resolve(qa, g);
        if (resolved.question_entities.empty()) ++slot.counters.unresolved_questions;
        const auto plans = planner.plan(qa, options.k);
        if (plans.empty()) ++slot.counters.questions_without_plans;
        auto r = retrieve_for_plans(g, resolved.question_entities, plans, options.retrieval);
        slot.counters.plans += r.plans;
        slot.counters.ungrounded_plans += r.ungrounded;
        if (r.truncated) ++slot.counters.truncated_retrievals;
        paths = std::move(r.paths);
      }
      switch (options.mode) {
        case AnswerMode::kVote:
          pred.answers = vote_answers(paths, g, options.top_n);
          break;
        case AnswerMode::kRaw:
          pred.answers = raw_endpoint_answers(paths, g);
          break;
        case AnswerMode::kLlm:
          pred.answers =
              llm_reason(*options.client, qa.question, paths, g, options.prompt, options.examples);
          break;
      }
    } catch (const Error& e) {
      pred.answers = AnswerSet{};
      pred.answers.mode = options.mode;
      pred.answers.raw_text = e.what();
      pred.failed = true;
      ++slot.counters.failures;
    }
  });

  PipelineResult result;
  result.predictions.reserve(slots.size());
  for (auto& s : slots) {
    auto& c = result.counters;
    c.failures += s.counters.failures;
    c.plans += s.counters.plans;
    c.ungrounded_plans += s.counters.ungrounded_plans;
    c.questions_without_plans += s.counters.questions_without_plans;
    c.truncated_retrievals += s.counters.truncated_retrievals;
    c.unresolved_questions += s.counters.unresolved_questions;
    result.predictions.push_back(std::move(s.prediction));
  }
  result.report = score(result.predictions, split);
  return result;
}

std::vector<AblationRow> run_ablation(const KnowledgeGraph& g, std::span<const QAInstance> split,
                                      const Planner& planner, const AblationOptions& options) {
  PipelineOptions base;
  base.k = options.k;
  base.top_n = options.top_n;
  base.retrieval = options.retrieval;
  base.parallelism = options.parallelism;
  base.client = options.client;

  std::vector<AblationRow> rows;
  auto add = [&](std::string name, AnswerMode mode, bool use_paths, bool random) {
    AblationRow row;
    row.name = std::move(name);
    row.options = base;
    row.options.mode = mode;
    row.options.use_paths = use_paths;
    row.random_plans = random;
    rows.push_back(std::move(row));
  };
  add("full", options.reasoning, true, false);
  add("w/o planning", options.reasoning, false, false);
  add("w/o reasoning", AnswerMode::kRaw, true, false);
  add("w/ random plans", options.reasoning, true, true);
  add("w/ vote reasoning", AnswerMode::kVote, true, false);

  const RandomPlanner random_planner(g, options.seed, options.random_max_len);
  for (auto& row : rows) {
    const Planner& p = row.random_plans ? static_cast<const Planner&>(random_planner) : planner;
    row.result = run_pipeline(g, split, p, row.options);
  }
  return rows;
}

std::string format_ablation_text(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << kAveraging;
  metric_header(out, "Method");
  for (const auto& row : rows) metric_row(out, row.name, row.result.report.overall);
  return out.str();
}

std::string format_ablation_json(const std::vector<AblationRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["name"] = row.name;
    r["mode"] = std::string(to_string(row.options.mode));
    r["planner"] = row.random_plans ? "random" : (row.options.use_paths ? "given" : "none");
    r["report"] = report_json(row.result.report);
    j.push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::vector<ProfileRow> profile_retrieval(const KnowledgeGraph& g,
                                          std::span<const QAInstance> split,
                                          const Planner& planner,
                                          std::span<const std::size_t> k_values,
                                          const RetrievalOptions& retrieval) {
  if (k_values.empty()) throw ContractError("profile_retrieval: empty K list");
  std::vector<ProfileRow> rows;
  std::vector<ResolvedQuestion> resolved;
  resolved.reserve(split.size());
  for (const auto& qa : split) resolved.push_back(resolve(qa, g));

  for (auto k : k_values) {
    ProfileRow row;
    row.k = k;
    double paths = 0, seconds = 0, covered = 0;
    for (std::size_t i = 0; i < split.size(); ++i) {
      const auto plans = planner.plan(split[i], k);
      const auto start = std::chrono::steady_clock::now();
      const auto r = retrieve_for_plans(g, resolved[i].question_entities, plans, retrieval);
      seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      paths += static_cast<double>(r.paths.size());
      const auto& answers = resolved[i].answer_entities;
      const bool hit = std::any_of(r.paths.begin(), r.paths.end(), [&](const ReasoningPath& p) {
        return std::binary_search(answers.begin(), answers.end(), p.end());
      });
      covered += hit ? 1 : 0;
    }
    if (!split.empty()) {
      const double n = static_cast<double>(split.size());
      row.mean_paths = paths / n;
      row.mean_seconds = seconds / n;
      row.coverage = covered / n;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_profile_text(const std::vector<ProfileRow>& rows) {
  std::ostringstream out;
  out << pad("K", 6) << pad("mean paths", 14) << pad("mean time (ms)", 16) << "coverage" << '\n';
  for (const auto& r : rows) {
    char paths[32], ms[32], cov[32];
    std::snprintf(paths, sizeof(paths), "%.3f", r.mean_paths);
    std::snprintf(ms, sizeof(ms), "%.4f", 1000.0 * r.mean_seconds);
    std::snprintf(cov, sizeof(cov), "%.4f", r.coverage);
    out << pad(std::to_string(r.k), 6) << pad(paths, 14) << pad(ms, 16) << cov << '\n';
  }
  return out.str();
}

std::string format_profile_json(const std::vector<ProfileRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& r : rows)
    j.push_back({{"k", r.k},
                 {"mean_paths", r.mean_paths},
                 {"mean_seconds", r.mean_seconds},
                 {"coverage", r.coverage}});
  return j.dump(2) + "\n";
}

}  // namespace kgpath
