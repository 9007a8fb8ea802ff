// kgpath: command-line front end over the kgpath library.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 transport error.
// File outputs are written to <path>.partial and renamed on success; each one
// gets a <path>.meta.json sidecar holding the effective configuration.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgpath/dataset.hpp"
#include "kgpath/errors.hpp"
#include "kgpath/eval.hpp"
#include "kgpath/formats.hpp"
#include "kgpath/kg_store.hpp"
#include "kgpath/llm_client.hpp"
#include "kgpath/parallel.hpp"
#include "kgpath/paths.hpp"
#include "kgpath/planning.hpp"
#include "kgpath/reasoning.hpp"
#include "kgpath/synthetic.hpp"

namespace fs = std::filesystem;
using namespace kgpath;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTransport = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string g_effective_config;

// Output file that only appears under its final name once commit() runs.
class PartialFile {
 public:
  explicit PartialFile(fs::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    partial_ = path_;
    partial_ += ".partial";
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot write " + partial_.string());
  }
  ~PartialFile() {
    if (out_.is_open()) out_.flush();
  }
  std::ostream& stream() { return out_; }

  void commit() {
    out_.close();
    if (!out_) throw DataError("write failed for " + partial_.string());
    fs::rename(partial_, path_);
    auto meta = path_;
    meta += ".meta.json";
    std::ofstream m(meta, std::ios::binary | std::ios::trunc);
    nlohmann::ordered_json doc;
    doc["tool"] = "kgpath";
    doc["config"] = g_effective_config;
    m << doc.dump(2) << '\n';
  }

 private:
  fs::path path_;
  fs::path partial_;
  std::ofstream out_;
};

void write_text_file(const fs::path& path, const std::string& text) {
  PartialFile f(path);
  f.stream() << text;
  f.commit();
}

std::size_t resolve_parallelism(std::size_t requested, bool llm_stage) {
  if (requested > 0) return requested;
  return llm_stage ? 4 : default_parallelism();
}

// ---------------------------------------------------------------------------
// Shared option groups

struct GraphArgs {
  std::string kg;
  bool inverse = false;

  void add(CLI::App* app) {
    app->add_option("--kg", kg, "Triple file (TSV, optionally gzip)")->required()->check(CLI::ExistingFile);
    app->add_flag("--inverse", inverse, "Materialize inverse relations with a '~' prefix");
  }
  KnowledgeGraph load() const {
    LoadOptions o;
    o.add_inverse = inverse;
    return load_graph_file(kg, o);
  }
};

struct LlmArgs {
  std::string url = "http://127.0.0.1:8000/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_ms = 60000;
  int max_retries = 3;
  int max_in_flight = 4;
  double temperature = 0.0;
  int max_tokens = 512;
  std::string cache_dir;

  void add(CLI::App* app) {
    app->add_option("--llm-url", url, "Chat endpoint base URL (…/v1)")->envname("KGPATH_LLM_URL")->capture_default_str();
    app->add_option("--model", model, "Model identifier sent to the endpoint")->envname("KGPATH_MODEL");
    app->add_option("--api-key-env", api_key_env, "Environment variable holding the API key")->capture_default_str();
    app->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-retries", max_retries, "Retries on transient failures")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--max-in-flight", max_in_flight, "Concurrent requests")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--temperature", temperature)->capture_default_str();
    app->add_option("--max-tokens", max_tokens)->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--cache-dir", cache_dir, "On-disk response cache for reproducible reruns");
  }
  std::unique_ptr<HttpChatClient> make(bool verbose) const {
    ClientConfig c;
    c.base_url = url;
    c.model_id = model;
    c.api_key_env = api_key_env;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.max_retries = max_retries;
    c.max_in_flight = max_in_flight;
    c.temperature = temperature;
    c.max_tokens = max_tokens;
    if (!cache_dir.empty()) c.cache_dir = fs::path(cache_dir);
    c.verbose = verbose;
    return std::make_unique<HttpChatClient>(std::move(c));
  }
};

struct PlannerArgs {
  std::string backend = "oracle";
  std::string plans_file;
  int max_len = 4;
  std::uint64_t seed = 0;

  // with_random: offer the random backend and its --seed flag.
  void add(CLI::App* app, const std::string& flag, bool with_random = false) {
    std::vector<std::string> backends = {"oracle", "file", "llm"};
    if (with_random) {
      backends.push_back("random");
      app->add_option("--seed", seed, "Seed for the random backend")->capture_default_str();
    }
    app->add_option(flag, backend, "Planner backend")
        ->check(CLI::IsMember(backends))
        ->capture_default_str();
    app->add_option("--plans-file", plans_file, "Plans JSONL for the file backend")->check(CLI::ExistingFile);
    app->add_option("--max-len", max_len, "Maximum relation-path length for the oracle")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
  std::unique_ptr<Planner> make(const KnowledgeGraph& g, ChatClient* client) const {
    if (backend == "oracle") {
      ShortestPathOptions o;
      o.max_len = max_len;
      return std::make_unique<OraclePlanner>(g, o);
    }
    if (backend == "file") {
      if (plans_file.empty()) throw UsageError("--plans-file is required for the file backend");
      return std::make_unique<FilePlanner>(index_plans(read_plans_file(plans_file)));
    }
    if (backend == "random") return std::make_unique<RandomPlanner>(g, seed, max_len);
    if (client == nullptr) throw UsageError("llm backend needs --model");
    return std::make_unique<LlmPlanner>(*client);
  }
};

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("bad K value '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty K list");
  if (!std::is_sorted(out.begin(), out.end())) throw UsageError("K list must be ascending");
  return out;
}

std::vector<EntityId> resolve_labels(const KnowledgeGraph& g, const std::vector<std::string>& labels) {
  std::vector<EntityId> out;
  for (const auto& l : labels) {
    auto e = g.find_entity(l);
    if (!e) throw DataError("unknown entity '" + l + "'");
    out.push_back(*e);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph relation-path planning, retrieval and evaluation"};
  app.require_subcommand(1);
  app.allow_config_extras(false);
  app.set_config("--config", "", "TOML/INI config file (flags > config > environment > defaults)");
  bool verbose = false;
  std::size_t parallelism = 0;
  app.add_flag("-v,--verbose", verbose, "Log redacted endpoint traffic to stderr");
  app.add_option("--parallelism", parallelism,
                 "Worker threads (0 = processors for pure stages, 4 for llm stages)")
      ->capture_default_str();

  // kg -----------------------------------------------------------------------
  auto* kg = app.add_subcommand("kg", "Inspect graphs");
  kg->require_subcommand(1);
  auto* kg_stats = kg->add_subcommand("stats", "Entity / relation / triple counts");
  GraphArgs stats_graph;
  bool stats_json = false;
  stats_graph.add(kg_stats);
  kg_stats->add_flag("--json", stats_json, "Emit JSON");

  auto* kg_sub = kg->add_subcommand("subgraph", "Hop-bounded subgraph around seed entities");
  GraphArgs sub_graph;
  std::vector<std::string> sub_seeds;
  std::string sub_qa, sub_out;
  int sub_hops = 2;
  sub_graph.add(kg_sub);
  kg_sub->add_option("--seed-entity", sub_seeds, "Seed entity label (repeatable)");
  kg_sub->add_option("--qa", sub_qa, "Use every question entity in this QA JSONL as a seed")->check(CLI::ExistingFile);
  kg_sub->add_option("--max-hops", sub_hops)->capture_default_str()->check(CLI::PositiveNumber);
  kg_sub->add_option("--out", sub_out, "Output TSV")->required();

  // synth ----------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic KG and QA split");
  SyntheticOptions synth_opts;
  std::string synth_dir;
  synth->add_option("--out-dir", synth_dir)->required();
  synth->add_option("--entities", synth_opts.entities)->capture_default_str();
  synth->add_option("--relations", synth_opts.relations)->capture_default_str();
  synth->add_option("--triples", synth_opts.triples)->capture_default_str();
  synth->add_option("--questions", synth_opts.questions)->capture_default_str();
  synth->add_option("--max-hops", synth_opts.max_hops)->capture_default_str();
  synth->add_option("--multi-answer-share", synth_opts.multi_answer_share)->capture_default_str();
  synth->add_option("--seed", synth_opts.seed)->required();

  // plans extract ------------------------------------------------------------
  auto* plans = app.add_subcommand("plans", "Gold relation paths");
  plans->require_subcommand(1);
  auto* extract = plans->add_subcommand("extract", "Shortest relation paths from question to answer entities");
  GraphArgs extract_graph;
  std::string extract_qa, extract_out;
  int extract_max_len = 4;
  std::size_t extract_cap = 0;
  extract_graph.add(extract);
  extract->add_option("--qa", extract_qa)->required()->check(CLI::ExistingFile);
  extract->add_option("--max-len", extract_max_len)->capture_default_str()->check(CLI::PositiveNumber);
  extract->add_option("--plan-cap", extract_cap, "Keep at most this many plans per question (0 = all)")->capture_default_str();
  extract->add_option("--out", extract_out)->required();

  // dataset build ------------------------------------------------------------
  auto* dataset = app.add_subcommand("dataset", "Instruction-tuning data");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Planning and reasoning instruction JSONL plus statistics");
  GraphArgs build_graph;
  std::string build_qa, build_dir;
  DatasetOptions build_opts;
  build_graph.add(build);
  build->add_option("--qa", build_qa)->required()->check(CLI::ExistingFile);
  build->add_option("--max-len", build_opts.max_len)->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--plan-cap", build_opts.plan_cap, "Plans kept per question (0 = all)")->capture_default_str();
  build->add_option("--max-paths", build_opts.retrieval.max_paths)->capture_default_str();
  build->add_option("--out-dir", build_dir)->required();

  // plan ---------------------------------------------------------------------
  auto* plan = app.add_subcommand("plan", "Top-K relation-path plans per question");
  GraphArgs plan_graph;
  PlannerArgs plan_planner;
  LlmArgs plan_llm;
  std::string plan_qa, plan_out;
  std::size_t plan_k = 3;
  plan_graph.add(plan);
  plan_planner.add(plan, "--backend", true);
  plan_llm.add(plan);
  plan->add_option("--qa", plan_qa)->required()->check(CLI::ExistingFile);
  plan->add_option("--top-k", plan_k)->capture_default_str();
  plan->add_option("--out", plan_out)->required();

  // retrieve -----------------------------------------------------------------
  auto* retrieve = app.add_subcommand("retrieve", "Reasoning paths for each question's plans");
  GraphArgs retrieve_graph;
  std::string retrieve_qa, retrieve_plans, retrieve_out;
  RetrievalOptions retrieve_opts;
  retrieve_graph.add(retrieve);
  retrieve->add_option("--qa", retrieve_qa)->required()->check(CLI::ExistingFile);
  retrieve->add_option("--plans", retrieve_plans)->required()->check(CLI::ExistingFile);
  retrieve->add_option("--max-paths", retrieve_opts.max_paths)->capture_default_str();
  retrieve->add_option("--out", retrieve_out)->required();

  // answer -------------------------------------------------------------------
  auto* answer = app.add_subcommand("answer", "Answers from retrieved reasoning paths");
  GraphArgs answer_graph;
  LlmArgs answer_llm;
  std::string answer_qa, answer_paths, answer_out, answer_mode = "vote", answer_prompt = "answer",
                                                   answer_examples;
  std::size_t answer_top_n = 5;
  answer_graph.add(answer);
  answer_llm.add(answer);
  answer->add_option("--qa", answer_qa)->required()->check(CLI::ExistingFile);
  answer->add_option("--paths", answer_paths)->required()->check(CLI::ExistingFile);
  answer->add_option("--mode", answer_mode)->check(CLI::IsMember({"llm", "vote", "raw"}))->capture_default_str();
  answer->add_option("--top-n", answer_top_n, "Answers kept in vote mode")->capture_default_str()->check(CLI::PositiveNumber);
  answer->add_option("--prompt", answer_prompt)->check(CLI::IsMember({"answer", "explain"}))->capture_default_str();
  answer->add_option("--examples-file", answer_examples, "Few-shot block for the explain prompt")->check(CLI::ExistingFile);
  answer->add_option("--out", answer_out)->required();

  // eval ---------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Hits@1 / precision / recall / F1");
  std::string eval_qa, eval_pred, eval_json_out, eval_text_out;
  bool eval_json = false;
  eval->add_option("--qa", eval_qa)->required()->check(CLI::ExistingFile);
  eval->add_option("--predictions", eval_pred)->required()->check(CLI::ExistingFile);
  eval->add_flag("--json", eval_json, "Print the JSON report instead of the table");
  eval->add_option("--json-out", eval_json_out, "Also write the JSON report here");
  eval->add_option("--text-out", eval_text_out, "Also write the text report here");

  // ablate -------------------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "Full pipeline plus the planning/reasoning ablations");
  GraphArgs ablate_graph;
  PlannerArgs ablate_planner;
  LlmArgs ablate_llm;
  std::string ablate_qa, ablate_dir, ablate_reasoning = "vote";
  std::size_t ablate_k = 3, ablate_top_n = 5;
  std::uint64_t ablate_seed = 0;
  ablate_graph.add(ablate);
  ablate_planner.add(ablate, "--planner");
  ablate_llm.add(ablate);
  ablate->add_option("--qa", ablate_qa)->required()->check(CLI::ExistingFile);
  ablate->add_option("--reasoning", ablate_reasoning, "Reasoning mode of the full pipeline")
      ->check(CLI::IsMember({"llm", "vote"}))
      ->capture_default_str();
  ablate->add_option("--top-k", ablate_k)->capture_default_str();
  ablate->add_option("--top-n", ablate_top_n)->capture_default_str()->check(CLI::PositiveNumber);
  ablate->add_option("--seed", ablate_seed, "Seed for the random-plans ablation")->required();
  ablate->add_option("--out-dir", ablate_dir)->required();

  // profile ------------------------------------------------------------------
  auto* profile = app.add_subcommand("profile", "Retrieval cost and answer coverage versus K");
  GraphArgs profile_graph;
  PlannerArgs profile_planner;
  LlmArgs profile_llm;
  std::string profile_qa, profile_k = "1,2,3,5", profile_out;
  bool profile_json = false;
  profile_graph.add(profile);
  profile_planner.add(profile, "--planner");
  profile_llm.add(profile);
  profile->add_option("--qa", profile_qa)->required()->check(CLI::ExistingFile);
  profile->add_option("--k", profile_k, "Comma-separated ascending K values")->capture_default_str();
  profile->add_flag("--json", profile_json);
  profile->add_option("--out", profile_out, "Also write the JSON profile here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  g_effective_config = app.config_to_str(true, false);

  try {
    if (kg_stats->parsed()) {
      const auto g = stats_graph.load();
      const auto s = g.stats();
      if (stats_json) {
        nlohmann::ordered_json j;
        j["entities"] = s.entities;
        j["relations"] = s.relations;
        j["triples"] = s.triples;
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << "entities   " << s.entities << "\nrelations  " << s.relations
                  << "\ntriples    " << s.triples << '\n';
      }
    } else if (kg_sub->parsed()) {
      const auto g = sub_graph.load();
      std::vector<std::string> labels = sub_seeds;
      if (!sub_qa.empty()) {
        for (const auto& qa : read_qa_file(sub_qa)) {
          for (const auto& e : qa.question_entities) {
            if (g.find_entity(e)) labels.push_back(e);
          }
        }
      }
      if (labels.empty()) throw UsageError("no seeds: pass --seed-entity or --qa");
      const auto seeds = resolve_labels(g, labels);
      const auto sub = extract_subgraph(g, seeds, sub_hops);
      PartialFile f(sub_out);
      save_graph(sub, f.stream());
      f.commit();
      const auto s = sub.stats();
      std::cout << "subgraph: " << s.entities << " entities, " << s.relations << " relations, "
                << s.triples << " triples\n";
    } else if (synth->parsed()) {
      const auto bench = generate_benchmark(synth_opts);
      {
        PartialFile f(fs::path(synth_dir) / "kg.tsv");
        save_graph(bench.graph, f.stream());
        f.commit();
      }
      {
        PartialFile f(fs::path(synth_dir) / "qa.jsonl");
        write_qa(f.stream(), bench.questions);
        f.commit();
      }
      const auto s = bench.graph.stats();
      std::cout << "synthetic: " << s.triples << " triples, " << bench.questions.size()
                << " questions\n";
    } else if (extract->parsed()) {
      const auto g = extract_graph.load();
      const auto split = read_qa_file(extract_qa);
      ShortestPathOptions sp;
      sp.max_len = extract_max_len;
      std::vector<GoldPlans> gold(split.size());
      std::vector<ResolvedQuestion> resolved(split.size());
      parallel_for(split.size(), resolve_parallelism(parallelism, false), [&](std::size_t i) {
        resolved[i] = resolve(split[i], g);
        gold[i] = gold_plans(g, resolved[i], sp, extract_cap);
      });
      std::size_t with_plans = 0, unreachable = 0, unresolved = 0, truncated = 0, total = 0;
      PartialFile f(extract_out);
      for (std::size_t i = 0; i < split.size(); ++i) {
        QuestionPlans qp{split[i].id, {}};
        for (auto& p : gold[i].plans) qp.plans.plans.push_back({std::move(p), std::nullopt});
        write_plans_line(f.stream(), qp);
        total += qp.plans.size();
        if (resolved[i].question_entities.empty() || resolved[i].answer_entities.empty()) {
          ++unresolved;
        } else if (qp.plans.empty()) {
          ++unreachable;
        } else {
          ++with_plans;
        }
        if (gold[i].truncated) ++truncated;
      }
      f.commit();
      std::cout << "questions " << split.size() << "\nwith plans " << with_plans
                << "\nunreachable " << unreachable << "\nunresolved " << unresolved
                << "\nplans " << total << "\ntruncated " << truncated << '\n';
    } else if (build->parsed()) {
      const auto g = build_graph.load();
      const auto split = read_qa_file(build_qa);
      build_opts.parallelism = resolve_parallelism(parallelism, false);
      const auto planning = build_planning_instances(split, g, build_opts);
      const auto reasoning = build_reasoning_instances(split, g, build_opts);
      {
        PartialFile f(fs::path(build_dir) / "planning.jsonl");
        for (const auto& r : planning.records) write_record_line(f.stream(), r);
        f.commit();
      }
      {
        PartialFile f(fs::path(build_dir) / "reasoning.jsonl");
        for (const auto& r : reasoning.records) write_record_line(f.stream(), r);
        f.commit();
      }
      const auto stats = dataset_stats(planning, reasoning);
      write_text_file(fs::path(build_dir) / "stats.txt", format_stats_text(stats));
      write_text_file(fs::path(build_dir) / "stats.json", format_stats_json(stats) + "\n");
      std::cout << format_stats_text(stats);
    } else if (plan->parsed()) {
      const auto g = plan_graph.load();
      const auto split = read_qa_file(plan_qa);
      std::unique_ptr<HttpChatClient> client;
      if (plan_planner.backend == "llm") client = plan_llm.make(verbose);
      const auto planner = plan_planner.make(g, client.get());
      std::vector<PlanSet> out(split.size());
      parallel_for(split.size(), resolve_parallelism(parallelism, client != nullptr),
                   [&](std::size_t i) { out[i] = planner->plan(split[i], plan_k); });
      PartialFile f(plan_out);
      std::size_t ungrounded = 0;
      for (std::size_t i = 0; i < split.size(); ++i) {
        for (const auto& p : out[i].plans) ungrounded += ground_plan(p.relations, g).path ? 0 : 1;
        write_plans_line(f.stream(), {split[i].id, out[i]});
      }
      f.commit();
      std::cerr << "planned " << split.size() << " questions; ungrounded plans: " << ungrounded;
      if (auto* llm = dynamic_cast<const LlmPlanner*>(planner.get()))
        std::cerr << "; unparseable candidates: " << llm->structural_failures();
      std::cerr << '\n';
    } else if (retrieve->parsed()) {
      const auto g = retrieve_graph.load();
      const auto split = read_qa_file(retrieve_qa);
      const auto planner = FilePlanner(index_plans(read_plans_file(retrieve_plans)));
      std::vector<QuestionPaths> out(split.size());
      parallel_for(split.size(), resolve_parallelism(parallelism, false), [&](std::size_t i) {
        const auto resolved = resolve(split[i], g);
        const auto plans = planner.plan(split[i], std::numeric_limits<std::size_t>::max());
        const auto r = retrieve_for_plans(g, resolved.question_entities, plans, retrieve_opts);
        out[i].question_id = split[i].id;
        out[i].truncated = r.truncated;
        for (const auto& p : r.paths) out[i].paths.push_back(to_labels(p, g));
      });
      PartialFile f(retrieve_out);
      for (const auto& qp : out) write_paths_line(f.stream(), qp);
      f.commit();
    } else if (answer->parsed()) {
      const auto g = answer_graph.load();
      const auto split = read_qa_file(answer_qa);
      std::unordered_map<std::string, QuestionPaths> by_id;
      for (auto& qp : read_paths_file(answer_paths)) {
        const auto id = qp.question_id;
        if (!by_id.emplace(id, std::move(qp)).second)
          throw DataError("duplicate paths entry for question " + id);
      }
      const auto mode = *parse_answer_mode(answer_mode);
      std::unique_ptr<HttpChatClient> client;
      if (mode == AnswerMode::kLlm) client = answer_llm.make(verbose);
      std::string examples;
      if (!answer_examples.empty()) {
        std::ifstream in(answer_examples);
        examples.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      }
      const auto prompt = answer_prompt == "explain" ? PromptMode::kExplain : PromptMode::kAnswer;

      std::vector<Prediction> preds(split.size());
      parallel_for(split.size(), resolve_parallelism(parallelism, client != nullptr), [&](std::size_t i) {
        auto& pred = preds[i];
        pred.id = split[i].id;
        pred.answers.mode = mode;
        std::vector<ReasoningPath> paths;
        if (auto it = by_id.find(split[i].id); it != by_id.end()) {
          for (const auto& labels : it->second.paths) {
            auto p = reasoning_path_from_labels(labels, g);
            if (!p || !validates(*p, g))
              throw DataError("question " + split[i].id + ": reasoning path not in graph");
            paths.push_back(std::move(*p));
          }
        }
        try {
          switch (mode) {
            case AnswerMode::kVote:
              pred.answers = vote_answers(paths, g, answer_top_n);
              break;
            case AnswerMode::kRaw:
              pred.answers = raw_endpoint_answers(paths, g);
              break;
            case AnswerMode::kLlm:
              pred.answers = llm_reason(*client, split[i].question, paths, g, prompt, examples);
              break;
          }
        } catch (const Error& e) {
          // Same accounting as the in-process pipeline: scored empty, kept.
          pred.answers = AnswerSet{{}, {}, std::string(e.what()), mode};
          pred.failed = true;
        }
      });
      PartialFile f(answer_out);
      std::size_t failures = 0;
      for (const auto& p : preds) {
        write_prediction_line(f.stream(), p);
        failures += p.failed ? 1 : 0;
      }
      f.commit();
      if (failures > 0) std::cerr << "answer: " << failures << " questions failed\n";
    } else if (eval->parsed()) {
      const auto gold = read_qa_file(eval_qa);
      const auto preds = read_predictions_file(eval_pred);
      const auto report = score(preds, gold);
      const auto text = format_report_text(report);
      const auto json = format_report_json(report);
      std::cout << (eval_json ? json : text);
      if (!eval_json_out.empty()) write_text_file(eval_json_out, json);
      if (!eval_text_out.empty()) write_text_file(eval_text_out, text);
    } else if (ablate->parsed()) {
      const auto g = ablate_graph.load();
      const auto split = read_qa_file(ablate_qa);
      AblationOptions o;
      o.reasoning = *parse_answer_mode(ablate_reasoning);
      o.k = ablate_k;
      o.top_n = ablate_top_n;
      o.seed = ablate_seed;
      o.random_max_len = ablate_planner.max_len;
      std::unique_ptr<HttpChatClient> client;
      if (o.reasoning == AnswerMode::kLlm || ablate_planner.backend == "llm")
        client = ablate_llm.make(verbose);
      o.client = client.get();
      o.parallelism = resolve_parallelism(parallelism, client != nullptr);
      const auto planner = ablate_planner.make(g, client.get());
      const auto rows = run_ablation(g, split, *planner, o);
      for (const auto& row : rows) {
        // "w/o planning" -> "w_o_planning"
        std::string stem;
        for (char c : row.name) {
          if (std::isalnum(static_cast<unsigned char>(c))) {
            stem += c;
          } else if (!stem.empty() && stem.back() != '_') {
            stem += '_';
          }
        }
        PartialFile f(fs::path(ablate_dir) / (stem + ".predictions.jsonl"));
        for (const auto& p : row.result.predictions) write_prediction_line(f.stream(), p);
        f.commit();
        write_text_file(fs::path(ablate_dir) / (stem + ".report.json"),
                        format_report_json(row.result.report));
      }
      const auto text = format_ablation_text(rows);
      write_text_file(fs::path(ablate_dir) / "ablation.txt", text);
      write_text_file(fs::path(ablate_dir) / "ablation.json", format_ablation_json(rows));
      std::cout << text;
    } else if (profile->parsed()) {
      const auto g = profile_graph.load();
      const auto split = read_qa_file(profile_qa);
      const auto ks = parse_k_list(profile_k);
      std::unique_ptr<HttpChatClient> client;
      if (profile_planner.backend == "llm") client = profile_llm.make(verbose);
      const auto planner = profile_planner.make(g, client.get());
      const auto rows = profile_retrieval(g, split, *planner, ks);
      const auto json = format_profile_json(rows);
      std::cout << (profile_json ? json : format_profile_text(rows));
      if (!profile_out.empty()) write_text_file(profile_out, json);
    }
  } catch (const UsageError& e) {
    std::cerr << "kgpath: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TransportError& e) {
    std::cerr << "kgpath: " << e.what() << '\n';
    for (const auto& a : e.attempts()) std::cerr << "  " << a << '\n';
    return kExitTransport;
  } catch (const ProtocolError& e) {
    std::cerr << "kgpath: " << e.what() << '\n';
    return kExitTransport;
  } catch (const Error& e) {
    std::cerr << "kgpath: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "kgpath: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
