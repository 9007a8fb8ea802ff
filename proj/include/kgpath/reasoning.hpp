#pragma once
// From retrieved reasoning paths to answers.

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgpath/kg_store.hpp"
#include "kgpath/llm_client.hpp"
#include "kgpath/paths.hpp"

namespace kgpath {

enum class AnswerMode { kLlm, kVote, kRaw };

std::string_view to_string(AnswerMode mode);
std::optional<AnswerMode> parse_answer_mode(std::string_view text);

struct AnswerSet {
  std::vector<std::string> answers;  // ranked, first = top-1
  std::vector<double> scores;        // empty, or aligned with answers
  std::optional<std::string> raw_text;
  AnswerMode mode = AnswerMode::kVote;

  friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

// Trim, collapse internal whitespace runs to one space, ASCII case-fold.
std::string normalize_answer(std::string_view s);

// "e0 → r1 → e1 → ..." per path, one per line, lines sorted and unique.
std::string format_reasoning_paths(std::span<const ReasoningPath> paths, const KnowledgeGraph& g);

enum class PromptMode { kAnswer, kExplain };

inline constexpr std::string_view kReasoningTemplate =
    "Based on the reasoning paths, please answer the given question. Please keep the answer as "
    "simple as possible and return all the possible answers as a list.\n"
    "\n"
    "Reasoning Paths:\n"
    "<Reasoning Paths>\n"
    "\n"
    "Question:\n"
    "<Question>";

inline constexpr std::string_view kExplanationTemplate =
    "Based on the reasoning paths, please answer the given question and explain why.\n"
    "\n"
    "Here are some examples:\n"
    "<Examples>\n"
    "\n"
    "Reasoning Paths:\n"
    "<Reasoning Paths>\n"
    "\n"
    "Question:\n"
    "<Question>";

std::string build_reasoning_prompt(std::string_view question, std::string_view paths_block,
                                   PromptMode mode, std::string_view examples = {});

// Terminal-entity histogram, top_n by count (ties: label order).
AnswerSet vote_answers(std::span<const ReasoningPath> paths, const KnowledgeGraph& g,
                       std::size_t top_n = 5);

// Every distinct terminal entity, scored by count.
AnswerSet raw_endpoint_answers(std::span<const ReasoningPath> paths, const KnowledgeGraph& g);

// Pulls an answer list out of free model text. Tried in order: a bracketed
// list (JSON, or quoted items), lines/commas after an "answer" marker, the
// whole reply as one answer.
std::vector<std::string> parse_answer_list(std::string_view reply);

AnswerSet llm_reason(ChatClient& client, std::string_view question,
                     std::span<const ReasoningPath> paths, const KnowledgeGraph& g,
                     PromptMode mode = PromptMode::kAnswer, std::string_view examples = {});

using AnswerScores = std::map<std::string, double>;

inline const double kDefaultFloorLogProb = std::log(1e-6);

// Per answer, the sum over plans of its log-score; a plan that does not score
// the answer contributes floor_log_prob.
AnswerScores aggregate_scores(const std::map<std::string, AnswerScores>& per_plan,
                              double floor_log_prob = kDefaultFloorLogProb);

}  // namespace kgpath
