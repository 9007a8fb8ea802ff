#include "kgpath/reasoning.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "json.hpp"
#include "kgpath/errors.hpp"
#include "kgpath/planning.hpp"

namespace kgpath {

std::string_view to_string(AnswerMode mode) {
  switch (mode) {
    case AnswerMode::kLlm:
      return "llm";
    case AnswerMode::kVote:
      return "vote";
    case AnswerMode::kRaw:
      return "raw";
  }
  return "?";
}

std::optional<AnswerMode> parse_answer_mode(std::string_view text) {
  if (text == "llm") return AnswerMode::kLlm;
  if (text == "vote") return AnswerMode::kVote;
  if (text == "raw" || text == "raw-endpoints") return AnswerMode::kRaw;
  return std::nullopt;
}

std::string normalize_answer(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::string format_reasoning_paths(std::span<const ReasoningPath> paths, const KnowledgeGraph& g) {
  std::vector<std::string> lines;
  lines.reserve(paths.size());
  for (const auto& p : paths) {
    std::string line = g.entity_label(p.start);
    for (const auto& s : p.steps) {
      line += " → ";
      line += g.relation_label(s.relation);
      line += " → ";
      line += g.entity_label(s.entity);
    }
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string build_reasoning_prompt(std::string_view question, std::string_view paths_block,
                                   PromptMode mode, std::string_view examples) {
  if (mode == PromptMode::kAnswer) {
    const std::pair<std::string_view, std::string_view> slots[] = {
        {"<Reasoning Paths>", paths_block}, {"<Question>", question}};
    return fill_template(kReasoningTemplate, slots);
  }
  const std::pair<std::string_view, std::string_view> slots[] = {
      {"<Examples>", examples}, {"<Reasoning Paths>", paths_block}, {"<Question>", question}};
  return fill_template(kExplanationTemplate, slots);
}

namespace {

struct Tally {
  std::string label;  // smallest original label among those normalizing alike
  double count = 0;
};

std::vector<Tally> terminal_histogram(std::span<const ReasoningPath> paths,
                                      const KnowledgeGraph& g) {
  std::unordered_map<std::string, Tally> by_key;
  for (const auto& p : paths) {
    const auto& label = g.entity_label(p.end());
    auto& t = by_key[normalize_answer(label)];
    if (t.count == 0 || label < t.label) t.label = label;
    t.count += 1;
  }
  std::vector<Tally> out;
  out.reserve(by_key.size());
  for (auto& [_, t] : by_key) out.push_back(std::move(t));
  std::sort(out.begin(), out.end(), [](const Tally& a, const Tally& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.label < b.label;
  });
  return out;
}

AnswerSet from_tallies(const std::vector<Tally>& tallies, std::size_t limit, AnswerMode mode) {
  AnswerSet out;
  out.mode = mode;
  for (std::size_t i = 0; i < tallies.size() && i < limit; ++i) {
    out.answers.push_back(tallies[i].label);
    out.scores.push_back(tallies[i].count);
  }
  return out;
}

}  // namespace

AnswerSet vote_answers(std::span<const ReasoningPath> paths, const KnowledgeGraph& g,
                       std::size_t top_n) {
  if (top_n == 0) throw ContractError("vote_answers: top_n must be >= 1");
  return from_tallies(terminal_histogram(paths, g), top_n, AnswerMode::kVote);
}

AnswerSet raw_endpoint_answers(std::span<const ReasoningPath> paths, const KnowledgeGraph& g) {
  const auto tallies = terminal_histogram(paths, g);
  return from_tallies(tallies, tallies.size(), AnswerMode::kRaw);
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Bullets, numbering and surrounding quotes around a single list item.
std::string clean_item(std::string_view item) {
  item = trim(item);
  if (item.starts_with("- ") || item.starts_with("* ") || item.starts_with("• "))
    item = trim(item.substr(item.find(' ') + 1));
  std::size_t digits = 0;
  while (digits < item.size() && std::isdigit(static_cast<unsigned char>(item[digits]))) ++digits;
  if (digits > 0 && digits + 1 < item.size() && (item[digits] == '.' || item[digits] == ')') &&
      item[digits + 1] == ' ')
    item = trim(item.substr(digits + 2));
  while (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') &&
         item.back() == item.front())
    item = trim(item.substr(1, item.size() - 2));
  return std::string(item);
}

void push_unique(std::vector<std::string>& out, std::string item) {
  if (item.empty()) return;
  const auto key = normalize_answer(item);
  for (const auto& existing : out) {
    if (normalize_answer(existing) == key) return;
  }
  out.push_back(std::move(item));
}

std::optional<std::vector<std::string>> bracketed_list(std::string_view reply) {
  const auto open = reply.find('[');
  if (open == std::string_view::npos) return std::nullopt;
  const auto close = reply.find(']', open);
  if (close == std::string_view::npos) return std::nullopt;
  const auto span = reply.substr(open, close - open + 1);

  std::vector<std::string> out;
  try {
    const auto doc = nlohmann::json::parse(span);
    if (doc.is_array()) {
      for (const auto& v : doc) {
        if (v.is_string()) {
          push_unique(out, clean_item(v.get<std::string>()));
        } else if (!v.is_null()) {
          push_unique(out, v.dump());
        }
      }
      return out;
    }
  } catch (const nlohmann::json::exception&) {
  }
  // ['a', 'b'] or [a, b]
  const auto body = span.substr(1, span.size() - 2);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto comma = body.find(',', pos);
    if (comma == std::string_view::npos) comma = body.size();
    push_unique(out, clean_item(body.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

std::optional<std::vector<std::string>> after_marker(std::string_view reply) {
  std::string lowered(reply);
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::size_t at = std::string::npos;
  std::size_t marker_len = 0;
  for (std::string_view marker : {"answers:", "answer:"}) {
    const auto p = lowered.find(marker);
    if (p != std::string::npos && p < at) {
      at = p;
      marker_len = marker.size();
    }
  }
  if (at == std::string::npos) return std::nullopt;
  const auto rest = reply.substr(at + marker_len);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    auto cut = rest.find_first_of(",\n", pos);
    if (cut == std::string_view::npos) cut = rest.size();
    push_unique(out, clean_item(rest.substr(pos, cut - pos)));
    pos = cut + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> parse_answer_list(std::string_view reply) {
  if (auto list = bracketed_list(reply)) return *list;
  if (auto list = after_marker(reply)) return *list;
  std::vector<std::string> out;
  push_unique(out, std::string(trim(reply)));
  return out;
}

AnswerSet llm_reason(ChatClient& client, std::string_view question,
                     std::span<const ReasoningPath> paths, const KnowledgeGraph& g,
                     PromptMode mode, std::string_view examples) {
  const auto prompt =
      build_reasoning_prompt(question, format_reasoning_paths(paths, g), mode, examples);
  auto reply = client.chat({{"user", prompt}}, 1);
  if (reply.candidates.empty()) throw ProtocolError("endpoint returned no candidates", "");
  AnswerSet out;
  out.mode = AnswerMode::kLlm;
  out.raw_text = reply.candidates.front().text;
  out.answers = parse_answer_list(*out.raw_text);
  return out;
}

AnswerScores aggregate_scores(const std::map<std::string, AnswerScores>& per_plan,
                              double floor_log_prob) {
  AnswerScores out;
  for (const auto& [_, scores] : per_plan) {
    for (const auto& [answer, lp] : scores) {
      if (!std::isfinite(lp) || lp > 0.0)
        throw DomainError("aggregate_scores: log-score must be finite and <= 0");
      out.emplace(answer, 0.0);
    }
  }
  for (auto& [answer, total] : out) {
    for (const auto& [_, scores] : per_plan) {
      auto it = scores.find(answer);
      total += it == scores.end() ? floor_log_prob : it->second;
    }
  }
  return out;
}

}  // namespace kgpath
