#include "kgpath/llm_client.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kgpath/errors.hpp"

namespace kgpath {

using nlohmann::json;

void validate(const ClientConfig& config) {
  if (config.max_retries < 0) throw ContractError("max_retries must be >= 0");
  if (config.timeout.count() <= 0) throw ContractError("timeout must be > 0");
  if (config.max_in_flight < 1) throw ContractError("max_in_flight must be >= 1");
  if (config.base_url.empty()) throw ContractError("base_url is empty");
}

struct HttpChatClient::Endpoint {
  std::string scheme_host_port;
  std::string path;
};

namespace {

bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpChatClient::HttpChatClient(ClientConfig config)
    : config_(std::move(config)),
      in_flight_(std::max(1, config_.max_in_flight)) {
  validate(config_);
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ContractError("base_url needs a scheme: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  endpoint_ = std::make_unique<Endpoint>(Endpoint{url.substr(0, path_begin), prefix + "/chat/completions"});
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::request_body(const std::vector<Message>& messages,
                                         int candidate_count) const {
  json body;
  body["model"] = config_.model_id;
  body["messages"] = json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["n"] = candidate_count;
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_tokens;
  body["stream"] = false;
  return body.dump();
}

std::optional<std::string> HttpChatClient::cache_lookup(const std::string& key) const {
  if (!config_.cache_dir) return std::nullopt;
  std::ifstream in(*config_.cache_dir / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void HttpChatClient::cache_store(const std::string& key, const std::string& body) const {
  if (!config_.cache_dir) return;
  std::filesystem::create_directories(*config_.cache_dir);
  const auto final_path = *config_.cache_dir / (key + ".json");
  auto tmp = final_path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    out << body;
  }
  std::filesystem::rename(tmp, final_path);
}

ChatReply HttpChatClient::chat(const std::vector<Message>& messages, int candidate_count) {
  if (messages.empty()) throw ContractError("chat: empty message list");
  if (candidate_count < 1) throw ContractError("chat: candidate_count must be >= 1");

  const std::string body = request_body(messages, candidate_count);
  const std::string key = sha256_hex(config_.model_id + "\n" + body);
  if (auto cached = cache_lookup(key)) {
    ChatReply reply;
    reply.candidates = parse_chat_response(*cached);
    reply.attempts = 0;
    reply.from_cache = true;
    return reply;
  }

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  if (config_.verbose) std::clog << "[llm] POST " << endpoint_->path << " " << body << "\n";

  std::vector<std::string> attempt_log;
  auto backoff = config_.backoff_initial;
  for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
    httplib::Client http(endpoint_->scheme_host_port);
    const auto secs = config_.timeout.count() / 1000;
    const auto usecs = (config_.timeout.count() % 1000) * 1000;
    http.set_connection_timeout(secs, usecs);
    http.set_read_timeout(secs, usecs);
    http.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = http.Post(endpoint_->path, headers, body, "application/json");
    bool retry = false;
    if (!res) {
      attempt_log.push_back("attempt " + std::to_string(attempt) + ": " +
                            httplib::to_string(res.error()));
      retry = true;
    } else if (res->status == 200) {
      if (config_.verbose) std::clog << "[llm] 200 " << res->body << "\n";
      ChatReply reply;
      reply.candidates = parse_chat_response(res->body);
      reply.attempts = attempt;
      cache_store(key, res->body);
      return reply;
    } else {
      attempt_log.push_back("attempt " + std::to_string(attempt) + ": HTTP " +
                            std::to_string(res->status));
      if (!transient_status(res->status))
        throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 512),
                             std::move(attempt_log));
      retry = true;
    }
    if (retry && attempt <= config_.max_retries) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, config_.backoff_max);
    }
  }
  throw TransportError("endpoint failed after " + std::to_string(config_.max_retries + 1) +
                           " attempts",
                       std::move(attempt_log));
}

std::vector<Candidate> parse_chat_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what(), body);
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty())
    throw ProtocolError("response has no choices", body);

  std::vector<Candidate> out;
  for (const auto& choice : doc["choices"]) {
    Candidate c;
    if (choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content") && choice["message"]["content"].is_string()) {
      c.text = choice["message"]["content"].get<std::string>();
    } else if (choice.contains("text") && choice["text"].is_string()) {
      c.text = choice["text"].get<std::string>();
    } else {
      throw ProtocolError("choice without message content", body);
    }
    // Sequence score: an explicit "score", else the sum of token logprobs.
    if (choice.contains("score") && choice["score"].is_number()) {
      c.score = choice["score"].get<double>();
    } else if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
               choice["logprobs"].contains("content") &&
               choice["logprobs"]["content"].is_array()) {
      double sum = 0.0;
      for (const auto& tok : choice["logprobs"]["content"]) {
        if (tok.contains("logprob") && tok["logprob"].is_number()) sum += tok["logprob"].get<double>();
      }
      c.score = sum;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace kgpath
