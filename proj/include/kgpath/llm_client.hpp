#pragma once
// Chat-completions client: POST {model, messages, n, temperature, max_tokens}
// to <base_url>/chat/completions and read choices[].message.content.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace kgpath {

struct Message {
  std::string role;
  std::string content;
};

struct Candidate {
  std::string text;
  std::optional<double> score;  // log-probability, when the endpoint reports one
};

struct ChatReply {
  std::vector<Candidate> candidates;
  int attempts = 1;
  bool from_cache = false;
};

// Anything that can turn a message list into candidate completions.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatReply chat(const std::vector<Message>& messages, int candidate_count) = 0;
  virtual std::string model_id() const = 0;
};

struct ClientConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_id;
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  int max_in_flight = 4;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<std::filesystem::path> cache_dir;
  bool verbose = false;
};

// Checks the config invariants; throws ContractError.
void validate(const ClientConfig& config);

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ClientConfig config);
  ~HttpChatClient() override;

  // Retries connection failures, timeouts, 429 and 5xx with exponential
  // backoff. Throws TransportError once retries run out (or on other HTTP
  // errors) and ProtocolError when a 200 body cannot be interpreted.
  ChatReply chat(const std::vector<Message>& messages, int candidate_count) override;
  std::string model_id() const override { return config_.model_id; }

  const ClientConfig& config() const { return config_; }

 private:
  struct Endpoint;

  std::string request_body(const std::vector<Message>& messages, int candidate_count) const;
  std::optional<std::string> cache_lookup(const std::string& key) const;
  void cache_store(const std::string& key, const std::string& body) const;

  ClientConfig config_;
  std::unique_ptr<Endpoint> endpoint_;
  std::string api_key_;
  std::counting_semaphore<> in_flight_;
};

// Parses a chat-completions response body. Throws ProtocolError.
std::vector<Candidate> parse_chat_response(const std::string& body);

// sha256 hex digest, used for response-cache keys.
std::string sha256_hex(const std::string& data);

}  // namespace kgpath
