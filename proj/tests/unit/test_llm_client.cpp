#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kgpath/errors.hpp"
#include "kgpath/llm_client.hpp"
#include "kgpath/planning.hpp"

using namespace kgpath;
using nlohmann::json;

namespace {

// Local chat-completions stub on an ephemeral port.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string choices(const std::vector<std::pair<std::string, std::optional<double>>>& items) {
  json doc;
  doc["choices"] = json::array();
  for (const auto& [text, score] : items) {
    json c;
    c["message"] = {{"role", "assistant"}, {"content", text}};
    if (score) c["score"] = *score;
    doc["choices"].push_back(c);
  }
  return doc.dump();
}

ClientConfig config_for(const StubServer& s) {
  ClientConfig c;
  c.base_url = s.url();
  c.model_id = "stub";
  c.api_key_env = "";
  c.backoff_initial = std::chrono::milliseconds(1);
  c.backoff_max = std::chrono::milliseconds(4);
  c.timeout = std::chrono::milliseconds(5000);
  return c;
}

const std::vector<Message> kMessages = {{"user", build_planning_prompt("who?")}};

}  // namespace

TEST(LlmClient, EchoesFixedPlan) {
  json seen;
  StubServer s([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(choices({{"<PATH> marry_to <SEP> father_of </PATH>", std::nullopt}}),
                    "application/json");
  });
  HttpChatClient client(config_for(s));
  const auto reply = client.chat(kMessages, 1);
  ASSERT_EQ(reply.candidates.size(), 1u);
  EXPECT_EQ(reply.candidates[0].text, "<PATH> marry_to <SEP> father_of </PATH>");
  EXPECT_EQ(reply.attempts, 1);
  EXPECT_EQ(seen["model"], "stub");
  EXPECT_EQ(seen["n"], 1);
  EXPECT_EQ(seen["messages"][0]["content"], kMessages[0].content);
}

TEST(LlmClient, RetriesThenSucceeds) {
  std::atomic<int> calls{0};
  StubServer s([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 503;
      return;
    }
    res.set_content(choices({{"ok", std::nullopt}}), "application/json");
  });
  auto c = config_for(s);
  c.max_retries = 3;
  HttpChatClient client(c);
  const auto reply = client.chat(kMessages, 1);
  EXPECT_EQ(reply.attempts, 3);
  EXPECT_EQ(reply.candidates[0].text, "ok");
}

TEST(LlmClient, GivesUpAfterRetries) {
  std::atomic<int> calls{0};
  StubServer s([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 429;
  });
  auto c = config_for(s);
  c.max_retries = 2;
  HttpChatClient client(c);
  try {
    client.chat(kMessages, 1);
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts().size(), 3u);
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(LlmClient, ClientErrorIsNotRetried) {
  std::atomic<int> calls{0};
  StubServer s([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpChatClient client(config_for(s));
  EXPECT_THROW(client.chat(kMessages, 1), TransportError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(LlmClient, ThreeScoredCandidatesInOrder) {
  StubServer s([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(choices({{"a", -0.1}, {"b", -0.7}, {"c", -0.3}}), "application/json");
  });
  HttpChatClient client(config_for(s));
  const auto reply = client.chat(kMessages, 3);
  ASSERT_EQ(reply.candidates.size(), 3u);
  EXPECT_EQ(reply.candidates[0].text, "a");
  EXPECT_EQ(reply.candidates[1].text, "b");
  EXPECT_EQ(reply.candidates[2].text, "c");
  EXPECT_EQ(reply.candidates[1].score, -0.7);
}

TEST(LlmClient, MalformedBodyIsProtocolError) {
  StubServer s([&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  HttpChatClient client(config_for(s));
  EXPECT_THROW(client.chat(kMessages, 1), ProtocolError);
}

TEST(LlmClient, UnreachableEndpoint) {
  ClientConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.max_retries = 1;
  c.backoff_initial = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(500);
  HttpChatClient client(c);
  EXPECT_THROW(client.chat(kMessages, 1), TransportError);
}

TEST(LlmClient, CacheReplaysWithoutNetwork) {
  std::atomic<int> calls{0};
  const auto dir = std::filesystem::temp_directory_path() / "kgpath_cache_test";
  std::filesystem::remove_all(dir);
  {
    StubServer s([&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.set_content(choices({{"cached", std::nullopt}}), "application/json");
    });
    auto c = config_for(s);
    c.cache_dir = dir;
    HttpChatClient client(c);
    EXPECT_FALSE(client.chat(kMessages, 1).from_cache);
    const auto again = client.chat(kMessages, 1);
    EXPECT_TRUE(again.from_cache);
    EXPECT_EQ(again.candidates[0].text, "cached");
  }
  EXPECT_EQ(calls.load(), 1);
  std::filesystem::remove_all(dir);
}

TEST(LlmClient, ParseResponseVariants) {
  const auto legacy = parse_chat_response(R"({"choices":[{"text":"plain"}]})");
  EXPECT_EQ(legacy[0].text, "plain");
  const auto lp = parse_chat_response(
      R"({"choices":[{"message":{"content":"x"},"logprobs":{"content":[{"logprob":-0.5},{"logprob":-0.25}]}}]})");
  EXPECT_EQ(lp[0].score, -0.75);
  EXPECT_THROW(parse_chat_response(R"({"choices":[]})"), ProtocolError);
}

TEST(LlmClient, ConfigValidation) {
  ClientConfig c;
  c.max_in_flight = 0;
  EXPECT_THROW(validate(c), ContractError);
  c = {};
  c.base_url = "no-scheme";
  EXPECT_THROW(HttpChatClient{c}, ContractError);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
