#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace fixtures {

// Local chat-completions stand-in. `reply` maps the candidate sentence to
// the assistant content; `fail_first` makes the first n requests for each
// sentence answer 503.
class MockJudge {
 public:
  using Reply = std::function<std::string(const std::string& sentence)>;

  explicit MockJudge(Reply reply, int fail_first = 0) : reply_(std::move(reply)), fail_first_(fail_first) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const std::string prompt = body["messages"][0]["content"];
      const auto pos = prompt.rfind("Sentence: ");
      const std::string sentence = prompt.substr(pos + 10);
      int seen;
      {
        std::lock_guard lock(mu_);
        prompts_.push_back(prompt);
        auth_ = req.get_header_value("Authorization");
        seen = attempts_[sentence]++;
      }
      if (seen < fail_first_) {
        res.status = 503;
        return;
      }
      nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply_(sentence)}}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockJudge() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }
  int attempts(const std::string& sentence) const {
    std::lock_guard lock(mu_);
    auto it = attempts_.find(sentence);
    return it == attempts_.end() ? 0 : it->second;
  }
  std::string auth() const {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  Reply reply_;
  int fail_first_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
  std::map<std::string, int> attempts_;
  std::string auth_;
};

}  // namespace fixtures
