#include "linggen/judge.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "linggen/errors.hpp"

namespace linggen {

namespace {

constexpr std::string_view kPromptPrefix = R"PROMPT(The annotation task will provide texts created by different models.

Annotator is required to classify to answer whether the text is fluent or not fluent.

Fluency is defined as the ease and naturalness with which a text can be understood.

A fluent text should be straightforward to read or hear, without any structural or lexical awkwardness or ambiguity.

When evaluating fluency, annotators should consider two factors.

Grammaticality: Does the text follow standard grammatical rules?

Coherence: Does the text make sense in the context in which it is presented?

Here are some positive and negative samples corresponding to each factor.

First, Grammaticality.

Positive example: "The cat is sleeping peacefully on the soft, fluffy pillow." This text follows standard grammatical rules, with proper subject-verb agreement and adjective placement.

Negative example: "The cat are sleep peaceful on the soft pillow." This text contains grammatical errors, with a subject-verb disagreement and a missing adjective ending.

Second, Coherence.

Positive example: "After finishing her work, she decided to take a walk in the park." This text makes sense and flows logically, with a clear cause-and-effect relationship.

Negative example: "The concert was great, but I forgot my keys at home." This text lacks coherence, as there is no clear connection between the two clauses.

Annotators should not take into account the factual correctness or completeness of the text.

If the annotator finds it challenging to select a clear winner, they should select the text that is most similar in fluency to the other two texts.

Annotators should rely on their judgment and knowledge while assessing fluency, but consistency in their annotations should also be a priority.

Answer only using "yes" or "no", with no additional commentary or explanation.


Sentence: )PROMPT";

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::kConfig, "judge url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

Verdict scan_tokens(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_alpha(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_alpha(s[j])) ++j;
    std::string word(s.substr(i, j - i));
    for (auto& c : word) c = static_cast<char>(c | 0x20);
    if (word == "yes") return Verdict::kYes;
    if (word == "no") return Verdict::kNo;
    i = j;
  }
  return Verdict::kUnparseable;
}

Verdict judge_one(const JudgeConfig& cfg, const Endpoint& ep, const std::string& sentence) {
  httplib::Client client(ep.origin);
  client.set_connection_timeout(cfg.timeout_s, 0);
  client.set_read_timeout(cfg.timeout_s, 0);
  const std::string body = judge_request_body(cfg, sentence).dump();
  httplib::Headers headers = {{"Authorization", "Bearer " + cfg.api_key}};
  int delay = cfg.backoff_ms;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return parse_verdict(res->body);
  }
  return Verdict::kUnjudged;
}

}  // namespace

std::string fluency_prompt(std::string_view sentence) {
  std::string out(kPromptPrefix);
  out += sentence;
  return out;
}

Verdict parse_verdict(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("choices") && j["choices"].is_array() &&
      !j["choices"].empty()) {
    const auto& choice = j["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      return scan_tokens(choice["message"]["content"].get<std::string>());
    }
    if (choice.contains("text") && choice["text"].is_string()) {
      return scan_tokens(choice["text"].get<std::string>());
    }
  }
  return scan_tokens(body);
}

JudgeConfig JudgeConfig::from_env(std::string url, std::string model) {
  const char* key = std::getenv(kKeyEnv);
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorKind::kMissingCredential, std::string(kKeyEnv) + " is not set");
  }
  JudgeConfig cfg;
  cfg.url = std::move(url);
  cfg.model = std::move(model);
  cfg.api_key = key;
  return cfg;
}

std::optional<double> FluencyResult::rate() const {
  if (yes + no == 0) return std::nullopt;
  return static_cast<double>(yes) / static_cast<double>(yes + no);
}

nlohmann::json FluencyResult::to_json() const {
  nlohmann::json j = {{"yes", yes}, {"no", no}, {"unparseable", unparseable}, {"unjudged", unjudged}};
  const auto r = rate();
  j["fluency_rate"] = r ? nlohmann::json(*r) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json judge_request_body(const JudgeConfig& cfg, std::string_view sentence) {
  return {{"model", cfg.model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", fluency_prompt(sentence)}}})}};
}

FluencyResult judge_fluency(std::span<const std::string> texts, const JudgeConfig& cfg) {
  if (cfg.api_key.empty()) throw Error(ErrorKind::kMissingCredential, "judge credential missing");
  if (cfg.url.empty()) throw Error(ErrorKind::kConfig, "judge.url is not configured");
  const Endpoint ep = split_url(cfg.url);

  FluencyResult out;
  out.verdicts.assign(texts.size(), Verdict::kUnjudged);
  const int workers = std::max(1, std::min<int>(cfg.max_in_flight, static_cast<int>(texts.size())));
  std::mutex mu;
  std::size_t next = 0;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= texts.size()) return;
        i = next++;
      }
      const Verdict v = judge_one(cfg, ep, texts[i]);
      std::lock_guard lock(mu);
      out.verdicts[i] = v;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto v : out.verdicts) {
    switch (v) {
      case Verdict::kYes: ++out.yes; break;
      case Verdict::kNo: ++out.no; break;
      case Verdict::kUnparseable: ++out.unparseable; break;
      case Verdict::kUnjudged: ++out.unjudged; break;
    }
  }
  return out;
}

}  // namespace linggen
