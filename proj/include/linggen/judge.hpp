#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace linggen {

// Yes/no fluency annotation prompt with the candidate placed after the
// trailing "Sentence: " label.
std::string fluency_prompt(std::string_view sentence);

enum class Verdict { kYes, kNo, kUnparseable, kUnjudged };

// First case-insensitive standalone "yes" or "no" in the reply. When the
// body is a chat-completion JSON document only the message content is
// searched.
Verdict parse_verdict(std::string_view body);

struct JudgeConfig {
  std::string url;  // e.g. http://host:port/v1/chat/completions
  std::string model = "gpt-4o-mini";
  std::string api_key;
  int max_retries = 3;
  int backoff_ms = 500;  // doubles after each failed attempt
  int timeout_s = 30;
  int max_in_flight = 1;

  static constexpr const char* kKeyEnv = "LINGGEN_JUDGE_KEY";
  // Throws MissingCredential if the environment variable is unset or empty.
  static JudgeConfig from_env(std::string url, std::string model = "gpt-4o-mini");
};

struct FluencyResult {
  int yes = 0;
  int no = 0;
  int unparseable = 0;
  int unjudged = 0;
  std::vector<Verdict> verdicts;

  // yes / (yes + no); empty when nothing was judged.
  std::optional<double> rate() const;
  nlohmann::json to_json() const;
};

// Request body sent for one candidate.
nlohmann::json judge_request_body(const JudgeConfig& cfg, std::string_view sentence);

FluencyResult judge_fluency(std::span<const std::string> texts, const JudgeConfig& cfg);

}  // namespace linggen
