#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "linggen/datakit.hpp"
#include "linggen/judge.hpp"
#include "linggen/lm.hpp"

namespace linggen::cli {

// Flat key/value run configuration. Resolution order: flag > file > default.
class RunConfig {
 public:
  RunConfig();

  static const nlohmann::json& defaults();

  // Unknown keys and type mismatches throw ConfigError.
  void merge_file(const std::filesystem::path& path);
  void merge(const nlohmann::json& j);
  // Raw flag text converted to the key's default type. Array keys take
  // comma-separated items.
  void set_raw(const std::string& key, const std::vector<std::string>& raw);

  const nlohmann::json& values() const { return v_; }
  bool has_value(const std::string& key) const;

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;
  std::vector<std::uint64_t> seeds() const;
  std::vector<int> ints(const std::string& key) const;

  ModelConfig model() const;
  OptimConfig optim() const;
  MaskingStrategy strategy() const;
  MaskingStrategy strategy(std::string_view key) const;
  DecodeParams decode() const;
  IngestConfig ingest() const;
  SynthConfig synth() const;
  JudgeConfig judge() const;  // reads the credential from the environment

  AttributeSchema schema() const;  // default schema when the key is empty
  // "lexicons" key, else `fallback_dir` if it holds lexicon files, else the
  // built-in synthetic lexicons.
  Lexicons lexicons(const std::filesystem::path& fallback_dir = {}) const;

  // "out" when set, otherwise run_root/<timestamp>-seed<seed>.
  std::filesystem::path out_path() const;

  void write(const std::filesystem::path& path) const;

 private:
  nlohmann::json v_;
};

}  // namespace linggen::cli
