#include "run_config.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "linggen/errors.hpp"

namespace linggen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const json& RunConfig::defaults() {
  static const json d = {
      // paths
      {"schema", ""},
      {"lexicons", ""},
      {"lexicon_cutoff", -1},
      {"input", ""},
      {"inputs", json::array()},
      {"corpus", ""},
      {"ckpt", ""},
      {"ckpts", json::array()},
      {"out", ""},
      {"run_root", "runs"},
      // seeds and parallelism
      {"seed", 1},
      {"seeds", {1, 2, 3}},
      {"workers", 1},
      // synthetic corpus
      {"n_docs", 50000},
      // ingestion
      {"max_len", 100},
      {"min_freq", 2},
      {"split_train", 0.9},
      {"split_val", 0.05},
      {"split_test", 0.05},
      {"split_seed", 0},
      {"reading_wpm", 240.0},
      // model
      {"d_model", 128},
      {"n_layers", 4},
      {"n_heads", 4},
      {"ffn_size", 512},
      {"dropout", 0.0},
      {"integration_mode", "sos"},
      // masking
      {"strategy", "pmask"},
      {"b", 3.0},
      {"dropout_p", 0.3},
      {"fixed_rate", 0.3},
      {"target_rate", 0.3},
      {"target_mass", 0.6},
      // optimization
      {"steps", 2000},
      {"batch_size", 32},
      {"lr", 3e-4},
      {"warmup", 100},
      {"cosine_decay", false},
      {"grad_clip", 1.0},
      {"eval_every", 200},
      {"val_max", 512},
      // decoding
      {"temperature", 1.0},
      {"top_p", 0.95},
      {"max_tokens", -1},
      {"n", 10},
      {"set", json::array()},
      // evaluation
      {"mode", "model"},
      {"split", "test"},
      {"n_samples", 2000},
      {"k_controlled", 1},
      {"controlled", json::array()},
      {"counts", {1, 2, 4, 8, 16}},
      {"samples_per_pair", 100},
      {"strategies", {"none", "dropout", "fixed", "pmask"}},
      {"modes", {"sos"}},
      // external judge
      {"judge.url", ""},
      {"judge.model", "gpt-4o-mini"},
      {"judge.max_retries", 3},
      {"judge.backoff_ms", 500},
      {"judge.timeout_s", 30},
      {"judge.max_in_flight", 4},
  };
  return d;
}

RunConfig::RunConfig() : v_(defaults()) {}

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

bool compatible(const json& def, const json& val) {
  if (def.is_number()) return val.is_number() && (def.is_number_float() || !val.is_number_float());
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) {
    if (!val.is_array()) return false;
    if (def.empty()) return std::all_of(val.begin(), val.end(), [](const json& e) { return e.is_string(); });
    return std::all_of(val.begin(), val.end(), [&](const json& e) { return compatible(def.front(), e); });
  }
  return false;
}

json convert(const json& def, const std::string& key, const std::string& raw) {
  try {
    std::size_t used = 0;
    if (def.is_number_integer()) {
      const long long x = std::stoll(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return x;
    }
    if (def.is_number()) {
      const double x = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return x;
    }
  } catch (const std::logic_error&) {
    config_error("'" + key + "' expects a number, got '" + raw + "'");
  }
  if (def.is_boolean()) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    config_error("'" + key + "' expects true or false, got '" + raw + "'");
  }
  return raw;
}

}  // namespace

void RunConfig::merge(const json& j) {
  if (!j.is_object()) config_error("config must be a flat JSON object");
  for (const auto& [key, val] : j.items()) {
    const auto& d = defaults();
    if (!d.contains(key)) config_error("unknown config key '" + key + "'");
    if (!compatible(d.at(key), val)) config_error("config key '" + key + "' has the wrong type");
    v_[key] = val;
  }
}

void RunConfig::merge_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  merge(j);
}

void RunConfig::set_raw(const std::string& key, const std::vector<std::string>& raw) {
  const auto& d = defaults();
  if (!d.contains(key)) config_error("unknown config key '" + key + "'");
  const json& def = d.at(key);
  if (def.is_array()) {
    json arr = json::array();
    const json elem = def.empty() ? json("") : def.front();
    for (const auto& r : raw) {
      std::stringstream ss(r);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) arr.push_back(convert(elem, key, item));
      }
    }
    v_[key] = arr;
  } else {
    if (raw.empty()) return;
    v_[key] = convert(def, key, raw.back());
  }
}

bool RunConfig::has_value(const std::string& key) const {
  const auto& x = v_.at(key);
  if (x.is_string()) return !x.get<std::string>().empty();
  if (x.is_array()) return !x.empty();
  return true;
}

std::string RunConfig::str(const std::string& key) const { return v_.at(key).get<std::string>(); }
double RunConfig::num(const std::string& key) const { return v_.at(key).get<double>(); }
long RunConfig::integer(const std::string& key) const { return v_.at(key).get<long>(); }
bool RunConfig::flag(const std::string& key) const { return v_.at(key).get<bool>(); }

std::vector<std::string> RunConfig::strings(const std::string& key) const {
  return v_.at(key).get<std::vector<std::string>>();
}

std::vector<int> RunConfig::ints(const std::string& key) const { return v_.at(key).get<std::vector<int>>(); }

std::vector<std::uint64_t> RunConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (const auto& s : v_.at("seeds")) {
    if (s.get<long long>() < 0) config_error("seeds must be non-negative");
    out.push_back(s.get<std::uint64_t>());
  }
  if (out.empty()) config_error("at least one seed is required");
  return out;
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.d_model = static_cast<int>(integer("d_model"));
  m.n_layers = static_cast<int>(integer("n_layers"));
  m.n_heads = static_cast<int>(integer("n_heads"));
  m.ffn_size = static_cast<int>(integer("ffn_size"));
  m.max_len = static_cast<int>(integer("max_len"));
  m.dropout = num("dropout");
  m.mode = parse_mode(str("integration_mode"));
  return m;
}

OptimConfig RunConfig::optim() const {
  OptimConfig o;
  o.steps = static_cast<int>(integer("steps"));
  o.batch_size = static_cast<int>(integer("batch_size"));
  o.lr = num("lr");
  o.warmup = static_cast<int>(integer("warmup"));
  o.cosine_decay = flag("cosine_decay");
  o.grad_clip = num("grad_clip");
  o.eval_every = static_cast<int>(integer("eval_every"));
  o.val_max = static_cast<int>(integer("val_max"));
  if (integer("seed") < 0) config_error("seed must be non-negative");
  o.seed = static_cast<std::uint64_t>(integer("seed"));
  if (o.steps < 1 || o.batch_size < 1 || o.eval_every < 1) {
    config_error("steps, batch_size and eval_every must be positive");
  }
  return o;
}

MaskingStrategy RunConfig::strategy(std::string_view key) const {
  if (key == "pmask" || key == "p-masking") return parse_strategy(key, num("b"));
  if (key == "dropout") return parse_strategy(key, num("dropout_p"));
  if (key == "fixed" || key == "fixed-rate") return parse_strategy(key, num("fixed_rate"));
  return parse_strategy(key);
}

MaskingStrategy RunConfig::strategy() const { return strategy(str("strategy")); }

DecodeParams RunConfig::decode() const {
  DecodeParams p;
  p.temperature = num("temperature");
  p.top_p = num("top_p");
  p.max_tokens = static_cast<int>(integer("max_tokens"));
  if (p.temperature < 0 || p.top_p <= 0 || p.top_p > 1) config_error("temperature >= 0 and top_p in (0, 1] required");
  return p;
}

IngestConfig RunConfig::ingest() const {
  IngestConfig c;
  c.max_len = static_cast<int>(integer("max_len"));
  c.min_freq = static_cast<int>(integer("min_freq"));
  c.split.train = num("split_train");
  c.split.val = num("split_val");
  c.split.test = num("split_test");
  c.split.seed = static_cast<std::uint64_t>(integer("split_seed"));
  c.split.validate();
  c.extract.reading_wpm = num("reading_wpm");
  return c;
}

SynthConfig RunConfig::synth() const { return SynthConfig{}; }

JudgeConfig RunConfig::judge() const {
  if (!has_value("judge.url")) config_error("judge.url is not set");
  auto j = JudgeConfig::from_env(str("judge.url"), str("judge.model"));
  j.max_retries = static_cast<int>(integer("judge.max_retries"));
  j.backoff_ms = static_cast<int>(integer("judge.backoff_ms"));
  j.timeout_s = static_cast<int>(integer("judge.timeout_s"));
  j.max_in_flight = static_cast<int>(std::max(1L, std::min(integer("judge.max_in_flight"), integer("workers"))));
  return j;
}

AttributeSchema RunConfig::schema() const {
  return has_value("schema") ? AttributeSchema::load(str("schema")) : AttributeSchema::default_schema();
}

Lexicons RunConfig::lexicons(const fs::path& fallback_dir) const {
  std::optional<std::size_t> cutoff;
  if (integer("lexicon_cutoff") >= 0) cutoff = static_cast<std::size_t>(integer("lexicon_cutoff"));
  if (has_value("lexicons")) return Lexicons::load(str("lexicons"), cutoff);
  if (!fallback_dir.empty() && fs::exists(fallback_dir / "stopwords.txt")) return Lexicons::load(fallback_dir, cutoff);
  if (cutoff) {
    const auto lex = synth_lexicons();
    return Lexicons(lex.stopword_list(), lex.ranking(), cutoff);
  }
  return synth_lexicons();
}

fs::path RunConfig::out_path() const {
  if (has_value("out")) return str("out");
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  return fs::path(str("run_root")) / (std::string(stamp) + "-seed" + std::to_string(integer("seed")));
}

void RunConfig::write(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << v_.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

}  // namespace linggen::cli
