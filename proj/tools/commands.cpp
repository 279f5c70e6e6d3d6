#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "linggen/discriminator.hpp"
#include "linggen/errors.hpp"
#include "linggen/evalkit.hpp"
#include "linggen/judge.hpp"
#include "run_config.hpp"

namespace linggen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Binding {
  std::string key;
  std::vector<std::string> raw;
  CLI::Option* opt = nullptr;
};

struct Ctx {
  RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;
};

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::vector<std::unique_ptr<Binding>> binds;
  std::function<void(Ctx&)> run;
};

std::string flag_name(const std::string& key) {
  if (key == "input" || key == "inputs") return "--in";
  if (key == "n") return "-n,--n";
  if (key == "ckpts") return "--ckpt";
  std::string f = "--" + key;
  for (auto& c : f) {
    if (c == '_' || c == '.') c = '-';
  }
  return f;
}

void bind(Command& cmd, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto b = std::make_unique<Binding>();
    b->key = k;
    const bool is_array = RunConfig::defaults().at(b->key).is_array();
    b->opt = cmd.app->add_option(flag_name(b->key), b->raw, "config key '" + b->key + "'")->expected(1);
    b->opt->multi_option_policy(is_array ? CLI::MultiOptionPolicy::TakeAll : CLI::MultiOptionPolicy::TakeLast);
    cmd.binds.push_back(std::move(b));
  }
}

void require(const RunConfig& cfg, const std::string& key) {
  if (!cfg.has_value(key)) {
    throw Error(ErrorKind::kConfig, "missing required option " + flag_name(key) + " (config key '" + key + "')");
  }
}

void print_seeds(Ctx& c, std::initializer_list<const char*> which) {
  for (std::string w : which) {
    if (w == "seeds") {
      c.err << "seeds:";
      for (auto s : c.cfg.seeds()) c.err << ' ' << s;
      c.err << '\n';
    } else {
      c.err << w << ": " << c.cfg.integer(w) << '\n';
    }
  }
}

// Output file next to `out`: ckpt.bin -> ckpt<suffix>.
fs::path sibling(const fs::path& file, const std::string& suffix) {
  return file.parent_path() / (file.stem().string() + suffix);
}

// `out` names a file when it carries the expected extension, else a directory.
fs::path file_in(const fs::path& out, const std::string& default_name) {
  if (out.extension() == fs::path(default_name).extension()) return out;
  return out / default_name;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_json(const fs::path& p, const json& j) {
  ensure_parent(p);
  std::ofstream o(p);
  o << j.dump(2) << '\n';
  if (!o) throw Error(ErrorKind::kIo, "cannot write " + p.string());
}

std::string fmt(double v, int prec = 4) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

fs::path lexicon_fallback(const RunConfig& cfg) {
  if (cfg.has_value("corpus")) return fs::path(cfg.str("corpus")) / "lexicons";
  if (cfg.has_value("input")) return fs::path(cfg.str("input")).parent_path() / "lexicons";
  return {};
}

std::string strategy_label(const Checkpoint& ck) { return ck.meta.value("strategy", std::string("unknown")); }

// --- subcommands ----------------------------------------------------------

void cmd_synth(Ctx& c) {
  print_seeds(c, {"seed"});
  const auto dir = c.cfg.out_path();
  const long n = c.cfg.integer("n_docs");
  if (n < 1) throw Error(ErrorKind::kConfig, "n_docs must be positive");
  Rng rng(static_cast<std::uint64_t>(c.cfg.integer("seed")));
  const auto samples = synth_corpus(c.cfg.synth(), rng, static_cast<int>(n));
  write_synth_jsonl(dir / "corpus.jsonl", samples);
  synth_lexicons().save(dir / "lexicons");
  c.cfg.write(dir / "config.json");
  c.out << "wrote " << samples.size() << " documents to " << (dir / "corpus.jsonl").string() << '\n';
}

void cmd_ingest(Ctx& c) {
  require(c.cfg, "input");
  print_seeds(c, {"split_seed"});
  const auto dir = c.cfg.out_path();
  const auto lex = c.cfg.lexicons(lexicon_fallback(c.cfg));
  const auto stats = ingest(c.cfg.str("input"), c.cfg.schema(), lex, c.cfg.ingest(), dir);
  lex.save(dir / "lexicons");
  c.cfg.write(dir / "config.json");
  c.out << "lines " << stats.lines << ", accepted " << stats.accepted << ", malformed " << stats.malformed
        << ", empty " << stats.empty << ", truncated " << stats.truncated << '\n'
        << "prepared corpus in " << dir.string() << '\n';
}

void cmd_build_vocab(Ctx& c) {
  require(c.cfg, "corpus");
  print_seeds(c, {"split_seed"});
  const auto corpus = load_prepared(c.cfg.str("corpus"));
  const auto vocab = build_vocab(corpus, static_cast<int>(c.cfg.integer("min_freq")));
  const auto path = file_in(c.cfg.out_path(), "vocab.json");
  write_json(path, vocab.to_json());
  c.cfg.write(sibling(path, ".config.json"));
  c.out << "vocabulary of " << vocab.size() << " tokens written to " << path.string() << '\n';
}

void cmd_extract(Ctx& c) {
  require(c.cfg, "input");
  print_seeds(c, {"seed"});
  const auto schema = c.cfg.schema();
  const auto lex = c.cfg.lexicons(lexicon_fallback(c.cfg));
  ExtractOptions opts;
  opts.reading_wpm = c.cfg.num("reading_wpm");
  std::size_t malformed = 0;
  const auto docs = read_jsonl(c.cfg.str("input"), &malformed);
  const auto path = file_in(c.cfg.out_path(), "attrs.jsonl");
  ensure_parent(path);
  std::ofstream o(path);
  std::size_t empty = 0;
  for (const auto& d : docs) {
    json row;
    const std::string text = d.value("text", std::string());
    row["text"] = text;
    try {
      const auto ex = extract_detailed(text, schema, lex, opts);
      json attrs = json::object();
      for (std::size_t i = 0; i < schema.size(); ++i) attrs[schema[i].id] = ex.values[i];
      row["attrs"] = attrs;
      row["degenerate"] = ex.degenerate;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEmptyDocument) throw;
      row["error"] = std::string(e.category());
      ++empty;
    }
    o << row.dump() << '\n';
  }
  if (!o) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  c.cfg.write(sibling(path, ".config.json"));
  c.out << "extracted " << docs.size() - empty << " documents (" << empty << " empty, " << malformed
        << " malformed lines) to " << path.string() << '\n';
}

void cmd_calibrate(Ctx& c) {
  print_seeds(c, {"seed"});
  const double rate = c.cfg.num("target_rate");
  const auto r = calibrate_shape(rate, c.cfg.num("target_mass"));
  char line[160];
  std::snprintf(line, sizeof line, "b* = %.6f\nF(%g; b*) = %.8f\niterations = %d\n", r.b, rate,
                r.achieved_mass, r.iterations);
  c.out << line;
}

void cmd_train(Ctx& c) {
  require(c.cfg, "corpus");
  print_seeds(c, {"seed"});
  const auto corpus = load_prepared(c.cfg.str("corpus"));
  const auto path = file_in(c.cfg.out_path(), "ckpt.bin");
  auto res = train_lm(corpus, c.cfg.model(), c.cfg.optim(), c.cfg.strategy());
  res.ckpt.meta["corpus_checksum"] = file_checksum(fs::path(c.cfg.str("corpus")) / "manifest.json");
  res.ckpt.save(path);
  write_log_csv(sibling(path, ".log.csv"), res.log);
  c.cfg.write(sibling(path, ".config.json"));
  c.out << "best val loss " << fmt(res.ckpt.val_loss) << " at step " << res.ckpt.step << "; checkpoint "
        << path.string() << '\n';
}

void cmd_train_disc(Ctx& c) {
  require(c.cfg, "corpus");
  print_seeds(c, {"seed"});
  const auto corpus = load_prepared(c.cfg.str("corpus"));
  auto model = c.cfg.model();
  // Records hold up to max_len - 1 tokens; the encoder adds start and end.
  model.max_len = corpus.manifest.value("max_len", model.max_len) + 1;
  model.mode = IntegrationMode::kSos;
  const auto path = file_in(c.cfg.out_path(), "disc.bin");
  auto res = train_discriminator(corpus, model, c.cfg.optim());
  res.ckpt.save(path);
  write_log_csv(sibling(path, ".log.csv"), res.log);
  const auto ev = evaluate_discriminator(res.ckpt, corpus.test);
  json j;
  j["mse"] = ev.mse;
  j["macro_r"] = ev.macro_r;
  j["undefined"] = ev.undefined;
  for (std::size_t i = 0; i < ev.per_attribute.size(); ++i) {
    j["per_attribute"][corpus.schema[i].id] =
        ev.per_attribute[i].defined ? json(ev.per_attribute[i].r) : json(nullptr);
  }
  write_json(sibling(path, ".eval.json"), j);
  c.cfg.write(sibling(path, ".config.json"));
  c.out << "test mse " << fmt(ev.mse) << ", macro r " << fmt(ev.macro_r) << "; checkpoint " << path.string()
        << '\n';
}

void cmd_generate(Ctx& c) {
  require(c.cfg, "ckpt");
  print_seeds(c, {"seed"});
  const auto ck = Checkpoint::load(c.cfg.str("ckpt"));
  if (ck.role != "lm") throw Error(ErrorKind::kConfig, "checkpoint is not a language model");
  std::map<std::string, double> targets;
  for (const auto& s : c.cfg.strings("set")) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kConfig, "--set expects id=value, got '" + s + "'");
    try {
      targets[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kConfig, "--set value is not a number: '" + s + "'");
    }
  }
  const long n = c.cfg.integer("n");
  const auto seed = static_cast<std::uint64_t>(c.cfg.integer("seed"));
  const auto decode = c.cfg.decode();
  std::vector<json> rows;
  for (long i = 0; i < n; ++i) {
    Rng rng(Rng::splitmix64(Rng::splitmix64(seed) ^ static_cast<std::uint64_t>(i)));
    const auto g = generate(ck, targets, decode, rng);
    rows.push_back({{"text", g.text}, {"hit_eos", g.hit_eos}});
    if (!c.cfg.has_value("out")) c.out << g.text << '\n';
  }
  if (c.cfg.has_value("out")) {
    const auto path = file_in(c.cfg.str("out"), "generations.jsonl");
    ensure_parent(path);
    std::ofstream o(path);
    for (const auto& r : rows) o << r.dump() << '\n';
    c.cfg.write(sibling(path, ".config.json"));
    c.out << "wrote " << rows.size() << " generations to " << path.string() << '\n';
  }
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw Error(ErrorKind::kConfig, "split must be train, val or test");
}

EvalMode parse_eval_mode(const std::string& s) {
  if (s == "model") return EvalMode::kModel;
  if (s == "vanilla") return EvalMode::kVanilla;
  if (s == "reference") return EvalMode::kReference;
  throw Error(ErrorKind::kConfig, "mode must be model, vanilla or reference");
}

void cmd_eval(Ctx& c) {
  const auto mode = parse_eval_mode(c.cfg.str("mode"));
  if (mode != EvalMode::kReference) require(c.cfg, "ckpt");
  require(c.cfg, "corpus");
  print_seeds(c, {"seeds"});
  const auto corpus = load_prepared(c.cfg.str("corpus"));
  std::optional<Checkpoint> ck;
  if (c.cfg.has_value("ckpt")) ck = Checkpoint::load(c.cfg.str("ckpt"));
  std::optional<JudgeConfig> judge;
  if (c.cfg.has_value("judge.url")) judge = c.cfg.judge();

  EvalRequest req;
  req.ckpt = ck ? &*ck : nullptr;
  req.targets = &corpus.split(parse_split(c.cfg.str("split")));
  req.schema = corpus.schema;
  req.norm = corpus.norm;
  req.lex = c.cfg.lexicons(lexicon_fallback(c.cfg));
  req.extract.reading_wpm = c.cfg.num("reading_wpm");
  req.mode = mode;
  req.n_samples = static_cast<int>(c.cfg.integer("n_samples"));
  req.k_controlled = static_cast<int>(c.cfg.integer("k_controlled"));
  req.controlled_ids = c.cfg.strings("controlled");
  req.decode = c.cfg.decode();
  req.workers = static_cast<int>(c.cfg.integer("workers"));

  std::vector<EvalReport> reports;
  json out_json;
  for (auto seed : c.cfg.seeds()) {
    req.seed = seed;
    auto r = run_eval(req);
    if (judge) {
      std::vector<std::string> texts;
      for (const auto& s : r.samples) {
        if (!s.degenerate) texts.push_back(s.text);
      }
      const auto f = judge_fluency(texts, *judge);
      r.fluency_rate = f.rate();
      out_json["fluency"].push_back(f.to_json());
    }
    out_json["reports"].push_back(r.to_json(corpus.schema));
    c.err << "seed " << seed << ": mse_norm " << fmt(r.mse_norm_mean) << " over " << r.n_scored << " samples\n";
    reports.push_back(std::move(r));
  }
  const std::string strategy = mode == EvalMode::kModel ? strategy_label(*ck) : std::string(eval_mode_key(mode));
  const std::string integration = ck ? std::string(mode_key(ck->model.config().mode)) : "none";
  const auto rows = summarize(strategy, integration, reports);
  const auto dir = c.cfg.out_path();
  write_json(dir / "report.json", out_json);
  write_report_csv(dir / "report.csv", rows);
  c.cfg.write(dir / "config.json");
  const auto& all = rows.back();
  c.out << strategy << '/' << integration << " k=" << all.k_controlled << ": mse_norm " << fmt(all.mse_norm_mean)
        << " (seed std " << fmt(all.mse_norm_std) << "), mse_raw " << fmt(all.mse_raw_mean) << ", degenerate "
        << all.degenerate_count;
  if (all.fluency_rate) c.out << ", fluency " << fmt(*all.fluency_rate);
  c.out << "\nreport in " << dir.string() << '\n';
}

void cmd_sweep(Ctx& c) {
  require(c.cfg, "ckpts");
  require(c.cfg, "corpus");
  print_seeds(c, {"seeds"});
  const auto corpus = load_prepared(c.cfg.str("corpus"));
  std::vector<Checkpoint> cks;
  std::vector<std::string> labels;
  for (const auto& spec : c.cfg.strings("ckpts")) {
    const auto eq = spec.find('=');
    cks.push_back(Checkpoint::load(eq == std::string::npos ? spec : spec.substr(eq + 1)));
    labels.push_back(eq == std::string::npos ? strategy_label(cks.back()) : spec.substr(0, eq));
  }
  std::vector<NamedCheckpoint> models;
  for (std::size_t i = 0; i < cks.size(); ++i) models.push_back({labels[i], &cks[i]});
  SweepConfig sc;
  sc.counts = c.cfg.ints("counts");
  sc.seeds = c.cfg.seeds();
  sc.n_samples = static_cast<int>(c.cfg.integer("n_samples"));
  sc.decode = c.cfg.decode();
  sc.workers = static_cast<int>(c.cfg.integer("workers"));
  const auto cells = sweep(models, corpus.test, c.cfg.lexicons(lexicon_fallback(c.cfg)), sc);
  const auto dir = c.cfg.out_path();
  write_sweep(dir, cells);
  c.cfg.write(dir / "config.json");
  for (const auto& cell : cells) {
    c.out << cell.strategy << " count=" << cell.count << " seed=" << cell.seed << " mse="
          << (cell.mse ? fmt(*cell.mse) : "NA") << (cell.note.empty() ? "" : " (" + cell.note + ")") << '\n';
  }
  c.out << "sweep in " << dir.string() << '\n';
}

void cmd_pairwise(Ctx& c) {
  require(c.cfg, "ckpt");
  require(c.cfg, "corpus");
  print_seeds(c, {"seed"});
  const auto corpus = load_prepared(c.cfg.str("corpus"));
  const auto ck = Checkpoint::load(c.cfg.str("ckpt"));
  const auto m = pairwise(ck, corpus.test, c.cfg.lexicons(lexicon_fallback(c.cfg)),
                          static_cast<int>(c.cfg.integer("samples_per_pair")), c.cfg.decode(),
                          static_cast<std::uint64_t>(c.cfg.integer("seed")),
                          static_cast<int>(c.cfg.integer("workers")));
  const auto dir = c.cfg.out_path();
  write_pairwise(dir, m);
  c.cfg.write(dir / "config.json");
  int flagged = 0;
  for (bool b : m.constant_row) flagged += b ? 1 : 0;
  c.out << m.ids.size() << "x" << m.ids.size() << " matrix (" << flagged << " constant rows) in " << dir.string()
        << '\n';
}

void cmd_ablate(Ctx& c) {
  require(c.cfg, "corpus");
  print_seeds(c, {"seed", "seeds"});
  const fs::path corpus_dir = c.cfg.str("corpus");
  const auto corpus = load_prepared(corpus_dir);
  const auto dir = c.cfg.out_path();
  AblationConfig ac;
  for (const auto& s : c.cfg.strings("strategies")) ac.strategies.push_back(c.cfg.strategy(s));
  ac.modes.clear();
  for (const auto& m : c.cfg.strings("modes")) ac.modes.push_back(parse_mode(m));
  ac.model = c.cfg.model();
  ac.optim = c.cfg.optim();
  ac.seeds = c.cfg.seeds();
  ac.k_controlled = static_cast<int>(c.cfg.integer("k_controlled"));
  ac.n_samples = static_cast<int>(c.cfg.integer("n_samples"));
  ac.decode = c.cfg.decode();
  ac.workers = static_cast<int>(c.cfg.integer("workers"));
  ac.out_dir = dir;
  c.cfg.write(dir / "config.json");
  const auto res = ablate(corpus, corpus_dir, c.cfg.lexicons(corpus_dir / "lexicons"), ac);
  write_report_csv(dir / "report.csv", res.rows);
  json j;
  j["corpus_checksum"] = res.corpus_checksum;
  for (const auto& r : res.rows) {
    j["cells"].push_back({{"strategy", r.strategy},
                          {"integration", r.integration},
                          {"mse_norm_mean", std::isfinite(r.mse_norm_mean) ? json(r.mse_norm_mean) : json(nullptr)},
                          {"mse_norm_std", std::isfinite(r.mse_norm_std) ? json(r.mse_norm_std) : json(nullptr)},
                          {"error", r.error}});
    c.out << r.strategy << '/' << r.integration << ": "
          << (r.error.empty() ? "mse_norm " + fmt(r.mse_norm_mean) + " +- " + fmt(r.mse_norm_std)
                              : "failed (" + r.error + ")")
          << '\n';
  }
  write_json(dir / "ablation.json", j);
  c.out << "ablation in " << dir.string() << '\n';
}

void cmd_judge(Ctx& c) {
  require(c.cfg, "input");
  print_seeds(c, {"seed"});
  const auto judge = c.cfg.judge();
  std::vector<std::string> texts;
  for (const auto& d : read_jsonl(c.cfg.str("input"))) {
    if (d.contains("text") && d["text"].is_string()) texts.push_back(d["text"].get<std::string>());
  }
  const auto r = judge_fluency(texts, judge);
  const auto path = file_in(c.cfg.out_path(), "fluency.json");
  write_json(path, r.to_json());
  c.cfg.write(sibling(path, ".config.json"));
  c.out << "yes " << r.yes << ", no " << r.no << ", unparseable " << r.unparseable << ", unjudged " << r.unjudged
        << ", rate " << (r.rate() ? fmt(*r.rate()) : "NA") << '\n';
}

void cmd_report(Ctx& c) {
  require(c.cfg, "inputs");
  print_seeds(c, {"seed"});
  std::vector<ReportRow> rows;
  for (const auto& p : c.cfg.strings("inputs")) {
    fs::path path = p;
    if (fs::is_directory(path)) path /= "report.csv";
    const auto part = read_report_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  c.out << std::left << std::setw(10) << "strategy" << std::setw(12) << "integration" << std::setw(6) << "seed"
        << std::setw(4) << "k" << std::setw(12) << "mse_norm" << std::setw(12) << "std" << std::setw(12)
        << "mse_raw" << std::setw(6) << "degen" << "fluency\n";
  for (const auto& r : rows) {
    c.out << std::left << std::setw(10) << r.strategy << std::setw(12) << r.integration << std::setw(6) << r.seed
          << std::setw(4) << r.k_controlled << std::setw(12) << fmt(r.mse_norm_mean) << std::setw(12)
          << fmt(r.mse_norm_std) << std::setw(12) << fmt(r.mse_raw_mean) << std::setw(6) << r.degenerate_count
          << (r.fluency_rate ? fmt(*r.fluency_rate) : "NA") << '\n';
  }
  if (c.cfg.has_value("out")) {
    const auto path = file_in(c.cfg.str("out"), "report.csv");
    write_report_csv(path, rows);
    c.cfg.write(sibling(path, ".config.json"));
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attribute-conditioned text generation toolkit", "linggen"};
  app.require_subcommand(0, 1);
  std::vector<std::unique_ptr<Command>> cmds;

  auto add = [&](const char* name, const char* help, std::initializer_list<const char*> keys,
                 std::function<void(Ctx&)> fn) {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    cmd->app->add_option("--config", cmd->config_path, "flat JSON run config");
    bind(*cmd, keys);
    bind(*cmd, {"workers", "run_root"});
    cmd->run = std::move(fn);
    cmds.push_back(std::move(cmd));
  };

  add("synth", "write a synthetic corpus and its lexicons", {"n_docs", "seed", "out"}, cmd_synth);
  add("ingest", "tokenize, truncate, extract, split and normalize a JSONL corpus",
      {"input", "schema", "lexicons", "lexicon_cutoff", "max_len", "min_freq", "split_train", "split_val",
       "split_test", "split_seed", "reading_wpm", "out"},
      cmd_ingest);
  add("build-vocab", "rebuild the vocabulary of a prepared corpus", {"corpus", "min_freq", "out"}, cmd_build_vocab);
  add("extract", "compute attribute vectors for a JSONL corpus",
      {"input", "schema", "lexicons", "lexicon_cutoff", "reading_wpm", "out"}, cmd_extract);
  add("calibrate-b", "solve for the masking shape parameter", {"target_rate", "target_mass"}, cmd_calibrate);
  const std::initializer_list<const char*> model_keys = {"d_model", "n_layers", "n_heads", "ffn_size", "max_len",
                                                         "dropout", "integration_mode"};
  const std::initializer_list<const char*> optim_keys = {"steps",     "batch_size", "lr",         "warmup",
                                                         "cosine_decay", "grad_clip", "eval_every", "val_max",
                                                         "seed"};
  add("train", "train a conditioned decoder", {"corpus", "strategy", "b", "dropout_p", "fixed_rate", "out"},
      cmd_train);
  bind(*cmds.back(), model_keys);
  bind(*cmds.back(), optim_keys);
  add("train-disc", "train the attribute regression encoder", {"corpus", "out"}, cmd_train_disc);
  bind(*cmds.back(), {"d_model", "n_layers", "n_heads", "ffn_size", "dropout"});
  bind(*cmds.back(), optim_keys);
  const std::initializer_list<const char*> decode_keys = {"temperature", "top_p", "max_tokens"};
  add("generate", "sample text for attribute targets", {"ckpt", "set", "n", "seed", "out"}, cmd_generate);
  bind(*cmds.back(), decode_keys);
  add("eval", "attribute MSE of generations against held-out targets",
      {"ckpt", "corpus", "lexicons", "mode", "split", "n_samples", "k_controlled", "controlled", "seeds",
       "judge.url", "judge.model", "judge.max_in_flight", "out"},
      cmd_eval);
  bind(*cmds.back(), decode_keys);
  add("sweep", "MSE against the number of controlled attributes",
      {"ckpts", "corpus", "lexicons", "counts", "seeds", "n_samples", "out"}, cmd_sweep);
  bind(*cmds.back(), decode_keys);
  add("pairwise", "pairwise attribute interaction matrix",
      {"ckpt", "corpus", "lexicons", "samples_per_pair", "seed", "out"}, cmd_pairwise);
  bind(*cmds.back(), decode_keys);
  add("ablate", "train and evaluate a strategy x integration grid",
      {"corpus", "strategies", "modes", "b", "dropout_p", "fixed_rate", "seeds", "k_controlled", "n_samples",
       "out"},
      cmd_ablate);
  bind(*cmds.back(), {"d_model", "n_layers", "n_heads", "ffn_size", "max_len", "dropout"});
  bind(*cmds.back(), optim_keys);
  bind(*cmds.back(), decode_keys);
  add("judge-fluency", "fluency rate of JSONL texts from an external judge",
      {"input", "judge.url", "judge.model", "judge.max_retries", "judge.backoff_ms", "judge.timeout_s",
       "judge.max_in_flight", "out"},
      cmd_judge);
  add("report", "merge and print report.csv files", {"inputs", "out"}, cmd_report);

  if (argc <= 1) {
    err << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help("", CLI::AppFormatMode::Normal);
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: ConfigError: " << e.what() << '\n';
    return 2;
  }
  for (auto& cmd : cmds) {
    if (!cmd->app->parsed()) continue;
    try {
      RunConfig cfg;
      if (!cmd->config_path.empty()) cfg.merge_file(cmd->config_path);
      for (const auto& b : cmd->binds) {
        if (b->opt->count() > 0) cfg.set_raw(b->key, b->raw);
      }
      if (cfg.integer("workers") < 1) throw Error(ErrorKind::kConfig, "workers must be >= 1");
      Ctx ctx{cfg, out, err};
      cmd->run(ctx);
      return 0;
    } catch (const Error& e) {
      err << "error: " << e.category() << ": " << e.what() << '\n';
      return e.kind() == ErrorKind::kConfig ? 2 : 1;
    } catch (const json::exception& e) {
      err << "error: FormatError: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err << "error: InternalError: " << e.what() << '\n';
      return 1;
    }
  }
  err << app.help();
  return 2;
}

}  // namespace linggen::cli
