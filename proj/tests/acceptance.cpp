// End-to-end acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--work DIR] [--only 1,2,...] [--reuse]
//
// Criteria 7-10 share one desk-scale experiment (synthetic corpus, three
// decoders, one discriminator); its checkpoints and numbers land in DIR.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "linggen/attributes.hpp"
#include "linggen/datakit.hpp"
#include "linggen/discriminator.hpp"
#include "linggen/errors.hpp"
#include "linggen/evalkit.hpp"
#include "linggen/judge.hpp"
#include "linggen/lm.hpp"
#include "linggen/pmask.hpp"
#include "mock_judge.hpp"
#include "model_fixtures.hpp"
#include "oracles.hpp"

using namespace linggen;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

// --- desk experiment settings -------------------------------------------

struct Desk {
  int n_docs = 50000;
  int max_len = 100;
  int lm_steps = 3000;
  int disc_steps = 3000;
  int eval_samples = 500;
  int sweep_samples = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::uint64_t train_seed = 1;

  ModelConfig model() const {
    ModelConfig m;
    m.d_model = 64;
    m.n_layers = 2;
    m.n_heads = 4;
    m.ffn_size = 256;
    m.max_len = max_len;
    return m;
  }
  OptimConfig optim(int steps) const {
    OptimConfig o;
    o.steps = steps;
    o.batch_size = 32;
    o.lr = 1e-3;
    o.warmup = 100;
    o.cosine_decay = true;
    o.grad_clip = 1.0;
    o.eval_every = 250;
    o.val_max = 256;
    o.seed = train_seed;
    return o;
  }
};

struct Context {
  fs::path work;
  bool reuse = false;
  Desk desk;
  json record = json::object();  // everything measured, written to DIR/acceptance.json

  // Lazily built shared experiment.
  std::optional<PreparedCorpus> corpus;
  fs::path corpus_dir;
  Lexicons lex;
  std::map<std::string, Checkpoint> lms;
  std::optional<Checkpoint> disc;
};

// --- 1. sampler fidelity ------------------------------------------------

Outcome sampler_fidelity(Context&) {
  const auto t0 = Clock::now();
  Rng rng(20240501);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_rate(rng, {3.0});
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = pmask_cdf(xs[i], 3.0);
    ks = std::max({ks, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  const double below = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), 0.3) - xs.begin()) / n;
  const double dt = seconds_since(t0);
  return {ks < 0.01 && below >= 0.61 && below <= 0.64 && dt < 10.0,
          "KS=" + num(ks, 5) + " (<0.01), P(m<=0.3)=" + num(below) + " (in [0.61,0.64], analytic " +
              num(pmask_cdf(0.3, 3.0)) + "), " + num(dt, 2) + "s (<10s)"};
}

// --- 2. calibration -----------------------------------------------------

Outcome calibration(Context&) {
  const auto t0 = Clock::now();
  const auto r = calibrate_shape(0.3, 0.6);
  const double dt = seconds_since(t0);
  const double f = pmask_cdf(0.3, r.b);
  return {r.b >= 2.69 && r.b <= 2.72 && f >= 0.6 && f <= 0.60001 && dt < 1.0,
          "b*=" + num(r.b, 6) + " (in [2.69,2.72]), F(0.3;b*)=" + num(f, 8) + " (in [0.6,0.60001]), " +
              num(dt * 1000, 2) + "ms (<1s)"};
}

// --- 3. extractor oracle ------------------------------------------------

Outcome extractor_oracle(Context&) {
  const auto t0 = Clock::now();
  const auto schema = AttributeSchema::all();
  const std::vector<std::string> ranking = {"the", "cat", "sat", "on", "a", "i", "it's", "table", "mat", "42"};
  const Lexicons lex({"the", "a", "on", "i", "it's"}, ranking, 6);
  const std::set<std::string> stop = {"the", "a", "on", "i", "it's"};
  const std::set<std::string> common(ranking.begin(), ranking.begin() + 6);
  Rng rng(3);
  int compared = 0, count_mismatch = 0;
  double worst_ratio = 0.0;
  while (compared < 200) {
    const auto text = oracle::random_text(rng);
    const auto ref = oracle::indices(text, stop, common);
    if (ref.empty()) continue;
    const auto v = extract(text, schema, lex);
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const double expect = ref.at(schema[i].id);
      if (schema[i].id.starts_with("n_")) {
        count_mismatch += v[i] != expect;
      } else {
        worst_ratio = std::max(worst_ratio, std::abs(v[i] - expect));
      }
    }
    ++compared;
  }
  const auto cat = extract("The cat sat on the mat.", AttributeSchema::all(),
                           Lexicons({"the", "on"}, {"the", "cat", "sat", "on", "mat"}));
  const double ari = cat[AttributeSchema::all().require("ari")];
  const double dt = seconds_since(t0);
  return {count_mismatch == 0 && worst_ratio <= 1e-9 && std::abs(ari + 5.0855) < 1e-3 && dt < 30.0,
          std::to_string(compared) + " texts, count mismatches=" + std::to_string(count_mismatch) +
              ", worst ratio diff=" + num(worst_ratio, 12) + " (<=1e-9), ARI=" + num(ari, 4) +
              " (-5.0855+-1e-3), " + num(dt, 2) + "s (<30s)"};
}

// --- 4. masking exclusion -----------------------------------------------

Outcome masking_exclusion(Context&) {
  Rng rng(44);
  const int k = 16;
  auto cfg = fixtures::tiny_config();
  cfg.n_attributes = k;
  Transformer<double> m(cfg);
  fixtures::randomize(m, rng);
  int output_changed = 0, nonzero_grad = 0, masked_total = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(k);
    for (auto& x : v) x = rng.normal();
    MaskDraw mask = draw_mask(rng, k, ParetoMasking{});
    if (mask.masked.empty()) mask = draw_mask(rng, k, FixedRateMasking{0.5});
    auto v2 = v;
    for (int i : mask.masked) v2[static_cast<std::size_t>(i)] = rng.normal(0.0, 100.0);
    const auto a = m.encode(v, mask);
    const auto b = m.encode(v2, mask);
    output_changed += !(a.array() == b.array()).all();

    const auto toks = fixtures::random_tokens(rng, 2 + static_cast<int>(rng.below(9)), cfg.vocab_size);
    const std::vector<Example> batch = {{toks, v2, mask}};
    auto grads = m.make_grads();
    std::vector<std::vector<double>> dvalues;
    lm_loss<double>(m, batch, &grads, nullptr, &dvalues);
    for (int i : mask.masked) {
      ++masked_total;
      nonzero_grad += dvalues[0][static_cast<std::size_t>(i)] != 0.0;
    }
  }
  return {output_changed == 0 && nonzero_grad == 0,
          "1000 trials, outputs changed=" + std::to_string(output_changed) + ", nonzero masked grads=" +
              std::to_string(nonzero_grad) + " of " + std::to_string(masked_total)};
}

// --- 5. conditioning identity -------------------------------------------

Outcome conditioning_identity(Context&) {
  Rng rng(55);
  const IntegrationMode modes[] = {IntegrationMode::kSos, IntegrationMode::kAll, IntegrationMode::kOutput,
                                   IntegrationMode::kLogits};
  std::string detail;
  bool ok = true;
  for (auto mode : modes) {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      Transformer<float> m(fixtures::tiny_config(mode));
      m.init(rng);  // logit projection starts at zero
      if (trial % 2) {
        fixtures::randomize(m, rng);
        if (mode == IntegrationMode::kLogits) m.params().block(m.blocks().logit_proj).setZero();
      }
      std::vector<double> v(4);
      for (auto& x : v) x = rng.normal();
      const auto g = m.encode(v, mask_complement(4, {}));
      const auto ids = fixtures::random_tokens(rng, 1 + static_cast<int>(rng.below(12)), 11);
      worst = std::max(worst, static_cast<double>((m.forward(ids, &g) - m.forward(ids, nullptr)).cwiseAbs().maxCoeff()));
    }
    ok = ok && worst < 1e-6;
    detail += std::string(mode_key(mode)) + " max|d|=" + num(worst, 9) + " ";
  }
  return {ok, detail + "(<1e-6)"};
}

// --- 6. gradients and overfit --------------------------------------------

double fd_worst(IntegrationMode mode, Rng& rng, int* sampled) {
  Transformer<double> m(fixtures::tiny_config(mode));
  fixtures::randomize(m, rng);
  std::vector<std::vector<int>> toks;
  std::vector<std::vector<double>> attrs;
  for (int b = 0; b < 3; ++b) {
    toks.push_back(fixtures::random_tokens(rng, 3 + 2 * b, 11));
    attrs.push_back({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
  }
  std::vector<Example> batch;
  for (int b = 0; b < 3; ++b) {
    MaskDraw mask;
    if (b == 2) mask.masked = {1};
    batch.push_back({toks[static_cast<std::size_t>(b)], attrs[static_cast<std::size_t>(b)], mask});
  }
  auto grads = m.make_grads();
  lm_loss<double>(m, batch, &grads);
  const auto& blk = m.blocks();
  const auto& layout = m.params().layout();
  std::vector<std::size_t> idx;
  auto take = [&](int block, int count) {
    for (int i = 0; i < count; ++i) idx.push_back(layout[block].offset + rng.below(layout[block].size()));
  };
  take(blk.enc_w, 6);
  take(blk.enc_c, 6);
  for (int row : {0, 3}) {  // whole type-embedding rows
    for (int j = 0; j < layout[blk.enc_types].cols; ++j) {
      idx.push_back(layout[blk.enc_types].offset + static_cast<std::size_t>(row * layout[blk.enc_types].cols + j));
    }
  }
  take(blk.layers[0].wqkv, 6);
  take(blk.layers[1].w2, 4);
  take(blk.tok_emb, 4);
  take(blk.head_w, 4);
  if (mode == IntegrationMode::kLogits) take(blk.logit_proj, 6);
  while (idx.size() < 60) idx.push_back(rng.below(m.params().size()));
  *sampled = static_cast<int>(idx.size());

  auto flat = m.params().flat();
  double worst = 0.0;
  for (auto i : idx) {
    const double orig = flat[i];
    flat[i] = orig + 1e-5;
    const double up = lm_loss<double>(m, batch);
    flat[i] = orig - 1e-5;
    const double down = lm_loss<double>(m, batch);
    flat[i] = orig;
    const double numeric = (up - down) / 2e-5;
    const double analytic = grads.flat()[i];
    worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-7}));
  }
  return worst;
}

void ensure_corpus(Context& c);

Outcome gradients_and_overfit(Context& c) {
  Rng rng(66);
  double worst = 0.0;
  int sampled_min = 1 << 30;
  for (auto mode : {IntegrationMode::kSos, IntegrationMode::kAll, IntegrationMode::kOutput, IntegrationMode::kLogits}) {
    int sampled = 0;
    worst = std::max(worst, fd_worst(mode, rng, &sampled));
    sampled_min = std::min(sampled_min, sampled);
  }

  ensure_corpus(c);
  PreparedCorpus small = *c.corpus;
  small.train.resize(32);
  small.val = small.train;
  auto opt = c.desk.optim(2000);
  opt.cosine_decay = false;
  opt.warmup = 50;
  opt.eval_every = 50;
  opt.val_max = 32;
  const auto t0 = Clock::now();
  const auto res = train_lm(small, c.desk.model(), opt, NoMasking{});
  const double dt = seconds_since(t0);
  long reached = -1;
  for (const auto& row : res.log) {
    if (row.val_loss < 0.1) {
      reached = row.step;
      break;
    }
  }
  c.record["overfit"] = {{"best_loss", res.ckpt.val_loss}, {"reached_step", reached}, {"seconds", dt}};
  return {sampled_min >= 50 && worst < 1e-4 && reached > 0 && reached <= 2000 && dt < 600,
          "FD worst rel err=" + num(worst, 8) + " over >=" + std::to_string(sampled_min) +
              " params/mode (<1e-4); overfit 32 samples: best " + num(res.ckpt.val_loss) +
              " nats/token, <0.1 at step " + std::to_string(reached) + " (<=2000), " + num(dt, 1) + "s (<600s)"};
}

// --- shared desk experiment ---------------------------------------------

void ensure_corpus(Context& c) {
  if (c.corpus) return;
  c.corpus_dir = c.work / "corpus" / "prepared";
  const auto raw = c.work / "corpus" / "corpus.jsonl";
  c.lex = synth_lexicons();
  if (!(c.reuse && fs::exists(c.corpus_dir / "manifest.json"))) {
    Rng rng(c.desk.train_seed);
    write_synth_jsonl(raw, synth_corpus({}, rng, c.desk.n_docs));
    IngestConfig ic;
    ic.max_len = c.desk.max_len;
    ingest(raw, AttributeSchema::default_schema(), c.lex, ic, c.corpus_dir);
  }
  c.corpus = load_prepared(c.corpus_dir);
  c.record["corpus"] = {{"train", c.corpus->train.size()},
                        {"val", c.corpus->val.size()},
                        {"test", c.corpus->test.size()},
                        {"k", c.corpus->schema.size()},
                        {"vocab", c.corpus->vocab.size()}};
}

const Checkpoint& lm(Context& c, const std::string& key) {
  if (auto it = c.lms.find(key); it != c.lms.end()) return it->second;
  ensure_corpus(c);
  const auto path = c.work / "models" / (key + ".bin");
  if (c.reuse && fs::exists(path)) return c.lms.emplace(key, Checkpoint::load(path)).first->second;
  const MaskingStrategy strategy = key == "pmask" ? MaskingStrategy{ParetoMasking{}}
                                   : key == "fixed" ? MaskingStrategy{FixedRateMasking{0.3}}
                                                    : MaskingStrategy{NoMasking{}};
  const auto t0 = Clock::now();
  auto res = train_lm(*c.corpus, c.desk.model(), c.desk.optim(c.desk.lm_steps), strategy);
  res.ckpt.meta["corpus_checksum"] = file_checksum(c.corpus_dir / "manifest.json");
  res.ckpt.save(path);
  write_log_csv(c.work / "models" / (key + ".log.csv"), res.log);
  c.record["train"][key] = {{"seconds", seconds_since(t0)}, {"best_val", res.ckpt.val_loss}, {"best_step", res.ckpt.step}};
  return c.lms.emplace(key, std::move(res.ckpt)).first->second;
}

EvalReport eval_words(Context& c, const Checkpoint& ck, EvalMode mode, std::uint64_t seed) {
  EvalRequest req;
  req.ckpt = &ck;
  req.targets = &c.corpus->test;
  req.schema = c.corpus->schema;
  req.norm = c.corpus->norm;
  req.lex = c.lex;
  req.mode = mode;
  req.n_samples = c.desk.eval_samples;
  req.controlled_ids = {"n_words"};
  req.seed = seed;
  return run_eval(req);
}

struct SeedStats {
  std::vector<double> per_seed;
  double mean = 0.0, std = 0.0;
  int degenerate = 0;
};

SeedStats words_task(Context& c, const std::string& key, EvalMode mode) {
  SeedStats s;
  std::vector<EvalReport> reports;
  for (auto seed : c.desk.seeds) {
    reports.push_back(eval_words(c, lm(c, key), mode, seed));
    s.per_seed.push_back(reports.back().mse_norm_mean);
    s.degenerate += reports.back().degenerate_count;
  }
  const auto all = summarize(key, "sos", reports).back();
  s.mean = all.mse_norm_mean;
  s.std = all.mse_norm_std;
  c.record["words_task"][key + "/" + std::string(eval_mode_key(mode))] = {
      {"per_seed", s.per_seed}, {"mean", s.mean}, {"std", s.std}, {"degenerate", s.degenerate}};
  return s;
}

// --- 7. controllability -------------------------------------------------

Outcome controllability(Context& c) {
  const auto t0 = Clock::now();
  const auto pm = words_task(c, "pmask", EvalMode::kModel);
  const auto van = words_task(c, "pmask", EvalMode::kVanilla);
  const double dt = seconds_since(t0);
  const double ratio = pm.mean / van.mean;
  return {ratio < 0.5 && dt <= 7200,
          "n_words MSE P-MASK=" + num(pm.mean) + "+-" + num(pm.std) + " vs vanilla=" + num(van.mean) + "+-" +
              num(van.std) + ", ratio=" + num(ratio) + " (<0.5), " + std::to_string(c.desk.eval_samples) + "x" +
              std::to_string(c.desk.seeds.size()) + " seeds"};
}

// --- 8. sweep trend -------------------------------------------------------

Outcome sweep_trend(Context& c) {
  std::vector<NamedCheckpoint> models = {{"pmask", &lm(c, "pmask")}, {"none", &lm(c, "none")}};
  SweepConfig cfg;
  cfg.seeds = c.desk.seeds;
  cfg.n_samples = c.desk.sweep_samples;
  const auto cells = sweep(models, c.corpus->test, c.lex, cfg);
  write_sweep(c.work / "sweep", cells);
  std::map<std::pair<std::string, int>, std::vector<double>> by;
  for (const auto& cell : cells) {
    if (cell.mse) by[{cell.strategy, cell.count}].push_back(*cell.mse);
  }
  auto stats = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= std::max<std::size_t>(1, v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, v.size() > 1 ? std::sqrt(s / (v.size() - 1)) : 0.0};
  };
  bool ok = true;
  int tolerated = 0;
  std::string detail;
  for (int count : cfg.counts) {
    const auto p = by[{"pmask", count}];
    const auto n = by[{"none", count}];
    const auto [pm, ps] = stats(p);
    const auto [nm, ns] = stats(n);
    detail += "k=" + std::to_string(count) + ": " + num(pm, 3) + "+-" + num(ps, 3) + " vs " + num(nm, 3) + "+-" +
              num(ns, 3) + "; ";
    c.record["sweep"][std::to_string(count)] = {{"pmask", p}, {"none", n}};
    if (count < 4) continue;
    if (p.size() != c.desk.seeds.size() || n.size() != c.desk.seeds.size()) {
      ok = false;
      continue;
    }
    if (pm > nm) {
      // Soft criterion: one count may exceed by less than one seed-level std.
      if (pm - nm <= std::max(ps, ns) && tolerated == 0) {
        ++tolerated;
        detail += "(tolerated) ";
      } else {
        ok = false;
      }
    }
  }
  c.record["sweep_tolerated"] = tolerated;
  return {ok, "P-MASK vs No-Masking mean+-std: " + detail + "required at k>=4"};
}

// --- 9. ablation ordering ---------------------------------------------------

Outcome ablation_ordering(Context& c) {
  const auto pm = words_task(c, "pmask", EvalMode::kModel);
  const auto fx = words_task(c, "fixed", EvalMode::kModel);
  return {pm.mean <= fx.mean, "n_words MSE P-MASK=" + num(pm.mean) + "+-" + num(pm.std) + " vs Fixed 0.3=" +
                                  num(fx.mean) + "+-" + num(fx.std)};
}

// --- 10. discriminator --------------------------------------------------

Outcome discriminator(Context& c) {
  ensure_corpus(c);
  const auto path = c.work / "models" / "disc.bin";
  if (c.reuse && fs::exists(path)) {
    c.disc = Checkpoint::load(path);
  } else {
    auto mc = c.desk.model();
    mc.max_len = c.desk.max_len + 1;
    const auto t0 = Clock::now();
    auto res = train_discriminator(*c.corpus, mc, c.desk.optim(c.desk.disc_steps));
    res.ckpt.save(path);
    write_log_csv(c.work / "models" / "disc.log.csv", res.log);
    c.record["train"]["disc"] = {{"seconds", seconds_since(t0)}, {"best_val", res.ckpt.val_loss}};
    c.disc = std::move(res.ckpt);
  }
  const auto ev = evaluate_discriminator(*c.disc, c.corpus->test);
  json per = json::object();
  double worst = 1.0;
  std::string worst_id;
  for (std::size_t i = 0; i < ev.per_attribute.size(); ++i) {
    per[c.corpus->schema[i].id] = ev.per_attribute[i].r;
    if (ev.per_attribute[i].defined && ev.per_attribute[i].r < worst) {
      worst = ev.per_attribute[i].r;
      worst_id = c.corpus->schema[i].id;
    }
  }
  c.record["disc"] = {{"mse", ev.mse}, {"macro_r", ev.macro_r}, {"undefined", ev.undefined}, {"per_attribute", per}};
  return {ev.macro_r > 0.8 && ev.mse < 0.25,
          "macro r=" + num(ev.macro_r) + " (>0.8), MSE=" + num(ev.mse) + " (<0.25), lowest r=" + num(worst) + " (" +
              worst_id + "), n=" + std::to_string(c.corpus->test.size())};
}

// --- 11. judge client -----------------------------------------------------

fs::path source_dir() { return fs::path(__FILE__).parent_path(); }

Outcome judge_client(Context&) {
  std::ifstream in(source_dir() / "data" / "judge_template.txt", std::ios::binary);
  const std::string tmpl((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto hole = tmpl.find("{}");
  std::vector<std::string> texts = {"the cat sat on the mat.", "mat the on sat.", "we left early, because of rain!",
                                    "a b c", "it's fine."};
  std::map<std::string, std::string> replies = {{texts[0], "Yes"},
                                                {texts[1], "no."},
                                                {texts[2], "Yes, definitely."},
                                                {texts[3], "I cannot tell"},
                                                {texts[4], "NO"}};
  bool prompts_ok = hole != std::string::npos;
  JudgeConfig cfg;
  cfg.api_key = "acceptance";
  cfg.backoff_ms = 1;
  cfg.timeout_s = 5;

  FluencyResult r;
  {
    fixtures::MockJudge m([&](const std::string& s) { return replies.at(s); });
    cfg.url = m.url();
    r = judge_fluency(texts, cfg);
    const auto got = m.prompts();
    prompts_ok = prompts_ok && got.size() == texts.size();
    for (const auto& t : texts) {
      std::string expect = tmpl;
      expect.replace(hole, 2, t);
      prompts_ok = prompts_ok && std::count(got.begin(), got.end(), expect) == 1;
    }
  }
  const bool parse_ok = r.verdicts == std::vector<linggen::Verdict>{linggen::Verdict::kYes, linggen::Verdict::kNo,
                                                                   linggen::Verdict::kYes, linggen::Verdict::kUnparseable,
                                                                   linggen::Verdict::kNo};
  const bool rate_ok = r.yes == 2 && r.no == 2 && r.unparseable == 1 && r.rate() == 2.0 / 4.0;

  bool retry_ok;
  {
    fixtures::MockJudge flaky([](const std::string&) { return "yes"; }, 2);
    cfg.url = flaky.url();
    const auto ok = judge_fluency(std::vector<std::string>{"x."}, cfg);
    fixtures::MockJudge dead([](const std::string&) { return "yes"; }, 1000);
    cfg.url = dead.url();
    const auto gone = judge_fluency(std::vector<std::string>{"x."}, cfg);
    retry_ok = ok.yes == 1 && flaky.attempts("x.") == 3 && gone.unjudged == 1 && dead.attempts("x.") == 4 &&
               !gone.rate().has_value();
  }

  // 7 yes, 3 no and 2 unparseable must give exactly 7/10.
  std::vector<std::string> many;
  for (int i = 0; i < 12; ++i) many.push_back("s" + std::to_string(i) + ".");
  fixtures::MockJudge m([](const std::string& s) {
    const int i = std::stoi(s.substr(1));
    return i < 7 ? "yes" : i < 10 ? "no" : "??";
  });
  cfg.url = m.url();
  cfg.max_in_flight = 4;
  const auto big = judge_fluency(many, cfg);
  const bool arithmetic_ok = big.rate() == 7.0 / 10.0 && big.unparseable == 2;

  return {prompts_ok && parse_ok && rate_ok && retry_ok && arithmetic_ok,
          std::string("prompt bytes ") + (prompts_ok ? "match" : "DIFFER") + ", parsing " + (parse_ok ? "ok" : "WRONG") +
              ", retry " + (retry_ok ? "ok (3 attempts to succeed, 4 then unjudged)" : "WRONG") + ", rate " +
              (rate_ok && arithmetic_ok ? "exact" : "WRONG")};
}

// --- 12. reproducibility ------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "linggen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << "linggen " << args[1] << " failed: " << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome reproducibility(Context& c) {
  const auto root = c.work / "repro";
  const auto cfg_path = c.work / "repro.config.json";
  {
    std::ofstream(cfg_path) << json{{"seed", 7},         {"n_docs", 3000},  {"max_len", 100},  {"d_model", 32},
                                    {"n_layers", 1},     {"n_heads", 2},    {"ffn_size", 64},  {"steps", 120},
                                    {"batch_size", 16},  {"eval_every", 40}, {"lr", 1e-3},     {"strategy", "pmask"},
                                    {"n_samples", 100},  {"seeds", {1, 2}}, {"k_controlled", 2}}
                                   .dump(2);
  }
  const std::vector<std::string> artifacts = {"lm.bin", "lm.log.csv", "disc.bin", "disc.eval.json", "eval/report.json",
                                              "eval/report.csv"};
  auto run_once = [&](const std::string& workers) -> std::optional<std::map<std::string, std::string>> {
    fs::remove_all(root);
    const auto r = root.string();
    const auto cf = cfg_path.string();
    const std::vector<std::vector<std::string>> steps = {
        {"synth", "--config", cf, "--out", r + "/raw"},
        {"ingest", "--config", cf, "--in", r + "/raw/corpus.jsonl", "--out", r + "/prep"},
        {"train", "--config", cf, "--corpus", r + "/prep", "--out", r + "/lm.bin", "--workers", workers},
        {"train-disc", "--config", cf, "--corpus", r + "/prep", "--out", r + "/disc.bin", "--steps", "60"},
        {"eval", "--config", cf, "--ckpt", r + "/lm.bin", "--corpus", r + "/prep", "--out", r + "/eval", "--workers",
         workers}};
    for (const auto& s : steps) {
      if (cli(s) != 0) return std::nullopt;
    }
    std::map<std::string, std::string> bytes;
    for (const auto& a : artifacts) bytes[a] = slurp(root / a);
    return bytes;
  };
  const auto a = run_once("1");
  const auto b = run_once("1");
  const auto w = run_once("3");
  if (!a || !b || !w) return {false, "pipeline failed"};
  std::string differing;
  for (const auto& name : artifacts) {
    if (a->at(name).empty()) differing += name + "(missing) ";
    if (a->at(name) != b->at(name)) differing += name + " ";
    if (a->at(name) != w->at(name)) differing += name + "(workers=3) ";
  }
  return {differing.empty(), differing.empty() ? "synth->ingest->train->train-disc->eval run 3x (workers 1,1,3): " +
                                                     std::to_string(artifacts.size()) + " artifacts bit-identical"
                                               : "differ: " + differing};
}

}  // namespace

int main(int argc, char** argv) {
  Context c;
  c.work = fs::current_path() / "acceptance_work";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      c.work = argv[++i];
    } else if (a == "--reuse") {
      c.reuse = true;
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--work DIR] [--only 1,2,...] [--reuse]\n";
      return 2;
    }
  }
  fs::create_directories(c.work / "models");

  const std::vector<std::pair<const char*, std::function<Outcome(Context&)>>> criteria = {
      {"sampler fidelity", sampler_fidelity},
      {"calibration", calibration},
      {"extractor oracle equivalence", extractor_oracle},
      {"masking exclusion", masking_exclusion},
      {"conditioning identity", conditioning_identity},
      {"gradient correctness and overfit", gradients_and_overfit},
      {"controllability (single attribute)", controllability},
      {"sweep trend (soft)", sweep_trend},
      {"ablation ordering (soft)", ablation_ordering},
      {"discriminator", discriminator},
      {"judge client", judge_client},
      {"reproducibility", reproducibility},
  };
  const auto t0 = Clock::now();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto ti = Clock::now();
    Outcome v;
    try {
      v = criteria[i].second(c);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %2d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str(),
                seconds_since(ti));
    std::fflush(stdout);
    c.record["criteria"][std::to_string(id)] = {{"pass", v.pass}, {"detail", v.detail}};
    std::ofstream(c.work / "acceptance.json") << c.record.dump(2) << '\n';
  }
  std::printf("%d failed, total %.1fs\n", failed, seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
