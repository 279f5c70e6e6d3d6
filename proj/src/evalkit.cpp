#include "linggen/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "linggen/errors.hpp"

namespace linggen {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_double(*v) : "NA"; }

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// Population std for per-sample spread, sample std for seed-level spread.
double std_of(std::span<const double> v, bool sample) {
  if (v.size() < (sample ? 2u : 1u)) return v.empty() ? std::nan("") : 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - (sample ? 1 : 0)));
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  if (w == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += w) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void write_file(const fs::path& path, const std::string& s) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << s;
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

}  // namespace

double attribute_mse(std::span<const double> targets, std::span<const double> achieved,
                     std::span<const int> controlled) {
  if (controlled.empty()) throw Error(ErrorKind::kInsufficientData, "no controlled attributes");
  if (targets.size() != achieved.size()) throw Error(ErrorKind::kLengthMismatch, "target/achieved length");
  double s = 0.0;
  for (int i : controlled) {
    const auto u = static_cast<std::size_t>(i);
    if (u >= targets.size()) throw Error(ErrorKind::kLengthMismatch, "controlled index out of range");
    s += (targets[u] - achieved[u]) * (targets[u] - achieved[u]);
  }
  return s / static_cast<double>(controlled.size());
}

double attribute_mse(std::span<const double> targets, std::span<const double> achieved) {
  if (targets.empty()) throw Error(ErrorKind::kInsufficientData, "no controlled attributes");
  if (targets.size() != achieved.size()) throw Error(ErrorKind::kLengthMismatch, "target/achieved length");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) s += (targets[i] - achieved[i]) * (targets[i] - achieved[i]);
  return s / static_cast<double>(targets.size());
}

std::string_view eval_mode_key(EvalMode m) {
  switch (m) {
    case EvalMode::kModel: return "model";
    case EvalMode::kVanilla: return "vanilla";
    case EvalMode::kReference: return "reference";
  }
  return "model";
}

void finalize(EvalReport& r, std::size_t k) {
  std::vector<double> norm, raw;
  std::vector<double> attr_sum(k, 0.0);
  std::vector<int> attr_n(k, 0);
  r.degenerate_count = 0;
  for (const auto& s : r.samples) {
    if (s.degenerate) {
      ++r.degenerate_count;
      continue;
    }
    norm.push_back(s.mse_norm);
    raw.push_back(s.mse_raw);
    for (std::size_t c = 0; c < s.controlled.size(); ++c) {
      const auto i = static_cast<std::size_t>(s.controlled[c]);
      attr_sum[i] += s.sq_err_raw[c];
      ++attr_n[i];
    }
  }
  r.n_scored = static_cast<int>(norm.size());
  r.mse_norm_mean = mean_of(norm);
  r.mse_norm_std = std_of(norm, false);
  r.mse_raw_mean = mean_of(raw);
  r.per_attribute_raw_sq.assign(k, std::nan(""));
  for (std::size_t i = 0; i < k; ++i) {
    if (attr_n[i] > 0) r.per_attribute_raw_sq[i] = attr_sum[i] / attr_n[i];
  }
}

nlohmann::json EvalReport::to_json(const AttributeSchema& schema) const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["mode"] = mode;
  j["seed"] = seed;
  j["k_controlled"] = k_controlled;
  j["n_samples"] = samples.size();
  j["n_scored"] = n_scored;
  j["degenerate_count"] = degenerate_count;
  j["mse_norm_mean"] = num(mse_norm_mean);
  j["mse_norm_std"] = num(mse_norm_std);
  j["mse_raw_mean"] = num(mse_raw_mean);
  j["fluency_rate"] = fluency_rate ? nlohmann::json(*fluency_rate) : nlohmann::json(nullptr);
  nlohmann::json per_attr = nlohmann::json::object();
  for (std::size_t i = 0; i < per_attribute_raw_sq.size() && i < schema.size(); ++i) {
    per_attr[schema[i].id] = num(per_attribute_raw_sq[i]);
  }
  j["per_attribute_raw_sq_err"] = per_attr;
  auto arr = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json e;
    e["record"] = s.record;
    std::vector<std::string> ids;
    for (int c : s.controlled) ids.push_back(schema[static_cast<std::size_t>(c)].id);
    e["controlled"] = ids;
    e["target_raw"] = s.target_raw;
    e["target_norm"] = s.target_norm;
    e["text"] = s.text;
    e["degenerate"] = s.degenerate;
    if (!s.degenerate) {
      e["achieved_raw"] = s.achieved_raw;
      e["achieved_norm"] = s.achieved_norm;
      e["sq_err_norm"] = s.sq_err_norm;
      e["sq_err_raw"] = s.sq_err_raw;
      e["mse_norm"] = s.mse_norm;
      e["mse_raw"] = s.mse_raw;
    }
    arr.push_back(std::move(e));
  }
  j["samples"] = std::move(arr);
  return j;
}

EvalReport run_eval(const EvalRequest& req) {
  if (req.targets == nullptr || req.targets->empty()) {
    throw Error(ErrorKind::kEmptySplit, "evaluation needs held-out target records");
  }
  if (req.mode != EvalMode::kReference && req.ckpt == nullptr) {
    throw Error(ErrorKind::kConfig, "evaluation needs a checkpoint");
  }
  if (req.ckpt && req.mode != EvalMode::kReference && !(req.ckpt->schema == req.schema)) {
    throw Error(ErrorKind::kSchemaMismatch, "checkpoint schema differs from evaluation schema");
  }
  const int k = static_cast<int>(req.schema.size());
  if (req.norm.size() != req.schema.size()) throw Error(ErrorKind::kSchemaMismatch, "normstats size");
  std::vector<int> fixed;
  for (const auto& id : req.controlled_ids) fixed.push_back(static_cast<int>(req.schema.require(id)));
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  const int count = fixed.empty() ? req.k_controlled : static_cast<int>(fixed.size());
  if (count < 1 || count > k) throw Error(ErrorKind::kConfig, "controlled count must be in [1, k]");
  if (req.n_samples < 1) throw Error(ErrorKind::kConfig, "n_samples must be positive");

  EvalReport report;
  report.mode = std::string(eval_mode_key(req.mode));
  report.seed = req.seed;
  report.k_controlled = count;
  report.samples.resize(static_cast<std::size_t>(req.n_samples));
  const auto& records = *req.targets;

  parallel_for(report.samples.size(), req.workers, [&](std::size_t i) {
    Rng rng(Rng::splitmix64(Rng::splitmix64(req.seed) ^ static_cast<std::uint64_t>(i)));
    SampleResult s;
    s.record = static_cast<std::size_t>(rng.below(records.size()));
    const auto& rec = records[s.record];
    if (fixed.empty()) {
      s.controlled = rng.choose(k, count);
      std::sort(s.controlled.begin(), s.controlled.end());
    } else {
      s.controlled = fixed;
    }
    const auto target_norm_full = normalize(rec.attrs_raw, req.norm);
    for (int c : s.controlled) {
      s.target_raw.push_back(rec.attrs_raw[static_cast<std::size_t>(c)]);
      s.target_norm.push_back(target_norm_full[static_cast<std::size_t>(c)]);
    }

    switch (req.mode) {
      case EvalMode::kReference: s.text = rec.text; break;
      case EvalMode::kModel:
        s.text = generate_conditioned(*req.ckpt, target_norm_full, mask_complement(k, s.controlled),
                                      req.decode, rng)
                     .text;
        break;
      case EvalMode::kVanilla:
        s.text = generate_conditioned(*req.ckpt, std::vector<double>(static_cast<std::size_t>(k), 0.0),
                                      mask_complement(k, {}), req.decode, rng)
                     .text;
        break;
    }

    AttributeVector achieved;
    try {
      achieved = extract(s.text, req.schema, req.lex, req.extract);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEmptyDocument) throw;
      s.degenerate = true;
    }
    if (!s.degenerate) {
      const auto achieved_norm = normalize(achieved, req.norm);
      for (std::size_t c = 0; c < s.controlled.size(); ++c) {
        const auto idx = static_cast<std::size_t>(s.controlled[c]);
        s.achieved_raw.push_back(achieved[idx]);
        s.achieved_norm.push_back(achieved_norm[idx]);
        const double dn = s.target_norm[c] - achieved_norm[idx];
        const double dr = s.target_raw[c] - achieved[idx];
        s.sq_err_norm.push_back(dn * dn);
        s.sq_err_raw.push_back(dr * dr);
      }
      s.mse_norm = attribute_mse(s.target_norm, s.achieved_norm);
      s.mse_raw = attribute_mse(s.target_raw, s.achieved_raw);
    }
    report.samples[i] = std::move(s);
  });
  finalize(report, req.schema.size());
  return report;
}

// --- report files -----------------------------------------------------------

std::vector<ReportRow> summarize(const std::string& strategy, const std::string& integration,
                                 const std::vector<EvalReport>& per_seed) {
  std::vector<ReportRow> rows;
  std::vector<double> means, raws, fluency;
  int degenerate = 0;
  for (const auto& r : per_seed) {
    ReportRow row;
    row.strategy = strategy;
    row.integration = integration;
    row.seed = std::to_string(r.seed);
    row.k_controlled = r.k_controlled;
    row.mse_norm_mean = r.mse_norm_mean;
    row.mse_norm_std = r.mse_norm_std;
    row.mse_raw_mean = r.mse_raw_mean;
    row.degenerate_count = r.degenerate_count;
    row.fluency_rate = r.fluency_rate;
    rows.push_back(row);
    means.push_back(r.mse_norm_mean);
    raws.push_back(r.mse_raw_mean);
    degenerate += r.degenerate_count;
    if (r.fluency_rate) fluency.push_back(*r.fluency_rate);
  }
  ReportRow all;
  all.strategy = strategy;
  all.integration = integration;
  all.seed = "all";
  all.k_controlled = per_seed.empty() ? 0 : per_seed.front().k_controlled;
  all.mse_norm_mean = mean_of(means);
  all.mse_norm_std = std_of(means, true);
  all.mse_raw_mean = mean_of(raws);
  all.degenerate_count = degenerate;
  if (!fluency.empty()) all.fluency_rate = mean_of(fluency);
  rows.push_back(all);
  return rows;
}

void write_report_csv(const fs::path& path, const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "strategy,integration,seed,k_controlled,mse_norm_mean,mse_norm_std,mse_raw_mean,"
         "degenerate_count,fluency_rate\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.integration << ',' << r.seed << ',' << r.k_controlled << ','
        << fmt_double(r.mse_norm_mean) << ',' << fmt_double(r.mse_norm_std) << ','
        << fmt_double(r.mse_raw_mean) << ',' << r.degenerate_count << ',' << fmt_opt(r.fluency_rate)
        << '\n';
  }
  write_file(path, out.str());
}

std::vector<ReportRow> read_report_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  auto num = [](const std::string& s) { return s == "NA" ? std::nan("") : std::stod(s); };
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw Error(ErrorKind::kFormat, "bad report row: " + line);
    ReportRow r;
    r.strategy = f[0];
    r.integration = f[1];
    r.seed = f[2];
    r.k_controlled = std::stoi(f[3]);
    r.mse_norm_mean = num(f[4]);
    r.mse_norm_std = num(f[5]);
    r.mse_raw_mean = num(f[6]);
    r.degenerate_count = std::stoi(f[7]);
    if (f[8] != "NA") r.fluency_rate = std::stod(f[8]);
    rows.push_back(r);
  }
  return rows;
}

// --- sweep ----------------------------------------------------------------

std::vector<SweepCell> sweep(std::span<const NamedCheckpoint> models,
                             const std::vector<CorpusRecord>& test, const Lexicons& lex,
                             const SweepConfig& cfg) {
  if (models.empty()) throw Error(ErrorKind::kConfig, "sweep needs at least one checkpoint");
  for (const auto& m : models) {
    if (!(m.ckpt->schema == models.front().ckpt->schema)) {
      throw Error(ErrorKind::kSchemaMismatch, "sweep checkpoints do not share a schema");
    }
  }
  std::vector<SweepCell> cells;
  for (const auto& m : models) {
    const int k = static_cast<int>(m.ckpt->schema.size());
    for (int count : cfg.counts) {
      for (auto seed : cfg.seeds) {
        SweepCell cell{m.label, count, seed, std::nullopt, ""};
        if (count < 1 || count > k) {
          cell.note = "count outside [1, k]";
          cells.push_back(cell);
          continue;
        }
        try {
          EvalRequest req;
          req.ckpt = m.ckpt;
          req.targets = &test;
          req.schema = m.ckpt->schema;
          req.norm = m.ckpt->norm;
          req.lex = lex;
          req.mode = EvalMode::kModel;
          req.n_samples = cfg.n_samples;
          req.k_controlled = count;
          req.decode = cfg.decode;
          req.seed = seed;
          req.workers = cfg.workers;
          const auto r = run_eval(req);
          if (r.n_scored > 0) {
            cell.mse = r.mse_norm_mean;
          } else {
            cell.note = "all generations degenerate";
          }
        } catch (const Error& e) {
          cell.note = std::string(e.category()) + ": " + e.what();
        }
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

void write_sweep(const fs::path& dir, const std::vector<SweepCell>& cells) {
  std::ostringstream csv;
  csv << "strategy,count,seed,mse_norm,note\n";
  for (const auto& c : cells) {
    csv << c.strategy << ',' << c.count << ',' << c.seed << ',' << fmt_opt(c.mse) << ',' << c.note << '\n';
  }
  write_file(dir / "sweep.csv", csv.str());

  // Aggregate per (strategy, count) preserving first-seen order.
  std::vector<std::string> strategies;
  std::vector<int> counts;
  std::map<std::pair<std::string, int>, std::vector<double>> vals;
  std::map<std::pair<std::string, int>, int> expected;
  for (const auto& c : cells) {
    if (std::find(strategies.begin(), strategies.end(), c.strategy) == strategies.end()) strategies.push_back(c.strategy);
    if (std::find(counts.begin(), counts.end(), c.count) == counts.end()) counts.push_back(c.count);
    ++expected[{c.strategy, c.count}];
    if (c.mse) vals[{c.strategy, c.count}].push_back(*c.mse);
  }
  std::ostringstream fig;
  fig << "strategy,count,mean,std,n_seeds,missing\n";
  double ymax = 0.0;
  for (const auto& s : strategies) {
    for (int n : counts) {
      const auto& v = vals[{s, n}];
      const int missing = expected[{s, n}] - static_cast<int>(v.size());
      fig << s << ',' << n << ',' << fmt_double(mean_of(v)) << ',' << fmt_double(std_of(v, true)) << ','
          << v.size() << ',' << missing << '\n';
      if (!v.empty()) ymax = std::max(ymax, mean_of(v) + std::max(0.0, std_of(v, true)));
    }
  }
  write_file(dir / "fig2.csv", fig.str());

  // Minimal line chart: x evenly spaced by count index, y linear from 0.
  const double W = 640, H = 400, L = 60, R = 160, T = 30, B = 50;
  if (ymax <= 0.0) ymax = 1.0;
  auto xpos = [&](std::size_t i) {
    return counts.size() < 2 ? L + (W - L - R) / 2
                             : L + (W - L - R) * static_cast<double>(i) / static_cast<double>(counts.size() - 1);
  };
  auto ypos = [&](double y) { return T + (H - T - B) * (1.0 - y / ymax); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    svg << "<text x=\"" << xpos(i) << "\" y=\"" << H - B + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
        << counts[i] << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double y = ymax * t / 4.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.2f", y);
    svg << "<text x=\"" << L - 6 << "\" y=\"" << ypos(y) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << label << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">controlled attributes</text>\n";
  svg << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << (T + H - B) / 2 << ")\" text-anchor=\"middle\">MSE (normalized)</text>\n";
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    const char* color = colors[s % 6];
    std::ostringstream pts;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const auto& v = vals[{strategies[s], counts[i]}];
      if (v.empty()) continue;
      pts << xpos(i) << ',' << ypos(mean_of(v)) << ' ';
      svg << "<circle cx=\"" << xpos(i) << "\" cy=\"" << ypos(mean_of(v)) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts.str()
        << "\"/>\n";
    svg << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" font-size=\"12\" fill=\"" << color
        << "\">" << strategies[s] << "</text>\n";
  }
  svg << "</svg>\n";
  write_file(dir / "fig2.svg", svg.str());
}

// --- pairwise -------------------------------------------------------------

void normalize_rows(PairwiseMatrix& m) {
  const auto k = m.raw.size();
  m.norm.assign(k, std::vector<double>(k, 0.0));
  m.constant_row.assign(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : m.raw[i]) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(hi - lo > 0.0)) {
      m.constant_row[i] = true;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double v = m.raw[i][j];
      m.norm[i][j] = std::isfinite(v) ? (v - lo) / (hi - lo) : 0.0;
    }
  }
}

PairwiseMatrix pairwise(const Checkpoint& ckpt, const std::vector<CorpusRecord>& test,
                        const Lexicons& lex, int samples_per_pair, const DecodeParams& decode,
                        std::uint64_t seed, int workers) {
  const auto k = ckpt.schema.size();
  if (k < 2) throw Error(ErrorKind::kConfig, "pairwise matrix needs at least 2 attributes");
  PairwiseMatrix m;
  m.ids = ckpt.schema.ids();
  m.raw.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      EvalRequest req;
      req.ckpt = &ckpt;
      req.targets = &test;
      req.schema = ckpt.schema;
      req.norm = ckpt.norm;
      req.lex = lex;
      req.n_samples = samples_per_pair;
      req.decode = decode;
      req.workers = workers;
      req.seed = Rng::splitmix64(seed ^ static_cast<std::uint64_t>(i * k + j));
      req.controlled_ids = {m.ids[i]};
      if (j != i) req.controlled_ids.push_back(m.ids[j]);
      const auto r = run_eval(req);
      std::vector<double> errs;
      for (const auto& s : r.samples) {
        if (s.degenerate) continue;
        for (std::size_t c = 0; c < s.controlled.size(); ++c) {
          if (static_cast<std::size_t>(s.controlled[c]) == i) errs.push_back(s.sq_err_norm[c]);
        }
      }
      m.raw[i][j] = errs.empty() ? std::nan("") : mean_of(errs);
    }
  }
  normalize_rows(m);
  return m;
}

void write_pairwise(const fs::path& dir, const PairwiseMatrix& m) {
  auto dump = [&](const std::vector<std::vector<double>>& mat, bool flag) {
    std::ostringstream out;
    out << "primary";
    for (const auto& id : m.ids) out << ',' << id;
    if (flag) out << ",constant_row";
    out << '\n';
    for (std::size_t i = 0; i < mat.size(); ++i) {
      out << m.ids[i];
      for (double v : mat[i]) out << ',' << fmt_double(v);
      if (flag) out << ',' << (m.constant_row[i] ? 1 : 0);
      out << '\n';
    }
    return out.str();
  };
  write_file(dir / "pairwise_raw.csv", dump(m.raw, false));
  write_file(dir / "pairwise_norm.csv", dump(m.norm, true));
}

// --- ablation -------------------------------------------------------------

AblationResult ablate(const PreparedCorpus& corpus, const fs::path& corpus_dir, const Lexicons& lex,
                      const AblationConfig& cfg) {
  AblationResult out;
  out.corpus_checksum = file_checksum(corpus_dir / "manifest.json");
  for (const auto& mode : cfg.modes) {
    for (const auto& strategy : cfg.strategies) {
      const std::string skey = strategy_key(strategy);
      const std::string mkey(mode_key(mode));
      try {
        ModelConfig mc = cfg.model;
        mc.mode = mode;
        auto trained = train_lm(corpus, mc, cfg.optim, strategy);
        trained.ckpt.meta["corpus_checksum"] = out.corpus_checksum;
        if (!cfg.out_dir.empty()) {
          const auto cell = cfg.out_dir / (skey + "_" + mkey);
          trained.ckpt.save(cell / "ckpt.bin");
          write_log_csv(cell / "train_log.csv", trained.log);
        }
        std::vector<EvalReport> reports;
        for (auto seed : cfg.seeds) {
          EvalRequest req;
          req.ckpt = &trained.ckpt;
          req.targets = &corpus.test;
          req.schema = corpus.schema;
          req.norm = corpus.norm;
          req.lex = lex;
          req.n_samples = cfg.n_samples;
          req.k_controlled = cfg.k_controlled;
          req.decode = cfg.decode;
          req.seed = seed;
          req.workers = cfg.workers;
          reports.push_back(run_eval(req));
        }
        out.rows.push_back(summarize(skey, mkey, reports).back());
      } catch (const Error& e) {
        ReportRow row;
        row.strategy = skey;
        row.integration = mkey;
        row.seed = "all";
        row.k_controlled = cfg.k_controlled;
        row.mse_norm_mean = row.mse_norm_std = row.mse_raw_mean = std::nan("");
        row.error = std::string(e.category()) + ": " + e.what();
        out.rows.push_back(row);
      }
    }
  }
  return out;
}

}  // namespace linggen
