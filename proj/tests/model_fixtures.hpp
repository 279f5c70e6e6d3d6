#pragma once

#include <filesystem>
#include <vector>

#include "linggen/datakit.hpp"
#include "linggen/lm.hpp"
#include "linggen/transformer.hpp"

namespace fixtures {

inline linggen::ModelConfig tiny_config(linggen::IntegrationMode mode = linggen::IntegrationMode::kSos,
                                        linggen::HeadKind head = linggen::HeadKind::kTokens) {
  linggen::ModelConfig c;
  c.d_model = 8;
  c.n_layers = 2;
  c.n_heads = 2;
  c.ffn_size = 16;
  c.max_len = 12;
  c.vocab_size = 11;
  c.n_attributes = 4;
  c.mode = mode;
  c.head = head;
  return c;
}

// Every parameter drawn away from its structured init so no gradient is
// trivially zero (gains near 1, everything else N(0, scale)).
template <typename S>
void randomize(linggen::Transformer<S>& m, linggen::Rng& rng, double scale = 0.3) {
  const auto& layout = m.params().layout();
  for (int i = 0; i < static_cast<int>(layout.blocks().size()); ++i) {
    auto blk = m.params().block(i);
    const bool gain = layout[i].name.ends_with(".gain");
    for (Eigen::Index j = 0; j < blk.size(); ++j) {
      blk.data()[j] = static_cast<S>((gain ? 1.0 : 0.0) + rng.normal(0.0, scale));
    }
  }
}

inline std::vector<int> random_tokens(linggen::Rng& rng, int n, int vocab) {
  std::vector<int> t(static_cast<std::size_t>(n));
  for (auto& x : t) x = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab - 4)));
  return t;
}

// Small synthetic corpus ingested once per process.
inline const linggen::PreparedCorpus& small_corpus(std::filesystem::path* dir_out = nullptr) {
  static const std::filesystem::path dir = [] {
    const auto d = std::filesystem::temp_directory_path() / "linggen_small_corpus";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    linggen::Rng rng(101);
    const auto samples = linggen::synth_corpus({}, rng, 600);
    linggen::write_synth_jsonl(d / "corpus.jsonl", samples);
    linggen::IngestConfig cfg;
    cfg.max_len = 48;
    cfg.split.train = 0.8;
    cfg.split.val = 0.1;
    cfg.split.test = 0.1;
    linggen::ingest(d / "corpus.jsonl", linggen::AttributeSchema::default_schema(), linggen::synth_lexicons(), cfg,
                    d / "prepared");
    return d / "prepared";
  }();
  static const linggen::PreparedCorpus corpus = linggen::load_prepared(dir);
  if (dir_out) *dir_out = dir;
  return corpus;
}

inline linggen::ModelConfig small_lm_config() {
  linggen::ModelConfig c;
  c.d_model = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.ffn_size = 32;
  c.max_len = 48;
  return c;
}

}  // namespace fixtures
