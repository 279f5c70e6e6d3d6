#pragma once

#include <filesystem>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "linggen/attributes.hpp"
#include "linggen/transformer.hpp"
#include "linggen/vocab.hpp"

namespace linggen {

// On-disk container shared by the decoder and the discriminator:
//   8 bytes  magic "LGGNCKPT"
//   u32 LE   format version
//   u64 LE   header length N
//   N bytes  UTF-8 JSON header (role, config, schema, normstats, vocab,
//            step, val_loss, meta, block list)
//   blocks   raw little-endian float32, in header order
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string role = "lm";  // "lm" or "discriminator"
  Transformer<float> model;
  Vocabulary vocab;
  AttributeSchema schema;
  NormStats norm;
  long step = 0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  nlohmann::json meta = nlohmann::json::object();

  void validate() const;
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace linggen
