#include "linggen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "linggen/errors.hpp"

namespace linggen {

namespace {

constexpr char kMagic[8] = {'L', 'G', 'G', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) throw Error(ErrorKind::kFormat, "truncated checkpoint");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

void Checkpoint::validate() const {
  const auto& cfg = model.config();
  if (cfg.vocab_size != vocab.size()) {
    throw Error(ErrorKind::kShapeMismatch, "checkpoint vocabulary size differs from model");
  }
  if (static_cast<std::size_t>(cfg.n_attributes) != schema.size() || norm.size() != schema.size()) {
    throw Error(ErrorKind::kShapeMismatch, "checkpoint schema/normstats size differs from model");
  }
}

void Checkpoint::save(const std::filesystem::path& path) const {
  validate();
  nlohmann::json header;
  header["role"] = role;
  header["config"] = model.config().to_json();
  header["schema"] = schema.to_json();
  header["normstats"] = norm.to_json(schema);
  header["vocab"] = vocab.to_json();
  header["step"] = step;
  header["val_loss"] = std::isfinite(val_loss) ? nlohmann::json(val_loss) : nlohmann::json(nullptr);
  header["meta"] = meta;
  auto blocks = nlohmann::json::array();
  for (const auto& b : model.params().layout().blocks()) {
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
  }
  header["blocks"] = blocks;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (float f : model.params().flat()) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorKind::kFormat, path.string() + " is not a checkpoint");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw Error(ErrorKind::kFormat, "unsupported checkpoint version");
  const auto len = get_le<std::uint64_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(ErrorKind::kFormat, "truncated checkpoint header");
  const auto header = nlohmann::json::parse(text);

  Checkpoint c;
  c.role = header.at("role").get<std::string>();
  c.schema = AttributeSchema::from_json(header.at("schema"));
  c.norm = NormStats::from_json(header.at("normstats"), c.schema);
  c.vocab = Vocabulary::from_json(header.at("vocab"));
  c.step = header.value("step", 0L);
  c.val_loss = header.at("val_loss").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                               : header.at("val_loss").get<double>();
  c.meta = header.value("meta", nlohmann::json::object());
  c.model = Transformer<float>(ModelConfig::from_json(header.at("config")));

  const auto& blocks = c.model.params().layout().blocks();
  const auto& declared = header.at("blocks");
  if (declared.size() != blocks.size()) throw Error(ErrorKind::kFormat, "checkpoint block count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (declared[i].at("name") != blocks[i].name || declared[i].at("rows") != blocks[i].rows ||
        declared[i].at("cols") != blocks[i].cols) {
      throw Error(ErrorKind::kFormat, "checkpoint block '" + blocks[i].name + "' does not match config");
    }
  }
  for (float& f : c.model.params().flat()) {
    f = std::bit_cast<float>(get_le<std::uint32_t>(in));
  }
  c.validate();
  return c;
}

}  // namespace linggen
