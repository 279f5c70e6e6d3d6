#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "linggen/attributes.hpp"
#include "linggen/checkpoint.hpp"
#include "linggen/datakit.hpp"
#include "linggen/discriminator.hpp"
#include "linggen/errors.hpp"
#include "linggen/lm.hpp"
#include "linggen/pmask.hpp"

namespace py = pybind11;
using namespace linggen;

namespace {

Lexicons lexicons_from(const std::optional<std::filesystem::path>& dir) {
  return dir ? Lexicons::load(*dir) : synth_lexicons();
}

std::map<std::string, double> as_dict(const AttributeSchema& schema, std::span<const double> v) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < schema.size(); ++i) out[schema[i].id] = v[i];
  return out;
}

class LanguageModel {
 public:
  explicit LanguageModel(const std::filesystem::path& path) : ckpt_(Checkpoint::load(path)) {
    if (ckpt_.role != "lm") throw Error(ErrorKind::kFormat, "not a language-model checkpoint");
  }
  std::vector<std::string> generate(const std::map<std::string, double>& targets, int n, std::uint64_t seed,
                                    double temperature, double top_p, int max_tokens) const {
    DecodeParams p;
    p.temperature = temperature;
    p.top_p = top_p;
    p.max_tokens = max_tokens;
    std::vector<std::string> out;
    py::gil_scoped_release release;
    for (int i = 0; i < n; ++i) {
      Rng rng(Rng::splitmix64(Rng::splitmix64(seed) ^ static_cast<std::uint64_t>(i)));
      out.push_back(generate_fn(targets, p, rng));
    }
    return out;
  }
  std::vector<std::string> attribute_ids() const { return ckpt_.schema.ids(); }
  std::string strategy() const { return ckpt_.meta.value("strategy", std::string("unknown")); }

 private:
  std::string generate_fn(const std::map<std::string, double>& targets, const DecodeParams& p, Rng& rng) const {
    return linggen::generate(ckpt_, targets, p, rng).text;
  }
  Checkpoint ckpt_;
};

class Discriminator {
 public:
  explicit Discriminator(const std::filesystem::path& path) : ckpt_(Checkpoint::load(path)) {
    if (ckpt_.role != "discriminator") throw Error(ErrorKind::kFormat, "not a discriminator checkpoint");
  }
  std::map<std::string, double> predict(const std::string& text, bool raw) const {
    auto z = linggen::predict(ckpt_, text);
    if (raw) z = denormalize(z, ckpt_.norm);
    return as_dict(ckpt_.schema, z);
  }

 private:
  Checkpoint ckpt_;
};

}  // namespace

PYBIND11_MODULE(_linggen, m) {
  m.doc() = "Linguistic attribute extraction, masking and conditioned generation";

  static py::handle error_type = py::register_exception<Error>(m, "LinggenError").ptr();
  // Prefix messages with the error category, e.g. "EmptyDocument: ...".
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, (std::string(e.category()) + ": " + e.what()).c_str());
    }
  });

  m.def("attribute_ids", [] { return AttributeSchema::default_schema().ids(); },
        "Attribute ids of the default schema, in order.");
  m.def(
      "extract",
      [](const std::string& text, std::optional<std::filesystem::path> lexicons) {
        const auto schema = AttributeSchema::default_schema();
        return as_dict(schema, extract(text, schema, lexicons_from(lexicons)));
      },
      py::arg("text"), py::arg("lexicons") = py::none(),
      "Attribute values of a text. Uses the synthetic lexicons unless a lexicon directory is given.");

  m.def("pmask_cdf", &pmask_cdf, py::arg("m"), py::arg("b"));
  m.def("pmask_quantile", &pmask_quantile, py::arg("u"), py::arg("b"));
  m.def(
      "sample_rates",
      [](int n, double b, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<double> out(static_cast<std::size_t>(n));
        for (auto& x : out) x = sample_rate(rng, {b});
        return out;
      },
      py::arg("n"), py::arg("b") = 3.0, py::arg("seed") = 1);
  m.def(
      "calibrate_shape",
      [](double rate, double mass) {
        const auto r = calibrate_shape(rate, mass);
        return py::make_tuple(r.b, r.achieved_mass, r.iterations);
      },
      py::arg("target_rate") = 0.3, py::arg("target_mass") = 0.6, "Returns (b, achieved mass, iterations).");
  m.def("masked_count", &masked_count, py::arg("rate"), py::arg("k"));

  py::class_<LanguageModel>(m, "LanguageModel")
      .def(py::init<const std::filesystem::path&>(), py::arg("path"))
      .def("generate", &LanguageModel::generate, py::arg("targets") = std::map<std::string, double>{},
           py::arg("n") = 1, py::arg("seed") = 1, py::arg("temperature") = 1.0, py::arg("top_p") = 0.95,
           py::arg("max_tokens") = -1, "Targets are raw attribute values keyed by id; unlisted ids are masked.")
      .def_property_readonly("attribute_ids", &LanguageModel::attribute_ids)
      .def_property_readonly("strategy", &LanguageModel::strategy);

  py::class_<Discriminator>(m, "Discriminator")
      .def(py::init<const std::filesystem::path&>(), py::arg("path"))
      .def("predict", &Discriminator::predict, py::arg("text"), py::arg("raw") = true);
}
