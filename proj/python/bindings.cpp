#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

#include "vihsd/checkpoint.hpp"
#include "vihsd/config.hpp"
#include "vihsd/error.hpp"
#include "vihsd/pipeline.hpp"
#include "vihsd/verify.hpp"

namespace py = pybind11;
using namespace vihsd;

namespace {

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["macro_f1"] = r.macro_f1;
  d["micro_f1"] = r.micro_f1;
  d["weighted_f1"] = r.weighted_f1;
  d["accuracy"] = r.accuracy;
  d["count"] = r.count;
  d["confusion"] = r.confusion;
  py::list classes;
  for (int c = 0; c < kNumClasses; ++c) {
    py::dict s;
    s["name"] = kClassNames[c];
    s["precision"] = r.per_class[c].precision;
    s["recall"] = r.per_class[c].recall;
    s["f1"] = r.per_class[c].f1;
    s["support"] = r.per_class[c].support;
    classes.append(s);
  }
  d["per_class"] = classes;
  return d;
}

class Classifier {
 public:
  explicit Classifier(LoadedModel loaded) : loaded_(std::move(loaded)) {}

  static Classifier load(const std::filesystem::path& path) {
    return Classifier(load_checkpoint(resolve_checkpoint_dir(path)));
  }

  std::vector<std::pair<int, std::vector<double>>> predict(const std::vector<std::string>& texts) const {
    if (texts.empty()) return {};
    const auto tokens = preprocess(texts, &loaded_.lexicon);
    const auto batch = encode_batch(tokens, std::nullopt, loaded_.vocab, loaded_.model.spec().max_len);
    std::vector<std::pair<int, std::vector<double>>> out;
    for (auto& p : vihsd::predict(loaded_.model, batch.ids)) out.emplace_back(p.label, std::move(p.probabilities));
    return out;
  }

  EvalReport evaluate(const std::vector<std::string>& texts, const std::vector<int>& labels) const {
    Dataset data{texts, labels};
    return evaluate_dataset(loaded_, data);
  }

  std::string model() const { return std::string(model_name(loaded_.model.spec().kind)); }
  std::size_t parameters() const { return param_count(loaded_.model); }
  std::size_t max_len() const { return loaded_.model.spec().max_len; }
  const Vocabulary& vocabulary() const { return loaded_.vocab; }

 private:
  LoadedModel loaded_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vietnamese hate speech classifiers (C++ core)";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = "[" + std::string(to_string(e.kind())) + "] " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  m.def("normalize_text", &normalize_text, py::arg("text"));
  m.def(
      "tokenize",
      [](const std::string& text, const std::vector<std::string>& lexicon) {
        const auto lex = Lexicon::from_entries(lexicon);
        return tokenize(normalize_text(text), &lex);
      },
      py::arg("text"), py::arg("lexicon") = std::vector<std::string>{},
      "Normalize then tokenize; `lexicon` lists multi-syllable words.");

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static(
          "build",
          [](const std::vector<std::vector<std::string>>& corpus, std::size_t min_frequency) {
            return Vocabulary::build(corpus, min_frequency);
          },
          py::arg("corpus"), py::arg("min_frequency") = 1)
      .def("__len__", &Vocabulary::size)
      .def("__contains__", &Vocabulary::contains)
      .def("id", &Vocabulary::id)
      .def("token", &Vocabulary::token)
      .def_property_readonly("tokens", &Vocabulary::tokens)
      .def(
          "encode", [](const Vocabulary& v, const std::vector<std::string>& tokens, std::size_t max_len) {
            return encode_pad(tokens, v, max_len);
          },
          py::arg("tokens"), py::arg("max_len") = kDefaultMaxLen)
      .def("decode", [](const Vocabulary& v, const std::vector<std::int32_t>& ids) { return decode(ids, v); });

  m.def(
      "class_weights", [](const LabelCounts& counts) { return class_weights(counts); }, py::arg("counts"));
  m.def(
      "evaluate_predictions",
      [](const std::vector<int>& gold, const std::vector<int>& pred) {
        return report_dict(evaluate_predictions(gold, pred));
      },
      py::arg("gold"), py::arg("predicted"));
  m.def(
      "stratified_split",
      [](const std::vector<int>& labels, double fraction, std::uint64_t seed) {
        auto s = stratified_split(labels, fraction, seed);
        return std::make_pair(s.train, s.validation);
      },
      py::arg("labels"), py::arg("val_fraction") = 0.1, py::arg("seed") = 42);

  py::class_<Classifier>(m, "Classifier")
      .def_static("load", &Classifier::load, py::arg("path"))
      .def("predict", &Classifier::predict, py::arg("texts"), py::call_guard<py::gil_scoped_release>())
      .def(
          "evaluate",
          [](const Classifier& c, const std::vector<std::string>& texts, const std::vector<int>& labels) {
            EvalReport r;
            {
              py::gil_scoped_release release;
              r = c.evaluate(texts, labels);
            }
            return report_dict(r);
          },
          py::arg("texts"), py::arg("labels"))
      .def_property_readonly("model", &Classifier::model)
      .def_property_readonly("parameters", &Classifier::parameters)
      .def_property_readonly("max_len", &Classifier::max_len)
      .def_property_readonly("vocabulary", &Classifier::vocabulary, py::return_value_policy::reference_internal);

  m.def(
      "train",
      [](const std::filesystem::path& config, std::optional<std::string> model,
         std::optional<std::filesystem::path> out_dir, std::optional<std::uint64_t> seed, bool verbose) {
        auto cfg = load_run_config(config);
        if (model) cfg.models = parse_model_selection(*model);
        if (out_dir) cfg.out_dir = *out_dir;
        if (seed) cfg.training.seed = *seed;
        std::vector<TrainOutcome> outcomes;
        {
          py::gil_scoped_release release;
          std::ostringstream sink;
          outcomes = train_models(cfg, verbose ? std::cerr : sink);
        }
        py::list result;
        for (const auto& o : outcomes) {
          py::dict d;
          d["model"] = std::string(model_name(o.kind));
          d["run_dir"] = o.run_dir;
          d["best_epoch"] = o.result.best_epoch;
          d["epochs"] = o.result.history.size();
          d["macro_f1"] = o.result.best_macro_f1;
          d["parameters"] = o.parameters;
          d["coverage"] = o.coverage;
          py::list losses;
          for (const auto& h : o.result.history) losses.append(h.train_loss);
          d["train_loss"] = losses;
          if (o.test) d["test"] = report_dict(*o.test);
          result.append(d);
        }
        return result;
      },
      py::arg("config"), py::arg("model") = py::none(), py::arg("out_dir") = py::none(),
      py::arg("seed") = py::none(), py::arg("verbose") = false);

  m.def(
      "verify",
      [](std::uint64_t seed) {
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          VerifyOptions opts;
          opts.seed = seed;
          results = run_verify_suite(opts);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["value"] = r.value;
          d["tolerance"] = r.tolerance;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1234);
}
