#include "vihsd/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "vihsd/error.hpp"
#include "vihsd/pipeline.hpp"
#include "vihsd/verify.hpp"

namespace vihsd {

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Corruption:
      return kExitConfig;
    case ErrorKind::Data:
    case ErrorKind::Format:
    case ErrorKind::Io:
      return kExitData;
    case ErrorKind::Numeric:
      return kExitNumeric;
    default:
      return kExitFailure;
  }
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

struct TrainArgs {
  std::string config, data, test_data, model, vectors, lexicon, out_dir, class_weights;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.data.empty()) cfg.train_data = a.data;
  if (!a.test_data.empty()) cfg.test_data = a.test_data;
  if (!a.model.empty()) cfg.models = parse_model_selection(a.model);
  if (!a.vectors.empty()) cfg.vectors = a.vectors;
  if (!a.lexicon.empty()) cfg.lexicon = a.lexicon;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (!a.class_weights.empty()) cfg.training.class_weighting = parse_class_weighting(a.class_weights);
  if (a.seed) cfg.training.seed = *a.seed;
  if (a.epochs) cfg.training.max_epochs = *a.epochs;
  cfg.validate();
  const auto outcomes = train_models(cfg, err);
  for (const auto& o : outcomes) {
    out << model_name(o.kind) << ": best epoch " << o.result.best_epoch << "\n" << o.validation.format();
    if (o.test) out << "test:\n" << o.test->format();
  }
  if (outcomes.size() > 1) out << format_comparison(outcomes);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vietnamese hate speech classifiers: train, evaluate, predict, verify"};
  app.require_subcommand(1);

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "Train one or all models on a labeled CSV");
  train->add_option("--config", targs.config, "JSON run config");
  train->add_option("--data", targs.data, "Training CSV (text,label); overrides train_data");
  train->add_option("--test-data", targs.test_data, "Held-out CSV scored after training");
  train->add_option("--model", targs.model, "textcnn, bigru-cnn, bigru-lstm-cnn or all");
  train->add_option("--seed", targs.seed, "Random seed");
  train->add_option("--vectors", targs.vectors, "Pre-trained .vec word vectors");
  train->add_option("--lexicon", targs.lexicon, "Multi-syllable word list for tokenization");
  train->add_option("--out-dir", targs.out_dir, "Output directory");
  train->add_option("--class-weights", targs.class_weights, "none or inverse")
      ->check(CLI::IsMember({"none", "inverse"}));
  train->add_option("--epochs", targs.epochs, "Maximum epochs");

  std::string eval_ckpt, eval_data, eval_output;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a labeled CSV");
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint or run directory")->required();
  eval->add_option("--data", eval_data, "Labeled CSV")->required();
  eval->add_option("--output", eval_output, "Also write per-class scores as CSV");

  std::string pred_ckpt, pred_input, pred_output;
  auto* pred = app.add_subcommand("predict", "Label texts from a CSV or from stdin lines");
  pred->add_option("--checkpoint", pred_ckpt, "Checkpoint or run directory")->required();
  pred->add_option("--input", pred_input, "CSV with a text column (default: one text per stdin line)");
  pred->add_option("--output", pred_output, "Write the CSV here instead of stdout");

  std::uint64_t verify_seed = 1234;
  std::string inject_fault;
  auto* verify = app.add_subcommand("verify", "Run gradient, oracle and preprocessing checks");
  verify->add_option("--seed", verify_seed, "Seed for the random probes");
  verify->add_option("--inject-fault", inject_fault)->group("");  // test hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "vihsd: error[usage]: " << one_line(e.what()) << "\n";
    return kExitConfig;
  }

  try {
    if (train->parsed()) return cmd_train(targs, out, err);

    if (eval->parsed()) {
      const auto loaded = load_checkpoint(resolve_checkpoint_dir(eval_ckpt));
      const auto data = read_dataset(eval_data);
      const auto report = evaluate_dataset(loaded, data);
      out << report.format();
      if (!eval_output.empty()) {
        std::string csv = "class,precision,recall,f1,support\n";
        char buf[128];
        for (int c = 0; c < kNumClasses; ++c) {
          const auto& s = report.per_class[c];
          std::snprintf(buf, sizeof buf, "%s,%.3f,%.3f,%.3f,%zu\n", kClassNames[c], 100 * s.precision,
                        100 * s.recall, 100 * s.f1, s.support);
          csv += buf;
        }
        std::snprintf(buf, sizeof buf, "macro,,,%.3f,%zu\n", 100 * report.macro_f1, report.count);
        csv += buf;
        write_file_atomic(eval_output, csv);
      }
      return kExitOk;
    }

    if (pred->parsed()) {
      const auto loaded = load_checkpoint(resolve_checkpoint_dir(pred_ckpt));
      std::vector<std::string> texts;
      if (!pred_input.empty()) {
        texts = read_dataset(pred_input).texts;
      } else {
        for (std::string line; std::getline(in, line);) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          texts.push_back(line);
        }
        if (in.bad()) fail(ErrorKind::Io, "error while reading standard input");
      }
      const auto csv = predict_csv(loaded, texts);
      if (pred_output.empty()) {
        out << csv;
      } else {
        write_file_atomic(pred_output, csv);
      }
      return kExitOk;
    }

    if (verify->parsed()) {
      VerifyOptions opts;
      opts.seed = verify_seed;
      opts.inject_fault = inject_fault;
      const auto results = run_verify_suite(opts);
      out << format_verify_table(results);
      for (const auto& r : results) {
        if (!r.passed) {
          err << "vihsd: verify failed: " << r.name << "\n";
          return kExitFailure;
        }
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "vihsd: error[" << to_string(e.kind()) << "]: " << one_line(e.what()) << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "vihsd: error[internal]: " << one_line(e.what()) << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace vihsd
