#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vihsd/checkpoint.hpp"
#include "vihsd/config.hpp"
#include "vihsd/dataset.hpp"
#include "vihsd/metrics.hpp"
#include "vihsd/train.hpp"

namespace vihsd {

/// normalize_text then tokenize, row by row.
std::vector<std::vector<std::string>> preprocess(std::span<const std::string> texts, const Lexicon* lexicon);

struct TrainOutcome {
  ModelKind kind = ModelKind::BiGruLstmCnn;
  TrainResult result;
  EvalReport validation;              // best epoch
  std::optional<EvalReport> test;     // when the config names test data
  std::filesystem::path run_dir;      // <out_dir>/<model>
  std::size_t parameters = 0;
  double coverage = 0.0;              // fraction of vocabulary found in the vectors
};

/// Full pipeline for every model in `cfg.models`: read, preprocess, split,
/// build vocabulary and embeddings, fit, then write
///   <out_dir>/<model>/checkpoint/   (see checkpoint.hpp)
///   <out_dir>/<model>/history.csv
///   <out_dir>/<model>/report.txt
/// and, for more than one model, <out_dir>/comparison.txt. Progress goes to
/// `log`.
std::vector<TrainOutcome> train_models(const RunConfig& cfg, std::ostream& log);

/// Model-by-model macro-F1 table in percent with three decimals.
std::string format_comparison(const std::vector<TrainOutcome>& outcomes);

/// Accepts a checkpoint directory or a run directory holding `checkpoint/`.
std::filesystem::path resolve_checkpoint_dir(const std::filesystem::path& path);

/// Scores a labeled CSV. Throws `ErrorKind::Data` for an empty or unlabeled
/// dataset.
EvalReport evaluate_dataset(const LoadedModel& loaded, const Dataset& data);

/// CSV `text,label,p_clean,p_offensive,p_hate`, one row per input text;
/// nothing at all for no texts.
std::string predict_csv(const LoadedModel& loaded, std::span<const std::string> texts);

}  // namespace vihsd
