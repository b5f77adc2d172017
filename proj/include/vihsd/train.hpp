#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vihsd/metrics.hpp"
#include "vihsd/model.hpp"
#include "vihsd/text.hpp"

namespace vihsd {

enum class ClassWeighting { None, Inverse };

std::string_view class_weighting_name(ClassWeighting w);
/// "none" or "inverse"; throws `ErrorKind::Config` otherwise.
ClassWeighting parse_class_weighting(std::string_view name);

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 5;  // epochs without a better validation macro-F1
  std::uint64_t seed = 42;
  ClassWeighting class_weighting = ClassWeighting::None;
  double val_fraction = 0.1;  // 0 monitors the training set instead

  /// Throws `ErrorKind::Config` naming the offending field.
  void validate() const;
};

/// Adam with bias correction. Parameters without a gradient buffer are
/// skipped.
class Adam {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct Split {
  std::vector<std::size_t> train;       // sorted row indices
  std::vector<std::size_t> validation;  // sorted row indices
};

/// Per class: shuffle that class's rows, send round(val_fraction * n_c) of
/// them to validation. Throws `ErrorKind::Config` for a fraction outside
/// (0, 1) or a split that leaves either side empty.
Split stratified_split(std::span<const int> labels, double val_fraction, std::uint64_t seed);

/// Throws `ErrorKind::Contract` when `data` has no labels.
template <typename T>
EvalReport evaluate(const Model<T>& model, const EncodedBatch& data);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  EvalReport validation;
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_macro_f1 = 0.0;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on (optionally class-weighted) cross-entropy. After every
/// epoch the validation set is scored; the parameters of the epoch with the
/// best macro-F1 are restored into `model` on return. Throws
/// `ErrorKind::Config` for an empty or unlabeled training set and
/// `ErrorKind::Numeric` when the loss stops being finite.
TrainResult fit(const Model<float>& model, const EncodedBatch& train, const EncodedBatch& validation,
                const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Header `epoch,train_loss,val_macro_f1,val_micro_f1,val_weighted_f1,
/// val_accuracy,val_f1_clean,val_f1_offensive,val_f1_hate`.
std::string format_history_csv(const std::vector<EpochRecord>& history);

}  // namespace vihsd
