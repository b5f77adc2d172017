#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "vihsd/dataset.hpp"

namespace vihsd {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Scores over the three labels; any 0/0 ratio is defined as 0.
struct EvalReport {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [gold][pred]
  std::array<ClassScores, kNumClasses> per_class{};
  double macro_f1 = 0.0;     // unweighted mean of the class F1s
  double micro_f1 = 0.0;     // equals accuracy for single-label data
  double weighted_f1 = 0.0;  // support-weighted mean of the class F1s
  double accuracy = 0.0;
  std::size_t count = 0;

  /// Human-readable table, scores as percentages with three decimals.
  std::string format() const;
};

/// Throws `ErrorKind::Contract` on a length mismatch or a label outside
/// {0, 1, 2}.
EvalReport evaluate_predictions(std::span<const int> gold, std::span<const int> predicted);

using LabelCounts = std::array<std::size_t, kNumClasses>;
LabelCounts label_counts(std::span<const int> labels);

/// w_c = N / (3 n_c). Throws `ErrorKind::Config` when a class is absent.
std::array<double, kNumClasses> class_weights(const LabelCounts& counts);

extern const std::array<const char*, kNumClasses> kClassNames;  // clean, offensive, hate

}  // namespace vihsd
