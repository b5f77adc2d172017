#include "vihsd/metrics.hpp"

#include <cstdio>

#include "vihsd/error.hpp"

namespace vihsd {

const std::array<const char*, kNumClasses> kClassNames = {"clean", "offensive", "hate"};

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

EvalReport evaluate_predictions(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) {
    fail(ErrorKind::Contract, "evaluate: " + std::to_string(gold.size()) + " gold labels but " +
                                  std::to_string(predicted.size()) + " predictions");
  }
  EvalReport r;
  r.count = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i], p = predicted[i];
    if (g < 0 || g >= kNumClasses || p < 0 || p >= kNumClasses) {
      fail(ErrorKind::Contract, "evaluate: label outside {0,1,2} at row " + std::to_string(i));
    }
    ++r.confusion[g][p];
  }
  std::size_t correct = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    std::size_t tp = r.confusion[c][c], gold_c = 0, pred_c = 0;
    for (int k = 0; k < kNumClasses; ++k) {
      gold_c += r.confusion[c][k];
      pred_c += r.confusion[k][c];
    }
    auto& s = r.per_class[c];
    s.support = gold_c;
    s.precision = ratio(static_cast<double>(tp), static_cast<double>(pred_c));
    s.recall = ratio(static_cast<double>(tp), static_cast<double>(gold_c));
    s.f1 = ratio(2.0 * static_cast<double>(tp), static_cast<double>(gold_c + pred_c));
    correct += tp;
    r.macro_f1 += s.f1 / kNumClasses;
    r.weighted_f1 += s.f1 * static_cast<double>(gold_c);
  }
  r.accuracy = ratio(static_cast<double>(correct), static_cast<double>(r.count));
  r.micro_f1 = r.accuracy;
  r.weighted_f1 = ratio(r.weighted_f1, static_cast<double>(r.count));
  return r;
}

std::string EvalReport::format() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %10s %8s\n", "class", "precision", "recall", "f1", "support");
  out += buf;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& s = per_class[c];
    std::snprintf(buf, sizeof buf, "%-10s %10.3f %10.3f %10.3f %8zu\n", kClassNames[c], 100 * s.precision,
                  100 * s.recall, 100 * s.f1, s.support);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "macro-F1 %.3f  micro-F1 %.3f  weighted-F1 %.3f  accuracy %.3f  (n=%zu)\n",
                100 * macro_f1, 100 * micro_f1, 100 * weighted_f1, 100 * accuracy, count);
  out += buf;
  out += "confusion (rows gold, cols predicted):\n";
  for (int g = 0; g < kNumClasses; ++g) {
    std::snprintf(buf, sizeof buf, "  %-10s %8zu %8zu %8zu\n", kClassNames[g], confusion[g][0], confusion[g][1],
                  confusion[g][2]);
    out += buf;
  }
  return out;
}

LabelCounts label_counts(std::span<const int> labels) {
  LabelCounts counts{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumClasses) {
      fail(ErrorKind::Data, "label " + std::to_string(labels[i]) + " at row " + std::to_string(i) + " is not in {0,1,2}");
    }
    ++counts[labels[i]];
  }
  return counts;
}

std::array<double, kNumClasses> class_weights(const LabelCounts& counts) {
  std::size_t total = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) {
      fail(ErrorKind::Config, std::string("class '") + kClassNames[c] +
                                  "' has no training rows, so inverse-frequency weights are undefined; use class weighting 'none'");
    }
    total += counts[c];
  }
  std::array<double, kNumClasses> w{};
  for (int c = 0; c < kNumClasses; ++c)
    w[c] = static_cast<double>(total) / (kNumClasses * static_cast<double>(counts[c]));
  return w;
}

}  // namespace vihsd
