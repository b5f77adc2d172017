#include "vihsd/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"

namespace vihsd {

template <typename T>
std::vector<T> softmax_rows(std::span<const T> logits, std::size_t classes) {
  std::vector<T> out(logits.size());
  for (std::size_t r = 0; r * classes < logits.size(); ++r) {
    const T* row = logits.data() + r * classes;
    const T mx = *std::max_element(row, row + classes);
    T z = 0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    for (std::size_t c = 0; c < classes; ++c) out[r * classes + c] = std::exp(row[c] - mx) / z;
  }
  return out;
}

template <typename T>
BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                     std::span<const T> class_weights) {
  if (logits.rank() != 2) {
    fail(ErrorKind::Dimension, "softmax_cross_entropy: logits must be [batch, classes], got " +
                                   shape_str(logits.shape()));
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    fail(ErrorKind::Dimension, "softmax_cross_entropy: logits " + shape_str(logits.shape()) +
                                   " vs labels [" + std::to_string(labels.size()) + "]");
  }
  if (!class_weights.empty() && class_weights.size() != classes) {
    fail(ErrorKind::Dimension, "softmax_cross_entropy: logits " + shape_str(logits.shape()) +
                                   " vs class weights [" + std::to_string(class_weights.size()) +
                                   "]");
  }
  for (T w : class_weights) {
    if (!(w > T(0))) fail(ErrorKind::Contract, "class weights must be positive");
  }
  for (std::size_t r = 0; r < batch; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
      fail(ErrorKind::Data, "label " + std::to_string(labels[r]) + " out of range at row " +
                                std::to_string(r));
    }
  }
  std::vector<T> weights(class_weights.begin(), class_weights.end());
  if (weights.empty()) weights.assign(classes, T(1));

  auto probs = softmax_rows<T>(logits.data(), classes);
  T total = 0;
  for (std::size_t r = 0; r < batch; ++r) {
    const T* row = logits.data().data() + r * classes;
    const T mx = *std::max_element(row, row + classes);
    T z = 0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    const T log_p = row[labels[r]] - mx - std::log(z);
    total += weights[labels[r]] * -log_p;
  }
  const T n = static_cast<T>(batch);
  std::vector<int> ys(labels.begin(), labels.end());
  return make_op<T>(
      "softmax_cross_entropy", {1}, {total / n}, {logits},
      [probs = std::move(probs), ys = std::move(ys), weights = std::move(weights), classes,
       n](detail::Node<T>& o) {
        auto& g = o.inputs[0]->grad_buffer();
        const T scale = o.grad[0] / n;
        for (std::size_t r = 0; r < ys.size(); ++r) {
          const T w = weights[ys[r]] * scale;
          for (std::size_t c = 0; c < classes; ++c) {
            const T target = static_cast<int>(c) == ys[r] ? T(1) : T(0);
            g[r * classes + c] += w * (probs[r * classes + c] - target);
          }
        }
      });
}

template std::vector<float> softmax_rows<float>(std::span<const float>, std::size_t);
template std::vector<double> softmax_rows<double>(std::span<const double>, std::size_t);
template BasicTensor<float> softmax_cross_entropy<float>(const BasicTensor<float>&,
                                                         std::span<const int>,
                                                         std::span<const float>);
template BasicTensor<double> softmax_cross_entropy<double>(const BasicTensor<double>&,
                                                           std::span<const int>,
                                                           std::span<const double>);

}  // namespace vihsd
