#pragma once

#include <span>

#include "vihsd/tensor.hpp"

namespace vihsd {

/// Mean over the batch of w[y] * -log softmax(logits)[y], stabilized by
/// subtracting the row max. `class_weights` may be empty (all ones).
///
/// Throws `ErrorKind::Data` for a label outside [0, classes) naming the row,
/// `ErrorKind::Contract` for non-positive weights.
template <typename T>
BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                     std::span<const T> class_weights = {});

/// Row-wise softmax of a [batch, classes] array (no graph).
template <typename T>
std::vector<T> softmax_rows(std::span<const T> logits, std::size_t classes);

}  // namespace vihsd
