#pragma once

#include <functional>
#include <vector>

#include "vihsd/tensor.hpp"

namespace vihsd {

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// When enabled, every recorded op checks its output for NaN/Inf and throws
/// `ErrorKind::Numeric` naming the op.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

template <typename T>
using BackwardFn = std::function<void(detail::Node<T>&)>;

/// Creates the output node of a differentiable op. The backward rule reads
/// `out.grad` and accumulates into `out.inputs[i]->grad_buffer()` for each
/// input that requires grad. Inputs are only recorded when grad mode is on
/// and at least one input requires grad.
template <typename T>
BasicTensor<T> make_op(const char* name, Shape shape, std::vector<T> values,
                       std::vector<BasicTensor<T>> inputs, BackwardFn<T> backward);

/// Nodes reachable from a root, in topological order (inputs first).
template <typename T>
class Graph {
 public:
  static Graph trace(const BasicTensor<T>& root);

  std::size_t size() const { return order_.size(); }
  const std::vector<detail::Node<T>*>& order() const { return order_; }

  /// Reverse sweep from the root. Intermediate grads are reset, leaf grads
  /// accumulate.
  void backward();

 private:
  std::shared_ptr<detail::Node<T>> root_;
  std::vector<detail::Node<T>*> order_;
};

/// d(loss)/d(leaf) accumulated into every requires-grad leaf.
template <typename T>
void backward(const BasicTensor<T>& loss);

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace vihsd
