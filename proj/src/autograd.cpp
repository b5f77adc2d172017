#include "vihsd/autograd.hpp"

#include <atomic>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "vihsd/error.hpp"

namespace vihsd {

namespace {
thread_local bool g_grad_mode = true;
std::atomic<bool> g_finite_checks{false};
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

bool grad_mode_enabled() { return g_grad_mode; }

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

template <typename T>
BasicTensor<T> make_op(const char* name, Shape shape, std::vector<T> values,
                       std::vector<BasicTensor<T>> inputs, BackwardFn<T> backward) {
  if (finite_checks_enabled()) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        fail(ErrorKind::Numeric, std::string("non-finite value produced by ") + name +
                                     " at flat index " + std::to_string(i));
      }
    }
  }
  BasicTensor<T> out(std::move(shape), std::move(values));
  auto& node = *out.node();
  node.op = name;
  if (!g_grad_mode) return out;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  node.requires_grad = true;
  node.inputs.reserve(inputs.size());
  for (auto& in : inputs) node.inputs.push_back(in.node());
  node.backward = std::move(backward);
  return out;
}

template <typename T>
Graph<T> Graph<T>::trace(const BasicTensor<T>& root) {
  Graph g;
  g.root_ = root.node();
  std::unordered_set<const detail::Node<T>*> seen;
  // Iterative post-order DFS; sequences of a few thousand ops would overflow
  // a recursive walk on small stacks.
  std::vector<std::pair<detail::Node<T>*, std::size_t>> stack;
  stack.emplace_back(g.root_.get(), 0);
  seen.insert(g.root_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      auto* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    g.order_.push_back(node);
    stack.pop_back();
  }
  return g;
}

template <typename T>
void Graph<T>::backward() {
  auto& root = *root_;
  if (root.value.size() != 1) {
    fail(ErrorKind::Contract, "backward() needs a scalar loss, got shape " + shape_str(root.shape));
  }
  if (!root.requires_grad) {
    fail(ErrorKind::Contract, "backward() on a loss that does not require grad");
  }
  for (auto* node : order_) {
    if (!node->is_leaf()) node->grad.assign(node->value.size(), T(0));
  }
  root.grad_buffer()[0] += T(1);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    auto* node = *it;
    if (!node->is_leaf()) node->backward(*node);
  }
}

template <typename T>
void backward(const BasicTensor<T>& loss) {
  Graph<T>::trace(loss).backward();
}

template class Graph<float>;
template class Graph<double>;
template void backward<float>(const BasicTensor<float>&);
template void backward<double>(const BasicTensor<double>&);
template BasicTensor<float> make_op<float>(const char*, Shape, std::vector<float>,
                                           std::vector<BasicTensor<float>>, BackwardFn<float>);
template BasicTensor<double> make_op<double>(const char*, Shape, std::vector<double>,
                                             std::vector<BasicTensor<double>>, BackwardFn<double>);

}  // namespace vihsd
