#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vihsd {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until first written
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }

  std::vector<T>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor with an optional gradient buffer.
///
/// A tensor is a shared handle: copies alias the same storage and graph
/// node. Use `detach()` for an independent copy.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;
  using NodeType = detail::Node<T>;

  BasicTensor() = default;
  BasicTensor(Shape shape, std::vector<T> values, bool requires_grad = false);
  explicit BasicTensor(std::shared_ptr<NodeType> node) : node_(std::move(node)) {}

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor scalar(T value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<T> data() & { return node_->value; }
  std::span<const T> data() const& { return node_->value; }
  // Spans into a temporary handle may outlive the storage; use to_vector().
  std::span<const T> data() const&& = delete;
  std::vector<T> to_vector() const { return node_->value; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }

  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  /// Gradient buffer, allocated (zeroed) on first access.
  std::span<T> grad() { return node_->grad_buffer(); }
  /// Gradient values, or zeros when no gradient has been accumulated.
  std::vector<T> grad_or_zeros() const;
  void zero_grad();

  bool is_leaf() const { return node_->is_leaf(); }
  const char* op_name() const { return node_->op; }

  BasicTensor detach() const;
  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(node_->value.begin(), node_->value.end());
    return BasicTensor<U>(node_->shape, std::move(out), node_->requires_grad);
  }

  const std::shared_ptr<NodeType>& node() const { return node_; }
  bool same_storage(const BasicTensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<NodeType> node_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace vihsd
