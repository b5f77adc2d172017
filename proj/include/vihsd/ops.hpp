#pragma once

#include <span>
#include <vector>

#include "vihsd/tensor.hpp"

/// Differentiable primitives. Every function records its backward rule when
/// grad mode is on; shape errors throw `ErrorKind::Dimension` naming both
/// offending shapes.
namespace vihsd::ops {

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// x[..., n] + bias[n], broadcast over all leading axes.
template <typename T>
BasicTensor<T> add_bias(const BasicTensor<T>& x, const BasicTensor<T>& bias);

/// scale * x + shift, elementwise.
template <typename T>
BasicTensor<T> scale_shift(const BasicTensor<T>& x, T scale, T shift);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x);

/// Elementwise product with a constant mask of the same size.
template <typename T>
BasicTensor<T> mul_constant(const BasicTensor<T>& x, std::vector<T> mask);

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape);

/// x[:, t, :] of a [b, t, c] sequence.
template <typename T>
BasicTensor<T> time_step(const BasicTensor<T>& x, std::size_t t);

/// Stacks T tensors of shape [b, c] into [b, T, c].
template <typename T>
BasicTensor<T> stack_steps(std::span<const BasicTensor<T>> steps);

/// Concatenation along the last axis; all leading dimensions must agree.
template <typename T>
BasicTensor<T> concat_last(std::span<const BasicTensor<T>> parts);

/// Identity forward; backward multiplies the incoming gradient by `factor`.
/// Used to inject gradient faults in verification tests.
template <typename T>
BasicTensor<T> scale_gradient(const BasicTensor<T>& x, T factor);

}  // namespace vihsd::ops
