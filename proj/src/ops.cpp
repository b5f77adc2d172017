#include "vihsd/ops.hpp"

#include <cmath>
#include <string>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"

namespace vihsd::ops {

namespace {

template <typename T>
using Node = detail::Node<T>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  fail(ErrorKind::Dimension,
       std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

template <typename T>
void require_same_shape(const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) shape_error(op, a.shape(), b.shape());
}

template <typename T>
bool wants_grad(const Node<T>& out, std::size_t i) {
  return out.inputs[i]->requires_grad;
}

template <typename T, typename F>
BasicTensor<T> unary_map(const char* name, const BasicTensor<T>& x, F&& f,
                         BackwardFn<T> backward) {
  std::vector<T> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_op<T>(name, x.shape(), std::move(out), {x}, std::move(backward));
}

}  // namespace

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    shape_error("matmul", a.shape(), b.shape());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<T> out(m * n, T(0));
  auto A = a.data();
  auto B = b.data();
  // i-k-j order: each output element accumulates over k in increasing order
  // regardless of m, so row i of a batched product equals the single-row product.
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = A[i * k + p];
      const T* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return make_op<T>("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node<T>& o) {
    const auto& G = o.grad;
    const auto& Av = o.inputs[0]->value;
    const auto& Bv = o.inputs[1]->value;
    if (wants_grad(o, 0)) {
      auto& gA = o.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          T acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += G[i * n + j] * Bv[p * n + j];
          gA[i * k + p] += acc;
        }
    }
    if (wants_grad(o, 1)) {
      auto& gB = o.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const T av = Av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += av * G[i * n + j];
        }
    }
  });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("add", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_op<T>("add", a.shape(), std::move(out), {a, b}, [](Node<T>& o) {
    for (std::size_t s = 0; s < 2; ++s) {
      if (!wants_grad(o, s)) continue;
      auto& g = o.inputs[s]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("sub", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_op<T>("sub", a.shape(), std::move(out), {a, b}, [](Node<T>& o) {
    if (wants_grad(o, 0)) {
      auto& g = o.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (wants_grad(o, 1)) {
      auto& g = o.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("mul", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_op<T>("mul", a.shape(), std::move(out), {a, b}, [](Node<T>& o) {
    const auto& av = o.inputs[0]->value;
    const auto& bv = o.inputs[1]->value;
    if (wants_grad(o, 0)) {
      auto& g = o.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * bv[i];
    }
    if (wants_grad(o, 1)) {
      auto& g = o.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * av[i];
    }
  });
}

template <typename T>
BasicTensor<T> add_bias(const BasicTensor<T>& x, const BasicTensor<T>& bias) {
  if (bias.rank() != 1 || x.shape().back() != bias.dim(0)) {
    shape_error("add_bias", x.shape(), bias.shape());
  }
  const std::size_t n = bias.dim(0);
  std::vector<T> out(x.numel());
  auto xv = x.data();
  auto bv = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + bv[i % n];
  return make_op<T>("add_bias", x.shape(), std::move(out), {x, bias}, [n](Node<T>& o) {
    if (wants_grad(o, 0)) {
      auto& g = o.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (wants_grad(o, 1)) {
      auto& g = o.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i % n] += o.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> scale_shift(const BasicTensor<T>& x, T scale, T shift) {
  return unary_map<T>(
      "scale_shift", x, [=](T v) { return scale * v + shift; },
      [scale](Node<T>& o) {
        auto& g = o.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * o.grad[i];
      });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  return unary_map<T>(
      "sigmoid", x,
      [](T v) {
        // Split by sign so exp() never overflows.
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](Node<T>& o) {
        auto& g = o.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T s = o.value[i];
          g[i] += o.grad[i] * s * (T(1) - s);
        }
      });
}

template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
  return unary_map<T>(
      "tanh", x, [](T v) { return std::tanh(v); },
      [](Node<T>& o) {
        auto& g = o.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T y = o.value[i];
          g[i] += o.grad[i] * (T(1) - y * y);
        }
      });
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  return unary_map<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); },
      [](Node<T>& o) {
        auto& g = o.inputs[0]->grad_buffer();
        const auto& in = o.inputs[0]->value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (in[i] > T(0)) g[i] += o.grad[i];
        }
      });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  return make_op<T>("sum", {1}, {total}, {x}, [](Node<T>& o) {
    auto& g = o.inputs[0]->grad_buffer();
    for (auto& v : g) v += o.grad[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  const T n = static_cast<T>(x.numel());
  return make_op<T>("mean", {1}, {total / n}, {x}, [n](Node<T>& o) {
    auto& g = o.inputs[0]->grad_buffer();
    for (auto& v : g) v += o.grad[0] / n;
  });
}

template <typename T>
BasicTensor<T> mul_constant(const BasicTensor<T>& x, std::vector<T> mask) {
  if (mask.size() != x.numel()) {
    shape_error("mul_constant", x.shape(), Shape{mask.size()});
  }
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * mask[i];
  return make_op<T>("mul_constant", x.shape(), std::move(out), {x},
                    [mask = std::move(mask)](Node<T>& o) {
                      auto& g = o.inputs[0]->grad_buffer();
                      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * mask[i];
                    });
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) shape_error("reshape", x.shape(), shape);
  return make_op<T>("reshape", std::move(shape), x.to_vector(), {x}, [](Node<T>& o) {
    auto& g = o.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

template <typename T>
BasicTensor<T> time_step(const BasicTensor<T>& x, std::size_t t) {
  if (x.rank() != 3 || t >= x.dim(1)) {
    shape_error("time_step", x.shape(), Shape{t});
  }
  const std::size_t b = x.dim(0), steps = x.dim(1), c = x.dim(2);
  std::vector<T> out(b * c);
  auto xv = x.data();
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = xv[(i * steps + t) * c + j];
  return make_op<T>("time_step", {b, c}, std::move(out), {x}, [b, steps, c, t](Node<T>& o) {
    auto& g = o.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < c; ++j) g[(i * steps + t) * c + j] += o.grad[i * c + j];
  });
}

template <typename T>
BasicTensor<T> stack_steps(std::span<const BasicTensor<T>> steps) {
  if (steps.empty()) fail(ErrorKind::Dimension, "stack_steps: no timesteps");
  const Shape& first = steps[0].shape();
  if (first.size() != 2) shape_error("stack_steps", first, Shape{});
  for (const auto& s : steps) {
    if (s.shape() != first) shape_error("stack_steps", first, s.shape());
  }
  const std::size_t b = first[0], c = first[1], n = steps.size();
  std::vector<T> out(b * n * c);
  for (std::size_t t = 0; t < n; ++t) {
    auto sv = steps[t].data();
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < c; ++j) out[(i * n + t) * c + j] = sv[i * c + j];
  }
  std::vector<BasicTensor<T>> inputs(steps.begin(), steps.end());
  return make_op<T>("stack_steps", {b, n, c}, std::move(out), std::move(inputs),
                    [b, n, c](Node<T>& o) {
                      for (std::size_t t = 0; t < n; ++t) {
                        if (!wants_grad(o, t)) continue;
                        auto& g = o.inputs[t]->grad_buffer();
                        for (std::size_t i = 0; i < b; ++i)
                          for (std::size_t j = 0; j < c; ++j)
                            g[i * c + j] += o.grad[(i * n + t) * c + j];
                      }
                    });
}

template <typename T>
BasicTensor<T> concat_last(std::span<const BasicTensor<T>> parts) {
  if (parts.empty()) fail(ErrorKind::Dimension, "concat_last: nothing to concatenate");
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape l = p.shape();
    const std::size_t w = l.back();
    l.pop_back();
    if (l != lead) shape_error("concat_last", parts[0].shape(), p.shape());
    widths.push_back(w);
    total += w;
  }
  const std::size_t rows = shape_numel(lead);
  std::vector<T> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pv = parts[k].data();
    const std::size_t w = widths[k];
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < w; ++j) out[r * total + offset + j] = pv[r * w + j];
    offset += w;
  }
  Shape shape = lead;
  shape.push_back(total);
  std::vector<BasicTensor<T>> inputs(parts.begin(), parts.end());
  return make_op<T>("concat_last", std::move(shape), std::move(out), std::move(inputs),
                    [rows, total, widths](Node<T>& o) {
                      std::size_t offset = 0;
                      for (std::size_t k = 0; k < widths.size(); ++k) {
                        const std::size_t w = widths[k];
                        if (wants_grad(o, k)) {
                          auto& g = o.inputs[k]->grad_buffer();
                          for (std::size_t r = 0; r < rows; ++r)
                            for (std::size_t j = 0; j < w; ++j)
                              g[r * w + j] += o.grad[r * total + offset + j];
                        }
                        offset += w;
                      }
                    });
}

template <typename T>
BasicTensor<T> scale_gradient(const BasicTensor<T>& x, T factor) {
  return make_op<T>("scale_gradient", x.shape(), x.to_vector(), {x}, [factor](Node<T>& o) {
    auto& g = o.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * o.grad[i];
  });
}

#define VIHSD_INSTANTIATE_OPS(T)                                                      \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);       \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> add_bias(const BasicTensor<T>&, const BasicTensor<T>&);     \
  template BasicTensor<T> scale_shift(const BasicTensor<T>&, T, T);                   \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                             \
  template BasicTensor<T> tanh(const BasicTensor<T>&);                                \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                 \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                \
  template BasicTensor<T> mul_constant(const BasicTensor<T>&, std::vector<T>);        \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                      \
  template BasicTensor<T> time_step(const BasicTensor<T>&, std::size_t);              \
  template BasicTensor<T> stack_steps(std::span<const BasicTensor<T>>);               \
  template BasicTensor<T> concat_last(std::span<const BasicTensor<T>>);               \
  template BasicTensor<T> scale_gradient(const BasicTensor<T>&, T);

VIHSD_INSTANTIATE_OPS(float)
VIHSD_INSTANTIATE_OPS(double)

}  // namespace vihsd::ops
