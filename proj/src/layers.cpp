#include "vihsd/layers.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"
#include "vihsd/ops.hpp"

namespace vihsd {

namespace {

std::string g_fault_layer;

template <typename T>
BasicTensor<T> fault_point(const BasicTensor<T>& x, const char* layer) {
  if (!g_fault_layer.empty() && g_fault_layer == layer) return ops::scale_gradient(x, T(2));
  return x;
}

template <typename T>
BasicTensor<T> uniform_tensor(Shape shape, double limit, Rng& rng) {
  std::vector<T> values(shape_numel(shape));
  for (auto& v : values) v = static_cast<T>(rng.uniform(-limit, limit));
  return BasicTensor<T>(std::move(shape), std::move(values), true);
}

template <typename T>
BasicTensor<T> gate(const BasicTensor<T>& x, const BasicTensor<T>& h, const BasicTensor<T>& W,
                    const BasicTensor<T>& U, const BasicTensor<T>& b) {
  return ops::add_bias(ops::add(ops::matmul(x, W), ops::matmul(h, U)), b);
}

}  // namespace

void set_fault_injection(std::string layer) { g_fault_layer = std::move(layer); }
const std::string& fault_injection() { return g_fault_layer; }

template <typename T>
BasicTensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_tensor<T>(std::move(shape), limit, rng);
}

// ---------------------------------------------------------------------------

template <typename T>
BasicTensor<T> embedding_forward(const EmbeddingTable<T>& table, const IdMatrix& ids) {
  const std::size_t vocab = table.vocab_size(), dim = table.dim();
  if (ids.ids.size() != ids.rows * ids.cols || ids.rows == 0 || ids.cols == 0) {
    fail(ErrorKind::Dimension, "embedding_forward: id matrix " +
                                   shape_str({ids.rows, ids.cols}) + " holds " +
                                   std::to_string(ids.ids.size()) + " ids");
  }
  std::vector<T> out(ids.ids.size() * dim, T(0));
  auto w = table.weights.data();
  for (std::size_t pos = 0; pos < ids.ids.size(); ++pos) {
    const auto id = ids.ids[pos];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      fail(ErrorKind::Data, "token id " + std::to_string(id) + " at row " +
                                std::to_string(pos / ids.cols) + ", column " +
                                std::to_string(pos % ids.cols) + " exceeds vocabulary size " +
                                std::to_string(vocab));
    }
    if (id == kPadId) continue;
    std::copy_n(w.begin() + id * dim, dim, out.begin() + pos * dim);
  }
  return make_op<T>("embedding", {ids.rows, ids.cols, dim}, std::move(out), {table.weights},
                    [flat = ids.ids, dim](detail::Node<T>& o) {
                      auto& g = o.inputs[0]->grad_buffer();
                      for (std::size_t pos = 0; pos < flat.size(); ++pos) {
                        const auto id = static_cast<std::size_t>(flat[pos]);
                        if (id == kPadId) continue;
                        for (std::size_t j = 0; j < dim; ++j) g[id * dim + j] += o.grad[pos * dim + j];
                      }
                    });
}

template <typename T>
BasicTensor<T> spatial_dropout_1d(const BasicTensor<T>& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    fail(ErrorKind::Config, "dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (x.rank() != 3) {
    fail(ErrorKind::Dimension, "spatial_dropout_1d expects [batch, time, channels], got " +
                                   shape_str(x.shape()));
  }
  if (!training || rate == 0.0) return x;
  const std::size_t b = x.dim(0), t = x.dim(1), c = x.dim(2);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> channel(b * c);
  for (auto& m : channel) m = rng.bernoulli(rate) ? T(0) : keep_scale;
  std::vector<T> mask(x.numel());
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t s = 0; s < t; ++s)
      for (std::size_t j = 0; j < c; ++j) mask[(i * t + s) * c + j] = channel[i * c + j];
  return ops::mul_constant(x, std::move(mask));
}

// ---------------------------------------------------------------------------

template <typename T>
Conv1DParams<T> Conv1DParams<T>::init(std::size_t in_channels, std::size_t filters,
                                      std::size_t width, Rng& rng) {
  Conv1DParams p;
  p.kernels = glorot_uniform<T>({filters, width, in_channels}, width * in_channels,
                                width * filters, rng);
  p.bias = BasicTensor<T>::zeros({filters}, true);
  return p;
}

template <typename T>
BasicTensor<T> conv1d_forward(const BasicTensor<T>& x, const Conv1DParams<T>& p) {
  if (x.rank() != 3 || p.kernels.rank() != 3 || x.dim(2) != p.in_channels() ||
      p.bias.rank() != 1 || p.bias.dim(0) != p.filters()) {
    fail(ErrorKind::Dimension, "conv1d: input " + shape_str(x.shape()) + " vs kernels " +
                                   shape_str(p.kernels.shape()));
  }
  const std::size_t b = x.dim(0), t = x.dim(1), c = x.dim(2);
  const std::size_t k = p.width(), f = p.filters();
  if (t < k) {
    fail(ErrorKind::Dimension, "conv1d: sequence length " + std::to_string(t) +
                                   " shorter than kernel width " + std::to_string(k) +
                                   " (input " + shape_str(x.shape()) + ", kernels " +
                                   shape_str(p.kernels.shape()) + ")");
  }
  const std::size_t out_t = t - k + 1, window = k * c;
  auto xv = x.data();
  auto kv = p.kernels.data();
  auto bv = p.bias.data();
  std::vector<T> out(b * out_t * f);
  // A window x[b, s:s+k, :] and a kernel row K[f] are both contiguous k·c runs.
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t s = 0; s < out_t; ++s) {
      const T* win = xv.data() + (i * t + s) * c;
      for (std::size_t q = 0; q < f; ++q) {
        const T* ker = kv.data() + q * window;
        T acc = bv[q];
        for (std::size_t e = 0; e < window; ++e) acc += win[e] * ker[e];
        out[(i * out_t + s) * f + q] = acc;
      }
    }
  auto y = make_op<T>(
      "conv1d", {b, out_t, f}, std::move(out), {x, p.kernels, p.bias},
      [b, t, c, out_t, f, window](detail::Node<T>& o) {
        const auto& X = o.inputs[0]->value;
        const auto& K = o.inputs[1]->value;
        const bool gx = o.inputs[0]->requires_grad, gk = o.inputs[1]->requires_grad,
                   gb = o.inputs[2]->requires_grad;
        std::vector<T>* dX = gx ? &o.inputs[0]->grad_buffer() : nullptr;
        std::vector<T>* dK = gk ? &o.inputs[1]->grad_buffer() : nullptr;
        std::vector<T>* dB = gb ? &o.inputs[2]->grad_buffer() : nullptr;
        for (std::size_t i = 0; i < b; ++i)
          for (std::size_t s = 0; s < out_t; ++s) {
            const std::size_t base = (i * t + s) * c;
            for (std::size_t q = 0; q < f; ++q) {
              const T g = o.grad[(i * out_t + s) * f + q];
              if (g == T(0)) continue;
              if (dB) (*dB)[q] += g;
              for (std::size_t e = 0; e < window; ++e) {
                if (dX) (*dX)[base + e] += g * K[q * window + e];
                if (dK) (*dK)[q * window + e] += g * X[base + e];
              }
            }
          }
      });
  y = fault_point(y, "conv1d");
  return p.activation == Activation::Relu ? ops::relu(y) : y;
}

template <typename T>
BasicTensor<T> global_max_pool(const BasicTensor<T>& x) {
  if (x.rank() != 3) {
    fail(ErrorKind::Dimension, "global_max_pool expects [batch, time, channels], got " +
                                   shape_str(x.shape()));
  }
  const std::size_t b = x.dim(0), t = x.dim(1), c = x.dim(2);
  auto xv = x.data();
  std::vector<T> out(b * c);
  std::vector<std::size_t> argmax(b * c);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = 0;
      for (std::size_t s = 1; s < t; ++s) {
        if (xv[(i * t + s) * c + j] > xv[(i * t + best) * c + j]) best = s;
      }
      argmax[i * c + j] = (i * t + best) * c + j;
      out[i * c + j] = xv[argmax[i * c + j]];
    }
  return make_op<T>("global_max_pool", {b, c}, std::move(out), {x},
                    [argmax = std::move(argmax)](detail::Node<T>& o) {
                      auto& g = o.inputs[0]->grad_buffer();
                      for (std::size_t k = 0; k < argmax.size(); ++k) g[argmax[k]] += o.grad[k];
                    });
}

// ---------------------------------------------------------------------------

template <typename T>
LstmParams<T> LstmParams<T>::init(std::size_t in, std::size_t hidden, Rng& rng) {
  LstmParams p;
  const double recurrent_limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t g = 0; g < 4; ++g) {
    p.W[g] = glorot_uniform<T>({in, hidden}, in, hidden, rng);
    p.U[g] = uniform_tensor<T>({hidden, hidden}, recurrent_limit, rng);
    p.b[g] = BasicTensor<T>::full({hidden}, g == Forget ? T(1) : T(0), true);
  }
  return p;
}

template <typename T>
LstmParams<T> LstmParams<T>::zeros(std::size_t in, std::size_t hidden) {
  LstmParams p;
  for (std::size_t g = 0; g < 4; ++g) {
    p.W[g] = BasicTensor<T>::zeros({in, hidden}, true);
    p.U[g] = BasicTensor<T>::zeros({hidden, hidden}, true);
    p.b[g] = BasicTensor<T>::zeros({hidden}, true);
  }
  return p;
}

template <typename T>
std::vector<BasicTensor<T>> LstmParams<T>::parameters() const {
  std::vector<BasicTensor<T>> out;
  for (std::size_t g = 0; g < 4; ++g) {
    out.push_back(W[g]);
    out.push_back(U[g]);
    out.push_back(b[g]);
  }
  return out;
}

template <typename T>
GruParams<T> GruParams<T>::init(std::size_t in, std::size_t hidden, Rng& rng) {
  GruParams p;
  const double recurrent_limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t g = 0; g < 3; ++g) {
    p.W[g] = glorot_uniform<T>({in, hidden}, in, hidden, rng);
    p.U[g] = uniform_tensor<T>({hidden, hidden}, recurrent_limit, rng);
    p.b[g] = BasicTensor<T>::zeros({hidden}, true);
  }
  return p;
}

template <typename T>
GruParams<T> GruParams<T>::zeros(std::size_t in, std::size_t hidden) {
  GruParams p;
  for (std::size_t g = 0; g < 3; ++g) {
    p.W[g] = BasicTensor<T>::zeros({in, hidden}, true);
    p.U[g] = BasicTensor<T>::zeros({hidden, hidden}, true);
    p.b[g] = BasicTensor<T>::zeros({hidden}, true);
  }
  return p;
}

template <typename T>
std::vector<BasicTensor<T>> GruParams<T>::parameters() const {
  std::vector<BasicTensor<T>> out;
  for (std::size_t g = 0; g < 3; ++g) {
    out.push_back(W[g]);
    out.push_back(U[g]);
    out.push_back(b[g]);
  }
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> lstm_cell_step(const BasicTensor<T>& x,
                                                         const BasicTensor<T>& h_prev,
                                                         const BasicTensor<T>& c_prev,
                                                         const LstmParams<T>& p) {
  using P = LstmParams<T>;
  if (c_prev.shape() != h_prev.shape()) {
    fail(ErrorKind::Dimension, "lstm: hidden state " + shape_str(h_prev.shape()) +
                                   " vs cell state " + shape_str(c_prev.shape()));
  }
  auto i = ops::sigmoid(gate(x, h_prev, p.W[P::Input], p.U[P::Input], p.b[P::Input]));
  auto f = ops::sigmoid(gate(x, h_prev, p.W[P::Forget], p.U[P::Forget], p.b[P::Forget]));
  auto g = ops::tanh(gate(x, h_prev, p.W[P::Cell], p.U[P::Cell], p.b[P::Cell]));
  auto o = ops::sigmoid(gate(x, h_prev, p.W[P::Output], p.U[P::Output], p.b[P::Output]));
  auto c = ops::add(ops::mul(f, c_prev), ops::mul(i, g));
  auto h = ops::mul(o, ops::tanh(c));
  return {fault_point(h, "lstm"), c};
}

template <typename T>
BasicTensor<T> gru_cell_step(const BasicTensor<T>& x, const BasicTensor<T>& h_prev,
                             const GruParams<T>& p) {
  using P = GruParams<T>;
  auto z = ops::sigmoid(gate(x, h_prev, p.W[P::Update], p.U[P::Update], p.b[P::Update]));
  auto r = ops::sigmoid(gate(x, h_prev, p.W[P::Reset], p.U[P::Reset], p.b[P::Reset]));
  auto candidate = ops::tanh(
      gate(x, ops::mul(r, h_prev), p.W[P::Candidate], p.U[P::Candidate], p.b[P::Candidate]));
  auto keep = ops::mul(ops::scale_shift(z, T(-1), T(1)), h_prev);
  auto h = ops::add(keep, ops::mul(z, candidate));
  return fault_point(h, "gru");
}

namespace {

template <typename T, typename Step>
BasicTensor<T> unroll(const BasicTensor<T>& x, std::size_t in_dim, bool reverse, Step&& step) {
  if (x.rank() != 3 || x.dim(2) != in_dim) {
    fail(ErrorKind::Dimension, "recurrent layer: input " + shape_str(x.shape()) +
                                   " vs input dimension [" + std::to_string(in_dim) + "]");
  }
  const std::size_t steps = x.dim(1);
  std::vector<BasicTensor<T>> outputs(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    outputs[t] = step(ops::time_step(x, t));
  }
  return ops::stack_steps<T>(outputs);
}

}  // namespace

template <typename T>
BasicTensor<T> run_sequence(const LstmParams<T>& p, const BasicTensor<T>& x, bool reverse) {
  const std::size_t b = x.rank() == 3 ? x.dim(0) : 1;
  auto h = BasicTensor<T>::zeros({b, p.hidden()});
  auto c = BasicTensor<T>::zeros({b, p.hidden()});
  return unroll(x, p.input_dim(), reverse, [&](const BasicTensor<T>& xt) {
    std::tie(h, c) = lstm_cell_step(xt, h, c, p);
    return h;
  });
}

template <typename T>
BasicTensor<T> run_sequence(const GruParams<T>& p, const BasicTensor<T>& x, bool reverse) {
  const std::size_t b = x.rank() == 3 ? x.dim(0) : 1;
  auto h = BasicTensor<T>::zeros({b, p.hidden()});
  return unroll(x, p.input_dim(), reverse, [&](const BasicTensor<T>& xt) {
    h = gru_cell_step(xt, h, p);
    return h;
  });
}

template <typename T, template <typename> class Cell>
BasicTensor<T> bidirectional_apply(const Bidirectional<Cell<T>>& layer, const BasicTensor<T>& x) {
  const std::array<BasicTensor<T>, 2> halves{run_sequence(layer.forward, x, false),
                                             run_sequence(layer.backward, x, true)};
  return ops::concat_last<T>(halves);
}

// ---------------------------------------------------------------------------

template <typename T>
DenseParams<T> DenseParams<T>::init(std::size_t in, std::size_t out, Rng& rng) {
  return DenseParams{glorot_uniform<T>({in, out}, in, out, rng),
                     BasicTensor<T>::zeros({out}, true)};
}

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& x, const DenseParams<T>& p) {
  return fault_point(ops::add_bias(ops::matmul(x, p.W), p.bias), "dense");
}

#define VIHSD_INSTANTIATE_LAYERS(T)                                                          \
  template BasicTensor<T> glorot_uniform<T>(Shape, std::size_t, std::size_t, Rng&);          \
  template BasicTensor<T> embedding_forward(const EmbeddingTable<T>&, const IdMatrix&);      \
  template BasicTensor<T> spatial_dropout_1d(const BasicTensor<T>&, double, bool, Rng&);     \
  template struct Conv1DParams<T>;                                                           \
  template BasicTensor<T> conv1d_forward(const BasicTensor<T>&, const Conv1DParams<T>&);     \
  template BasicTensor<T> global_max_pool(const BasicTensor<T>&);                            \
  template struct LstmParams<T>;                                                             \
  template struct GruParams<T>;                                                              \
  template std::pair<BasicTensor<T>, BasicTensor<T>> lstm_cell_step(                         \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,                   \
      const LstmParams<T>&);                                                                 \
  template BasicTensor<T> gru_cell_step(const BasicTensor<T>&, const BasicTensor<T>&,        \
                                        const GruParams<T>&);                                \
  template BasicTensor<T> run_sequence(const LstmParams<T>&, const BasicTensor<T>&, bool);   \
  template BasicTensor<T> run_sequence(const GruParams<T>&, const BasicTensor<T>&, bool);    \
  template BasicTensor<T> bidirectional_apply<T, LstmParams>(                                \
      const Bidirectional<LstmParams<T>>&, const BasicTensor<T>&);                           \
  template BasicTensor<T> bidirectional_apply<T, GruParams>(const Bidirectional<GruParams<T>>&, \
                                                            const BasicTensor<T>&);          \
  template struct DenseParams<T>;                                                            \
  template BasicTensor<T> dense_forward(const BasicTensor<T>&, const DenseParams<T>&);

VIHSD_INSTANTIATE_LAYERS(float)
VIHSD_INSTANTIATE_LAYERS(double)

}  // namespace vihsd
