#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vihsd/rng.hpp"
#include "vihsd/tensor.hpp"

namespace vihsd {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;

/// Row-major [rows, cols] matrix of token ids.
struct IdMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> ids;

  std::int32_t at(std::size_t r, std::size_t c) const { return ids[r * cols + c]; }
};

// ---------------------------------------------------------------------------
// Embedding

/// weights[vocab, dim]; row kPadId is zero and never receives gradient.
template <typename T>
struct EmbeddingTable {
  BasicTensor<T> weights;
  bool trainable = true;

  std::size_t vocab_size() const { return weights.dim(0); }
  std::size_t dim() const { return weights.dim(1); }
};

/// [batch, len] ids -> [batch, len, dim]. Throws `ErrorKind::Data` naming
/// the (row, column) of an id outside the table.
template <typename T>
BasicTensor<T> embedding_forward(const EmbeddingTable<T>& table, const IdMatrix& ids);

// ---------------------------------------------------------------------------
// Dropout

/// Zeroes whole channels of a [batch, time, channels] tensor: one Bernoulli
/// draw per (batch, channel), shared by every timestep. Survivors are scaled
/// by 1 / (1 - rate). Identity when not training or rate == 0.
template <typename T>
BasicTensor<T> spatial_dropout_1d(const BasicTensor<T>& x, double rate, bool training, Rng& rng);

// ---------------------------------------------------------------------------
// Convolution and pooling

enum class Activation { None, Relu };

template <typename T>
struct Conv1DParams {
  BasicTensor<T> kernels;  // [filters, width, in_channels]
  BasicTensor<T> bias;     // [filters]
  Activation activation = Activation::Relu;

  std::size_t filters() const { return kernels.dim(0); }
  std::size_t width() const { return kernels.dim(1); }
  std::size_t in_channels() const { return kernels.dim(2); }

  static Conv1DParams init(std::size_t in_channels, std::size_t filters, std::size_t width,
                           Rng& rng);
  std::vector<BasicTensor<T>> parameters() const { return {kernels, bias}; }
};

/// Valid (unpadded) convolution over time: [b, t, c] -> [b, t - k + 1, filters].
template <typename T>
BasicTensor<T> conv1d_forward(const BasicTensor<T>& x, const Conv1DParams<T>& p);

/// [b, t, c] -> [b, c]; ties route the gradient to the earliest timestep.
template <typename T>
BasicTensor<T> global_max_pool(const BasicTensor<T>& x);

// ---------------------------------------------------------------------------
// Recurrent cells

/// Gate order: input, forget, cell (candidate), output.
template <typename T>
struct LstmParams {
  enum Gate { Input = 0, Forget = 1, Cell = 2, Output = 3 };
  std::array<BasicTensor<T>, 4> W;  // [in, hidden]
  std::array<BasicTensor<T>, 4> U;  // [hidden, hidden]
  std::array<BasicTensor<T>, 4> b;  // [hidden]

  std::size_t input_dim() const { return W[0].dim(0); }
  std::size_t hidden() const { return W[0].dim(1); }

  /// Glorot-uniform W, uniform(±1/sqrt(hidden)) U, zero biases except the
  /// forget gate at 1.
  static LstmParams init(std::size_t in, std::size_t hidden, Rng& rng);
  static LstmParams zeros(std::size_t in, std::size_t hidden);
  std::vector<BasicTensor<T>> parameters() const;
};

/// Gate order: update (z), reset (r), candidate.
template <typename T>
struct GruParams {
  enum Gate { Update = 0, Reset = 1, Candidate = 2 };
  std::array<BasicTensor<T>, 3> W;
  std::array<BasicTensor<T>, 3> U;
  std::array<BasicTensor<T>, 3> b;

  std::size_t input_dim() const { return W[0].dim(0); }
  std::size_t hidden() const { return W[0].dim(1); }

  static GruParams init(std::size_t in, std::size_t hidden, Rng& rng);
  static GruParams zeros(std::size_t in, std::size_t hidden);
  std::vector<BasicTensor<T>> parameters() const;
};

/// i,f,o = σ(xW+hU+b); g = tanh(xW+hU+b); c' = f⊙c + i⊙g; h' = o⊙tanh(c').
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> lstm_cell_step(const BasicTensor<T>& x,
                                                         const BasicTensor<T>& h_prev,
                                                         const BasicTensor<T>& c_prev,
                                                         const LstmParams<T>& p);

/// z,r = σ(xW+hU+b); h̃ = tanh(xW + (r⊙h)U + b); h' = (1−z)⊙h + z⊙h̃.
template <typename T>
BasicTensor<T> gru_cell_step(const BasicTensor<T>& x, const BasicTensor<T>& h_prev,
                             const GruParams<T>& p);

/// Unrolls a cell over [b, t, in] from zero state. With `reverse` the scan
/// runs t = T-1..0; outputs stay aligned to input positions.
template <typename T>
BasicTensor<T> run_sequence(const LstmParams<T>& p, const BasicTensor<T>& x, bool reverse);
template <typename T>
BasicTensor<T> run_sequence(const GruParams<T>& p, const BasicTensor<T>& x, bool reverse);

template <typename Params>
struct Bidirectional {
  Params forward;
  Params backward;

  static Bidirectional init(std::size_t in, std::size_t hidden, Rng& rng) {
    auto fwd = Params::init(in, hidden, rng);
    auto bwd = Params::init(in, hidden, rng);
    return Bidirectional{std::move(fwd), std::move(bwd)};
  }
  auto parameters() const {
    auto all = forward.parameters();
    for (auto& t : backward.parameters()) all.push_back(t);
    return all;
  }
};

/// [b, t, in] -> [b, t, 2·hidden]: forward-scan features then backward-scan
/// features at every timestep.
template <typename T, template <typename> class Cell>
BasicTensor<T> bidirectional_apply(const Bidirectional<Cell<T>>& layer, const BasicTensor<T>& x);

// ---------------------------------------------------------------------------
// Dense head

template <typename T>
struct DenseParams {
  BasicTensor<T> W;     // [in, out]
  BasicTensor<T> bias;  // [out]

  static DenseParams init(std::size_t in, std::size_t out, Rng& rng);
  std::vector<BasicTensor<T>> parameters() const { return {W, bias}; }
};

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& x, const DenseParams<T>& p);

// ---------------------------------------------------------------------------

/// uniform(±sqrt(6 / (fan_in + fan_out)))
template <typename T>
BasicTensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

template <typename T>
std::size_t count_parameters(const std::vector<BasicTensor<T>>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.numel();
  return n;
}

/// Verification hook: when set to a layer name ("lstm", "gru", "conv1d",
/// "dense"), that layer's backward pass is deliberately corrupted (gradient
/// doubled). Empty string disables. Never set outside tests.
void set_fault_injection(std::string layer);
const std::string& fault_injection();

}  // namespace vihsd
