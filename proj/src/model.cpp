#include "vihsd/model.hpp"

#include <algorithm>
#include <cmath>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"
#include "vihsd/loss.hpp"
#include "vihsd/ops.hpp"

namespace vihsd {

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::TextCnn: return "textcnn";
    case ModelKind::BiGruCnn: return "bigru-cnn";
    case ModelKind::BiGruLstmCnn: return "bigru-lstm-cnn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : kAllModelKinds)
    if (model_name(k) == name) return k;
  fail(ErrorKind::Config, "unknown model '" + std::string(name) +
                              "' (expected textcnn, bigru-cnn or bigru-lstm-cnn)");
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  if (kind == ModelKind::TextCnn) {
    s.conv_filters = 100;
    s.kernel_widths = {3, 4, 5};
  }
  return s;
}

void ModelSpec::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) fail(ErrorKind::Config, std::string(name) + " must be positive");
  };
  positive(max_len, "max_len");
  positive(embed_dim, "embed_dim");
  positive(conv_filters, "conv_filters");
  positive(num_classes, "num_classes");
  if (kind != ModelKind::TextCnn) positive(gru_units, "gru_units");
  if (kind == ModelKind::BiGruLstmCnn) {
    positive(lstm_units, "lstm_units");
    positive(lstm_blocks, "lstm_blocks");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    fail(ErrorKind::Config, "dropout_rate must be in [0, 1), got " + std::to_string(dropout_rate));
  }
  if (kernel_widths.empty()) fail(ErrorKind::Config, "kernel_widths must not be empty");
  for (auto w : kernel_widths) {
    if (w == 0 || w > max_len) {
      fail(ErrorKind::Config, "kernel width " + std::to_string(w) + " must be in [1, max_len=" +
                                  std::to_string(max_len) + "]");
    }
  }
}

template <typename T>
Model<T>::Model(ModelSpec spec, EmbeddingTable<T> table, Rng& rng)
    : spec_(std::move(spec)), embedding_(std::move(table)) {
  spec_.validate();
  if (!embedding_.weights.defined() || embedding_.weights.rank() != 2) {
    fail(ErrorKind::Config, "embedding table must be a [vocab, dim] matrix");
  }
  if (embedding_.dim() != spec_.embed_dim) {
    fail(ErrorKind::Config, "embedding table has dimension " + std::to_string(embedding_.dim()) +
                                " but the model expects embed_dim " +
                                std::to_string(spec_.embed_dim));
  }
  if (embedding_.vocab_size() < 2) fail(ErrorKind::Config, "embedding table needs PAD and UNK rows");
  embedding_.trainable = spec_.embeddings_trainable;
  embedding_.weights.set_requires_grad(spec_.embeddings_trainable);

  if (spec_.kind != ModelKind::TextCnn) {
    gru_ = Bidirectional<GruParams<T>>::init(spec_.embed_dim, spec_.gru_units, rng);
  }
  if (spec_.kind == ModelKind::BiGruLstmCnn) {
    for (std::size_t k = 0; k < spec_.lstm_blocks; ++k)
      lstms_.push_back(Bidirectional<LstmParams<T>>::init(2 * spec_.gru_units, spec_.lstm_units, rng));
  }
  const std::size_t channels = conv_input_channels();
  for (auto w : spec_.kernel_widths)
    convs_.push_back(Conv1DParams<T>::init(channels, spec_.conv_filters, w, rng));
  dense_ = DenseParams<T>::init(pooled_width(), spec_.num_classes, rng);
}

template <typename T>
std::size_t Model<T>::conv_input_channels() const {
  switch (spec_.kind) {
    case ModelKind::TextCnn: return spec_.embed_dim;
    case ModelKind::BiGruCnn: return 2 * spec_.gru_units;
    case ModelKind::BiGruLstmCnn: return spec_.lstm_blocks * 2 * spec_.lstm_units;
  }
  return 0;
}

template <typename T>
std::size_t Model<T>::pooled_width() const {
  return spec_.kernel_widths.size() * spec_.conv_filters;
}

template <typename T>
BasicTensor<T> Model<T>::forward(const IdMatrix& ids, bool training, Rng* rng) const {
  if (ids.cols != spec_.max_len) {
    fail(ErrorKind::Dimension, "model expects id rows of width " + std::to_string(spec_.max_len) +
                                   ", got " + std::to_string(ids.cols));
  }
  if (ids.rows == 0) fail(ErrorKind::Dimension, "model forward needs at least one row");
  if (training && spec_.dropout_rate > 0.0 && rng == nullptr) {
    fail(ErrorKind::Contract, "training forward pass needs an Rng for dropout");
  }
  auto x = embedding_forward(embedding_, ids);
  if (training && spec_.dropout_rate > 0.0) x = spatial_dropout_1d(x, spec_.dropout_rate, true, *rng);

  if (gru_) x = bidirectional_apply(*gru_, x);
  if (!lstms_.empty()) {
    std::vector<BasicTensor<T>> blocks;
    for (const auto& l : lstms_) blocks.push_back(bidirectional_apply(l, x));
    x = blocks.size() == 1 ? blocks[0] : ops::concat_last<T>(blocks);
  }
  std::vector<BasicTensor<T>> pooled;
  for (const auto& c : convs_) pooled.push_back(global_max_pool(conv1d_forward(x, c)));
  auto features = pooled.size() == 1 ? pooled[0] : ops::concat_last<T>(pooled);
  return dense_forward(features, dense_);
}

namespace {

template <typename T>
void add_recurrent(std::vector<NamedParameter<T>>& out, const std::string& prefix,
                   const Bidirectional<GruParams<T>>& layer) {
  static const char* gates[] = {"z", "r", "h"};
  for (int dir = 0; dir < 2; ++dir) {
    const auto& p = dir == 0 ? layer.forward : layer.backward;
    const std::string base = prefix + (dir == 0 ? ".forward." : ".backward.");
    for (int g = 0; g < 3; ++g) {
      out.push_back({base + "W_" + gates[g], p.W[g]});
      out.push_back({base + "U_" + gates[g], p.U[g]});
      out.push_back({base + "b_" + gates[g], p.b[g]});
    }
  }
}

template <typename T>
void add_recurrent(std::vector<NamedParameter<T>>& out, const std::string& prefix,
                   const Bidirectional<LstmParams<T>>& layer) {
  static const char* gates[] = {"i", "f", "g", "o"};
  for (int dir = 0; dir < 2; ++dir) {
    const auto& p = dir == 0 ? layer.forward : layer.backward;
    const std::string base = prefix + (dir == 0 ? ".forward." : ".backward.");
    for (int g = 0; g < 4; ++g) {
      out.push_back({base + "W_" + gates[g], p.W[g]});
      out.push_back({base + "U_" + gates[g], p.U[g]});
      out.push_back({base + "b_" + gates[g], p.b[g]});
    }
  }
}

}  // namespace

template <typename T>
std::vector<NamedParameter<T>> Model<T>::named_parameters() const {
  std::vector<NamedParameter<T>> out;
  out.push_back({"embedding", embedding_.weights});
  if (gru_) add_recurrent(out, "gru", *gru_);
  for (std::size_t k = 0; k < lstms_.size(); ++k) add_recurrent(out, "lstm" + std::to_string(k), lstms_[k]);
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    const std::string base = "conv" + std::to_string(k);
    out.push_back({base + ".kernel", convs_[k].kernels});
    out.push_back({base + ".bias", convs_[k].bias});
  }
  out.push_back({"dense.W", dense_.W});
  out.push_back({"dense.bias", dense_.bias});
  return out;
}

template <typename T>
std::vector<BasicTensor<T>> Model<T>::trainable_parameters() const {
  std::vector<BasicTensor<T>> out;
  for (auto& np : named_parameters()) {
    if (np.name == "embedding" && !embedding_.trainable) continue;
    out.push_back(np.tensor);
  }
  return out;
}

template <typename T>
std::size_t param_count(const Model<T>& model) {
  std::size_t n = 0;
  for (const auto& np : model.named_parameters()) {
    if (np.name == "embedding") {
      if (model.spec().embeddings_trainable) n += np.tensor.numel() - np.tensor.dim(1);
    } else {
      n += np.tensor.numel();
    }
  }
  return n;
}

IdMatrix slice_rows(const IdMatrix& ids, std::size_t begin, std::size_t end) {
  if (begin > end || end > ids.rows) fail(ErrorKind::Contract, "slice_rows: range out of bounds");
  IdMatrix out;
  out.rows = end - begin;
  out.cols = ids.cols;
  out.ids.assign(ids.ids.begin() + begin * ids.cols, ids.ids.begin() + end * ids.cols);
  return out;
}

template <typename T>
std::vector<Prediction> predict(const Model<T>& model, const IdMatrix& ids, std::size_t chunk) {
  if (chunk == 0) fail(ErrorKind::Contract, "predict chunk must be positive");
  NoGradGuard guard;
  std::vector<Prediction> out;
  out.reserve(ids.rows);
  const std::size_t C = model.spec().num_classes;
  for (std::size_t begin = 0; begin < ids.rows; begin += chunk) {
    const std::size_t end = std::min(ids.rows, begin + chunk);
    const auto logits = model.forward(slice_rows(ids, begin, end), false).to_vector();
    const auto probs = softmax_rows<T>(logits, C);
    for (std::size_t r = 0; r < end - begin; ++r) {
      Prediction p;
      p.probabilities.assign(probs.begin() + r * C, probs.begin() + (r + 1) * C);
      p.label = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                 p.probabilities.begin());
      out.push_back(std::move(p));
    }
  }
  return out;
}

template class Model<float>;
template class Model<double>;
template std::size_t param_count(const Model<float>&);
template std::size_t param_count(const Model<double>&);
template std::vector<Prediction> predict(const Model<float>&, const IdMatrix&, std::size_t);
template std::vector<Prediction> predict(const Model<double>&, const IdMatrix&, std::size_t);

}  // namespace vihsd
