#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vihsd/layers.hpp"
#include "vihsd/rng.hpp"
#include "vihsd/text.hpp"

namespace vihsd {

enum class ModelKind { TextCnn, BiGruCnn, BiGruLstmCnn };

/// "textcnn", "bigru-cnn", "bigru-lstm-cnn"
std::string_view model_name(ModelKind kind);
/// Throws `ErrorKind::Config` listing the accepted names.
ModelKind parse_model_kind(std::string_view name);
inline constexpr ModelKind kAllModelKinds[] = {ModelKind::TextCnn, ModelKind::BiGruCnn,
                                               ModelKind::BiGruLstmCnn};

struct ModelSpec {
  ModelKind kind = ModelKind::BiGruLstmCnn;
  std::size_t max_len = 220;
  std::size_t embed_dim = 300;
  double dropout_rate = 0.2;
  std::size_t gru_units = 112;
  std::size_t lstm_units = 112;
  std::size_t lstm_blocks = 2;  // parallel Bi-LSTMs on the Bi-GRU output
  std::size_t conv_filters = 64;
  std::vector<std::size_t> kernel_widths = {3};
  std::size_t num_classes = 3;
  bool embeddings_trainable = true;

  /// Defaults for `kind`; TextCNN uses widths {3,4,5} with 100 filters each.
  static ModelSpec defaults(ModelKind kind);
  /// Throws `ErrorKind::Config` for non-positive sizes, a dropout rate
  /// outside [0,1), or a kernel wider than max_len.
  void validate() const;
};

template <typename T>
struct NamedParameter {
  std::string name;
  BasicTensor<T> tensor;
};

/// A built network. Parameters are shared tensor handles, so optimizers and
/// checkpoint loading update them in place.
template <typename T>
class Model {
 public:
  /// Throws `ErrorKind::Config` when the table width differs from
  /// spec.embed_dim.
  Model(ModelSpec spec, EmbeddingTable<T> table, Rng& rng);

  const ModelSpec& spec() const { return spec_; }
  std::size_t vocab_size() const { return embedding_.vocab_size(); }

  /// ids [batch, max_len] -> logits [batch, num_classes]. `rng` drives
  /// dropout and is required when `training`.
  BasicTensor<T> forward(const IdMatrix& ids, bool training, Rng* rng = nullptr) const;

  /// Width of the feature sequence fed to the convolutions.
  std::size_t conv_input_channels() const;
  /// Width of the pooled vector fed to the dense head.
  std::size_t pooled_width() const;

  /// Every parameter in a fixed order with unique dotted names.
  std::vector<NamedParameter<T>> named_parameters() const;
  /// Parameters the optimizer updates (embedding excluded when frozen).
  std::vector<BasicTensor<T>> trainable_parameters() const;

 private:
  ModelSpec spec_;
  EmbeddingTable<T> embedding_;
  std::optional<Bidirectional<GruParams<T>>> gru_;
  std::vector<Bidirectional<LstmParams<T>>> lstms_;
  std::vector<Conv1DParams<T>> convs_;
  DenseParams<T> dense_;
};

template <typename T>
Model<T> build_model(const ModelSpec& spec, EmbeddingTable<T> table, Rng& rng) {
  return Model<T>(spec, std::move(table), rng);
}

/// Trainable scalar count; the PAD embedding row never trains and is not
/// counted.
template <typename T>
std::size_t param_count(const Model<T>& model);

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Inference-mode softmax + argmax (ties go to the lowest label), evaluated
/// in chunks of `chunk` rows.
template <typename T>
std::vector<Prediction> predict(const Model<T>& model, const IdMatrix& ids, std::size_t chunk = 64);

/// Rows [begin, end) of `ids`.
IdMatrix slice_rows(const IdMatrix& ids, std::size_t begin, std::size_t end);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace vihsd
