#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"
#include "vihsd/gradcheck.hpp"
#include "vihsd/loss.hpp"
#include "vihsd/model.hpp"

using namespace vihsd;

namespace {

template <typename T>
EmbeddingTable<T> random_table(std::size_t vocab, std::size_t dim, Rng& rng) {
  std::vector<T> w(vocab * dim, T(0));
  for (std::size_t i = dim; i < w.size(); ++i) w[i] = static_cast<T>(rng.uniform(-0.5, 0.5));
  return EmbeddingTable<T>{BasicTensor<T>({vocab, dim}, std::move(w), true), true};
}

IdMatrix random_ids(std::size_t rows, std::size_t cols, std::size_t vocab, Rng& rng, bool allow_pad = true) {
  IdMatrix m{rows, cols, {}};
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const auto lo = allow_pad ? 0 : 1;
    m.ids.push_back(static_cast<std::int32_t>(lo + rng.below(vocab - lo)));
  }
  return m;
}

ModelSpec mini_spec(ModelKind kind) {
  auto s = ModelSpec::defaults(kind);
  s.max_len = 6;
  s.embed_dim = 4;
  s.gru_units = 3;
  s.lstm_units = 3;
  s.conv_filters = 2;
  if (kind == ModelKind::TextCnn) s.kernel_widths = {2, 3};
  s.dropout_rate = 0.2;
  return s;
}

std::size_t lstm_params(std::size_t in, std::size_t h) { return 2 * 4 * (in * h + h * h + h); }
std::size_t gru_params(std::size_t in, std::size_t h) { return 2 * 3 * (in * h + h * h + h); }

}  // namespace

TEST_CASE("model names") {
  for (auto k : kAllModelKinds) CHECK(parse_model_kind(model_name(k)) == k);
  CHECK(model_name(ModelKind::BiGruLstmCnn) == "bigru-lstm-cnn");
  CHECK_THROWS_AS(parse_model_kind("lstm"), Error);
}

TEST_CASE("flagship forward shapes at full size") {
  Rng rng(1);
  const auto spec = ModelSpec::defaults(ModelKind::BiGruLstmCnn);
  CHECK(spec.max_len == 220);
  CHECK(spec.embed_dim == 300);
  CHECK(spec.dropout_rate == 0.2);
  Model<float> model(spec, random_table<float>(50, 300, rng), rng);
  CHECK(model.conv_input_channels() == 448);
  NoGradGuard guard;
  const auto logits = model.forward(random_ids(2, 220, 50, rng), false);
  CHECK(logits.shape() == Shape{2, 3});
}

TEST_CASE("textcnn widths and pooled features") {
  Rng rng(2);
  const auto spec = ModelSpec::defaults(ModelKind::TextCnn);
  CHECK(spec.kernel_widths == std::vector<std::size_t>{3, 4, 5});
  CHECK(spec.conv_filters == 100);
  Model<float> model(spec, random_table<float>(20, 300, rng), rng);
  CHECK(model.pooled_width() == 300);
  NoGradGuard guard;
  CHECK(model.forward(random_ids(3, 220, 20, rng), false).shape() == Shape{3, 3});
}

TEST_CASE("parameter counts") {
  Rng rng(3);
  DenseParams<float> dense = DenseParams<float>::init(4, 3, rng);
  CHECK(count_parameters(dense.parameters()) == 15);

  const std::size_t V = 50, D = 300;
  const auto spec = ModelSpec::defaults(ModelKind::BiGruLstmCnn);
  Model<float> full(spec, random_table<float>(V, D, rng), rng);
  const std::size_t expected = (V * D - D) + gru_params(300, 112) + 2 * lstm_params(224, 112) +
                               (64 * 3 * 448 + 64) + (64 * 3 + 3);
  CHECK(param_count(full) == expected);

  auto gc = ModelSpec::defaults(ModelKind::BiGruCnn);
  Model<float> bigru(gc, random_table<float>(V, D, rng), rng);
  CHECK(param_count(bigru) == (V * D - D) + gru_params(300, 112) + (64 * 3 * 224 + 64) + (64 * 3 + 3));

  auto tc = ModelSpec::defaults(ModelKind::TextCnn);
  Model<float> textcnn(tc, random_table<float>(V, D, rng), rng);
  CHECK(param_count(textcnn) == (V * D - D) + 100 * 300 * (3 + 4 + 5) + 300 + (300 * 3 + 3));

  auto frozen_spec = spec;
  frozen_spec.embeddings_trainable = false;
  Model<float> frozen(frozen_spec, random_table<float>(V, D, rng), rng);
  CHECK(param_count(full) - param_count(frozen) == V * D - D);
  CHECK(frozen.trainable_parameters().size() + 1 == full.trainable_parameters().size());
}

TEST_CASE("parameter names are unique") {
  Rng rng(4);
  for (auto kind : kAllModelKinds) {
    Model<float> m(mini_spec(kind), random_table<float>(7, 4, rng), rng);
    auto params = m.named_parameters();
    std::vector<std::string> names;
    for (auto& p : params) names.push_back(p.name);
    std::sort(names.begin(), names.end());
    CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
    CHECK(params.front().name == "embedding");
    CHECK(params.back().name == "dense.bias");
  }
}

TEST_CASE("build errors") {
  Rng rng(5);
  auto spec = mini_spec(ModelKind::BiGruLstmCnn);
  try {
    Model<float>(spec, random_table<float>(7, 5, rng), rng);
    FAIL("expected Config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  spec.dropout_rate = 1.0;
  CHECK_THROWS_AS(Model<float>(spec, random_table<float>(7, 4, rng), rng), Error);
  spec = mini_spec(ModelKind::BiGruLstmCnn);
  spec.kernel_widths = {7};
  CHECK_THROWS_AS(Model<float>(spec, random_table<float>(7, 4, rng), rng), Error);

  Model<float> ok(mini_spec(ModelKind::BiGruCnn), random_table<float>(7, 4, rng), rng);
  CHECK_THROWS_AS(ok.forward(random_ids(1, 5, 7, rng), false), Error);
  CHECK_THROWS_AS(ok.forward(random_ids(1, 6, 7, rng), true, nullptr), Error);
  try {
    ok.forward(IdMatrix{1, 6, {0, 1, 2, 3, 4, 9}}, false);
    FAIL("expected Data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }
}

TEST_CASE("predict tie rule and uniform output") {
  Rng rng(6);
  Model<float> m(mini_spec(ModelKind::BiGruLstmCnn), random_table<float>(9, 4, rng), rng);
  for (auto& p : m.named_parameters()) {
    if (p.name.rfind("dense", 0) == 0)
      for (auto& v : p.tensor.data()) v = 0.0f;
  }
  const auto preds = predict(m, random_ids(5, 6, 9, rng));
  REQUIRE(preds.size() == 5);
  for (const auto& p : preds) {
    CHECK(p.label == 0);
    for (double q : p.probabilities) CHECK(q == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
  }
}

TEST_CASE("predictions are normalized and chunking does not matter") {
  Rng rng(7);
  for (auto kind : kAllModelKinds) {
    Model<float> m(mini_spec(kind), random_table<float>(9, 4, rng), rng);
    const auto ids = random_ids(11, 6, 9, rng);
    const auto a = predict(m, ids, 64);
    const auto b = predict(m, ids, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(std::accumulate(a[i].probabilities.begin(), a[i].probabilities.end(), 0.0) - 1.0) <= 1e-6);
      CHECK(a[i].label == b[i].label);
      CHECK(a[i].probabilities == b[i].probabilities);
    }
  }
}

TEST_CASE("forward is permutation equivariant over the batch") {
  Rng rng(8);
  for (auto kind : kAllModelKinds) {
    Model<double> m(mini_spec(kind), random_table<double>(9, 4, rng), rng);
    const auto ids = random_ids(5, 6, 9, rng);
    std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    IdMatrix shuffled{5, 6, {}};
    for (auto r : perm)
      for (std::size_t c = 0; c < 6; ++c) shuffled.ids.push_back(ids.at(r, c));
    NoGradGuard guard;
    const auto base = m.forward(ids, false).to_vector();
    const auto out = m.forward(shuffled, false).to_vector();
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t c = 0; c < 3; ++c) CHECK(out[i * 3 + c] == doctest::Approx(base[perm[i] * 3 + c]).epsilon(1e-12));
  }
}

TEST_CASE("training forward applies dropout deterministically under a seed") {
  Rng rng(9);
  auto spec = mini_spec(ModelKind::BiGruCnn);
  spec.dropout_rate = 0.5;
  Model<double> m(spec, random_table<double>(9, 4, rng), rng);
  const auto ids = random_ids(4, 6, 9, rng, false);
  Rng a(100), b(100);
  CHECK(m.forward(ids, true, &a).to_vector() == m.forward(ids, true, &b).to_vector());
  NoGradGuard guard;
  CHECK(m.forward(ids, false).to_vector() == m.forward(ids, false).to_vector());
}

TEST_CASE("all kinds run forward and backward") {
  Rng rng(10);
  for (auto kind : kAllModelKinds) {
    Model<float> m(mini_spec(kind), random_table<float>(9, 4, rng), rng);
    const auto ids = random_ids(4, 6, 9, rng);
    const std::vector<int> labels = {0, 1, 2, 1};
    Rng drop(1);
    auto loss = softmax_cross_entropy<float>(m.forward(ids, true, &drop), labels);
    backward(loss);
    for (auto& p : m.trainable_parameters()) CHECK(p.has_grad());
  }
}

TEST_CASE("end-to-end gradient check on miniature models") {
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;
  for (auto kind : kAllModelKinds) {
    CAPTURE(model_name(kind));
    Rng rng(11);
    auto spec = mini_spec(kind);
    Model<double> m(spec, random_table<double>(9, 4, rng), rng);
    const auto ids = random_ids(3, 6, 9, rng);
    const std::vector<int> labels = {2, 0, 1};
    const std::vector<double> weights = {0.5, 1.5, 2.0};
    auto loss = [&] { return softmax_cross_entropy<double>(m.forward(ids, false), labels, weights); };
    for (auto& np : m.named_parameters()) {
      CAPTURE(np.name);
      std::vector<std::size_t> coords;
      // The PAD row is frozen by design; its numeric derivative is not zero.
      const std::size_t first = np.name == "embedding" ? np.tensor.dim(1) : 0;
      for (std::size_t i = first; i < np.tensor.numel(); ++i) coords.push_back(i);
      rng.shuffle(coords.begin(), coords.end());
      if (coords.size() > 32) coords.resize(32);
      CHECK(finite_diff_check(loss, np.tensor, kStep, coords) < kTol);
    }
  }
}

TEST_CASE("gradient check refuses a stochastic forward pass") {
  Rng rng(12);
  Model<double> m(mini_spec(ModelKind::TextCnn), random_table<double>(9, 4, rng), rng);
  const auto ids = random_ids(3, 6, 9, rng, false);
  const std::vector<int> labels = {2, 0, 1};
  Rng drop(5);
  auto loss = [&] { return softmax_cross_entropy<double>(m.forward(ids, true, &drop), labels); };
  try {
    finite_diff_check(loss, m.named_parameters().back().tensor, 1e-5);
    FAIL("expected OracleMisuse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OracleMisuse);
  }
}
