#include "vihsd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"
#include "vihsd/gradcheck.hpp"
#include "vihsd/layers.hpp"
#include "vihsd/loss.hpp"
#include "vihsd/model.hpp"
#include "vihsd/ops.hpp"
#include "vihsd/text.hpp"
#include "vihsd/unicode.hpp"

namespace vihsd {

namespace {

constexpr double kStep = 1e-3;
constexpr double kGradTol = 1e-4;
constexpr std::size_t kMaxCoords = 32;

TensorD random_tensor(Shape shape, Rng& rng, bool requires_grad = true) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return TensorD(std::move(shape), std::move(v), requires_grad);
}

// Fixed random projection of an arbitrary output to a scalar.
TensorD probe(const TensorD& y, std::uint64_t seed) {
  Rng rng(seed);
  return ops::sum(ops::mul(y, random_tensor(y.shape(), rng, false)));
}

std::vector<std::size_t> sample_coords(std::size_t numel, std::size_t first, Rng& rng) {
  std::vector<std::size_t> coords;
  for (std::size_t i = first; i < numel; ++i) coords.push_back(i);
  rng.shuffle(coords.begin(), coords.end());
  if (coords.size() > kMaxCoords) coords.resize(kMaxCoords);
  std::sort(coords.begin(), coords.end());
  return coords;
}

struct Probe {
  std::string label;
  TensorD theta;
  std::size_t first = 0;
};

CheckResult grad_check(std::string name, const std::function<TensorD()>& f, std::vector<Probe> probes, Rng& rng) {
  CheckResult r{std::move(name), false, 0.0, kGradTol, {}};
  std::string worst;
  try {
    for (auto& p : probes) {
      const auto coords = sample_coords(p.theta.numel(), p.first, rng);
      const double err = finite_diff_check(f, p.theta, kStep, coords);
      if (worst.empty() || err > r.value) {
        worst = p.label;
        r.value = err;
      }
    }
    r.passed = r.value < r.tolerance;
    r.detail = "worst at " + worst;
  } catch (const Error& e) {
    r.value = std::numeric_limits<double>::infinity();
    r.detail = e.what();
  }
  return r;
}

// Independent brute-force oracles.
std::vector<double> conv_oracle(const TensorD& x, const TensorD& k, const TensorD& bias) {
  const std::size_t B = x.dim(0), T = x.dim(1), C = x.dim(2), F = k.dim(0), K = k.dim(1);
  const std::size_t O = T - K + 1;
  std::vector<double> out(B * O * F);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < O; ++t)
      for (std::size_t f = 0; f < F; ++f) {
        double acc = bias.data()[f];
        for (std::size_t j = 0; j < K; ++j)
          for (std::size_t c = 0; c < C; ++c)
            acc += x.data()[(b * T + t + j) * C + c] * k.data()[(f * K + j) * C + c];
        out[(b * O + t) * F + f] = std::max(acc, 0.0);
      }
  return out;
}

std::vector<double> pool_oracle(const TensorD& x) {
  const std::size_t B = x.dim(0), T = x.dim(1), C = x.dim(2);
  std::vector<double> out(B * C, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c) out[b * C + c] = std::max(out[b * C + c], x.data()[(b * T + t) * C + c]);
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

class FaultScope {
 public:
  explicit FaultScope(const std::string& layer) : previous_(fault_injection()) { set_fault_injection(layer); }
  ~FaultScope() { set_fault_injection(previous_); }
  FaultScope(const FaultScope&) = delete;
  FaultScope& operator=(const FaultScope&) = delete;

 private:
  std::string previous_;
};

}  // namespace

std::vector<CheckResult> verify_gradients(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);

  {
    std::vector<double> w(7 * 4);
    for (std::size_t i = 4; i < w.size(); ++i) w[i] = rng.uniform(-1, 1);
    EmbeddingTable<double> table{TensorD({7, 4}, w, true), true};
    IdMatrix ids{2, 5, {0, 3, 6, 3, 0, 1, 2, 0, 5, 4}};
    out.push_back(grad_check("gradient/embedding", [&] { return probe(embedding_forward(table, ids), 1); },
                             {{"weights", table.weights, 4}}, rng));
  }
  {
    auto x = random_tensor({2, 6, 3}, rng);
    auto p = Conv1DParams<double>::init(3, 4, 3, rng);
    out.push_back(grad_check("gradient/conv1d", [&] { return probe(conv1d_forward(x, p), 2); },
                             {{"input", x}, {"kernels", p.kernels}, {"bias", p.bias}}, rng));
  }
  {
    auto x = random_tensor({3, 5, 4}, rng);
    out.push_back(grad_check("gradient/max_pool", [&] { return probe(global_max_pool(x), 3); }, {{"input", x}}, rng));
  }
  {
    auto x = random_tensor({3, 5}, rng);
    auto p = DenseParams<double>::init(5, 3, rng);
    out.push_back(grad_check("gradient/dense", [&] { return probe(dense_forward(x, p), 4); },
                             {{"input", x}, {"W", p.W}, {"bias", p.bias}}, rng));
  }
  {
    auto x = random_tensor({2, 3}, rng), h = random_tensor({2, 4}, rng), c = random_tensor({2, 4}, rng);
    auto p = LstmParams<double>::init(3, 4, rng);
    std::vector<Probe> probes = {{"x", x}, {"h_prev", h}, {"c_prev", c}};
    for (auto& t : p.parameters()) probes.push_back({"parameter " + std::to_string(probes.size()), t});
    out.push_back(grad_check("gradient/lstm_cell", [&] {
      auto [h1, c1] = lstm_cell_step(x, h, c, p);
      return ops::add(probe(h1, 5), probe(c1, 6));
    }, probes, rng));
  }
  {
    auto x = random_tensor({2, 3}, rng), h = random_tensor({2, 4}, rng);
    auto p = GruParams<double>::init(3, 4, rng);
    std::vector<Probe> probes = {{"x", x}, {"h_prev", h}};
    for (auto& t : p.parameters()) probes.push_back({"parameter " + std::to_string(probes.size()), t});
    out.push_back(grad_check("gradient/gru_cell", [&] { return probe(gru_cell_step(x, h, p), 7); }, probes, rng));
  }
  {
    auto x = random_tensor({2, 4, 3}, rng);
    auto l = Bidirectional<LstmParams<double>>::init(3, 2, rng);
    std::vector<Probe> probes = {{"x", x}};
    for (auto& t : l.parameters()) probes.push_back({"parameter " + std::to_string(probes.size()), t});
    out.push_back(grad_check("gradient/bidirectional_lstm", [&] { return probe(bidirectional_apply(l, x), 8); },
                             probes, rng));
  }
  {
    auto x = random_tensor({2, 4, 3}, rng);
    auto g = Bidirectional<GruParams<double>>::init(3, 2, rng);
    std::vector<Probe> probes = {{"x", x}};
    for (auto& t : g.parameters()) probes.push_back({"parameter " + std::to_string(probes.size()), t});
    out.push_back(grad_check("gradient/bidirectional_gru", [&] { return probe(bidirectional_apply(g, x), 9); },
                             probes, rng));
  }
  {
    auto logits = random_tensor({4, 3}, rng);
    const std::vector<int> labels = {0, 2, 1, 2};
    const std::vector<double> weights = {0.3643, 6.6357, 9.5651};
    out.push_back(grad_check("gradient/softmax_ce", [&] {
      return softmax_cross_entropy<double>(logits, labels, weights);
    }, {{"logits", logits}}, rng));
  }
  for (auto kind : kAllModelKinds) {
    auto spec = ModelSpec::defaults(kind);
    spec.max_len = 6;
    spec.embed_dim = 4;
    spec.gru_units = 3;
    spec.lstm_units = 3;
    spec.conv_filters = 2;
    if (kind == ModelKind::TextCnn) spec.kernel_widths = {2, 3};
    std::vector<double> w(9 * 4);
    for (std::size_t i = 4; i < w.size(); ++i) w[i] = rng.uniform(-0.5, 0.5);
    Model<double> m(spec, EmbeddingTable<double>{TensorD({9, 4}, w, true), true}, rng);
    IdMatrix ids{3, 6, {}};
    for (int i = 0; i < 18; ++i) ids.ids.push_back(static_cast<std::int32_t>(rng.below(9)));
    const std::vector<int> labels = {2, 0, 1};
    std::vector<Probe> probes;
    for (auto& np : m.named_parameters()) probes.push_back({np.name, np.tensor, np.name == "embedding" ? 4u : 0u});
    out.push_back(grad_check("gradient/model_" + std::string(model_name(kind)),
                             [&] { return softmax_cross_entropy<double>(m.forward(ids, false), labels); }, probes, rng));
  }
  return out;
}

std::vector<CheckResult> verify_oracles(std::uint64_t seed, int shapes) {
  Rng rng(seed);
  double conv_err = 0, pool_err = 0;
  for (int s = 0; s < shapes; ++s) {
    const std::size_t b = 1 + rng.below(5), t = 1 + rng.below(5), c = 1 + rng.below(5);
    const std::size_t k = 1 + rng.below(t), f = 1 + rng.below(5);
    auto x = random_tensor({b, t, c}, rng, false);
    Conv1DParams<double> p{random_tensor({f, k, c}, rng, false), random_tensor({f}, rng, false), Activation::Relu};
    NoGradGuard guard;
    conv_err = std::max(conv_err, max_abs_diff(conv1d_forward(x, p).to_vector(), conv_oracle(x, p.kernels, p.bias)));
    pool_err = std::max(pool_err, max_abs_diff(global_max_pool(x).to_vector(), pool_oracle(x)));
  }
  const std::string detail = std::to_string(shapes) + " random shapes";
  return {CheckResult{"oracle/conv1d", conv_err < 1e-6, conv_err, 1e-6, detail},
          CheckResult{"oracle/global_max_pool", pool_err < 1e-6, pool_err, 1e-6, detail}};
}

std::vector<CheckResult> verify_preprocessing(std::uint64_t seed, int samples) {
  struct Golden {
    const char* in;
    const char* out;
  };
  const Golden goldens[] = {
      {"Có  3   con!!!", "có number con"},
      {"Thương tụi mày quá", "thương tụi mày quá"},
      {"", ""},
      {"Thương tụi mày quá không biết tụi mày có thương tao ko :(",
       "thương tụi mày quá không biết tụi mày có thương tao ko"},
      {"Thi đấu thể thao chuyên nghiệp ở trong nước bạc bẽo vl",
       "thi đấu thể thao chuyên nghiệp ở trong nước bạc bẽo vl"},
      {"Không ai rãnh mà nói chuyện với mày đâu thằng ngũ", "không ai rãnh mà nói chuyện với mày đâu thằng ngũ"},
  };
  double golden_failures = 0;
  std::string first_failure;
  for (const auto& g : goldens) {
    if (normalize_text(g.in) != g.out) {
      ++golden_failures;
      if (first_failure.empty()) first_failure = std::string("mismatch on '") + g.in + "'";
    }
  }

  const char32_t pool[] = {'A', 'z', 'Q', '0', '7', ' ', '\t', '\n', '!', ',', '.', '_', 0x00C0, 0x0110, 0x1EA0,
                           0x1EF9, 0x0130, 0x03A3, 0x0660, 0xFF10, 0x3000, 0x00A0, 0x2014, 0x00AB, 0x1F600, 0x0301};
  Rng rng(seed);
  double idem_failures = 0;
  std::string idem_detail = std::to_string(samples) + " random strings";
  for (int i = 0; i < samples; ++i) {
    std::u32string s;
    const auto len = rng.below(24);
    for (std::size_t k = 0; k < len; ++k) {
      char32_t cp = rng.bernoulli(0.2) ? static_cast<char32_t>(rng.below(0x30000)) : pool[rng.below(std::size(pool))];
      if (cp >= 0xD800 && cp <= 0xDFFF) cp = 'x';
      s.push_back(cp);
    }
    const auto once = normalize_text(unicode::encode_utf8(s));
    if (normalize_text(once) != once) ++idem_failures;
  }
  return {CheckResult{"preprocess/goldens", golden_failures == 0, golden_failures, 1,
                      first_failure.empty() ? std::to_string(std::size(goldens)) + " cases" : first_failure},
          CheckResult{"preprocess/idempotence", idem_failures == 0, idem_failures, 1, idem_detail}};
}

std::vector<CheckResult> verify_parameter_counts() {
  Rng rng(0);
  const auto lstm = count_parameters(Bidirectional<LstmParams<float>>::init(300, 112, rng).parameters());
  const auto gru = count_parameters(Bidirectional<GruParams<float>>::init(300, 112, rng).parameters());
  auto check = [](const char* name, std::size_t got, std::size_t want) {
    return CheckResult{name, got == want, std::abs(static_cast<double>(got) - static_cast<double>(want)), 1,
                       std::to_string(got) + " (expected " + std::to_string(want) + ")"};
  };
  return {check("params/bilstm_300_112", lstm, 370048), check("params/bigru_300_112", gru, 277536)};
}

std::vector<CheckResult> run_verify_suite(const VerifyOptions& options) {
  FaultScope fault(options.inject_fault);
  std::vector<CheckResult> all;
  for (auto&& group : {verify_gradients(options.seed), verify_oracles(options.seed),
                       verify_preprocessing(options.seed), verify_parameter_counts()}) {
    all.insert(all.end(), group.begin(), group.end());
  }
  return all;
}

std::string format_verify_table(const std::vector<CheckResult>& results) {
  std::string out;
  char buf[512];
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.passed) ++failed;
    std::snprintf(buf, sizeof buf, "%-4s %-32s %12.3e < %-9.1e %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.value, r.tolerance, r.detail.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%zu/%zu checks passed\n", results.size() - failed, results.size());
  out += buf;
  return out;
}

}  // namespace vihsd
