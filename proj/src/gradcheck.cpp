#include "vihsd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vihsd/autograd.hpp"
#include "vihsd/error.hpp"

namespace vihsd {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

double finite_diff_check(const std::function<TensorD()>& f, TensorD theta, double h,
                         std::span<const std::size_t> coords) {
  if (!(h > 0)) fail(ErrorKind::Contract, "finite_diff_check: step must be positive");

  double first = 0, second = 0;
  {
    NoGradGuard no_grad;
    first = f().item();
    second = f().item();
  }
  if (first != second) {
    fail(ErrorKind::OracleMisuse,
         "finite_diff_check: function is not deterministic (is dropout enabled?)");
  }

  theta.zero_grad();
  const bool had_flag = theta.requires_grad();
  theta.set_requires_grad(true);
  {
    auto loss = f();
    if (loss.requires_grad()) backward(loss);
  }
  const std::vector<double> analytic = theta.grad_or_zeros();
  theta.zero_grad();
  theta.set_requires_grad(had_flag);

  std::vector<std::size_t> all;
  if (coords.empty()) {
    all.resize(theta.numel());
    std::iota(all.begin(), all.end(), std::size_t{0});
    coords = all;
  }

  NoGradGuard no_grad;
  auto values = theta.data();
  double worst = 0;
  for (std::size_t i : coords) {
    if (i >= values.size()) fail(ErrorKind::Contract, "finite_diff_check: coordinate out of range");
    const double saved = values[i];
    values[i] = saved + h;
    const double plus = f().item();
    values[i] = saved - h;
    const double minus = f().item();
    values[i] = saved;
    const double numeric = (plus - minus) / (2 * h);
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

}  // namespace vihsd
