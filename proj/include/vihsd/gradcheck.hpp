#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "vihsd/tensor.hpp"

namespace vihsd {

/// Compares the reverse-mode gradient of `f` with respect to `theta` against
/// central differences (f(θ+h·e) − f(θ−h·e)) / 2h. `f` must read `theta`
/// (typically by capture) and return a scalar.
///
/// Returns max |a − n| / max(|a|, |n|, 1e−8) over the probed coordinates
/// (`coords`, or every coordinate when empty). `theta` is restored on return.
/// Throws `ErrorKind::OracleMisuse` when two baseline evaluations differ.
double finite_diff_check(const std::function<TensorD()>& f, TensorD theta, double h,
                         std::span<const std::size_t> coords = {});

double relative_error(double analytic, double numeric);

}  // namespace vihsd
