#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vihsd {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error (or mismatch count)
  double tolerance = 0.0;  // pass iff value < tolerance
  std::string detail;
};

/// Finite-difference checks (double precision, h = 1e-3, at most 32
/// coordinates per parameter) for every layer and for the miniature
/// end-to-end models. Pass iff max relative error < 1e-4.
std::vector<CheckResult> verify_gradients(std::uint64_t seed = 1234);

/// conv1d and global max-pool against brute-force loops over `shapes`
/// random shapes with every extent in [1, 5]. Pass iff max abs error < 1e-6.
std::vector<CheckResult> verify_oracles(std::uint64_t seed = 1234, int shapes = 100);

/// Normalization goldens plus idempotence over `samples` random strings.
std::vector<CheckResult> verify_preprocessing(std::uint64_t seed = 1234, int samples = 1000);

/// Closed-form parameter counts of the recurrent stages.
std::vector<CheckResult> verify_parameter_counts();

struct VerifyOptions {
  std::uint64_t seed = 1234;
  std::string inject_fault;  // layer name to sabotage; empty for none
};

/// Every group above, in order.
std::vector<CheckResult> run_verify_suite(const VerifyOptions& options = {});

/// One line per check plus a summary line.
std::string format_verify_table(const std::vector<CheckResult>& results);

}  // namespace vihsd
