#include "vihsd/rng.hpp"

#include <limits>

#include "vihsd/error.hpp"

namespace vihsd {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) fail(ErrorKind::Contract, "Rng::below(0)");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::size_t>(x % bound);
}

}  // namespace vihsd
