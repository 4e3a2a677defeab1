#include "gi/random.hpp"

#include <limits>
#include <stdexcept>

namespace gi {

std::size_t RandomSource::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform(0)");
  const std::uint64_t range = n;
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % range + 1) % range;  // accept x <= limit
  std::uint64_t x;
  do {
    x = next();
  } while (x > limit);
  return static_cast<std::size_t>(x % range);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace gi
