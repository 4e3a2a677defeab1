#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gi {

// Seeded source whose draws are identical on every platform: the engine is
// fully specified by the standard and uniform() does its own rejection
// sampling instead of relying on std::uniform_int_distribution.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n); n > 0.
  std::size_t uniform(std::size_t n);
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// splitmix64 of (master, index); independent child seeds for per-patch draws.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// A fresh seed from the OS, for runs started without one.
std::uint64_t entropy_seed();

}  // namespace gi
