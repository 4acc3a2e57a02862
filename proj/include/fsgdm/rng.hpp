#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace fsgdm {

// Seeded generator with a fully specified output stream: std::mt19937_64
// (bit-exact across standard libraries), 53-bit uniform doubles, unbiased
// bounded integers by rejection, and Box-Muller normals emitted in pairs.
// std::normal_distribution and std::shuffle are avoided because their
// outputs are implementation-defined.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/uniform53/box-muller/splitmix64-streams";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Seed for an independent stream keyed by (seed, stream), via splitmix64.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  // Uniform on [0, 1).
  double uniform();

  // Uniform integer on [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  double normal();

  // In-place Fisher-Yates shuffle.
  void shuffle(std::vector<std::size_t>& items);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fsgdm
