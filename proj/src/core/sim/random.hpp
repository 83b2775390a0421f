#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

namespace unity::sim {

// Seeded family of independent named sub-streams. Each sub-stream is an
// mt19937_64 (bit-exact across standard libraries); draws on one sub-stream
// never perturb another.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& stream(const std::string& name);

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased and
  // independent of the standard library's distribution implementations.
  std::uint64_t uniform_index(const std::string& name, std::uint64_t n);
  // Uniform double in [0, 1) with 53 bits of mantissa.
  double uniform01(const std::string& name);
  double exponential(const std::string& name, double mean);

 private:
  std::uint64_t seed_;
  std::map<std::string, std::mt19937_64> streams_;
};

}  // namespace unity::sim
