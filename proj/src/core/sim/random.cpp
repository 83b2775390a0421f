#include "sim/random.hpp"

#include <cmath>

#include "common/hash.hpp"

namespace unity::sim {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::mt19937_64& RandomStream::stream(const std::string& name) {
  auto it = streams_.find(name);
  if (it == streams_.end()) {
    it = streams_.emplace(name, std::mt19937_64{splitmix64(seed_ ^ fnv1a64(name))}).first;
  }
  return it->second;
}

std::uint64_t RandomStream::uniform_index(const std::string& name, std::uint64_t n) {
  if (n <= 1) return 0;
  auto& eng = stream(name);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

double RandomStream::uniform01(const std::string& name) {
  return static_cast<double>(stream(name)() >> 11) * 0x1.0p-53;
}

double RandomStream::exponential(const std::string& name, double mean) {
  return -mean * std::log1p(-uniform01(name));
}

}  // namespace unity::sim
