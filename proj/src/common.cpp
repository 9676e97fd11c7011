#include "sragan/common.hpp"

#include <sstream>

namespace sragan {

uint64_t derive_seed(uint64_t master, uint64_t stream) {
  // splitmix64 over the combined value; avalanche keeps streams independent.
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

size_t uniform_index(std::mt19937_64& rng, size_t n) {
  require_arg(n > 0, "uniform_index: n must be positive");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return static_cast<size_t>(draw % n);
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_string(const std::string& text) {
  std::mt19937_64 rng;
  std::istringstream is(text);
  is >> rng;
  if (is.fail()) throw ArgumentError("rng_from_string: malformed engine state");
  return rng;
}

}  // namespace sragan
