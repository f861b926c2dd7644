#include "specflow/rng.hpp"

namespace specflow {
namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t k = splitmix64(seed ^ 0xA0761D6478BD642Full);
  k = splitmix64(k ^ stream);
  state_ = splitmix64(k ^ (index * 0x8BB84B93962EACC9ull));
}

std::uint64_t Rng::next_u64() {
  state_ = splitmix64(state_);
  return state_;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t index, unsigned draw) {
  Rng r(seed, stream, index);
  double v = 0.0;
  for (unsigned i = 0; i <= draw; ++i) v = r.next_double();
  return v;
}

}  // namespace specflow
