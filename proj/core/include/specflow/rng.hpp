#pragma once

#include <cstdint>

namespace specflow {

/// Counter-based stream: every (seed, stream, index) triple yields the same
/// variates regardless of evaluation order, so parallel and serial Monte
/// Carlo runs agree bit for bit.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

  std::uint64_t next_u64();
  // Uniform in [0,1), 53 random bits.
  double next_double();

  static double uniform(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index, unsigned draw);

 private:
  std::uint64_t state_;
};

}  // namespace specflow
