#pragma once

#include "specflow/birkhoff.hpp"

namespace specflow::flow {

/// State of the special flow: base point (x, y) and fiber height s with
/// 0 <= s < phi(x, y).
struct FlowPoint {
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
};

// The unique m with S_m phi(z) <= s + t < S_m phi(z) + phi(T^m z), found by
// bracketed binary search over the fast Birkhoff path (S_m is strictly
// increasing since phi >= min_value > 0). Negative t resolves the same
// bracket with negative m.
long long time_index(const birkhoff::SumKernel& kernel, const FlowPoint& p, double t);

// T^t(z, s) = (T^m z, s + t - S_m phi(z)); base coordinates reduced mod 1.
FlowPoint flow_map(const birkhoff::SumKernel& kernel, const FlowPoint& p, double t);

}  // namespace specflow::flow
