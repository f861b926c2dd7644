#include "specflow/flow.hpp"

#include <cmath>

namespace specflow::flow {

namespace {

constexpr double kBoundaryTol = 1e-12;

birkhoff::SumKernel::Floor locate(const birkhoff::SumKernel& kernel, const FlowPoint& p,
                                  double t) {
  const double target = p.s + t;
  if (std::abs(target) / kernel.min_value() >
      static_cast<double>(kernel.policy().max_iterate)) {
    throw PrecisionError("time_index: t exceeds the certified iterate range");
  }
  auto floor = kernel.locate_floor({p.x, p.y}, target);
  // Boundary tie: identify (z, phi(z)) with (Tz, 0) by advancing m.
  if (target - floor.s_m >= floor.phi_at_m - kBoundaryTol) {
    floor.s_m += floor.phi_at_m;
    floor.m += 1;
    floor.phi_at_m = kernel.eval_phi(kernel.translate({p.x, p.y}, floor.m));
  }
  return floor;
}

}  // namespace

long long time_index(const birkhoff::SumKernel& kernel, const FlowPoint& p, double t) {
  return locate(kernel, p, t).m;
}

FlowPoint flow_map(const birkhoff::SumKernel& kernel, const FlowPoint& p, double t) {
  const auto floor = locate(kernel, p, t);
  const birkhoff::Point zm = kernel.translate({p.x, p.y}, floor.m);
  double s = p.s + t - floor.s_m;
  if (s < 0.0) s = 0.0;
  return {zm.x, zm.y, s};
}

}  // namespace specflow::flow
