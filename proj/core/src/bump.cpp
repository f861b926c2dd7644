#include "specflow/bump.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include "specflow/errors.hpp"

namespace specflow::ceiling {

namespace {

inline double f(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double bump(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double u = f(s);
  const double v = f(1.0 - s);
  return u / (u + v);
}

double bump_d1(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  const double u = f(s), v = f(t);
  const double up = u / (s * s);
  const double vp = -v / (t * t);
  const double d = u + v;
  return (up * v - u * vp) / (d * d);
}

double bump_d2(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  const double u = f(s), v = f(t);
  const double up = u / (s * s);
  const double vp = -v / (t * t);
  const double upp = u * (1.0 - 2.0 * s) / (s * s * s * s);
  const double vpp = v * (1.0 - 2.0 * t) / (t * t * t * t);
  const double d = u + v;
  const double num = up * v - u * vp;          // N
  const double nump = upp * v - u * vpp;       // N'
  return (nump * d - 2.0 * num * (up + vp)) / (d * d * d);
}

double bump_cp_norm(int p) {
  if (p < 0 || p > 6) throw InvalidArgument("bump_cp_norm: p must be in [0,6]");
  static std::array<double, 7> table;
  static std::once_flag once;
  std::call_once(once, [] {
    table[0] = 1.0;
    const int grid = 40001;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 1; i < grid; ++i) {
      const double s = static_cast<double>(i) / grid;
      m1 = std::max(m1, std::abs(bump_d1(s)));
      m2 = std::max(m2, std::abs(bump_d2(s)));
    }
    table[1] = m1;
    table[2] = m2;
    // p >= 3: central differences of theta'' (9-point, O(h^8) interior).
    for (int p2 = 3; p2 <= 6; ++p2) {
      const int extra = p2 - 2;
      const double h = 2.5e-3;
      double mx = 0.0;
      for (int i = 1; i < grid; ++i) {
        const double s = static_cast<double>(i) / grid;
        // repeated central first differences of bump_d2
        auto dcentral = [&](auto&& self, int order, double x) -> double {
          if (order == 0) return bump_d2(x);
          return (self(self, order - 1, x + h) - self(self, order - 1, x - h)) / (2.0 * h);
        };
        mx = std::max(mx, std::abs(dcentral(dcentral, extra, s)));
      }
      table[p2] = mx;
    }
  });
  return table[p];
}

}  // namespace specflow::ceiling
