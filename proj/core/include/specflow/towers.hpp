#pragma once

#include <gmpxx.h>

#include <vector>

#include "specflow/birkhoff.hpp"
#include "specflow/flow.hpp"
#include "specflow/pairgen.hpp"

namespace specflow::towers {

/// Interval on the circle: anchored at lo (mod 1), width in (0, 1]. All
/// arithmetic exact.
struct CircleInterval {
  mpq_class lo;
  mpq_class width;
};

// Exact overlap length of two circle intervals.
mpq_class overlap_length(const CircleInterval& a, const CircleInterval& b);
// Exact containment (up to endpoints): inner subset of outer.
bool interval_contains(const CircleInterval& outer, const CircleInterval& inner);

/// Axis-aligned rectangle on T^2 (may wrap in either axis).
struct Rect {
  CircleInterval x, y;

  mpq_class area() const { return x.width * y.width; }
  mpq_class intersection_area(const Rect& other) const;
  bool contains(const Rect& other) const;
  Rect translated(const mpq_class& dx, const mpq_class& dy) const;

  double x0() const { return x.lo.get_d(); }
  double y0() const { return y.lo.get_d(); }
  double xw() const { return x.width.get_d(); }
  double yw() const { return y.width.get_d(); }
};

/// Level-n tower data: base B^0, height h_n, r_n and the beta shifts.
struct TowerSpec {
  int n = 0;
  long long r_n = 0;
  long long h_n = 0;
  Rect base;
  mpq_class beta_unit;  // beta_{n,j} = j * beta_unit = j/(q'_{n-1} q'_n)

  mpq_class beta(long long j) const { return mpz_class(static_cast<long>(j)) * beta_unit; }
};

/// Exact rectangle families of one level, rectangles generated on demand.
class TowerGeometry {
 public:
  TowerGeometry(const pairgen::YPair& pair, int level_k);

  const TowerSpec& spec() const { return spec_; }
  const pairgen::LevelSchedule& schedule() const { return sched_; }
  long long rect_count() const { return qa_; }  // q_n q'_{n-1}

  Rect R(long long j) const;     // Def 3.4 rectangles
  Rect Rbar(long long j) const;  // Def 3.8, alpha-translates of Rbar^0
  Rect D(long long j, long long i) const;  // Def 3.5 blocks inside R^j
  Rect level_rect(long long h) const;      // B^h, image of the base

  const mpq_class& alpha() const { return alpha_; }
  const mpq_class& alpha_prime() const { return alpha_prime_; }

 private:
  pairgen::LevelSchedule sched_;
  TowerSpec spec_;
  long long qa_ = 0;
  mpq_class alpha_, alpha_prime_;
  mpq_class inv_q_, inv_a_, inv_b_q_;  // 1/q, 1/a, q/b
};

TowerGeometry tower_geometry(const pairgen::YPair& pair, int level_k);

struct DefectReport {
  double defect = 0.0;           // grid estimate from below of the sup
  double upper_bracket = 0.0;    // defect + first-order Lipschitz margin
  long long m_at = 0;            // maximizing m
  long long m_max = 0;           // covered range (min(h_n, cap))
  bool truncated_range = false;  // true when m_max < h_n
  bool separating_height_exists = false;  // sup S_{h-1} < inf S_h over the grid
};

// sup over m <= min(h_n, m_cap) of the spread of S_m phi over a grid x grid
// sample of B^0 (corners included), via the incremental fast path.
DefectReport rank_one_defect(const birkhoff::SumKernel& kernel, const TowerGeometry& tower,
                             int grid = 8, long long m_cap = 1'000'000);

struct MonoReport {
  std::vector<double> level_fractions;  // largest single-atom fraction per level
  double epsilon_star = 1.0;            // smallest eps making the tower eps-monochromatic
};

// Exact per-level monochromaticity of the base tower against a partition of
// T^2 into disjoint rectangles. level_stride > 1 samples every stride-th level.
MonoReport monochromaticity_base(const TowerGeometry& tower, const std::vector<Rect>& partition,
                                 long long level_stride = 1);

struct MBox {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1, s0 = 0, s1 = 1;
  bool contains(const flow::FlowPoint& p) const {
    return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1 && p.s >= s0 && p.s < s1;
  }
};

struct MonoFlowReport {
  double fraction = 0.0;  // largest single-atom fraction of the horizontal level
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo monochromaticity of the flow horizontal level T^t(B^0 x {0})
// against a partition of M into disjoint boxes.
MonoFlowReport monochromaticity_flow(const birkhoff::SumKernel& kernel,
                                     const TowerGeometry& tower,
                                     const std::vector<MBox>& partition, double t,
                                     std::size_t samples, std::uint64_t seed);

// Deterministic k x k interior sample points of a rectangle.
std::vector<birkhoff::Point> interior_points(const Rect& rect, int k);

struct TilingReport {
  bool disjoint = false;
  mpq_class total_area;
  bool full_measure = false;  // total area exactly 1
};

// Exact pairwise disjointness and total measure of the R^j family, bucketed
// by x-interval so the check is O(q a^2) rather than all-pairs.
TilingReport exact_tiling_check(const TowerGeometry& tower);

}  // namespace specflow::towers
