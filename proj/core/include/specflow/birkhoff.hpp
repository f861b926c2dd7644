#pragma once

#include <complex>
#include <vector>

#include "specflow/arith.hpp"
#include "specflow/ceiling.hpp"

namespace specflow::birkhoff {

/// Per-frequency cache: S_m chi_{l,j} = U_{l,j,m} chi_{l,j}(z) with the
/// geometric ratio U; |S_m chi| <= min(m, 1/(2 |||l a + j a'|||)).
struct CharacterSum {
  std::int32_t l = 0;
  std::int32_t j = 0;
  std::complex<double> c;      // ceiling coefficient (canonical half)
  arith::Dd omega;             // {l alpha + j alpha'} as double-double
  double omega_signed = 0.0;   // signed reduced phase in (-1/2, 1/2]
  double dist = 0.0;           // |||l alpha + j alpha'|||
  bool resonant = false;       // dist below the 2^{-bits/2} threshold
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Immutable evaluation kernel for the assembled ceiling: pointwise phi,
/// Birkhoff sums S_m phi and their derivatives, both the O(m) compensated
/// oracle and the O(#frequencies) geometric-sum fast path.
class SumKernel {
 public:
  explicit SumKernel(const ceiling::CeilingSpec& spec);

  double phi0() const { return phi0_; }
  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }
  const std::vector<CharacterSum>& frequencies() const { return freqs_; }
  const arith::PrecisionPolicy& policy() const { return policy_; }

  double eval_phi(Point z) const;
  Point translate(Point z, long long m) const;  // z + m (alpha, alpha') mod 1

  // D_x^ox D_y^oy S_m phi(z), closed form per frequency. m may be negative
  // (S_{-k} = -sum over the pulled-back orbit).
  double birkhoff_fast(Point z, long long m, int ox = 0, int oy = 0) const;

  // Compensated O(|m|) summation along the orbit; the oracle path.
  double birkhoff_naive(Point z, long long m) const;

  // min(m, 1/(2 |||l alpha + j alpha'|||)), distance computed exactly.
  double character_bound(std::int64_t l, std::int64_t j, long long m) const;

  // |S_m phi - m| <= sum over frequencies of |c| min(m, 1/(2|||omega|||)).
  double mean_deviation_bound(long long m) const;
  // O(1) overestimate of the above from cached aggregates.
  double bracket_bound(long long m) const;

  // Streams S_m phi(z_i) for m = 1..m_max over a fixed point set using
  // incremental rotations (no trig in the inner loop); visit(m, sums) is
  // called for every m with sums[i] = S_m phi(z_i).
  void sweep_sums(const std::vector<Point>& zs, long long m_max,
                  const std::function<void(long long, const std::vector<double>&)>& visit) const;

  // D_x^ox S_m phi(x0 + k dx, y) for k = 0..count-1, incremental in x.
  std::vector<double> sample_line(double y, long long m, double x0, double dx, int count,
                                  int ox = 0) const;

  // Certified bracket [lo, hi] around phi(z) from the coarse sub-table; one
  // full evaluation is only needed inside the band.
  std::pair<double, double> eval_phi_bounds(Point z) const;

  struct Floor {
    long long m = 0;       // the unique m with S_m <= target < S_{m+1}
    double s_m = 0.0;      // S_m phi(z)
    double phi_at_m = 0.0; // phi(T^m z)
  };
  // Locates the floor of `target` in the S_m ladder by an anchored walk with
  // incremental phases (O(F) once plus O(F) per unit of |S_{m0} - target|).
  Floor locate_floor(Point z, double target) const;

  std::complex<double> geometric_ratio(const CharacterSum& f, long long m) const;

 private:
  std::vector<CharacterSum> freqs_;
  double phi0_ = 1.0;
  double min_value_ = 1.0;
  double max_value_ = 1.0;
  double coeff_l1_ = 0.0;       // sum 2|c|
  double coeff_capsum_ = 0.0;   // sum 2|c| min(max_iterate, 1/(2 dist))
  std::vector<std::uint32_t> coarse_;  // indices of the dominant coefficients
  double coarse_residual_ = 0.0;       // sum 2|c| over the rest
  std::vector<std::uint32_t> drift_;   // top |c| min(cap, m_max) terms, for anchoring
  arith::PrecisionPolicy policy_;
  arith::Dd alpha_;
  arith::Dd alpha_prime_;
  mpq_class alpha_exact_;
  mpq_class alpha_prime_exact_;
};

}  // namespace specflow::birkhoff
