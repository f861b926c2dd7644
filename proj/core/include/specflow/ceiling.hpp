#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specflow/arith.hpp"
#include "specflow/pairgen.hpp"
#include "specflow/trigpoly.hpp"

namespace specflow::ceiling {

/// Machine-scale view of one built level, with everything the bump/staircase
/// construction needs. q = q_n, a = q'_{n-1}, b = q'_n.
struct LevelGeometry {
  int k = 0;  // 1-based level number within the pair
  int n = 0;  // formula index (bump steepness, 1/n windows)
  long long q = 0, a = 0, b = 0;
  long long p = 0, p_prime_prev = 0, p_prime = 0;
  double eps = 0.0;         // staircase step: scale * a^7 / b
  long long r = 0;          // [b/(q a)] - 1
  long long h = 0;          // [(1-2/n) r] q a
  double q_over_b = 0.0;    // q/b
  double inv_a = 0.0;       // 1/a
  double beta_unit = 0.0;   // 1/(a b)

  double beta(long long j) const { return static_cast<double>(j) * beta_unit; }
  // Largest i for which the staircase value i*eps is exact on D-blocks
  // (the topmost block may clip the right window at desk scale).
  long long exact_plateau_max_i() const;
};

// The scalar building blocks of section-7/8 style constructions. All pure.
double eval_kappa(const LevelGeometry& g, double y);
double eval_nu(const LevelGeometry& g, double x);
double eval_upsilon(const LevelGeometry& g, double y);
// nu(x) * upsilon(y), both torus-periodized: 1 on Rbar^0, 0 on the other Rbar^j.
double eval_window(const LevelGeometry& g, double x, double y);
double eval_xtilde(const LevelGeometry& g, double x, double y);
double eval_phitilde(const LevelGeometry& g, double y);
double eval_ytilde(const LevelGeometry& g, double x, double y);
// D_x^rx D_y^py of the untruncated Ytilde (py <= 2).
double eval_ytilde_deriv(const LevelGeometry& g, double x, double y, int rx, int py);

struct TruncateOptions {
  int grid_exponent = 16;          // 1-D sampling resolution 2^g
  long long radius = 0;            // disk radius; 0 = min((q'_n)^2, 2^(g-2))
  double rel_threshold = 1e-5;     // drop |c| below this fraction of the level mass

  // Resonance-aware keep rule: a sub-threshold coefficient is retained when
  // |c| min(weight_cap, 1/(2 |||l alpha + j alpha'|||)) clears this fraction
  // of the level mass, so character sums of near-resonant lines stay faithful.
  double weighted_rel_threshold = 1e-3;
  double weight_cap = 1e5;
  bool has_pair = false;           // set when the dd phases below are valid
  arith::Dd alpha;
  arith::Dd alpha_prime;
};

// Fourier truncation of Xtilde_n: keeps l^2 + j^2 <= radius^2 minus the
// excluded set (l,j) in (Z q_n, Z* q'_n). Coefficients are the 2-D Fourier
// integrals evaluated by per-residue column transforms on 2^g-point grids.
TrigPolynomial truncate_x(const LevelGeometry& g, const TruncateOptions& opts);

// Truncation diagnostics for one level at one radius.
struct TruncationReport {
  long long radius = 0;
  std::size_t kept_terms = 0;
  double sup_error = 0.0;        // measured sup |X_n - Xtilde_n| on a fresh grid
  double dropped_mass = 0.0;     // sum |c| over computed-but-dropped terms
  double aliasing_heuristic = 0.0;
};

// Measures sup |X - Xtilde| on a fresh odd-sized grid (the spec's
// authoritative truncation-quality figure).
double truncation_sup_error(const LevelGeometry& g, const TrigPolynomial& X,
                            int fresh_grid = 97);

// Y_n = -cos(2 pi q_n x)/e^{q_n} * phi_n(y), phi_n the |j| < q'_n Fourier
// truncation of phitilde_n (support on multiples of q'_{n-1}).
TrigPolynomial truncate_y(const LevelGeometry& g, int grid_exponent = 14,
                          double rel_threshold = 1e-14);

struct LevelFunctions {
  LevelGeometry geom;
  TrigPolynomial X;
  TrigPolynomial Y;
  long long x_radius = 0;
  std::size_t x_terms = 0, y_terms = 0;
};

struct AssembleOptions {
  double staircase_scale = 0.0;    // 0 = auto: sum_n r_n eps_n = target_mass
  double target_mass = 0.4;
  int grid_exponent = 17;
  std::vector<long long> radius;   // per-level override, 0 entries = default
  double rel_threshold = 1e-5;
  double weighted_rel_threshold = 1e-3;
  double weight_cap = 1e5;
  int level_cap = -1;              // use at most this many levels (-1 = all)
  int positivity_grid_exponent = 11;
  arith::PrecisionPolicy policy;
};

/// The assembled ceiling: phi = phi0 + sum over used levels of (X_n + Y_n),
/// mean exactly one, certified strictly positive. Immutable.
class CeilingSpec {
 public:
  static CeilingSpec assemble(const pairgen::GrowthLaw& law,
                              const pairgen::YPair& pair, AssembleOptions opts);

  const pairgen::YPair& pair() const { return pair_; }
  const std::vector<LevelFunctions>& levels() const { return levels_; }
  const LevelFunctions& level(int k) const;  // 1-based level number
  double phi0() const { return phi0_; }
  int n0() const { return n0_; }
  double staircase_scale() const { return staircase_scale_; }
  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }
  const AssembleOptions& options() const { return opts_; }

  // Truncated ceiling value/derivative at a point.
  double eval(double x, double y) const;
  double eval_deriv(double x, double y, int dx, int dy) const;
  // Untruncated reference: phi0 + sum (Xtilde_n + Ytilde_n).
  double eval_untruncated(double x, double y) const;

  std::string serialize() const;

 private:
  pairgen::YPair pair_;
  AssembleOptions opts_;
  std::vector<LevelFunctions> levels_;
  double phi0_ = 1.0;
  int n0_ = 0;
  double staircase_scale_ = 0.0;
  double min_value_ = 1.0;
  double max_value_ = 1.0;
};

// LevelGeometry from a schedule entry (throws InfeasibleScale when the level
// does not fit machine integers).
LevelGeometry level_geometry(const pairgen::LevelSchedule& s, double eps);

}  // namespace specflow::ceiling
