#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "specflow/birkhoff.hpp"
#include "specflow/ceiling.hpp"
#include "specflow/towers.hpp"

namespace specflow::analysis {

/// Definition-side uniform-stretch measurement of a sampled function.
struct StretchReport {
  double a = 0.0, b = 0.0;
  double K = 0.0;        // sup g - inf g
  double epsilon = 0.0;  // worst multiplicative window distortion
  double endpoint_span = 0.0;  // |g(b) - g(a)|
};

// Measures (epsilon, K) of g on [a,b]: K = sup-inf, epsilon = worst relative
// deviation of lambda(I_{u,v}) from (v-u)(b-a)/|g(b)-g(a)| over a grid of
// windows. Piecewise-linear interpolation with one refinement pass near
// crossings. Throws DegenerateError when g is constant.
StretchReport measure_stretch(const std::function<double(double)>& g, double a, double b,
                              int windows = 12, int samples = 1025);

struct CriterionResult {
  double epsilon = 0.0;
  double K = 0.0;
};

// Lemma-style derivative criterion: K = inf|g'| (b-a), epsilon =
// sup|g''| (b-a) / inf|g'|; empty when inf|g'| = 0.
std::optional<CriterionResult> stretch_criterion(double inf_d1, double sup_d2, double length);

/// Partition of J_n = {x : {q x} in [1/n, 1/2-1/n] u [1/2+1/n, 1-1/n]} into
/// intervals of length within [L/2, L].
struct StepOnePartition {
  int n = 0;
  long long q = 0;
  double length = 0.0;  // the resolved L
  std::vector<std::pair<double, double>> intervals;
};

StepOnePartition step_one_partition(const ceiling::LevelGeometry& g, double target_length);

struct StretchScanOptions {
  double interval_length = 0.0;  // 0 = probe K_target / |D_x S_m|
  double k_target = 4.0;
  int max_intervals = 24;
  int y_samples = 2;
  std::optional<double> y_eta;  // restrict y per the part-of-space variant
  int deriv_grid = 33;
  int windows = 12;
  int measure_samples = 1025;
  double grid_tolerance = 0.02;
};

struct IntervalStretch {
  double a = 0.0, b = 0.0;
  double y = 0.0;
  long long m = 0;
  double inf_d1 = 0.0, sup_d2 = 0.0;
  std::optional<CriterionResult> criterion;
  StretchReport report;
  bool criterion_pass = false;   // criterion produced (eps, K) with K >= k_target
  bool definition_pass = false;  // measured against the criterion pair + tolerance
};

// For each partition interval and sampled y: m = m(midpoint, y, t), derivative
// bounds of S_m phi(., y) over the interval, then both criterion and
// definition reports.
std::vector<IntervalStretch> stretch_scan(const birkhoff::SumKernel& kernel,
                                          const ceiling::LevelGeometry& level, double t,
                                          const StretchScanOptions& opts);

struct StaircaseOptions {
  long long pair_cap = 0;  // max i2 - i1; 0 = r_n / 2
  long long m_cap = 0;     // 0 = [2 q'_n / n^2]
};

// |S_m phi(z2) - S_m phi(z1) - (i2 - i1) m eps_n| with the index constraints
// of the staircase lemma (desk caps configurable).
double staircase_deviation(const birkhoff::SumKernel& kernel, const ceiling::LevelGeometry& g,
                           long long m, long long i1, long long i2, long long j,
                           birkhoff::Point z1, birkhoff::Point z2,
                           const StaircaseOptions& opts = {});

struct CorrelationEstimate {
  double estimate = 0.0;  // mu(T^-t A cap B) - mu(A) mu(B)
  double stderr_ = 0.0;
  double mu_a = 0.0, mu_b = 0.0;
  std::size_t samples = 0;
};

// mu of a box under the normalized measure (exact product when the s-range
// sits below min phi, else midpoint quadrature on quad_grid^2 cells).
double box_measure(const birkhoff::SumKernel& kernel, const towers::MBox& box,
                   int quad_grid = 192);

// Monte-Carlo correlation at time t: points drawn from mu by rejection under
// the certified envelope, flowed by t; deterministic for a fixed seed.
CorrelationEstimate correlation(const birkhoff::SumKernel& kernel, const towers::MBox& A,
                                const towers::MBox& B, double t, std::size_t samples,
                                std::uint64_t seed);

/// Step-3 region split: y-bands in {q'_{n-1} y} for uniform-stretch and
/// staircase-stretch parts, plus the leftover measure. Band arithmetic exact.
struct RegionSplit {
  std::vector<towers::MBox> uniform_part;    // 1 - theta + eta <= {a y} <= 1 - eta
  std::vector<towers::MBox> staircase_part;  // {a y} <= 1 - theta - eta
  mpq_class uniform_measure;                 // y-circle measures
  mpq_class staircase_measure;
  mpq_class remainder_measure;
  double theta = 0.0;
};

RegionSplit region_split(const ceiling::LevelGeometry& g, double t, double eta);

// Schedule-derived candidate mixing windows [lo, hi] for one level; empty
// or inverted windows are reported as-is and skipped by sweeps.
struct TimeWindow {
  double lo = 0.0, hi = 0.0;
  const char* name = "";
  bool nonempty() const { return hi > lo && hi > 0; }
};
std::vector<TimeWindow> schedule_windows(const ceiling::LevelGeometry& g,
                                         const mpz_class* q_next);

}  // namespace specflow::analysis
