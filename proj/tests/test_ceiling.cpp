#include <doctest.h>

#include <cmath>
#include <complex>

#include "specflow/bump.hpp"
#include "specflow/ceiling.hpp"
#include "specflow/rng.hpp"
#include "specflow/towers.hpp"
#include "testutil.hpp"

#ifdef SPECFLOW_HAVE_FFTW3
#include <fftw3.h>
#endif

using namespace specflow;
using namespace specflow::ceiling;

namespace {

const LevelGeometry& mini_geom() {
  static LevelGeometry g = testutil::mini_spec().levels().front().geom;
  return g;
}

// Brute-force Xtilde: the full sum over every j, no modular shortcuts.
double xtilde_brute(const LevelGeometry& g, double x, double y) {
  double acc = 0.0;
  for (long long j = 0; j < g.q * g.a; ++j) {
    const long long xo = (j * g.p) % g.q;
    const long long yo = (j * g.p_prime_prev) % g.a;
    const double nu = eval_nu(g, x - static_cast<double>(xo) / g.q);
    if (nu == 0.0) continue;
    const double ups = eval_upsilon(g, y - static_cast<double>(yo) / g.a);
    if (ups == 0.0) continue;
    acc += eval_kappa(g, y - g.beta(j)) * nu * ups;
  }
  return acc;
}

}  // namespace

TEST_CASE("bump plateaus, symmetry and monotonicity") {
  CHECK(bump(-1.0) == 0.0);
  CHECK(bump(0.0) == 0.0);
  CHECK(bump(1.0) == 1.0);
  CHECK(bump(2.0) == 1.0);
  // f(s)/(f(s)+f(1-s)) is symmetric about 1/2
  CHECK(bump(0.5) == doctest::Approx(0.5).epsilon(1e-14));
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double v = bump(i / 100.0);
    CHECK(v >= prev);
    prev = v;
  }
  // derivatives against central differences
  for (double s : {0.2, 0.35, 0.5, 0.71, 0.9}) {
    const double h = 1e-6;
    const double fd1 = (bump(s + h) - bump(s - h)) / (2 * h);
    CHECK(bump_d1(s) == doctest::Approx(fd1).epsilon(1e-6));
    const double fd2 = (bump_d1(s + h) - bump_d1(s - h)) / (2 * h);
    CHECK(bump_d2(s) == doctest::Approx(fd2).epsilon(1e-5));
  }
  CHECK(bump_cp_norm(0) == 1.0);
  CHECK(bump_cp_norm(1) > 1.0);
}

TEST_CASE("kappa: zero ranges and exact plateaus") {
  const LevelGeometry& g = mini_geom();
  // y in [0, q/b]: every theta argument <= 0
  for (double y : {0.0, 0.3 * g.q_over_b, 0.9 * g.q_over_b}) {
    CHECK(eval_kappa(g, y) == 0.0);
  }
  // y >= (1-1/n)/a: the right factor vanishes
  for (double frac : {1.0 - 1.0 / g.n, 1.0 - 0.5 / g.n, 0.999}) {
    CHECK(eval_kappa(g, frac / g.a) == 0.0);
  }
  // i-th plateau of the staircase: exactly i * eps
  const long long i_max = g.exact_plateau_max_i();
  CHECK(i_max >= 1);
  for (long long i = 0; i <= i_max; ++i) {
    const double lo = i * g.q_over_b + g.q_over_b / (g.n * g.n);
    const double hi = (i + 1) * g.q_over_b - g.q_over_b / (g.n * g.n);
    for (double t : {0.0, 0.5, 1.0}) {
      const double y = lo + (hi - lo) * t;
      CHECK(eval_kappa(g, y) == doctest::Approx(i * g.eps).epsilon(1e-13));
    }
  }
  // global bound 0 <= kappa <= r eps
  for (int i = 0; i < 2000; ++i) {
    const double v = eval_kappa(g, i / 2000.0);
    CHECK(v >= 0.0);
    CHECK(v <= g.r * g.eps * (1 + 1e-12));
  }
}

TEST_CASE("window: 1 on Rbar^0, 0 on the other Rbar^j and at x = 0") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    const LevelGeometry& g = lf.geom;
    const towers::TowerGeometry tower(exp.pair, g.k);
    const auto r0 = tower.Rbar(0);
    CHECK(eval_window(g, r0.x0() + 0.5 * r0.xw(), r0.y0() + 0.5 * r0.yw()) == 1.0);
    CHECK(eval_window(g, 0.0, r0.y0() + 0.5 * r0.yw()) == 0.0);
    for (long long j : {1LL, 2LL, tower.rect_count() - 1}) {
      const auto rj = tower.Rbar(j);
      CHECK(eval_window(g, rj.x0() + 0.5 * rj.xw(), rj.y0() + 0.5 * rj.yw()) == 0.0);
    }
  }
}

TEST_CASE("Xtilde fast evaluation equals the brute-force sum") {
  const auto& exp = testutil::desk_experiment();
  Rng rng(23, 9, 0);
  for (const auto& lf : exp.spec.levels()) {
    const LevelGeometry& g = lf.geom;
    for (int it = 0; it < 300; ++it) {
      const double x = rng.next_double();
      const double y = rng.next_double();
      const double fast = eval_xtilde(g, x, y);
      const double brute = xtilde_brute(g, x, y);
      CHECK(fast == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("Xtilde is exactly i*eps on the tower levels B^{j+i q a}") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    const LevelGeometry& g = lf.geom;
    const towers::TowerGeometry tower(exp.pair, g.k);
    const long long plateau_i = (g.n - 2) * g.r / g.n;
    REQUIRE(g.exact_plateau_max_i() >= plateau_i);
    int sampled = 0;
    for (long long i = 0; i <= plateau_i; ++i) {
      for (long long j : {0LL, 1LL, g.q * g.a / 2, g.q * g.a - 1}) {
        const long long h = j + i * g.q * g.a;
        if (h > tower.spec().h_n) continue;
        for (const auto& z : towers::interior_points(tower.level_rect(h), 3)) {
          const double v = eval_xtilde(g, z.x, z.y);
          const double want = static_cast<double>(i) * g.eps;
          if (i == 0) {
            CHECK(std::abs(v) <= 1e-12 * g.eps);
          } else {
            CHECK(v == doctest::Approx(want).epsilon(1e-12));
          }
        }
        ++sampled;
      }
    }
    CHECK(sampled >= 6);
  }
}

TEST_CASE("Xtilde sup over a grid stays within r eps") {
  const LevelGeometry& g = mini_geom();
  double sup = 0.0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      sup = std::max(sup, eval_xtilde(g, (i + 0.5) / 64, (j + 0.5) / 64));
    }
  }
  CHECK(sup <= g.r * g.eps * (1 + 1e-12));
  CHECK(sup > 0.0);
}

TEST_CASE("phitilde ranges and Ytilde bounds") {
  const auto& exp = testutil::desk_experiment();
  const LevelGeometry& g = exp.spec.levels()[0].geom;
  const double n = g.n;
  // zero on [0, (1-1/n)/a] and the trailing 1/n^3 sliver
  for (double w : {0.0, 0.3, 1.0 - 1.0 / n, 1.0 - 0.5 / (n * n * n)}) {
    CHECK(eval_phitilde(g, w / g.a) == 0.0);
  }
  // plateau of eq-style range: 1 on [(1-1/n+1/n^2)/a, (1-1/n^2)/a]
  for (double w : {1.0 - 1.0 / n + 1.0 / (n * n), 1.0 - 1.5 / (n * n), 1.0 - 1.0 / (n * n)}) {
    CHECK(eval_phitilde(g, w / g.a) == 1.0);
    // x = 0: Ytilde = -e^{-q} there
    CHECK(eval_ytilde(g, 0.0, w / g.a) ==
          doctest::Approx(-std::exp(-static_cast<double>(g.q))).epsilon(1e-13));
  }
  // |Ytilde| <= e^{-q} everywhere, and 0 <= phitilde <= 1
  for (int i = 0; i < 500; ++i) {
    const double x = (i * 17 % 500) / 500.0;
    const double y = i / 500.0;
    CHECK(std::abs(eval_ytilde(g, x, y)) <= std::exp(-static_cast<double>(g.q)) + 1e-15);
    const double p = eval_phitilde(g, y);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("Ytilde vanishes identically on every Rbar^j") {
  const auto& exp = testutil::desk_experiment();
  for (const auto& lf : exp.spec.levels()) {
    const LevelGeometry& g = lf.geom;
    const towers::TowerGeometry tower(exp.pair, g.k);
    for (long long j : {0LL, 1LL, tower.rect_count() / 2, tower.rect_count() - 1}) {
      const auto rj = tower.Rbar(j);
      for (const auto& z : towers::interior_points(rj, 4)) {
        CHECK(std::abs(eval_ytilde(g, z.x, z.y)) <= 1e-15);
      }
    }
  }
}

TEST_CASE("derivative norms of Ytilde match the closed form within 5%") {
  const auto& exp = testutil::desk_experiment();
  const LevelGeometry& g = exp.spec.levels()[0].geom;
  for (int r = 0; r <= 2; ++r) {
    for (int p = 0; p <= 2; ++p) {
      // sup over a fine grid concentrated where phitilde^(p) lives
      double sup = 0.0;
      for (int i = 0; i < 400; ++i) {
        const double x = i / 400.0;
        for (int j = 0; j < 4000; ++j) {
          const double y = (1.0 - 1.0 / g.n) / g.a +
                           (1.0 / g.n) / g.a * (j / 4000.0);
          sup = std::max(sup, std::abs(eval_ytilde_deriv(g, x, y, r, p)));
        }
      }
      const double formula = bump_cp_norm(p) * std::pow(2.0 * M_PI, r) *
                             std::pow(static_cast<double>(g.n), 3.0 * p) *
                             std::pow(static_cast<double>(g.a), p) *
                             std::pow(static_cast<double>(g.q), r) *
                             std::exp(-static_cast<double>(g.q));
      CHECK(sup == doctest::Approx(formula).epsilon(0.05));
    }
  }
}

TEST_CASE("truncate_x: excluded frequencies vanish, DC equals the grid mean") {
  const LevelGeometry& g = mini_geom();
  TruncateOptions opts;
  opts.grid_exponent = 13;
  opts.radius = 300;
  opts.rel_threshold = 1e-9;
  auto X = truncate_x(g, opts);
  CHECK(X.term_count() > 50);

  // (0, q'_n) is in the excluded set (l = 0 in Z q_n, j = q'_n in Z* q'_n)
  CHECK(std::abs(X.coefficient(0, static_cast<std::int32_t>(g.b))) == 0.0);
  CHECK(std::abs(X.coefficient(static_cast<std::int32_t>(g.q), static_cast<std::int32_t>(g.b))) == 0.0);

  // DC coefficient tracks the direct 2-D grid average (coarse anchor here;
  // the FFTW cross-check below pins the sharp agreement).
  double mean = 0.0;
  const int G = 512;
  for (int i = 0; i < G; ++i) {
    for (int j = 0; j < G; ++j) {
      mean += eval_xtilde(g, static_cast<double>(i) / G, static_cast<double>(j) / G);
    }
  }
  mean /= static_cast<double>(G) * G;
  CHECK(X.constant() == doctest::Approx(mean).epsilon(1e-4));
}

#ifdef SPECFLOW_HAVE_FFTW3
TEST_CASE("truncate_x coefficients agree with a literal 2-D FFTW transform") {
  const LevelGeometry& g = mini_geom();
  TruncateOptions opts;
  opts.grid_exponent = 14;
  opts.radius = 180;
  opts.rel_threshold = 1e-8;
  auto X = truncate_x(g, opts);

  const int G = 2048;
  std::vector<std::complex<double>> grid(static_cast<std::size_t>(G) * G);
  for (int i = 0; i < G; ++i) {
    for (int j = 0; j < G; ++j) {
      grid[static_cast<std::size_t>(i) * G + j] =
          eval_xtilde(g, static_cast<double>(i) / G, static_cast<double>(j) / G);
    }
  }
  fftw_plan plan = fftw_plan_dft_2d(
      G, G, reinterpret_cast<fftw_complex*>(grid.data()),
      reinterpret_cast<fftw_complex*>(grid.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  auto bin = [&](int l, int j) {
    const int li = ((l % G) + G) % G;
    const int ji = ((j % G) + G) % G;
    return grid[static_cast<std::size_t>(li) * G + ji] / (static_cast<double>(G) * G);
  };
  double worst = 0.0;
  for (const auto& t : X.terms()) {
    worst = std::max(worst, std::abs(t.c - bin(t.l, t.j)));
  }
  CHECK(worst < 5e-9);
  CHECK(std::abs(X.constant() - bin(0, 0).real()) < 5e-9);
}
#endif

TEST_CASE("doubling the truncation radius shrinks the sup error by >= 2") {
  const LevelGeometry& g = mini_geom();
  TruncateOptions o1;
  o1.grid_exponent = 13;
  o1.radius = 40;
  o1.rel_threshold = 1e-12;
  TruncateOptions o2 = o1;
  o2.radius = 80;
  const double e1 = truncation_sup_error(g, truncate_x(g, o1), 97);
  const double e2 = truncation_sup_error(g, truncate_x(g, o2), 97);
  CHECK(e2 > 0.0);
  CHECK(e1 / e2 >= 2.0);
}

TEST_CASE("truncate_y: support structure and DC coefficient") {
  const LevelGeometry& g = mini_geom();
  auto Y = truncate_y(g, 14);
  CHECK(Y.term_count() > 0);
  // only l = +-q_n appears
  for (const auto& t : Y.terms()) CHECK(std::abs(t.l) == g.q);
  CHECK(std::abs(Y.coefficient(0, 1)) == 0.0);
  CHECK(std::abs(Y.coefficient(0, 5)) == 0.0);
  // support rule |j| < q'_n
  for (const auto& t : Y.terms()) CHECK(std::llabs(t.j) < g.b);

  // (q, 0) coefficient: -phi^n_0 / (2 e^q) with the mean from an independent
  // trapezoid quadrature of phitilde over one period
  double quad = 0.0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    quad += eval_phitilde(g, (static_cast<double>(i) / N) * g.inv_a);
  }
  quad /= N;
  CHECK(quad >= 0.0);
  CHECK(quad <= 1.0);
  const double want = -quad / (2.0 * std::exp(static_cast<double>(g.q)));
  CHECK(Y.coefficient(static_cast<std::int32_t>(g.q), 0).real() ==
        doctest::Approx(want).epsilon(1e-8));

  // tail bound: measured sup |Y - Ytilde| <= ||phitilde||_C4-style tail
  double sup = 0.0;
  for (int i = 0; i < 89; ++i) {
    for (int j = 0; j < 89; ++j) {
      const double x = (i + 0.5) / 89, y = (j + 0.5) / 89;
      sup = std::max(sup, std::abs(Y.eval(x, y) - eval_ytilde(g, x, y)));
    }
  }
  const double n3a = std::pow(static_cast<double>(g.n), 3) * static_cast<double>(g.a);
  double tail = 0.0;
  for (long long j = g.b; j < 100 * g.b; ++j) tail += 1.0 / std::pow(static_cast<double>(j), 4);
  const double c4 = bump_cp_norm(4) * std::pow(n3a, 4);
  CHECK(sup <= c4 * tail / std::pow(2 * M_PI, 4) * std::exp(-static_cast<double>(g.q)) + 1e-12);
}

TEST_CASE("assemble: exact mean, positivity, empty-level identity") {
  const auto& spec = testutil::mini_spec();
  double sum = spec.phi0();
  for (const auto& lf : spec.levels()) sum += lf.X.constant() + lf.Y.constant();
  CHECK(sum == 1.0);  // phi0 is defined as 1 minus the same-order constant sum
  CHECK(spec.min_value() > 0.0);
  CHECK(spec.max_value() > spec.min_value());
  CHECK(spec.staircase_scale() > 0.0);

  // zero usable levels: phi = 1 exactly
  auto law = pairgen::GrowthLaw::explicit_floors({mpz_class(17)});
  AssembleOptions opts;
  opts.level_cap = 0;
  auto unit = CeilingSpec::assemble(law, testutil::mini_pair(), opts);
  CHECK(unit.phi0() == 1.0);
  CHECK(unit.min_value() == 1.0);
  CHECK(unit.eval(0.37, 0.91) == 1.0);
}

TEST_CASE("grid-certified minimum is a true lower bound on sampled values") {
  const auto& spec = testutil::mini_spec();
  Rng rng(31, 12, 0);
  for (int i = 0; i < 3000; ++i) {
    const double v = spec.eval(rng.next_double(), rng.next_double());
    CHECK(v >= spec.min_value() - 1e-9);
    CHECK(v <= spec.max_value() + 1e-9);
  }
}

TEST_CASE("hermitian evaluation is real to machine precision") {
  const auto& spec = testutil::mini_spec();
  const auto& X = spec.levels().front().X;
  double coeff_l1 = X.l1_norm();
  Rng rng(37, 13, 0);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.next_double(), y = rng.next_double();
    // explicit full-spectrum sum, tracking the imaginary part
    std::complex<double> acc(X.constant(), 0.0);
    for (const auto& t : X.terms()) {
      const double ph = 2.0 * M_PI * (t.l * x + t.j * y);
      const std::complex<double> chi(std::cos(ph), std::sin(ph));
      acc += t.c * chi + std::conj(t.c * chi);
    }
    CHECK(std::abs(acc.imag()) <= 1e-12 * (1.0 + coeff_l1));
    CHECK(acc.real() == doctest::Approx(X.eval(x, y)).epsilon(1e-10));
  }
}
