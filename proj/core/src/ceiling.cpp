#include "specflow/ceiling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "specflow/bump.hpp"
#include "specflow/fft.hpp"

namespace specflow::ceiling {

namespace {

inline double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

long long to_ll(const mpz_class& z, const char* what) {
  if (!z.fits_slong_p() || z < 0) {
    throw InfeasibleScale(std::string("level does not fit machine integers: ") + what);
  }
  return static_cast<long long>(z.get_si());
}

long long inv_mod(long long a, long long m) {
  mpz_class r, am(static_cast<long>(a)), mm(static_cast<long>(m));
  if (mpz_invert(r.get_mpz_t(), am.get_mpz_t(), mm.get_mpz_t()) == 0) {
    throw InvalidSchedule("modular inverse does not exist (gcd != 1)");
  }
  return static_cast<long long>(r.get_si());
}

inline long long mod_ll(long long v, long long m) { return ((v % m) + m) % m; }

// Modular bookkeeping for locating the one X-column and Y-window containing
// a point.
struct XtHelpers {
  long long inv_p_mod_q = 0;
  long long pp_mod_a = 0;
  long long qpp_mod_a = 0;
  long long inv_qpp_mod_a = 0;

  explicit XtHelpers(const LevelGeometry& g) {
    if (g.q > 1) inv_p_mod_q = inv_mod(mod_ll(g.p, g.q), g.q);
    if (g.a > 1) {
      pp_mod_a = mod_ll(g.p_prime_prev, g.a);
      qpp_mod_a = static_cast<long long>((__int128)g.q * pp_mod_a % g.a);
      inv_qpp_mod_a = inv_mod(qpp_mod_a, g.a);
    }
  }

  // j with j p = rho (mod q), smallest nonnegative.
  long long column_j0(const LevelGeometry& g, long long rho) const {
    if (g.q == 1) return 0;
    return static_cast<long long>((__int128)rho * inv_p_mod_q % g.q);
  }

  // j = j0 + q s whose upsilon window index is `target` mod a.
  long long solve_j(const LevelGeometry& g, long long j0, long long target) const {
    if (g.a == 1) return j0;
    long long rhs = mod_ll(target - static_cast<long long>((__int128)j0 * pp_mod_a % g.a), g.a);
    long long s = static_cast<long long>((__int128)rhs * inv_qpp_mod_a % g.a);
    return j0 + g.q * s;
  }
};

// kappa(y - beta_j) * upsilon(y - j p'/a), with exact rational y-offset.
double column_profile_term(const LevelGeometry& g, long long j, double y) {
  const long long yo = static_cast<long long>((__int128)j * mod_ll(g.p_prime_prev, g.a) % g.a);
  const double ups = eval_upsilon(g, y - static_cast<double>(yo) / static_cast<double>(g.a));
  if (ups == 0.0) return 0.0;
  return eval_kappa(g, y - g.beta(j)) * ups;
}

// Sum of the (at most two) upsilon-window terms of the rho-column at height y.
double column_profile(const LevelGeometry& g, const XtHelpers& h, long long j0, double y) {
  if (g.a == 1) return column_profile_term(g, j0, y);
  const double n2 = static_cast<double>(g.n) * g.n;
  const long long m = static_cast<long long>(std::floor(
      frac(y + 2.0 / (n2 * static_cast<double>(g.a))) * static_cast<double>(g.a)));
  double v = column_profile_term(g, h.solve_j(g, j0, mod_ll(m, g.a)), y);
  v += column_profile_term(g, h.solve_j(g, j0, mod_ll(m - 1, g.a)), y);
  return v;
}

long long resolved_radius(const LevelGeometry& g, const TruncateOptions& opts) {
  const long long G = 1LL << opts.grid_exponent;
  if (opts.radius > 0) return opts.radius;
  const double paper = static_cast<double>(g.b) * static_cast<double>(g.b);
  return static_cast<long long>(std::min(paper, static_cast<double>(G / 4)));
}

}  // namespace

long long LevelGeometry::exact_plateau_max_i() const {
  // (i+1) q/b - q/(n^2 b) <= (n-2)/(n a) keeps the right window of kappa at 1.
  mpq_class bound(mpz_class(n - 2) * mpz_class(static_cast<long>(b)),
                  mpz_class(n) * mpz_class(static_cast<long>(a)) *
                      mpz_class(static_cast<long>(q)));
  bound.canonicalize();
  bound += mpq_class(1, static_cast<long>(n) * n);
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), bound.get_num().get_mpz_t(), bound.get_den().get_mpz_t());
  long long i_max = static_cast<long long>(fl.get_si()) - 1;
  return std::min<long long>(i_max, r);
}

LevelGeometry level_geometry(const pairgen::LevelSchedule& s, double eps) {
  LevelGeometry g;
  g.n = s.n;
  g.q = to_ll(s.q, "q");
  g.a = to_ll(s.q_prime_prev, "q'_{n-1}");
  g.b = to_ll(s.q_prime, "q'_n");
  mpz_class pm = s.p % s.q;
  if (pm < 0) pm += s.q;
  g.p = to_ll(pm, "p");
  mpz_class ppm = s.p_prime_prev % s.q_prime_prev;
  if (ppm < 0) ppm += s.q_prime_prev;
  g.p_prime_prev = to_ll(ppm, "p'_{n-1}");
  mpz_class pqm = s.p_prime % s.q_prime;
  if (pqm < 0) pqm += s.q_prime;
  g.p_prime = to_ll(pqm, "p'_n");
  if (g.q < 2 || g.a < 1 || g.b < 2) throw InvalidSchedule("degenerate level denominators");
  if (g.q > (1LL << 31) || g.a > (1LL << 31) || g.b > (1LL << 44) ||
      g.q * g.a > (1LL << 40)) {
    throw InfeasibleScale("level denominators exceed the assembly budget");
  }
  mpz_class r = s.q_prime / (s.q * s.q_prime_prev) - 1;
  if (r < 0) r = 0;
  g.r = to_ll(r, "r_n");
  mpz_class h = (mpz_class(g.n - 2) * r / g.n) * s.q * s.q_prime_prev;
  g.h = to_ll(h, "h_n");
  g.eps = eps;
  g.q_over_b = static_cast<double>(g.q) / static_cast<double>(g.b);
  g.inv_a = 1.0 / static_cast<double>(g.a);
  g.beta_unit = 1.0 / (static_cast<double>(g.a) * static_cast<double>(g.b));
  return g;
}

double eval_kappa(const LevelGeometry& g, double y) {
  if (g.r == 0) return 0.0;
  const double w = frac(y * static_cast<double>(g.a));  // a y mod 1
  const double right = 1.0 - bump(g.n * w - g.n + 2.0);
  if (right == 0.0) return 0.0;
  const double yy = w * g.inv_a;  // position inside [0, 1/a)
  const double pos = yy / g.q_over_b;
  const double inv_n2 = 1.0 / (static_cast<double>(g.n) * g.n);
  long long l_full = static_cast<long long>(std::floor(pos - inv_n2));
  if (l_full > g.r) l_full = g.r;
  if (l_full < 0) l_full = 0;
  double sum = static_cast<double>(l_full);
  const double steep = static_cast<double>(g.n) * g.n / g.q_over_b;
  for (long long l = l_full + 1; l <= g.r; ++l) {
    const double arg = steep * (yy - static_cast<double>(l) * g.q_over_b);
    if (arg <= 0.0) break;
    sum += bump(arg);
  }
  return g.eps * sum * right;
}

double eval_nu(const LevelGeometry& g, double x) {
  const double w = frac(x);
  const double n2 = static_cast<double>(g.n) * g.n;
  const double arg = n2 * static_cast<double>(g.q) * w;
  return bump(arg) - bump(arg - n2 + 2.0);
}

double eval_upsilon(const LevelGeometry& g, double y) {
  // One window of support length 1/a on the torus: reduce y mod 1 into
  // [-2/(n^2 a), 1 - 2/(n^2 a)), then apply the real-line formula.
  const double n2 = static_cast<double>(g.n) * g.n;
  const double off = 2.0 / (n2 * static_cast<double>(g.a));
  const double w = (frac(y + off) - off) * static_cast<double>(g.a);
  return bump(n2 * w + 2.0) - bump(n2 * w - n2 + 3.0);
}

double eval_window(const LevelGeometry& g, double x, double y) {
  const double nu = eval_nu(g, x);
  if (nu == 0.0) return 0.0;
  return nu * eval_upsilon(g, y);
}

double eval_xtilde(const LevelGeometry& g, double x, double y) {
  if (g.r == 0) return 0.0;
  XtHelpers h(g);
  const long long rho = std::min<long long>(
      g.q - 1, static_cast<long long>(std::floor(frac(x) * static_cast<double>(g.q))));
  const long long j0 = h.column_j0(g, rho);

  auto term = [&](long long j) {
    const long long xo = static_cast<long long>((__int128)j * g.p % g.q);
    const double nu = eval_nu(g, x - static_cast<double>(xo) / static_cast<double>(g.q));
    if (nu == 0.0) return 0.0;
    return nu * column_profile_term(g, j, y);
  };

  if (g.a == 1) return term(j0);
  const double n2 = static_cast<double>(g.n) * g.n;
  const long long m = static_cast<long long>(std::floor(
      frac(y + 2.0 / (n2 * static_cast<double>(g.a))) * static_cast<double>(g.a)));
  double v = term(h.solve_j(g, j0, mod_ll(m, g.a)));
  v += term(h.solve_j(g, j0, mod_ll(m - 1, g.a)));
  return v;
}

double eval_phitilde(const LevelGeometry& g, double y) {
  const double w = frac(y * static_cast<double>(g.a));
  const double n3 = static_cast<double>(g.n) * g.n * g.n;
  const double n2 = static_cast<double>(g.n) * g.n;
  return bump(n3 * w - n3 + n2) - bump(n3 * w - n3 + static_cast<double>(g.n));
}

double eval_ytilde(const LevelGeometry& g, double x, double y) {
  if (g.q > 700) return 0.0;  // e^{-q} underflows; the level carries no Y
  return -std::cos(2.0 * M_PI * static_cast<double>(g.q) * frac(x)) *
         std::exp(-static_cast<double>(g.q)) * eval_phitilde(g, y);
}

double eval_ytilde_deriv(const LevelGeometry& g, double x, double y, int rx, int py) {
  if (g.q > 700) return 0.0;
  if (py > 2) throw InvalidArgument("eval_ytilde_deriv: py <= 2");
  const double tq = 2.0 * M_PI * static_cast<double>(g.q);
  const double xpart = -std::pow(tq, rx) * std::cos(tq * frac(x) + rx * M_PI / 2.0);
  const double w = frac(y * static_cast<double>(g.a));
  const double n3 = static_cast<double>(g.n) * g.n * g.n;
  const double n2 = static_cast<double>(g.n) * g.n;
  const double arg1 = n3 * w - n3 + n2;
  const double arg2 = n3 * w - n3 + static_cast<double>(g.n);
  const double chain = n3 * static_cast<double>(g.a);
  double ypart = 0.0;
  switch (py) {
    case 0:
      ypart = bump(arg1) - bump(arg2);
      break;
    case 1:
      ypart = chain * (bump_d1(arg1) - bump_d1(arg2));
      break;
    default:
      ypart = chain * chain * (bump_d2(arg1) - bump_d2(arg2));
      break;
  }
  return xpart * std::exp(-static_cast<double>(g.q)) * ypart;
}

TrigPolynomial truncate_x(const LevelGeometry& g, const TruncateOptions& opts) {
  const long long G = 1LL << opts.grid_exponent;
  const long long radius = resolved_radius(g, opts);
  if (4 * radius > G) {
    throw AliasingError("truncate_x: grid too small for the truncation radius");
  }
  TrigPolynomial out;
  if (g.r == 0) {
    out.finalize();
    return out;
  }

  const std::size_t gn = static_cast<std::size_t>(G);
  const long long jcap = radius;
  const long long lcap = radius;
  XtHelpers hx(g);

  // nu-hat and a monotone magnitude envelope over l >= 0.
  std::vector<std::complex<double>> nu_hat;
  std::vector<double> nu_env(static_cast<std::size_t>(lcap) + 2, 0.0);
  {
    std::vector<double> samples(gn);
    for (std::size_t t = 0; t < gn; ++t) {
      samples[t] = eval_nu(g, static_cast<double>(t) / static_cast<double>(G));
    }
    nu_hat = fourier_coefficients(samples);
    for (long long l = lcap + 1; l >= 0; --l) {
      double m = std::abs(nu_hat[static_cast<std::size_t>(l)]);
      const std::size_t idx = static_cast<std::size_t>(l);
      if (idx + 1 < nu_env.size()) m = std::max(m, nu_env[idx + 1]);
      nu_env[idx] = m;
    }
  }

  // Column profiles and their 1-D transforms, kept for |j| <= jcap.
  const std::size_t cols = static_cast<std::size_t>(g.q);
  const std::size_t jrange = static_cast<std::size_t>(2 * jcap + 1);
  std::vector<std::complex<double>> psi_hat(cols * jrange);
  {
    std::vector<double> samples(gn);
    for (long long rho = 0; rho < g.q; ++rho) {
      const long long j0 = hx.column_j0(g, rho);
      for (std::size_t t = 0; t < gn; ++t) {
        const double y = static_cast<double>(t) / static_cast<double>(G);
        samples[t] = column_profile(g, hx, j0, y);
      }
      auto row = fourier_coefficients(samples);
      for (long long j = -jcap; j <= jcap; ++j) {
        psi_hat[static_cast<std::size_t>(rho) * jrange + static_cast<std::size_t>(j + jcap)] =
            row[static_cast<std::size_t>(mod_ll(j, G))];
      }
    }
  }

  // Gtab[lambda][j] = sum_rho e^{-2 pi i lambda rho / q} Psi_hat[rho][j];
  // then c_{l,j} = nu_hat(l) Gtab[l mod q][j].
  std::vector<std::complex<double>> roots(cols);
  for (long long rho = 0; rho < g.q; ++rho) {
    const double ph = -2.0 * M_PI * static_cast<double>(rho) / static_cast<double>(g.q);
    roots[static_cast<std::size_t>(rho)] = {std::cos(ph), std::sin(ph)};
  }
  std::vector<std::complex<double>> gtab(cols * jrange);
  for (long long lambda = 0; lambda < g.q; ++lambda) {
    for (std::size_t jj = 0; jj < jrange; ++jj) {
      std::complex<double> acc(0.0, 0.0);
      for (long long rho = 0; rho < g.q; ++rho) {
        acc += psi_hat[static_cast<std::size_t>(rho) * jrange + jj] *
               roots[static_cast<std::size_t>(mod_ll(lambda * rho, g.q))];
      }
      gtab[static_cast<std::size_t>(lambda) * jrange + jj] = acc;
    }
  }

  const double mass = g.eps * static_cast<double>(std::max<long long>(1, g.r));
  const double tau = opts.rel_threshold * mass;
  const double tau_weighted = opts.weighted_rel_threshold * mass;
  const double r2 = static_cast<double>(radius) * static_cast<double>(radius);

  // With the pair phases available, sub-threshold coefficients on
  // near-resonant lines are kept via the character-bound weight.
  auto weighted_keep = [&](long long l, long long j, double cmag) {
    if (!opts.has_pair || cmag * opts.weight_cap < tau_weighted) return false;
    const double wx = arith::frac_mul(std::llabs(l),
                                      l >= 0 ? opts.alpha
                                             : arith::Dd{1.0 - opts.alpha.hi, -opts.alpha.lo});
    const double wy = arith::frac_mul(std::llabs(j),
                                      j >= 0 ? opts.alpha_prime
                                             : arith::Dd{1.0 - opts.alpha_prime.hi,
                                                         -opts.alpha_prime.lo});
    double w = wx + wy;
    w -= std::floor(w);
    const double dist = std::min(w, 1.0 - w);
    const double cap = dist > 1e-18 ? 1.0 / (2.0 * dist) : opts.weight_cap;
    return cmag * std::min(cap, opts.weight_cap) >= tau_weighted;
  };

  const double keep_floor = opts.has_pair
                                ? std::min(tau, tau_weighted / opts.weight_cap)
                                : tau;

  for (long long j = -jcap; j <= jcap; ++j) {
    for (long long lambda = 0; lambda < g.q; ++lambda) {
      const std::complex<double> gv =
          gtab[static_cast<std::size_t>(lambda) * jrange + static_cast<std::size_t>(j + jcap)];
      const double gmag = std::abs(gv);
      if (gmag * nu_env[0] < keep_floor) continue;
      for (long long l = lambda; l <= lcap; l += g.q) {
        if (static_cast<double>(l) * static_cast<double>(l) +
                static_cast<double>(j) * static_cast<double>(j) >
            r2) {
          break;
        }
        if (nu_env[static_cast<std::size_t>(l)] * gmag < keep_floor) break;
        if (l == 0 && j < 0) continue;  // canonical half only
        if (l % g.q == 0 && j != 0 && j % g.b == 0) continue;  // excluded frequencies
        const std::complex<double> c = nu_hat[static_cast<std::size_t>(l)] * gv;
        const double cmag = std::abs(c);
        if (cmag < tau && !weighted_keep(l, j, cmag)) continue;
        out.add(static_cast<std::int32_t>(l), static_cast<std::int32_t>(j), c);
      }
    }
  }
  out.finalize();
  return out;
}

double truncation_sup_error(const LevelGeometry& g, const TrigPolynomial& X,
                            int fresh_grid) {
  double worst = 0.0;
  for (int i = 0; i < fresh_grid; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / fresh_grid;
    for (int jj = 0; jj < fresh_grid; ++jj) {
      const double y = (static_cast<double>(jj) + 0.5) / fresh_grid;
      worst = std::max(worst, std::abs(X.eval(x, y) - eval_xtilde(g, x, y)));
    }
  }
  return worst;
}

TrigPolynomial truncate_y(const LevelGeometry& g, int grid_exponent, double rel_threshold) {
  TrigPolynomial out;
  if (g.q > 700) {
    out.finalize();
    return out;
  }
  const long long G = 1LL << grid_exponent;
  std::vector<double> samples(static_cast<std::size_t>(G));
  for (long long t = 0; t < G; ++t) {
    const double w = static_cast<double>(t) / static_cast<double>(G);
    samples[static_cast<std::size_t>(t)] = eval_phitilde(g, w * g.inv_a);
  }
  auto coeff = fourier_coefficients(samples);
  double peak = 0.0;
  for (const auto& c : coeff) peak = std::max(peak, std::abs(c));
  const double scale = -0.5 * std::exp(-static_cast<double>(g.q));
  const long long kcap = G / 2 - 1;
  for (long long k = -kcap; k <= kcap; ++k) {
    const std::complex<double> ck = coeff[static_cast<std::size_t>(mod_ll(k, G))];
    if (std::abs(ck) < rel_threshold * peak) continue;
    const long long j = k * g.a;
    if (std::llabs(j) >= g.b) continue;  // support rule |j| < q'_n
    if (j > std::numeric_limits<std::int32_t>::max() ||
        j < std::numeric_limits<std::int32_t>::min()) {
      continue;
    }
    out.add(static_cast<std::int32_t>(g.q), static_cast<std::int32_t>(j), scale * ck);
  }
  out.finalize();
  return out;
}

const LevelFunctions& CeilingSpec::level(int k) const {
  for (const auto& lf : levels_) {
    if (lf.geom.k == k) return lf;
  }
  throw InvalidArgument("CeilingSpec::level: no such level");
}

double CeilingSpec::eval(double x, double y) const {
  double v = phi0_;
  for (const auto& lf : levels_) v += lf.X.eval(x, y) + lf.Y.eval(x, y);
  return v;
}

double CeilingSpec::eval_deriv(double x, double y, int dx, int dy) const {
  if (dx == 0 && dy == 0) return eval(x, y);
  double v = 0.0;
  for (const auto& lf : levels_) {
    v += lf.X.eval_deriv(x, y, dx, dy) + lf.Y.eval_deriv(x, y, dx, dy);
  }
  return v;
}

double CeilingSpec::eval_untruncated(double x, double y) const {
  double v = phi0_;
  for (const auto& lf : levels_) {
    v += eval_xtilde(lf.geom, x, y) + eval_ytilde(lf.geom, x, y);
  }
  return v;
}

namespace {

// Exact values of a sum of trig polynomials on a 2^p x 2^p grid: folding
// coefficients mod G leaves grid values unchanged, then a 2-D synthesis FFT.
std::vector<double> synth_grid(const std::vector<const TrigPolynomial*>& polys,
                               double constant, int grid_exponent) {
  const std::size_t G = 1ull << grid_exponent;
  std::vector<std::complex<double>> acc(G * G, {0.0, 0.0});
  acc[0] = constant;
  auto fold = [&](long long v) { return static_cast<std::size_t>(mod_ll(v, static_cast<long long>(G))); };
  for (const TrigPolynomial* poly : polys) {
    acc[0] += poly->constant();
    for (const Term& t : poly->terms()) {
      acc[fold(t.l) * G + fold(t.j)] += t.c;
      acc[fold(-t.l) * G + fold(-t.j)] += std::conj(t.c);
    }
  }
  std::vector<std::complex<double>> line(G);
  for (std::size_t i = 0; i < G; ++i) {
    for (std::size_t j = 0; j < G; ++j) line[j] = std::conj(acc[i * G + j]);
    fft_forward(line);
    for (std::size_t j = 0; j < G; ++j) acc[i * G + j] = std::conj(line[j]);
  }
  std::vector<double> out(G * G);
  for (std::size_t j = 0; j < G; ++j) {
    for (std::size_t i = 0; i < G; ++i) line[i] = std::conj(acc[i * G + j]);
    fft_forward(line);
    for (std::size_t i = 0; i < G; ++i) out[i * G + j] = std::conj(line[i]).real();
  }
  return out;
}

}  // namespace

CeilingSpec CeilingSpec::assemble(const pairgen::GrowthLaw& law,
                                  const pairgen::YPair& pair, AssembleOptions opts) {
  CeilingSpec spec;
  spec.pair_ = pair;
  spec.opts_ = opts;
  opts.policy.require(pair.max_denominator());

  const pairgen::PairReport report = pairgen::verify_pair(law, pair);
  std::vector<int> usable;
  if (report.first_all_pass_level > 0) {
    for (int k = report.first_all_pass_level; k <= static_cast<int>(pair.levels.size()); ++k) {
      usable.push_back(k);
    }
  }
  if (opts.level_cap >= 0 && static_cast<int>(usable.size()) > opts.level_cap) {
    usable.resize(static_cast<std::size_t>(opts.level_cap));
  }
  spec.n0_ = usable.empty() ? 0 : pair.level(usable.front()).n;

  double scale = opts.staircase_scale;
  if (scale <= 0.0) {
    mpq_class mass(0);
    for (int k : usable) {
      const auto& s = pair.level(k);
      mpz_class r = s.q_prime / (s.q * s.q_prime_prev) - 1;
      if (r < 1) continue;
      mpz_class a7;
      mpz_pow_ui(a7.get_mpz_t(), s.q_prime_prev.get_mpz_t(), 7);
      mpq_class term(r * a7, s.q_prime);
      term.canonicalize();
      mass += term;
    }
    scale = (mass > 0) ? opts.target_mass / mass.get_d() : 1.0;
  }
  spec.staircase_scale_ = scale;

  for (std::size_t idx = 0; idx < usable.size(); ++idx) {
    const int k = usable[idx];
    const auto& s = pair.level(k);
    const double a7 = std::pow(s.q_prime_prev.get_d(), 7.0);
    const double eps = scale * a7 / s.q_prime.get_d();
    LevelFunctions lf;
    lf.geom = level_geometry(s, eps);
    lf.geom.k = k;
    TruncateOptions topt;
    topt.grid_exponent = opts.grid_exponent;
    topt.rel_threshold = opts.rel_threshold;
    topt.weighted_rel_threshold = opts.weighted_rel_threshold;
    topt.weight_cap = opts.weight_cap;
    topt.has_pair = true;
    topt.alpha = arith::to_dd_mod1(pair.alpha_value);
    topt.alpha_prime = arith::to_dd_mod1(pair.alpha_prime_value);
    if (idx < opts.radius.size() && opts.radius[idx] > 0) topt.radius = opts.radius[idx];
    lf.x_radius = resolved_radius(lf.geom, topt);
    lf.X = truncate_x(lf.geom, topt);
    lf.Y = truncate_y(lf.geom);
    lf.x_terms = lf.X.term_count();
    lf.y_terms = lf.Y.term_count();
    spec.levels_.push_back(std::move(lf));
  }

  double const_sum = 0.0;
  for (const auto& lf : spec.levels_) const_sum += lf.X.constant() + lf.Y.constant();
  spec.phi0_ = 1.0 - const_sum;

  // Positivity: exact grid synthesis, local refinement around the extremes,
  // then a first-order margin at the refined cell size.
  {
    std::vector<const TrigPolynomial*> polys;
    for (const auto& lf : spec.levels_) {
      polys.push_back(&lf.X);
      polys.push_back(&lf.Y);
    }
    const int pg = opts.positivity_grid_exponent;
    const std::size_t G = 1ull << pg;
    std::vector<double> grid = synth_grid(polys, spec.phi0_, pg);
    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (grid[i] < grid[imin]) imin = i;
      if (grid[i] > grid[imax]) imax = i;
    }
    double dxb = 0.0, dyb = 0.0;
    for (const auto& lf : spec.levels_) {
      dxb += lf.X.deriv_bound(1, 0) + lf.Y.deriv_bound(1, 0);
      dyb += lf.X.deriv_bound(0, 1) + lf.Y.deriv_bound(0, 1);
    }
    const int refine = 8;
    auto local_extreme = [&](std::size_t cell, bool want_min) {
      const double cx = static_cast<double>(cell / G) / static_cast<double>(G);
      const double cy = static_cast<double>(cell % G) / static_cast<double>(G);
      double ext = want_min ? 1e300 : -1e300;
      for (int u = -refine; u <= refine; ++u) {
        for (int v = -refine; v <= refine; ++v) {
          const double x = cx + u / (2.0 * static_cast<double>(refine) * G);
          const double y = cy + v / (2.0 * static_cast<double>(refine) * G);
          const double val = spec.eval(x, y);
          ext = want_min ? std::min(ext, val) : std::max(ext, val);
        }
      }
      return ext;
    };
    const double margin =
        (dxb + dyb) / (4.0 * static_cast<double>(refine) * static_cast<double>(G));
    spec.min_value_ = local_extreme(imin, true) - margin;
    spec.max_value_ = local_extreme(imax, false) + margin;
    if (!(spec.min_value_ > 0.0)) {
      throw NonpositiveCeiling(
          "assemble: positivity certification failed; lower staircase_scale or "
          "change the schedule");
    }
  }
  return spec;
}

std::string CeilingSpec::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "specflow-ceiling v1\n";
  os << "n0 = " << n0_ << "\n";
  os << "phi0 = " << phi0_ << "\n";
  os << "staircase_scale = " << staircase_scale_ << "\n";
  os << "min_value = " << min_value_ << "\n";
  os << "max_value = " << max_value_ << "\n";
  os << "levels = " << levels_.size() << "\n";
  for (const auto& lf : levels_) {
    const auto& g = lf.geom;
    os << "level " << g.k << " n=" << g.n << " q=" << g.q << " a=" << g.a
       << " b=" << g.b << " r=" << g.r << " h=" << g.h << " eps=" << g.eps
       << " x_radius=" << lf.x_radius << "\n";
    os << "X " << lf.X.term_count() << " const " << lf.X.constant() << "\n";
    for (const auto& t : lf.X.terms()) {
      os << t.l << " " << t.j << " " << t.c.real() << " " << t.c.imag() << "\n";
    }
    os << "Y " << lf.Y.term_count() << " const " << lf.Y.constant() << "\n";
    for (const auto& t : lf.Y.terms()) {
      os << t.l << " " << t.j << " " << t.c.real() << " " << t.c.imag() << "\n";
    }
  }
  return os.str();
}

}  // namespace specflow::ceiling
