#include "specflow/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace specflow::birkhoff {

namespace {

inline double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

// {a x} for integer a and x in [0,1), exact two-product reduction.
inline double frac_int_mul(long long a, double x) {
  const double ad = static_cast<double>(a);
  const double p = ad * x;
  const double err = std::fma(ad, x, -p);
  double r = (p - std::floor(p)) + err;
  r -= std::floor(r);
  return r >= 1.0 ? 0.0 : r;
}

// {l x + j y} with exact products.
inline double frac_phase(std::int64_t l, double x, std::int64_t j, double y) {
  double r = frac_int_mul(l >= 0 ? l : -l, l >= 0 ? x : 1.0 - x);
  double s = frac_int_mul(j >= 0 ? j : -j, j >= 0 ? y : 1.0 - y);
  double t = r + s;
  t -= std::floor(t);
  return t >= 1.0 ? 0.0 : t;
}

}  // namespace

SumKernel::SumKernel(const ceiling::CeilingSpec& spec)
    : phi0_(spec.phi0()),  // level constants folded in below: phi0_ is the mean
      min_value_(spec.min_value()),
      max_value_(spec.max_value()),
      policy_(spec.options().policy),
      alpha_exact_(spec.pair().alpha_value),
      alpha_prime_exact_(spec.pair().alpha_prime_value) {
  alpha_ = arith::to_dd_mod1(alpha_exact_);
  alpha_prime_ = arith::to_dd_mod1(alpha_prime_exact_);
  const double resonance_threshold = std::ldexp(1.0, -policy_.bits / 2);

  // Merge all level polynomials into one frequency table (canonical halves
  // merge consistently).
  std::vector<ceiling::Term> all;
  for (const auto& lf : spec.levels()) {
    phi0_ += lf.X.constant() + lf.Y.constant();
    for (const auto& t : lf.X.terms()) all.push_back(t);
    for (const auto& t : lf.Y.terms()) all.push_back(t);
  }
  std::sort(all.begin(), all.end(), [](const ceiling::Term& a, const ceiling::Term& b) {
    return a.l != b.l ? a.l < b.l : a.j < b.j;
  });
  for (std::size_t i = 0; i < all.size();) {
    std::complex<double> c = all[i].c;
    std::size_t k = i + 1;
    while (k < all.size() && all[k].l == all[i].l && all[k].j == all[i].j) {
      c += all[k].c;
      ++k;
    }
    CharacterSum f;
    f.l = all[i].l;
    f.j = all[i].j;
    f.c = c;
    mpq_class w = all[i].l * alpha_exact_ + all[i].j * alpha_prime_exact_;
    mpq_class sf = arith::signed_frac(w);
    f.omega = arith::to_dd_mod1(w);
    f.omega_signed = sf.get_d();
    f.dist = std::abs(f.omega_signed);
    f.resonant = f.dist < resonance_threshold;
    freqs_.push_back(f);
    i = k;
  }
  double cmax = 0.0;
  for (const auto& f : freqs_) {
    const double ac = 2.0 * std::abs(f.c);
    coeff_l1_ += ac;
    cmax = std::max(cmax, ac);
    const double cap = f.dist > 0.0 ? 1.0 / (2.0 * f.dist)
                                    : static_cast<double>(policy_.max_iterate);
    coeff_capsum_ += ac * std::min(cap, static_cast<double>(policy_.max_iterate));
  }
  // Coarse sub-table for two-sided pointwise brackets of phi.
  const double coarse_cut = 1e-3 * cmax;
  for (std::uint32_t i = 0; i < freqs_.size(); ++i) {
    if (2.0 * std::abs(freqs_[i].c) >= coarse_cut) {
      coarse_.push_back(i);
    } else {
      coarse_residual_ += 2.0 * std::abs(freqs_[i].c);
    }
  }
  // Drift sub-table: the terms that dominate S_m phi - m, used to place the
  // locate_floor anchor.
  {
    std::vector<std::pair<double, std::uint32_t>> weighted;
    weighted.reserve(freqs_.size());
    for (std::uint32_t i = 0; i < freqs_.size(); ++i) {
      const auto& f = freqs_[i];
      const double cap = f.dist > 0.0 ? 1.0 / (2.0 * f.dist)
                                      : static_cast<double>(policy_.max_iterate);
      weighted.emplace_back(
          2.0 * std::abs(f.c) * std::min(cap, static_cast<double>(policy_.max_iterate)), i);
    }
    std::sort(weighted.begin(), weighted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t keep = std::min<std::size_t>(128, weighted.size());
    for (std::size_t i = 0; i < keep; ++i) drift_.push_back(weighted[i].second);
  }
}

std::pair<double, double> SumKernel::eval_phi_bounds(Point z) const {
  double acc = phi0_;
  for (std::uint32_t idx : coarse_) {
    const auto& f = freqs_[idx];
    const double ph = 2.0 * M_PI * frac_phase(f.l, z.x, f.j, z.y);
    acc += 2.0 * (f.c.real() * std::cos(ph) - f.c.imag() * std::sin(ph));
  }
  return {acc - coarse_residual_, acc + coarse_residual_};
}

std::vector<double> SumKernel::sample_line(double y, long long m, double x0, double dx,
                                           int count, int ox) const {
  if (count < 1) throw InvalidArgument("sample_line: count >= 1");
  if (std::llabs(m) > policy_.max_iterate) {
    throw PrecisionError("sample_line: m exceeds the certified iterate range");
  }
  const std::size_t nf = freqs_.size();
  std::vector<std::complex<double>> b(nf), u(nf), step(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const auto& f = freqs_[i];
    std::complex<double> c = f.c * geometric_ratio(f, m);
    for (int k = 0; k < ox; ++k) c *= std::complex<double>(0.0, 2.0 * M_PI * f.l);
    const double phy = 2.0 * M_PI * frac_int_mul(std::llabs(f.j), f.j >= 0 ? y : 1.0 - y);
    b[i] = c * std::complex<double>(std::cos(phy), std::sin(phy));
    const double ps = 2.0 * M_PI * frac_int_mul(std::llabs(f.l), f.l >= 0 ? dx : 1.0 - dx);
    step[i] = {std::cos(ps), std::sin(ps)};
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    if ((k & 511) == 0) {  // refresh x-phases from exact reductions
      const double x = x0 + dx * k;
      for (std::size_t i = 0; i < nf; ++i) {
        const double px = 2.0 * M_PI * frac_int_mul(std::llabs(freqs_[i].l),
                                                    freqs_[i].l >= 0 ? x : 1.0 - x);
        u[i] = {std::cos(px), std::sin(px)};
      }
    }
    double acc = (ox == 0) ? phi0_ * static_cast<double>(m) : 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
      acc += 2.0 * (b[i].real() * u[i].real() - b[i].imag() * u[i].imag());
      u[i] *= step[i];
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

SumKernel::Floor SumKernel::locate_floor(Point z, double target) const {
  // Anchor at m0 ~ target corrected by the dominant drift terms, then walk
  // with one incremental phi evaluation per step.
  const long long cap = policy_.max_iterate;
  long long m0 = static_cast<long long>(std::llround(target));
  if (m0 > cap) m0 = cap;
  if (m0 < -cap) m0 = -cap;
  for (int pass = 0; pass < 2; ++pass) {
    double drift = 0.0;
    for (std::uint32_t idx : drift_) {
      const auto& f = freqs_[idx];
      const std::complex<double> u = geometric_ratio(f, m0);
      const double ph = 2.0 * M_PI * frac_phase(f.l, z.x, f.j, z.y);
      drift += 2.0 * (f.c * u * std::complex<double>(std::cos(ph), std::sin(ph))).real();
    }
    long long next = static_cast<long long>(std::llround(target - drift));
    if (next > cap) next = cap;
    if (next < -cap) next = -cap;
    if (next == m0) break;
    m0 = next;
  }
  double s = birkhoff_fast(z, m0);

  const std::size_t nf = freqs_.size();
  thread_local std::vector<std::complex<double>> u, rot;
  u.resize(nf);
  rot.resize(nf);
  const Point zm = translate(z, m0);
  for (std::size_t i = 0; i < nf; ++i) {
    const double ph = 2.0 * M_PI * frac_phase(freqs_[i].l, zm.x, freqs_[i].j, zm.y);
    u[i] = {std::cos(ph), std::sin(ph)};
    const double wr = 2.0 * M_PI * freqs_[i].omega.hi;
    rot[i] = {std::cos(wr), std::sin(wr)};
  }
  auto phi_here = [&]() {
    double acc = phi0_;
    for (std::size_t i = 0; i < nf; ++i) {
      acc += 2.0 * (freqs_[i].c.real() * u[i].real() - freqs_[i].c.imag() * u[i].imag());
    }
    return acc;
  };
  auto rotate_fwd = [&]() {
    for (std::size_t i = 0; i < nf; ++i) u[i] *= rot[i];
  };
  auto rotate_back = [&]() {
    for (std::size_t i = 0; i < nf; ++i) u[i] *= std::conj(rot[i]);
  };

  long long m = m0;
  long long guard = 0;
  if (s <= target) {
    // walk forward while S_{m+1} <= target
    while (true) {
      const double phi = phi_here();
      if (s + phi > target) return {m, s, phi};
      s += phi;
      ++m;
      rotate_fwd();
      if (++guard > 1'000'000 || m > cap) {
        throw PrecisionError("locate_floor: walk exceeded the certified range");
      }
    }
  }
  // walk backward until S_m <= target
  while (true) {
    --m;
    rotate_back();
    const double phi = phi_here();
    s -= phi;
    if (s <= target) return {m, s, phi};
    if (++guard > 1'000'000 || m < -cap) {
      throw PrecisionError("locate_floor: walk exceeded the certified range");
    }
  }
}

double SumKernel::bracket_bound(long long m) const {
  return std::min(coeff_l1_ * static_cast<double>(m), coeff_capsum_);
}

double SumKernel::eval_phi(Point z) const {
  double acc = phi0_;
  for (const auto& f : freqs_) {
    const double ph = 2.0 * M_PI * frac_phase(f.l, z.x, f.j, z.y);
    acc += 2.0 * (f.c.real() * std::cos(ph) - f.c.imag() * std::sin(ph));
  }
  return acc;
}

Point SumKernel::translate(Point z, long long m) const {
  if (m == 0) return z;
  const bool neg = m < 0;
  const long long am = neg ? -m : m;
  double dx = arith::frac_mul(am, alpha_);
  double dy = arith::frac_mul(am, alpha_prime_);
  if (neg) {
    dx = dx == 0.0 ? 0.0 : 1.0 - dx;
    dy = dy == 0.0 ? 0.0 : 1.0 - dy;
  }
  return {frac(z.x + dx), frac(z.y + dy)};
}

std::complex<double> SumKernel::geometric_ratio(const CharacterSum& f, long long m) const {
  if (m == 0) return {0.0, 0.0};
  // U = sin(pi m w~)/sin(pi w~) e^{i pi (m-1) w~}, stable in the reduced
  // phase; series expansion in the resonant regime.
  const double w = f.omega_signed;
  const double md = static_cast<double>(m);
  if (std::abs(md * w) < 1.0e-3) {
    // U = m e^{i pi (m-1) w} (1 - pi^2 w^2 (m^2-1)/6 + O((m w)^4))
    const double corr = 1.0 - M_PI * M_PI * w * w * (md * md - 1.0) / 6.0;
    const double ph = M_PI * (md - 1.0) * w;
    return md * corr * std::complex<double>(std::cos(ph), std::sin(ph));
  }
  // m w~ mod 2 via the double-double representation of w (w~ = w or w - 1).
  const bool wrapped = f.omega.hi > 0.5;
  arith::Dd wd = f.omega;
  if (wrapped) wd.hi -= 1.0;  // exact
  const long long am = m >= 0 ? m : -m;
  double mw = arith::frac_mul(am, {std::abs(wd.hi), wd.hi >= 0 ? wd.lo : -wd.lo});
  // sign of m * w~
  const bool negphase = (m < 0) != (wd.hi < 0);
  double u = negphase ? (mw == 0.0 ? 0.0 : 1.0 - mw) : mw;  // {m w~} in [0,1)
  const double num = std::sin(M_PI * u);
  const double den = std::sin(M_PI * w);
  const double ph = M_PI * (u - w);
  return (num / den) * std::complex<double>(std::cos(ph), std::sin(ph));
}

double SumKernel::birkhoff_fast(Point z, long long m, int ox, int oy) const {
  if (std::llabs(m) > policy_.max_iterate) {
    throw PrecisionError("birkhoff_fast: m exceeds the certified iterate range");
  }
  double acc = (ox == 0 && oy == 0) ? phi0_ * static_cast<double>(m) : 0.0;
  for (const auto& f : freqs_) {
    std::complex<double> c = f.c;
    for (int k = 0; k < ox; ++k) c *= std::complex<double>(0.0, 2.0 * M_PI * f.l);
    for (int k = 0; k < oy; ++k) c *= std::complex<double>(0.0, 2.0 * M_PI * f.j);
    if (c == std::complex<double>(0.0, 0.0)) continue;
    const std::complex<double> u = geometric_ratio(f, m);
    const double ph = 2.0 * M_PI * frac_phase(f.l, z.x, f.j, z.y);
    const std::complex<double> chi(std::cos(ph), std::sin(ph));
    acc += 2.0 * (c * u * chi).real();
  }
  return acc;
}

double SumKernel::birkhoff_naive(Point z, long long m) const {
  if (std::llabs(m) > policy_.max_iterate) {
    throw PrecisionError("birkhoff_naive: m exceeds the certified iterate range");
  }
  const bool neg = m < 0;
  const long long steps = neg ? -m : m;
  // S_{-k} phi(z) = -S_k phi(T^{-k} z)
  Point z0 = neg ? translate(z, m) : z;

  const std::size_t nf = freqs_.size();
  std::vector<std::complex<double>> u(nf), rot(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const double ph = 2.0 * M_PI * frac_phase(freqs_[i].l, z0.x, freqs_[i].j, z0.y);
    u[i] = {std::cos(ph), std::sin(ph)};
    const double wr = 2.0 * M_PI * freqs_[i].omega.hi;
    rot[i] = {std::cos(wr), std::sin(wr)};
  }
  // Kahan-Babuska compensated accumulation of phi along the orbit; phases
  // re-derived from exact reductions every 4096 steps to stop rotation drift.
  double sum = 0.0, comp = 0.0;
  for (long long step = 0; step < steps; ++step) {
    if (step > 0 && (step & 4095) == 0) {
      Point zz = translate(z0, step);
      for (std::size_t i = 0; i < nf; ++i) {
        const double ph = 2.0 * M_PI * frac_phase(freqs_[i].l, zz.x, freqs_[i].j, zz.y);
        u[i] = {std::cos(ph), std::sin(ph)};
      }
    }
    double value = phi0_;
    for (std::size_t i = 0; i < nf; ++i) {
      value += 2.0 * (freqs_[i].c.real() * u[i].real() - freqs_[i].c.imag() * u[i].imag());
      u[i] *= rot[i];
    }
    const double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      comp += (sum - t) + value;
    } else {
      comp += (value - t) + sum;
    }
    sum = t;
  }
  const double total = sum + comp;
  return neg ? -total : total;
}

double SumKernel::character_bound(std::int64_t l, std::int64_t j, long long m) const {
  if (l == 0 && j == 0) {
    throw InvalidArgument("character_bound: (0,0) is not a character frequency");
  }
  mpq_class w = arith::dist_to_int(mpq_class(l) * alpha_exact_ +
                                   mpq_class(j) * alpha_prime_exact_);
  const double dist = w.get_d();
  const double cap = dist > 0.0 ? 1.0 / (2.0 * dist) : std::numeric_limits<double>::infinity();
  return std::min(static_cast<double>(m), cap);
}

double SumKernel::mean_deviation_bound(long long m) const {
  double acc = 0.0;
  for (const auto& f : freqs_) {
    const double cap = f.dist > 0.0 ? 1.0 / (2.0 * f.dist) : static_cast<double>(m);
    acc += 2.0 * std::abs(f.c) * std::min(static_cast<double>(m), cap);
  }
  return acc;
}

void SumKernel::sweep_sums(
    const std::vector<Point>& zs, long long m_max,
    const std::function<void(long long, const std::vector<double>&)>& visit) const {
  if (m_max > policy_.max_iterate) {
    throw PrecisionError("sweep_sums: m exceeds the certified iterate range");
  }
  const std::size_t nz = zs.size();
  const std::size_t nf = freqs_.size();
  if (static_cast<double>(nz) * static_cast<double>(m_max) > 6.7e7) {
    throw PrecisionError("sweep_sums: sweep buffer exceeds the supported size");
  }
  // z-major: the per-point phase state stays cache resident; results are
  // buffered and visited afterwards in m order.
  std::vector<double> matrix(static_cast<std::size_t>(m_max) * nz);
  std::vector<double> ur(nf), ui(nf), rr(nf), ri(nf), cr(nf), ci(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const double wr = 2.0 * M_PI * freqs_[i].omega.hi;
    rr[i] = std::cos(wr);
    ri[i] = std::sin(wr);
    cr[i] = freqs_[i].c.real();
    ci[i] = freqs_[i].c.imag();
  }
  for (std::size_t zi = 0; zi < nz; ++zi) {
    auto refresh = [&](long long mstep) {
      const Point zz = translate(zs[zi], mstep);
      for (std::size_t i = 0; i < nf; ++i) {
        const double ph = 2.0 * M_PI * frac_phase(freqs_[i].l, zz.x, freqs_[i].j, zz.y);
        ur[i] = std::cos(ph);
        ui[i] = std::sin(ph);
      }
    };
    refresh(0);
    double sum = 0.0, comp = 0.0;
    double* __restrict pur = ur.data();
    double* __restrict pui = ui.data();
    const double* __restrict prr = rr.data();
    const double* __restrict pri = ri.data();
    const double* __restrict pcr = cr.data();
    const double* __restrict pci = ci.data();
    for (long long m = 1; m <= m_max; ++m) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nf; ++i) {
        acc += pcr[i] * pur[i] - pci[i] * pui[i];
        const double nr = pur[i] * prr[i] - pui[i] * pri[i];
        const double ni = pur[i] * pri[i] + pui[i] * prr[i];
        pur[i] = nr;
        pui[i] = ni;
      }
      const double value = phi0_ + 2.0 * acc;
      const double t = sum + value;
      if (std::abs(sum) >= std::abs(value)) {
        comp += (sum - t) + value;
      } else {
        comp += (value - t) + sum;
      }
      sum = t;
      matrix[static_cast<std::size_t>(m - 1) * nz + zi] = sum + comp;
      if ((m & 4095) == 0 && m < m_max) refresh(m);
    }
  }
  std::vector<double> snapshot(nz);
  for (long long m = 1; m <= m_max; ++m) {
    for (std::size_t zi = 0; zi < nz; ++zi) {
      snapshot[zi] = matrix[static_cast<std::size_t>(m - 1) * nz + zi];
    }
    visit(m, snapshot);
  }
}

}  // namespace specflow::birkhoff
