#include "specflow/arith.hpp"

#include <mpfr.h>

#include <cmath>

namespace specflow::arith {

std::vector<Convergent> cf_convergents(const std::vector<mpz_class>& quotients) {
  if (quotients.empty()) {
    throw InvalidArgument("cf_convergents: empty quotient list");
  }
  if (quotients[0] < 0) {
    throw InvalidArgument("cf_convergents: a0 must be >= 0");
  }
  for (std::size_t i = 1; i < quotients.size(); ++i) {
    if (quotients[i] < 1) {
      throw InvalidArgument("cf_convergents: quotients after a0 must be >= 1");
    }
  }
  std::vector<Convergent> out;
  out.reserve(quotients.size());
  // Standard seeds: p_{-1}=1, q_{-1}=0, p_{-2}=0, q_{-2}=1.
  mpz_class pm1 = 1, qm1 = 0, pm2 = 0, qm2 = 1;
  for (const auto& a : quotients) {
    mpz_class p = a * pm1 + pm2;
    mpz_class q = a * qm1 + qm2;
    pm2 = pm1;
    qm2 = qm1;
    pm1 = p;
    qm1 = q;
    out.push_back({p, q});
  }
  return out;
}

mpq_class dist_to_int(const mpq_class& x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  mpq_class frac = x - mpq_class(fl);
  mpq_class other = 1 - frac;
  return frac < other ? frac : other;
}

double dist_to_int(double x) {
  double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

mpq_class signed_frac(const mpq_class& x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  mpq_class frac = x - mpq_class(fl);
  if (frac >= mpq_class(1, 2)) {
    frac -= 1;
    if (frac == mpq_class(-1, 2)) frac = mpq_class(1, 2);
  }
  return frac;
}

CFNumber::CFNumber(std::vector<mpz_class> quotients, int precision_bits, Tail tail)
    : quotients_(std::move(quotients)),
      convergents_(cf_convergents(quotients_)),
      precision_bits_(precision_bits),
      tail_(tail) {
  if (precision_bits_ < 2) {
    throw InvalidArgument("CFNumber: precision_bits must be >= 2");
  }
}

mpq_class CFNumber::value_exact() const {
  const auto& cv = convergents_;
  const std::size_t n = cv.size();
  if (tail_ == Tail::exact || n < 2) {
    return mpq_class(cv.back().p, cv.back().q);
  }
  // [a0;...,aN,2]: one extra quotient 2, the half-way continuation.
  mpz_class p = 2 * cv[n - 1].p + cv[n - 2].p;
  mpz_class q = 2 * cv[n - 1].q + cv[n - 2].q;
  mpq_class v(p, q);
  v.canonicalize();
  return v;
}

mpq_class cf_value(const CFNumber& cf, int bits) {
  const auto& cv = cf.convergents();
  if (cv.size() < 2) {
    throw InvalidArgument("cf_value: need at least 2 convergents");
  }
  const mpq_class value = cf.value_exact();
  if (bits < 1) throw PrecisionError("cf_value: bits must be >= 1");

  // 2^-bits must separate the value from both final convergents, otherwise
  // the rounded result is indistinguishable from a stored convergent.
  mpq_class step(1);
  step >>= static_cast<unsigned>(bits);  // 1/2^bits
  const std::size_t n = cv.size();
  mpq_class last(cv[n - 1].p, cv[n - 1].q);
  mpq_class prev(cv[n - 2].p, cv[n - 2].q);
  mpq_class d1 = abs(value - last);
  mpq_class d2 = abs(value - prev);
  if (cf.tail() == Tail::unspecified && (step >= d1 || step >= d2)) {
    throw PrecisionError("cf_value: bits too small to separate the last two convergents");
  }
  if (cf.tail() == Tail::exact) {
    // Terminating fraction: representable exactly at any precision that
    // resolves its denominator; gap check against the previous convergent.
    if (step >= abs(last - prev)) {
      throw PrecisionError("cf_value: bits too small to separate the last two convergents");
    }
    return value;
  }
  // Round to the nearest multiple of 2^-bits.
  mpq_class scaled = value;
  scaled <<= static_cast<unsigned>(bits);
  mpz_class rounded;
  mpz_class num = scaled.get_num(), den = scaled.get_den();
  mpz_class twice = 2 * num + den;  // round(num/den) = floor((2num+den)/(2den))
  mpz_class dd2 = 2 * den;
  mpz_fdiv_q(rounded.get_mpz_t(), twice.get_mpz_t(), dd2.get_mpz_t());
  mpq_class out(rounded);
  out >>= static_cast<unsigned>(bits);
  return out;
}

bool PrecisionPolicy::admits(const mpz_class& max_q) const {
  if (bits < 2 || max_iterate < 1) return false;
  const std::size_t qbits = mpz_sizeinbase(max_q.get_mpz_t(), 2);
  int mbits = 1;
  while ((1LL << mbits) < max_iterate && mbits < 62) ++mbits;
  return bits >= mbits + static_cast<int>(qbits) + 64;
}

void PrecisionPolicy::require(const mpz_class& max_q) const {
  if (!admits(max_q)) {
    throw PrecisionError("PrecisionPolicy: bits insufficient for max_iterate at this schedule");
  }
}

std::vector<mpz_class> cf_expand(double x, int max_terms) {
  if (!(max_terms > 0)) throw InvalidArgument("cf_expand: max_terms must be > 0");
  std::vector<mpz_class> out;
  double y = x;
  for (int i = 0; i < max_terms; ++i) {
    double a = std::floor(y);
    out.emplace_back(static_cast<long>(a));
    double rem = y - a;
    if (rem < 0x1p-40) break;
    y = 1.0 / rem;
  }
  return out;
}

Dd to_dd_mod1(const mpq_class& x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  mpq_class frac = x - mpq_class(fl);
  mpfr_t t;
  mpfr_init2(t, 160);
  mpfr_set_q(t, frac.get_mpq_t(), MPFR_RNDN);
  double hi = mpfr_get_d(t, MPFR_RNDN);
  mpfr_sub_d(t, t, hi, MPFR_RNDN);
  double lo = mpfr_get_d(t, MPFR_RNDN);
  mpfr_clear(t);
  return {hi, lo};
}

double frac_mul(long long m, const Dd& w) {
  // m * hi split into an exact product pair via fma.
  double md = static_cast<double>(m);
  double p = md * w.hi;
  double err = std::fma(md, w.hi, -p);
  // p - floor(p) is exact (Sterbenz), the correction terms are tiny.
  double frac_hi = p - std::floor(p);
  double rest = err + md * w.lo;
  double r = frac_hi + rest;
  r -= std::floor(r);
  if (r >= 1.0) r = 0.0;
  return r;
}

}  // namespace specflow::arith
