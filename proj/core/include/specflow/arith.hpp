#pragma once

#include <gmpxx.h>

#include <vector>

#include "specflow/errors.hpp"

namespace specflow::arith {

struct Convergent {
  mpz_class p;
  mpz_class q;
};

// Whether a quotient list denotes the rational it terminates at, or the
// prefix of an otherwise unspecified expansion.
enum class Tail { exact, unspecified };

// Convergents of [a0; a1, a2, ...] by the standard recurrence
// p_n = a_n p_{n-1} + p_{n-2}, q_n = a_n q_{n-1} + q_{n-2}.
// Every entry after a0 must be >= 1; a0 may be 0.
std::vector<Convergent> cf_convergents(const std::vector<mpz_class>& quotients);

// |||x||| = min({x}, 1 - {x}), exact.
mpq_class dist_to_int(const mpq_class& x);
double dist_to_int(double x);

// Signed distance to the closest integer: x - round-to-nearest(x), in
// [-1/2, 1/2]. Ties resolve to +1/2.
mpq_class signed_frac(const mpq_class& x);

/// A real number represented by the partial quotients of its continued
/// fraction. Immutable after construction.
class CFNumber {
 public:
  CFNumber(std::vector<mpz_class> quotients, int precision_bits = 128,
           Tail tail = Tail::unspecified);

  const std::vector<mpz_class>& quotients() const { return quotients_; }
  const std::vector<Convergent>& convergents() const { return convergents_; }
  int precision_bits() const { return precision_bits_; }
  Tail tail() const { return tail_; }

  // The value this CFNumber stands for, exactly.
  //  - Tail::exact: p_N/q_N, the number the finite expansion terminates at.
  //  - Tail::unspecified: the half-way continuation [a0;...,aN,2], i.e. the
  //    midpoint of the cylinder of numbers sharing this prefix. It lies
  //    strictly between the last two convergents and never equals any stored
  //    convergent.
  mpq_class value_exact() const;

 private:
  std::vector<mpz_class> quotients_;
  std::vector<Convergent> convergents_;
  int precision_bits_;
  Tail tail_;
};

// value_exact rounded to the nearest multiple of 2^-bits (a dyadic rational,
// so the result is reproducible at any precision). Throws PrecisionError when
// 2^-bits cannot separate the value from both of the last two convergents.
mpq_class cf_value(const CFNumber& cf, int bits);

/// Certifies how far orbit arithmetic may be trusted at a given precision.
struct PrecisionPolicy {
  int bits = 192;
  long long max_iterate = 10'000'000;

  // bits >= ceil(log2 max_iterate) + ceil(log2 max_q) + 64.
  bool admits(const mpz_class& max_q) const;
  void require(const mpz_class& max_q) const;  // throws PrecisionError
};

// Guarded helper for tests: CF expansion of a double (stops after max_terms
// quotients or when the remainder is below 2^-40).
std::vector<mpz_class> cf_expand(double x, int max_terms);

// A double-double split of a real in [0,1); hi + lo equals the value to
// ~2^-106.
struct Dd {
  double hi = 0.0;
  double lo = 0.0;
};

// Exact rational -> double-double, after reduction mod 1.
Dd to_dd_mod1(const mpq_class& x);

// {m * w} in [0,1) where w = hi + lo represents a real in [0,1).
// Exact two-product arithmetic; |m| must be < 2^52.
double frac_mul(long long m, const Dd& w);

}  // namespace specflow::arith
