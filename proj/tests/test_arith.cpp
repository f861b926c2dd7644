#include <doctest.h>
#include <mpfr.h>

#include <vector>

#include "specflow/arith.hpp"
#include "specflow/rng.hpp"

using namespace specflow;
using namespace specflow::arith;

namespace {

// Independent oracle: exact value of a finite continued fraction by folding
// from the right in rational arithmetic.
mpq_class fold_value(const std::vector<mpz_class>& quotients) {
  mpq_class v(quotients.back());
  for (std::size_t i = quotients.size() - 1; i-- > 0;) {
    v = mpq_class(quotients[i]) + 1 / v;
  }
  return v;
}

std::vector<mpz_class> random_quotients(Rng& rng, int max_len, long max_entry) {
  const int len = 2 + static_cast<int>(rng.next_double() * (max_len - 2));
  std::vector<mpz_class> q;
  q.emplace_back(static_cast<long>(rng.next_double() * 3));  // a0 may be 0
  for (int i = 1; i < len; ++i) {
    q.emplace_back(1 + static_cast<long>(rng.next_double() * (max_entry - 1)));
  }
  return q;
}

}  // namespace

TEST_CASE("cf_convergents recurrence and coprimality") {
  // [0,2] -> (0,1), (1,2)
  auto cv = cf_convergents({0, 2});
  REQUIRE(cv.size() == 2);
  CHECK(cv[0].p == 0);
  CHECK(cv[0].q == 1);
  CHECK(cv[1].p == 1);
  CHECK(cv[1].q == 2);

  // [1,1,1,1,1]: the last convergent equals the exact folded value 8/5.
  auto cv2 = cf_convergents({1, 1, 1, 1, 1});
  mpq_class oracle = fold_value({1, 1, 1, 1, 1});
  CHECK(mpq_class(cv2.back().p, cv2.back().q) == oracle);
  CHECK(cv2.back().q == oracle.get_den());

  // [0,1000000]
  auto cv3 = cf_convergents({0, 1000000});
  CHECK(cv3[0].p == 0);
  CHECK(cv3[0].q == 1);
  CHECK(cv3[1].p == 1);
  CHECK(cv3[1].q == 1000000);

  CHECK_THROWS_AS(cf_convergents({}), InvalidArgument);

  Rng rng(5, 1, 0);
  for (int iter = 0; iter < 50; ++iter) {
    auto q = random_quotients(rng, 12, 30);
    auto c = cf_convergents(q);
    // every truncation agrees with the folded oracle and is coprime
    for (std::size_t k = 0; k < c.size(); ++k) {
      std::vector<mpz_class> prefix(q.begin(), q.begin() + k + 1);
      if (prefix.size() == 1 && prefix[0] == 0) {
        CHECK(c[k].p == 0);
        CHECK(c[k].q == 1);
        continue;
      }
      mpq_class v = fold_value(prefix);
      CHECK(mpq_class(c[k].p, c[k].q) == v);
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), c[k].p.get_mpz_t(), c[k].q.get_mpz_t());
      CHECK(g == 1);
    }
    // q_n strictly increasing from n >= 1
    for (std::size_t k = 2; k < c.size(); ++k) CHECK(c[k].q > c[k - 1].q);
  }
}

TEST_CASE("dist_to_int basics and symmetries") {
  CHECK(dist_to_int(mpq_class(1, 4)) == mpq_class(1, 4));
  CHECK(dist_to_int(mpq_class(15, 4)) == mpq_class(1, 4));
  CHECK(dist_to_int(mpq_class(17)) == 0);
  CHECK(dist_to_int(0.25) == doctest::Approx(0.25));
  CHECK(dist_to_int(3.75) == doctest::Approx(0.25));
  CHECK(dist_to_int(17.0) == 0.0);

  Rng rng(7, 2, 0);
  for (int i = 0; i < 200; ++i) {
    mpq_class x(static_cast<long>(rng.next_double() * 2000) - 1000,
                1 + static_cast<long>(rng.next_double() * 999));
    long k = static_cast<long>(rng.next_double() * 20) - 10;
    CHECK(dist_to_int(x) == dist_to_int(x + k));
    CHECK(dist_to_int(x) == dist_to_int(-x));
    CHECK(dist_to_int(x) >= 0);
    CHECK(dist_to_int(x) <= mpq_class(1, 2));
  }
}

TEST_CASE("cf_value: terminating fraction is exact") {
  CFNumber half({0, 2}, 64, Tail::exact);
  CHECK(cf_value(half, 64) == mpq_class(1, 2));
}

TEST_CASE("cf_value: golden-ratio prefix lands inside the cylinder") {
  std::vector<mpz_class> ones20(20, 1);
  CFNumber golden(ones20, 128, Tail::unspecified);
  mpq_class v = cf_value(golden, 128);

  // High-precision golden ratio oracle.
  mpfr_t t;
  mpfr_init2(t, 256);
  mpfr_sqrt_ui(t, 5, MPFR_RNDN);
  mpfr_add_ui(t, t, 1, MPFR_RNDN);
  mpfr_div_ui(t, t, 2, MPFR_RNDN);
  mpfr_t diff;
  mpfr_init2(diff, 256);
  mpfr_set_q(diff, v.get_mpq_t(), MPFR_RNDN);
  mpfr_sub(diff, diff, t, MPFR_RNDN);
  mpfr_abs(diff, diff, MPFR_RNDN);
  const double err20 = mpfr_get_d(diff, MPFR_RNDN);

  // Any value determined by a 20-term prefix sits within the cylinder of
  // diameter 1/(q19 (q19 + q18)); 1e-15 is unattainable at this depth.
  const auto& cv = golden.convergents();
  const mpq_class diam(mpz_class(1),
                       cv[19].q * (cv[19].q + cv[18].q));
  CHECK(err20 <= diam.get_d());

  // With 40 terms the same construction is 1e-15 close.
  std::vector<mpz_class> ones40(40, 1);
  CFNumber golden40(ones40, 192, Tail::unspecified);
  mpq_class v40 = cf_value(golden40, 192);
  mpfr_set_q(diff, v40.get_mpq_t(), MPFR_RNDN);
  mpfr_sub(diff, diff, t, MPFR_RNDN);
  mpfr_abs(diff, diff, MPFR_RNDN);
  CHECK(mpfr_get_d(diff, MPFR_RNDN) < 1e-15);
  mpfr_clear(t);
  mpfr_clear(diff);
}

TEST_CASE("cf_value: insufficient bits raise a precision error") {
  CFNumber cf({0, 3}, 64, Tail::unspecified);
  CHECK_THROWS_AS(cf_value(cf, 2), PrecisionError);
}

TEST_CASE("value_exact lies strictly between the last two convergents") {
  Rng rng(11, 3, 0);
  for (int iter = 0; iter < 100; ++iter) {
    auto q = random_quotients(rng, 10, 20);
    CFNumber cf(q, 96, Tail::unspecified);
    const auto& cv = cf.convergents();
    if (cv.size() < 2) continue;
    mpq_class last(cv.back().p, cv.back().q);
    mpq_class prev(cv[cv.size() - 2].p, cv[cv.size() - 2].q);
    mpq_class v = cf.value_exact();
    CHECK(v != last);
    CHECK(v != prev);
    CHECK(((prev < v && v < last) || (last < v && v < prev)));
  }
}

TEST_CASE("convergent inequalities (lower and upper) in exact arithmetic") {
  Rng rng(13, 4, 0);
  for (int iter = 0; iter < 100; ++iter) {
    auto q = random_quotients(rng, 12, 25);
    CFNumber cf(q, 96, Tail::unspecified);
    const mpq_class alpha = cf.value_exact();
    const auto& cv = cf.convergents();
    for (std::size_t n = 0; n + 1 < cv.size(); ++n) {
      mpq_class err = abs(alpha - mpq_class(cv[n].p, cv[n].q));
      mpq_class upper(mpz_class(1), cv[n].q * cv[n + 1].q);
      mpq_class lower(mpz_class(1), cv[n].q * (cv[n].q + cv[n + 1].q));
      CHECK(err <= upper);
      CHECK(err >= lower);
    }
  }
}

TEST_CASE("best-approximation minimality of |||q alpha||| (brute force)") {
  Rng rng(17, 5, 0);
  int checked = 0;
  for (int iter = 0; iter < 40; ++iter) {
    auto qs = random_quotients(rng, 8, 12);
    CFNumber cf(qs, 96, Tail::unspecified);
    const mpq_class alpha = cf.value_exact();
    const auto& cv = cf.convergents();
    for (std::size_t n = 1; n < cv.size(); ++n) {
      if (cv[n].q > 10000) break;
      const mpq_class best = dist_to_int(mpq_class(cv[n - 1].q) * alpha);
      for (mpz_class q = 1; q < cv[n].q; ++q) {
        if (q == cv[n - 1].q) continue;
        CHECK(best < dist_to_int(mpq_class(q) * alpha));
      }
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("PrecisionPolicy budget") {
  PrecisionPolicy p{192, 1'000'000};
  CHECK(p.admits(mpz_class(1) << 40));
  PrecisionPolicy tiny{80, 1'000'000};
  CHECK_FALSE(tiny.admits(mpz_class(1) << 40));
  CHECK_THROWS_AS(tiny.require(mpz_class(1) << 40), PrecisionError);
}

TEST_CASE("double-double reduction matches exact rational reduction") {
  Rng rng(19, 6, 0);
  for (int i = 0; i < 200; ++i) {
    mpq_class w(1 + static_cast<long>(rng.next_double() * 999983),
                1000003 + static_cast<long>(rng.next_double() * 999983));
    w = w - mpq_class(static_cast<long>(rng.next_double() * 3));
    Dd dd = to_dd_mod1(w);
    const long long m = 1 + static_cast<long long>(rng.next_double() * 100000);
    const double got = frac_mul(m, dd);
    // exact {m w}
    mpq_class mw = mpq_class(static_cast<long>(m)) * w;
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), mw.get_num().get_mpz_t(), mw.get_den().get_mpz_t());
    const double expect = mpq_class(mw - mpq_class(fl)).get_d();
    const double diff = std::min(std::abs(got - expect), 1.0 - std::abs(got - expect));
    CHECK(diff < 1e-12);
  }
}

TEST_CASE("cf_expand round-trips simple rationals") {
  auto q = cf_expand(0.5, 10);
  CHECK(fold_value(q) == mpq_class(1, 2));
  auto q2 = cf_expand(2.25, 10);
  CHECK(fold_value(q2) == mpq_class(9, 4));
}
