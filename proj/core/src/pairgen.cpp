#include "specflow/pairgen.hpp"

#include <mpfr.h>

#include <cmath>
#include <sstream>

namespace specflow::pairgen {

namespace {

// ceil of e^x (x in nats), exact for results below ~2^1000.
mpz_class ceil_exp(double x) {
  mpfr_t t;
  mpfr_init2(t, 1024);
  mpfr_set_d(t, x, MPFR_RNDU);
  mpfr_exp(t, t, MPFR_RNDU);
  mpfr_ceil(t, t);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), t, MPFR_RNDN);
  mpfr_clear(t);
  return out;
}

mpz_class ceil_pow(const mpz_class& q, double k) {
  if (k == std::floor(k) && k >= 1.0 && k < 64.0) {
    mpz_class out;
    mpz_pow_ui(out.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(k));
    return out;
  }
  mpfr_t t;
  mpfr_init2(t, 1024);
  mpfr_set_z(t, q.get_mpz_t(), MPFR_RNDU);
  mpfr_log(t, t, MPFR_RNDU);
  mpfr_mul_d(t, t, k, MPFR_RNDU);
  mpfr_exp(t, t, MPFR_RNDU);
  mpfr_ceil(t, t);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), t, MPFR_RNDN);
  mpfr_clear(t);
  return out;
}

// Incremental continued-fraction extension.
struct CfState {
  std::vector<mpz_class> quotients;
  std::vector<arith::Convergent> conv;

  explicit CfState(std::vector<mpz_class> qs)
      : quotients(std::move(qs)), conv(arith::cf_convergents(quotients)) {}

  std::size_t last_index() const { return conv.size() - 1; }
  const mpz_class& q_last() const { return conv.back().q; }
  const mpz_class& q_before() const {
    static const mpz_class zero(0);  // recurrence seed q_{-1} = 0
    return conv.size() >= 2 ? conv[conv.size() - 2].q : zero;
  }

  void append(const mpz_class& a) {
    quotients.push_back(a);
    const std::size_t n = conv.size();
    mpz_class p2 = (n >= 2) ? conv[n - 2].p : mpz_class(1);
    mpz_class q2 = (n >= 2) ? conv[n - 2].q : mpz_class(0);
    conv.push_back({a * conv[n - 1].p + p2, a * conv[n - 1].q + q2});
  }
};

mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

bool coprime(const mpz_class& a, const mpz_class& b) {
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g == 1;
}

}  // namespace

GrowthLaw GrowthLaw::paper_exponential() {
  GrowthLaw g;
  g.kind = Kind::paper_exponential;
  return g;
}

GrowthLaw GrowthLaw::power(double k, mpz_class c) {
  GrowthLaw g;
  g.kind = Kind::power;
  g.exponent = k;
  g.floor_c = std::move(c);
  return g;
}

GrowthLaw GrowthLaw::explicit_floors(std::vector<mpz_class> f) {
  GrowthLaw g;
  g.kind = Kind::explicit_floors;
  g.floors = std::move(f);
  return g;
}

mpz_class GrowthLaw::eval(const mpz_class& q, std::size_t step_index,
                          const mpz_class& budget) const {
  mpz_class floor_val;
  std::string floor_name;
  switch (kind) {
    case Kind::paper_exponential: {
      const double qd = q.get_d();
      const double log_budget = std::log(budget.get_d());
      if (3.0 * qd > log_budget) {
        std::ostringstream msg;
        msg << "infeasible growth floor e^(3*" << q.get_str()
            << ") exceeds schedule budget " << budget.get_str();
        throw InfeasibleScale(msg.str());
      }
      floor_val = ceil_exp(3.0 * qd);
      break;
    }
    case Kind::power:
      floor_val = ceil_pow(q, exponent);
      if (floor_val < floor_c) floor_val = floor_c;
      break;
    case Kind::explicit_floors:
      floor_val = (step_index < floors.size()) ? floors[step_index] : q + 1;
      break;
  }
  if (floor_val <= q) floor_val = q + 1;  // G(q) > q
  if (floor_val > budget) {
    std::ostringstream msg;
    msg << "growth floor " << floor_val.get_str() << " exceeds schedule budget "
        << budget.get_str();
    throw InfeasibleScale(msg.str());
  }
  return floor_val;
}

std::string GrowthLaw::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::paper_exponential:
      os << "paper-exponential";
      break;
    case Kind::power:
      os << "power(k=" << exponent << ", C=" << floor_c.get_str() << ")";
      break;
    case Kind::explicit_floors: {
      os << "explicit-floor-list(";
      for (std::size_t i = 0; i < floors.size(); ++i) {
        if (i) os << ",";
        os << floors[i].get_str();
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

mpz_class BuildOptions::default_budget() {
  mpz_class b;
  mpz_ui_pow_ui(b.get_mpz_t(), 10, 51);
  return 15 * b;  // ~e^120: paper law becomes infeasible past q = 40
}

const LevelSchedule& YPair::level(int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > levels.size()) {
    throw InvalidArgument("YPair::level: index out of range");
  }
  return levels[static_cast<std::size_t>(k - 1)];
}

mpz_class YPair::max_denominator() const {
  mpz_class m = alpha.convergents().back().q;
  const mpz_class& m2 = alpha_prime.convergents().back().q;
  return m > m2 ? m : m2;
}

YPair build_pair(const GrowthLaw& law, int levels, const PairSeed& seed,
                 const BuildOptions& opts) {
  if (levels < 1) throw InvalidArgument("build_pair: levels must be >= 1");
  if (opts.n_first < 3) {
    throw InvalidArgument("build_pair: n_first must be >= 3 (1-2/n windows degenerate)");
  }

  CfState a(seed.alpha_quotients);
  CfState ap(seed.alpha_prime_quotients);

  // Level 1 reads its q from the seed; make sure it is a usable denominator.
  while (a.q_last() < 2) a.append(2);

  std::vector<LevelSchedule> schedule;
  schedule.reserve(static_cast<std::size_t>(levels));

  // Margin floors derived from the previous level's tower geometry: the
  // hh-inclusions of level k-1 need the next denominators at least
  // mf * h * n^2/(n-1) (x side, divided by q for the y side).
  mpz_class margin_q_floor = 0, margin_a_floor = 0;
  auto level_margin_floors = [&](const LevelSchedule& prev) {
    const long n = prev.n;
    mpz_class r = prev.q_prime / (prev.q * prev.q_prime_prev) - 1;
    if (r < 1) r = 1;
    mpz_class h = ((n - 2) * r / n) * prev.q * prev.q_prime_prev;
    if (h < 1) h = 1;
    const long mf1000 = static_cast<long>(opts.margin_factor * 1000.0);
    mpz_class base = mf1000 * h * n * n;
    margin_q_floor = ceil_div(base, mpz_class(1000) * (n - 1));
    margin_a_floor = ceil_div(base, mpz_class(1000) * (n - 1) * prev.q);
  };

  for (int k = 1; k <= levels; ++k) {
    LevelSchedule lv;
    lv.n = opts.n_first + (k - 1);

    if (k > 1) {
      level_margin_floors(schedule.back());
      // q_{n+1} >= G(q'_n) along built levels, and past the margin floor.
      mpz_class floor_q =
          law.eval(schedule.back().q_prime, 2 * static_cast<std::size_t>(k) - 3, opts.budget);
      if (floor_q < margin_q_floor) floor_q = margin_q_floor;
      mpz_class amin = ceil_div(floor_q - a.q_before(), a.q_last());
      if (amin < 1) amin = 1;
      a.append(amin);
      if (a.q_last() > opts.budget) {
        throw InfeasibleScale("build_pair: alpha denominator exceeds schedule budget");
      }
    }
    lv.alpha_index = a.last_index();
    lv.q = a.conv[lv.alpha_index].q;
    lv.p = a.conv[lv.alpha_index].p;

    // Place q'_{n-1} at an even index of alpha'. Reuse the seed's last
    // convergent for level 1 when its parity and gcd already fit; otherwise
    // pad with quotient 1 ("quotient adjustment") and extend past the
    // margin floor.
    bool reuse = (k == 1) && (ap.last_index() % 2 == 0) && coprime(lv.q, ap.q_last());
    if (!reuse) {
      if (ap.last_index() % 2 == 0) ap.append(1);  // pad: next append lands even
      mpz_class cand_a = ceil_div(margin_a_floor - ap.q_before(), ap.q_last());
      if (cand_a < 1) cand_a = 1;
      while (true) {
        mpz_class cand = cand_a * ap.q_last() + ap.q_before();
        if (cand >= margin_a_floor && coprime(lv.q, cand)) break;
        ++cand_a;
      }
      ap.append(cand_a);
    }
    lv.ap_prev_index = ap.last_index();
    lv.q_prime_prev = ap.conv[lv.ap_prev_index].q;
    lv.p_prime_prev = ap.conv[lv.ap_prev_index].p;

    // q'_n >= G(q_n), odd index, coprime with q_n.
    const mpz_class floor_b =
        law.eval(lv.q, 2 * static_cast<std::size_t>(k) - 2, opts.budget);
    mpz_class bmin = ceil_div(floor_b - ap.q_before(), ap.q_last());
    if (bmin < 1) bmin = 1;
    while (true) {
      mpz_class cand = bmin * ap.q_last() + ap.q_before();
      if (cand >= floor_b && coprime(lv.q, cand)) break;
      ++bmin;
    }
    ap.append(bmin);
    if (ap.q_last() > opts.budget) {
      throw InfeasibleScale("build_pair: alpha' denominator exceeds schedule budget");
    }
    lv.ap_index = ap.last_index();
    lv.q_prime = ap.conv[lv.ap_index].q;
    lv.p_prime = ap.conv[lv.ap_index].p;
    lv.sign_positive = true;  // even prev index: alpha' > p'/q' holds

    schedule.push_back(lv);
  }

  // Closing quotients: push the next scale of both expansions far enough out
  // that the last level's tower margins hold exactly (the desk analogue of
  // the paper's q_{n+1} >= e^{3 q'_n}).
  {
    const LevelSchedule& lv = schedule.back();
    const long n = lv.n;
    mpz_class r = lv.q_prime / (lv.q * lv.q_prime_prev) - 1;
    if (r < 1) r = 1;
    mpz_class h = ((n - 2) * r / n) * lv.q * lv.q_prime_prev;
    if (h < 1) h = 1;
    // q_next >= closure * h * n^2 / (n-1), q'_next >= closure * h * n^2 / ((n-1) q).
    mpz_class q_next_req = ceil_div(opts.closure_factor * h * n * n, mpz_class(n - 1));
    mpz_class qp_next_req = ceil_div(opts.closure_factor * h * n * n, (n - 1) * lv.q);
    mpz_class ca = ceil_div(q_next_req - a.q_before(), a.q_last());
    if (ca < 1) ca = 1;
    a.append(ca);
    mpz_class cap = ceil_div(qp_next_req - ap.q_before(), ap.q_last());
    if (cap < 1) cap = 1;
    ap.append(cap);
  }

  YPair pair{
      arith::CFNumber(a.quotients, opts.precision_bits, arith::Tail::unspecified),
      arith::CFNumber(ap.quotients, opts.precision_bits, arith::Tail::unspecified),
      std::move(schedule),
      opts,
      {},
      {}};
  pair.alpha_value = pair.alpha.value_exact();
  pair.alpha_prime_value = pair.alpha_prime.value_exact();
  return pair;
}

PairReport verify_pair(const GrowthLaw& law, const YPair& pair) {
  PairReport report;
  const auto& lvs = pair.levels;
  for (std::size_t i = 0; i < lvs.size(); ++i) {
    const LevelSchedule& lv = lvs[i];
    LevelVerdict v;
    v.n = lv.n;
    try {
      v.growth_qprime = lv.q_prime >= law.eval(lv.q, 2 * i, pair.options.budget);
    } catch (const InfeasibleScale&) {
      v.growth_qprime = false;
    }
    if (i + 1 < lvs.size()) {
      v.growth_next_defined = true;
      try {
        v.growth_next = lvs[i + 1].q >= law.eval(lv.q_prime, 2 * i + 1, pair.options.budget);
      } catch (const InfeasibleScale&) {
        v.growth_next = false;
      }
    }
    {
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), lv.q.get_mpz_t(), lv.q_prime_prev.get_mpz_t());
      v.coprime_prev = (g == 1);
      mpz_gcd(g.get_mpz_t(), lv.q.get_mpz_t(), lv.q_prime.get_mpz_t());
      v.coprime_cur = (g == 1);
    }
    {
      mpq_class diff = pair.alpha_prime_value - mpq_class(lv.p_prime_prev, lv.q_prime_prev);
      const bool actual_positive = diff > 0;
      v.parity = (actual_positive == lv.sign_positive) && actual_positive;
    }
    report.levels.push_back(v);
  }
  report.pass = true;
  for (const auto& v : report.levels) report.pass = report.pass && v.pass();
  report.first_all_pass_level = 0;
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    bool tail_ok = true;
    for (std::size_t j = i; j < report.levels.size(); ++j) {
      tail_ok = tail_ok && report.levels[j].pass();
    }
    if (tail_ok) {
      report.first_all_pass_level = static_cast<int>(i + 1);
      break;
    }
  }
  return report;
}

std::string PairReport::to_string() const {
  std::ostringstream os;
  os << "level  n  growth(q'>=G(q))  growth(q_next>=G(q'))  gcd(q,q'_prev)  gcd(q,q')  parity\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& v = levels[i];
    os << (i + 1) << "  " << v.n << "  " << (v.growth_qprime ? "pass" : "FAIL") << "  "
       << (v.growth_next_defined ? (v.growth_next ? "pass" : "FAIL") : "vacuous") << "  "
       << (v.coprime_prev ? "pass" : "FAIL") << "  " << (v.coprime_cur ? "pass" : "FAIL")
       << "  " << (v.parity ? "pass" : "FAIL") << "\n";
  }
  os << "overall: " << (pass ? "pass" : "FAIL")
     << "  conditions hold from level: " << first_all_pass_level << "\n";
  return os.str();
}

}  // namespace specflow::pairgen
