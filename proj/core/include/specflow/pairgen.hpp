#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "specflow/arith.hpp"

namespace specflow::pairgen {

/// Floor rule for the alternating denominator schedule: each new denominator
/// must reach G(previous one).
struct GrowthLaw {
  enum class Kind { paper_exponential, power, explicit_floors };

  Kind kind = Kind::power;
  double exponent = 2.0;            // power
  mpz_class floor_c = 50;           // power
  std::vector<mpz_class> floors;    // explicit_floors, consumed in extension order

  static GrowthLaw paper_exponential();
  static GrowthLaw power(double k, mpz_class c);
  static GrowthLaw explicit_floors(std::vector<mpz_class> f);

  // Smallest integer the next denominator must reach after q. step_index
  // counts extensions in schedule order (used by explicit_floors).
  // Throws InfeasibleScale when the floor exceeds the budget; the message
  // names the offending floor.
  mpz_class eval(const mpz_class& q, std::size_t step_index, const mpz_class& budget) const;

  std::string describe() const;
};

/// One built level: the alpha convergent q and the alpha' pair
/// (q'_{n-1}, q'_n) it is matched with. n is the formula index driving the
/// 1/n windows and bump steepness.
struct LevelSchedule {
  int n = 0;
  mpz_class q, p;
  mpz_class q_prime_prev, p_prime_prev;
  mpz_class q_prime, p_prime;
  std::size_t alpha_index = 0;        // index into alpha.convergents()
  std::size_t ap_prev_index = 0;      // even index into alpha'.convergents()
  std::size_t ap_index = 0;           // ap_prev_index + 1
  bool sign_positive = false;         // recorded: alpha' - p'_{n-1}/q'_{n-1} > 0
};

struct PairSeed {
  std::vector<mpz_class> alpha_quotients{0, 2};
  std::vector<mpz_class> alpha_prime_quotients{0};
};

struct BuildOptions {
  int n_first = 5;
  mpz_class budget = default_budget();
  int closure_factor = 16;     // margin multiplier for the closing quotients
  double margin_factor = 1.5;  // inter-level margin floors protecting hh-geometry
  int precision_bits = 192;

  static mpz_class default_budget();  // 15 * 10^51, i.e. ~e^120
};

struct YPair {
  arith::CFNumber alpha{{0, 2}};
  arith::CFNumber alpha_prime{{0, 2}};
  std::vector<LevelSchedule> levels;
  BuildOptions options;

  mpq_class alpha_value;        // exact value used by all downstream modules
  mpq_class alpha_prime_value;

  const LevelSchedule& level(int k) const;  // 1-based
  mpz_class max_denominator() const;
};

// Deterministic: extends the two expansions alternately, each new quotient
// the smallest one meeting the growth floor, then incremented until the gcd
// conditions hold. alpha''s index pointer is padded so every level's
// (q'_{n-1}, q'_n) pair sits at an (even, odd) index pair, which fixes the
// sign convention at every level. Closing quotients sized from the last
// level's tower margins are appended at the end.
YPair build_pair(const GrowthLaw& law, int levels, const PairSeed& seed = {},
                 const BuildOptions& opts = {});

struct LevelVerdict {
  int n = 0;
  bool growth_qprime = false;      // q'_n >= G(q_n)
  bool growth_next = true;         // q_{n+1} >= G(q'_n); vacuous at last level
  bool growth_next_defined = false;
  bool coprime_prev = false;       // gcd(q_n, q'_{n-1}) == 1
  bool coprime_cur = false;        // gcd(q_n, q'_n) == 1
  bool parity = false;             // recorded sign matches exact arithmetic

  bool pass() const {
    return growth_qprime && growth_next && coprime_prev && coprime_cur && parity;
  }
};

struct PairReport {
  std::vector<LevelVerdict> levels;
  bool pass = false;
  int first_all_pass_level = 0;  // 1-based, 0 if none

  std::string to_string() const;
};

// Exact-arithmetic verdict for every schedule condition, per level.
PairReport verify_pair(const GrowthLaw& law, const YPair& pair);

}  // namespace specflow::pairgen
