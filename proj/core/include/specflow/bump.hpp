#pragma once

namespace specflow::ceiling {

// Smooth step theta(s) = f(s) / (f(s) + f(1-s)) with f(s) = exp(-1/s) for
// s > 0, else 0. Plateaus exactly: 0 for s <= 0, 1 for s >= 1, strictly
// increasing in between, C-infinity everywhere.
double bump(double s);
double bump_d1(double s);
double bump_d2(double s);

// sup |theta^(p)| for p = 0..6. p <= 2 from the closed-form derivatives,
// p >= 3 measured by high-order finite differences on a dense grid (the
// values only feed reported bounds, not exactness checks).
double bump_cp_norm(int p);

}  // namespace specflow::ceiling
