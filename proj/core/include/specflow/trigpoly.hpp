#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace specflow::ceiling {

struct Term {
  std::int32_t l = 0;
  std::int32_t j = 0;
  std::complex<double> c;
};

/// Real trigonometric polynomial on T^2 stored as its canonical half
/// spectrum: the constant plus terms with l > 0 or (l == 0 and j > 0); the
/// conjugate frequencies are implied, so evaluation is exactly real.
class TrigPolynomial {
 public:
  TrigPolynomial() = default;

  // Folds (l,j) into the canonical half; (0,0) accumulates into the constant.
  void add(std::int32_t l, std::int32_t j, std::complex<double> c);
  // Sorts terms by (l, j) and merges duplicates. Call once after the last add.
  void finalize();

  double constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }

  // Full-spectrum coefficient lookup (0 when absent); finalize() first.
  std::complex<double> coefficient(std::int32_t l, std::int32_t j) const;

  double eval(double x, double y) const;
  // D_x^dx D_y^dy evaluation.
  double eval_deriv(double x, double y, int dx, int dy) const;

  // sum of |c| over the full spectrum (constant excluded).
  double l1_norm() const;
  // sup-norm bounds of the partial derivatives: sum |c| (2pi|l|)^dx (2pi|j|)^dy.
  double deriv_bound(int dx, int dy) const;

  TrigPolynomial& operator+=(const TrigPolynomial& other);

 private:
  double constant_ = 0.0;
  std::vector<Term> terms_;
};

}  // namespace specflow::ceiling
