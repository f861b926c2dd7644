#include "specflow/trigpoly.hpp"

#include <algorithm>
#include <cmath>

namespace specflow::ceiling {

namespace {

inline bool canonical(std::int32_t l, std::int32_t j) {
  return l > 0 || (l == 0 && j > 0);
}

}  // namespace

void TrigPolynomial::add(std::int32_t l, std::int32_t j, std::complex<double> c) {
  if (l == 0 && j == 0) {
    constant_ += c.real();
    return;
  }
  if (!canonical(l, j)) {
    l = -l;
    j = -j;
    c = std::conj(c);
  }
  terms_.push_back({l, j, c});
}

void TrigPolynomial::finalize() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return a.l != b.l ? a.l < b.l : a.j < b.j;
  });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!merged.empty() && merged.back().l == t.l && merged.back().j == t.j) {
      merged.back().c += t.c;
    } else {
      merged.push_back(t);
    }
  }
  terms_ = std::move(merged);
}

std::complex<double> TrigPolynomial::coefficient(std::int32_t l, std::int32_t j) const {
  if (l == 0 && j == 0) return constant_;
  bool flip = !canonical(l, j);
  if (flip) {
    l = -l;
    j = -j;
  }
  auto it = std::lower_bound(terms_.begin(), terms_.end(), std::pair(l, j),
                             [](const Term& t, const std::pair<int, int>& key) {
                               return t.l != key.first ? t.l < key.first : t.j < key.second;
                             });
  if (it == terms_.end() || it->l != l || it->j != j) return {0.0, 0.0};
  return flip ? std::conj(it->c) : it->c;
}

double TrigPolynomial::eval(double x, double y) const {
  double acc = constant_;
  for (const Term& t : terms_) {
    const double ph = 2.0 * M_PI * (t.l * x + t.j * y);
    acc += 2.0 * (t.c.real() * std::cos(ph) - t.c.imag() * std::sin(ph));
  }
  return acc;
}

double TrigPolynomial::eval_deriv(double x, double y, int dx, int dy) const {
  if (dx == 0 && dy == 0) return eval(x, y);
  double acc = 0.0;
  for (const Term& t : terms_) {
    // (2 pi i l)^dx (2 pi i j)^dy c
    std::complex<double> factor(1.0, 0.0);
    for (int k = 0; k < dx; ++k) factor *= std::complex<double>(0.0, 2.0 * M_PI * t.l);
    for (int k = 0; k < dy; ++k) factor *= std::complex<double>(0.0, 2.0 * M_PI * t.j);
    const std::complex<double> c = t.c * factor;
    const double ph = 2.0 * M_PI * (t.l * x + t.j * y);
    acc += 2.0 * (c.real() * std::cos(ph) - c.imag() * std::sin(ph));
  }
  return acc;
}

double TrigPolynomial::l1_norm() const {
  double s = 0.0;
  for (const Term& t : terms_) s += 2.0 * std::abs(t.c);
  return s;
}

double TrigPolynomial::deriv_bound(int dx, int dy) const {
  double s = (dx == 0 && dy == 0) ? std::abs(constant_) : 0.0;
  for (const Term& t : terms_) {
    double f = 2.0 * std::abs(t.c);
    for (int k = 0; k < dx; ++k) f *= 2.0 * M_PI * std::abs(static_cast<double>(t.l));
    for (int k = 0; k < dy; ++k) f *= 2.0 * M_PI * std::abs(static_cast<double>(t.j));
    s += f;
  }
  return s;
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& other) {
  constant_ += other.constant_;
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  finalize();
  return *this;
}

}  // namespace specflow::ceiling
