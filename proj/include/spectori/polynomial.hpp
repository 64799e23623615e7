#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "core.hpp"

namespace spectori {

// Coefficients are stored low degree first.
using Poly = std::vector<Complex>;

inline Poly poly_from_roots(const std::vector<Complex>& roots) {
  Poly c{1.0};
  for (const Complex& r : roots) {
    Poly next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return c;
}

inline Complex poly_eval(const Poly& c, Complex z) {
  Complex acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
  return acc;
}

inline Complex product_eval(const std::vector<Complex>& roots, Complex z) {
  Complex acc = 1.0;
  for (const Complex& r : roots) acc *= (z - r);
  return acc;
}

inline Poly poly_derivative(const Poly& c) {
  if (c.size() <= 1) return Poly{0.0};
  Poly d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = double(k) * c[k];
  return d;
}

// Roots of a polynomial with nonzero leading coefficient: companion-matrix
// eigenvalues followed by a few Newton polishing steps.
inline std::vector<Complex> poly_roots(const Poly& c) {
  std::size_t deg = c.size() - 1;
  while (deg > 0 && c[deg] == Complex(0.0)) --deg;
  if (deg == 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (std::size_t i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  Poly trimmed(c.begin(), c.begin() + deg + 1);
  Poly d = poly_derivative(trimmed);
  for (Complex& r : roots) {
    for (int it = 0; it < 4; ++it) {
      Complex dp = poly_eval(d, r);
      if (std::abs(dp) == 0.0) break;
      Complex step = poly_eval(trimmed, r) / dp;
      if (!std::isfinite(std::abs(step))) break;
      r -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(r))) break;
    }
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

}  // namespace spectori
