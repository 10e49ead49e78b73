#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

namespace dyson::detail {

using cvec = std::vector<std::complex<double>>;

// Coefficients are stored in ascending order: p[k] multiplies G^k.
inline cvec poly_mul(const cvec& a, const cvec& b) {
  cvec r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline void poly_axpy(cvec& acc, std::complex<double> s, const cvec& p) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) acc[k] += s * p[k];
}

inline std::complex<double> poly_eval(const cvec& p, std::complex<double> x) {
  std::complex<double> r = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) r = r * x + p[k];
  return r;
}

inline std::complex<double> poly_deriv_eval(const cvec& p, std::complex<double> x) {
  std::complex<double> r = 0.0;
  for (std::size_t k = p.size(); k-- > 1;) r = r * x + static_cast<double>(k) * p[k];
  return r;
}

// Sum of |p_k| |x|^k, the natural scale for a relative residual.
inline double poly_abs_eval(const cvec& p, double ax) {
  double r = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) r = r * ax + std::abs(p[k]);
  return r;
}

inline cvec poly_roots(const cvec& p) {
  std::size_t deg = p.size() - 1;
  while (deg > 0 && p[deg] == 0.0) --deg;
  if (deg == 0) return {};
  if (deg == 1) return {-p[0] / p[1]};
  Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1> c(deg + 1);
  for (std::size_t k = 0; k <= deg; ++k) c[static_cast<Eigen::Index>(k)] = p[k];
  Eigen::PolynomialSolver<std::complex<double>, Eigen::Dynamic> solver(c);
  const auto& r = solver.roots();
  return cvec(r.data(), r.data() + r.size());
}

inline std::complex<double> newton_polish(const cvec& p, std::complex<double> x, int iters = 3) {
  for (int i = 0; i < iters; ++i) {
    const auto d = poly_deriv_eval(p, x);
    if (d == 0.0) break;
    const auto step = poly_eval(p, x) / d;
    const auto next = x - step;
    if (std::abs(poly_eval(p, next)) > std::abs(poly_eval(p, x))) break;
    x = next;
  }
  return x;
}

}  // namespace dyson::detail
