#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dyson/error.hpp"
#include "dyson/measure.hpp"
#include "dyson/numeric/polynomial.hpp"

namespace dyson {

using GreenFn = std::function<cplx(double t, const ComplexPoint& z)>;

struct GreenEval {
  cplx value;
  double time = 0.0;
  ComplexPoint point;
};

inline GreenEval evaluate(const GreenFn& g, double t, const ComplexPoint& z) {
  return {g(t, z), t, z};
}

namespace detail {

inline void require_positive_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t", "must be a positive finite time");
}

}  // namespace detail

// G(0,z) = sum_k w_k / (z - a_k)
inline cplx initial_green(const AtomicMeasure& mu, const ComplexPoint& z) {
  cplx s = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (z.half_plane == HalfPlane::boundary_from_above && z.re == a.location)
      throw PoleError(a.location, "boundary point coincides with an atom at " +
                                      std::to_string(a.location));
    s += a.weight / (z.value() - a.location);
  }
  return s;
}

enum class OneSourceBranch { minus, plus };

// Root of t G^2 - z G + 1 = 0. The minus branch is the Stieltjes transform
// of the semicircle; plus is kept only to exercise the verification suite.
inline cplx green_one_source(double t, const ComplexPoint& z,
                             OneSourceBranch branch = OneSourceBranch::minus) {
  detail::require_positive_time(t);
  if (z.half_plane == HalfPlane::lower) return std::conj(green_one_source(t, z.conj(), branch));
  const double r = 2.0 * std::sqrt(t);
  const cplx zz(z.re, z.im);
  // sqrt(z-r) sqrt(z+r) has its cut on [-r, r] and behaves like z at infinity.
  const cplx s = std::sqrt(zz - r) * std::sqrt(zz + r);
  if (branch == OneSourceBranch::minus) return 2.0 / (zz + s);
  return (zz + s) / (2.0 * t);
}

inline double one_source_residual(double t, const ComplexPoint& z, cplx g) {
  const cplx zz = z.value();
  const double scale = t * std::norm(g) + std::abs(zz * g) + 1.0;
  return std::abs(t * g * g - zz * g + 1.0) / scale;
}

inline double semicircle_density(double t, double x) {
  detail::require_positive_time(t);
  const double r = 2.0 * std::sqrt(t);
  const double ax = std::abs(x);
  if (ax >= r) return 0.0;
  return std::sqrt((r - ax) * (r + ax)) / (2.0 * std::numbers::pi * t);
}

inline double semicircle_cdf(double t, double x) {
  detail::require_positive_time(t);
  const double y = x / (2.0 * std::sqrt(t));
  if (y <= -1.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return 0.5 + (y * std::sqrt((1.0 - y) * (1.0 + y)) + std::asin(y)) / std::numbers::pi;
}

namespace detail {

struct TrackOptions {
  double y_start = 1e4;
  int steps = 64;
  double y_floor = 1e-12;
  int max_refine = 24;
  double ambiguity_ratio = 0.5;
};

struct TrackResult {
  cplx root;
  cvec final_roots;
};

// Follows one root of the polynomial family coeffs(z) from z = x + i*y_start
// (where it is the root nearest `guess(z)`) down the vertical line to
// x + i*y_target. A boundary target is approached to y_floor and then
// evaluated on the real axis.
template <class CoeffFn, class GuessFn>
TrackResult track_root(const CoeffFn& coeffs, const GuessFn& guess, double x, double y_target,
                       bool boundary, const TrackOptions& opt = {}) {
  auto nearest = [&](const cvec& roots, cplx ref, double* ratio) {
    std::size_t best = 0;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      const double d = std::abs(roots[k] - ref);
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = k;
      } else if (d < d2) {
        d2 = d;
      }
    }
    if (ratio != nullptr) *ratio = d2 > 0.0 ? d1 / d2 : 1.0;
    return best;
  };
  auto at = [&](double y) { return cplx(x, y); };

  const double scale = std::max(1.0, std::abs(x));
  const double y0 = opt.y_start * scale;
  if (!boundary && y_target >= y0) {
    const cplx z = at(y_target);
    const cvec p = coeffs(z);
    cvec roots = poly_roots(p);
    const cplx r = newton_polish(p, roots[nearest(roots, guess(z), nullptr)]);
    return {r, roots};
  }

  cvec last_roots;
  std::function<cplx(cplx, double, double, int)> step_to = [&](cplx prev, double y_from,
                                                               double y_to, int depth) -> cplx {
    const cvec p = coeffs(at(y_to));
    cvec roots = poly_roots(p);
    double ratio = 0.0;
    const std::size_t k = nearest(roots, prev, &ratio);
    if (ratio <= opt.ambiguity_ratio || depth >= opt.max_refine || roots.size() < 2) {
      last_roots = roots;
      return newton_polish(p, roots[k]);
    }
    const double mid = y_to > 0.0 ? std::sqrt(y_from * y_to) : 0.5 * y_from;
    const cplx r_mid = step_to(prev, y_from, mid, depth + 1);
    return step_to(r_mid, mid, y_to, depth + 1);
  };

  const cplx z0 = at(y0);
  const cvec p0 = coeffs(z0);
  const cvec roots0 = poly_roots(p0);
  cplx r = newton_polish(p0, roots0[nearest(roots0, guess(z0), nullptr)]);
  const double y_end = boundary ? opt.y_floor * scale : y_target;
  const double ratio = std::pow(y_end / y0, 1.0 / opt.steps);
  double y = y0;
  for (int k = 1; k <= opt.steps; ++k) {
    const double y_next = k == opt.steps ? y_end : y0 * std::pow(ratio, k);
    r = step_to(r, y, y_next, 0);
    y = y_next;
  }
  if (boundary) r = step_to(r, y, 0.0, 0);
  return {r, last_roots};
}

// Polynomial in G obtained by clearing denominators in
// G = sum_k w_k / (z - t G - a_k).
inline cvec functional_polynomial(const AtomicMeasure& mu, double t, cplx z) {
  const std::size_t m = mu.size();
  std::vector<cvec> factors(m);
  for (std::size_t k = 0; k < m; ++k) factors[k] = {z - mu[k].location, -t};
  // prefix[k] = prod_{j<k}, suffix[k] = prod_{j>=k}
  std::vector<cvec> prefix(m + 1), suffix(m + 1);
  prefix[0] = {1.0};
  for (std::size_t k = 0; k < m; ++k) prefix[k + 1] = poly_mul(prefix[k], factors[k]);
  suffix[m] = {1.0};
  for (std::size_t k = m; k-- > 0;) suffix[k] = poly_mul(factors[k], suffix[k + 1]);
  cvec p = poly_mul({0.0, 1.0}, prefix[m]);
  for (std::size_t k = 0; k < m; ++k)
    poly_axpy(p, -mu[k].weight, poly_mul(prefix[k], suffix[k + 1]));
  return p;
}

inline cvec two_source_cubic(double tau, cplx w) {
  return {-w, w * w - 1.0 + tau, -2.0 * w * tau, tau * tau};
}

inline void check_herglotz(cplx g, const cvec& roots, const std::string& who) {
  if (g.imag() > 1e-10 * std::max(1.0, std::abs(g)) || !std::isfinite(std::abs(g)))
    throw RootFindError(roots, who + ": no admissible root with Im G <= 0");
}

}  // namespace detail

// |G - G(0, z - tG)|, the functional-equation residual.
inline double functional_residual(const AtomicMeasure& mu, double t, const ComplexPoint& z,
                                  cplx g) {
  cplx s = 0.0;
  const cplx u = z.value() - t * g;
  for (const Atom& a : mu.atoms()) s += a.weight / (u - a.location);
  return std::abs(g - s);
}

struct GreenReport {
  cplx value;
  detail::cvec roots;           // all roots of the cleared polynomial at z
  std::size_t admissible = 0;   // roots with Im G < -1e-10 (upper half-plane input)
  double residual = 0.0;
};

inline GreenReport green_functional_report(const AtomicMeasure& mu, double t,
                                           const ComplexPoint& z) {
  detail::require_positive_time(t);
  if (z.half_plane == HalfPlane::lower) {
    GreenReport r = green_functional_report(mu, t, z.conj());
    r.value = std::conj(r.value);
    for (auto& c : r.roots) c = std::conj(c);
    return r;
  }
  const bool boundary = z.half_plane == HalfPlane::boundary_from_above;
  auto coeffs = [&](cplx zz) { return detail::functional_polynomial(mu, t, zz); };
  auto guess = [](cplx zz) { return 1.0 / zz; };
  auto tr = detail::track_root(coeffs, guess, z.re, z.im, boundary);
  detail::check_herglotz(tr.root, tr.final_roots, "green_functional");
  GreenReport rep{tr.root, tr.final_roots, 0, functional_residual(mu, t, z, tr.root)};
  for (const cplx& c : tr.final_roots)
    if (c.imag() < -1e-10) ++rep.admissible;
  return rep;
}

// G(t,z) for an arbitrary atomic initial measure.
inline cplx green_functional(const AtomicMeasure& mu, double t, const ComplexPoint& z) {
  return green_functional_report(mu, t, z).value;
}

// G(t,z) for (delta_{-a} + delta_a)/2 via the normalized cubic in
// tau = t/a^2, w = z/a.
inline cplx green_two_source(double t, const ComplexPoint& z, double a) {
  detail::require_positive_time(t);
  if (!(a > 0.0)) throw ValidationError("a", "must be positive");
  if (z.half_plane == HalfPlane::lower) return std::conj(green_two_source(t, z.conj(), a));
  const double tau = t / (a * a);
  const bool boundary = z.half_plane == HalfPlane::boundary_from_above;
  auto coeffs = [&](cplx w) { return detail::two_source_cubic(tau, w); };
  auto guess = [](cplx w) { return 1.0 / w; };
  auto tr = detail::track_root(coeffs, guess, z.re / a, z.im / a, boundary);
  detail::check_herglotz(tr.root, tr.final_roots, "green_two_source");
  return tr.root / a;
}

inline double two_source_residual(double t, const ComplexPoint& z, double a, cplx g) {
  const cplx zz = z.value();
  const cplx t1 = t * t * g * g * g, t2 = 2.0 * zz * t * g * g, t3 = (zz * zz - a * a + t) * g;
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(zz);
  return std::abs(t1 - t2 + t3 - zz) / scale;
}

struct DensityOptions {
  std::vector<double> eps;  // empty: 1e-3 * 2^-k, k = 0..12
  double tol = 1e-9;
  double clamp = 1e-10;
  // Optional closed form used within edge_window of any listed edge.
  std::vector<double> edges;
  std::function<double(double)> closed_form;
  double edge_window = 1e-8;
};

inline std::vector<double> default_eps_sequence() {
  std::vector<double> e(13);
  for (int k = 0; k <= 12; ++k) e[static_cast<std::size_t>(k)] = 1e-3 * std::ldexp(1.0, -k);
  return e;
}

// rho(t,x) = -lim Im G(t, x + i eps) / pi by Richardson extrapolation in eps.
inline double density_from_green(const GreenFn& g, double t, double x,
                                  const DensityOptions& opt = {}) {
  if (opt.closed_form) {
    for (double e : opt.edges)
      if (std::abs(x - e) <= opt.edge_window) return opt.closed_form(x);
  }
  const std::vector<double> eps = opt.eps.empty() ? default_eps_sequence() : opt.eps;
  if (eps.size() < 3) throw ValidationError("eps", "need at least three values");
  auto f = [&](double e) { return -g(t, ComplexPoint::upper(x, e)).imag() / std::numbers::pi; };
  double f_prev = f(eps[0]);
  double r_prev = std::numeric_limits<double>::quiet_NaN();
  double r = r_prev;
  for (std::size_t k = 1; k < eps.size(); ++k) {
    const double fk = f(eps[k]);
    const double q = eps[k - 1] / eps[k];
    r = (q * fk - f_prev) / (q - 1.0);
    if (k >= 2 && std::abs(r - r_prev) < opt.tol) {
      if (r < 0.0 && r >= -opt.clamp) return 0.0;
      return r;
    }
    r_prev = r;
    f_prev = fk;
  }
  throw ExtrapolationError(r, r_prev,
                           "density extrapolation did not converge at x = " + std::to_string(x));
}

namespace detail {

// rho for a = 1 in the stable conjugate form
// (cbrt(sqrt(A) - B) + cbrt(sqrt(A) + B)) / (2 sqrt(3) pi t).
// The two cube roots multiply to -P, which recovers the t^2 P / C term of
// the Cardano form without dividing by C.
inline double two_source_density_unit(double t, double x) {
  const double x2 = x * x;
  const double tm1 = t - 1.0;
  const double A = 27.0 * (tm1 * tm1 * tm1 + x2 * (2.0 + 5.0 * t - 0.25 * t * t) - x2 * x2);
  if (!(A > 0.0)) return 0.0;
  const double B = 0.5 * x * (9.0 * (t + 2.0) - 2.0 * x2);
  const double P = x2 - 3.0 * tm1;
  const double sA = std::sqrt(A);
  const double P3 = P * P * P;
  // (sA - B)(sA + B) = A - B^2 = -P^3; avoid the cancelling difference.
  double lo, hi;
  if (B > 0.0) {
    hi = sA + B;
    lo = -P3 / hi;
  } else {
    lo = sA - B;
    hi = lo > 0.0 ? -P3 / lo : sA + B;
  }
  const double c_left = std::cbrt(lo);
  const double c_right = std::cbrt(hi);
  const double rho = (c_left + c_right) / (2.0 * std::sqrt(3.0) * std::numbers::pi * t);
  return std::max(rho, 0.0);
}

}  // namespace detail

// Closed-form density of the two-source solution started from
// (delta_{-a} + delta_a)/2.
inline double two_source_density(double t, double x, double a) {
  detail::require_positive_time(t);
  if (!(a > 0.0)) throw ValidationError("a", "must be positive");
  return detail::two_source_density_unit(t / (a * a), x / a) / a;
}

// Density at the merge time t = 1 for a = 1.
inline double density_t1(double x) {
  const double edge = 1.5 * std::sqrt(3.0);
  const double ax = std::abs(x);
  if (ax >= edge) return 0.0;
  const double u = 4.0 * x * x / 27.0;
  const double s = std::sqrt(1.0 - u);
  const double one_minus = u / (1.0 + s);
  return 3.0 / (4.0 * std::numbers::pi) * std::cbrt(2.0 * ax / (3.0 * std::sqrt(3.0))) *
         (std::pow(1.0 + s, 2.0 / 3.0) - std::pow(one_minus, 2.0 / 3.0));
}

}  // namespace dyson
