#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "dyson/error.hpp"
#include "dyson/measure.hpp"
#include "dyson/spectral.hpp"

namespace dyson {

struct CharacteristicCurve {
  double x0 = 0.0;
  std::vector<std::pair<double, double>> samples;  // (s, M_s(x0))
  double g0 = 0.0;
};

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

struct SupportSet {
  std::vector<Interval> intervals;
  double time = 0.0;
  // Points inside an interval where two components touched (zero density).
  std::vector<double> interior_critical;

  bool contains(double x) const {
    for (const auto& iv : intervals)
      if (iv.contains(x)) return true;
    return false;
  }
  double total_length() const {
    double s = 0.0;
    for (const auto& iv : intervals) s += iv.length();
    return s;
  }
  std::vector<double> edges() const {
    std::vector<double> e;
    for (const auto& iv : intervals) {
      e.push_back(iv.lo);
      e.push_back(iv.hi);
    }
    return e;
  }
};

namespace detail {

inline void check_not_atom(const AtomicMeasure& mu, double x0) {
  for (const Atom& a : mu.atoms())
    if (x0 == a.location)
      throw PoleError(a.location, "launch point coincides with an atom at " +
                                      std::to_string(a.location));
}

// S(x0) = sum w / (x0 - a)^2, so that dM_t/dx0 = 1 - t S.
inline double s_sum(const AtomicMeasure& mu, double x0) {
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    const double d = x0 - a.location;
    s += a.weight / (d * d);
  }
  return s;
}

inline double s_sum_deriv(const AtomicMeasure& mu, double x0) {
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    const double d = x0 - a.location;
    s -= 2.0 * a.weight / (d * d * d);
  }
  return s;
}

template <class F>
double solve_bracketed(F f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw Error("root not bracketed on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                             boost::math::tools::eps_tolerance<double>(53), iters);
  // Finish on the exact sign change.
  double a = r.first, b = r.second;
  double fa = f(a);
  for (int k = 0; k < 8 && b - a > 0.0; ++k) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

}  // namespace detail

// M_t(x0) = x0 + t G(0, x0)
inline double characteristic_map(const AtomicMeasure& mu, double t, double x0) {
  if (!(t >= 0.0)) throw ValidationError("t", "must be >= 0");
  if (t == 0.0) return x0;
  detail::check_not_atom(mu, x0);
  double g = 0.0;
  for (const Atom& a : mu.atoms()) g += a.weight / (x0 - a.location);
  return x0 + t * g;
}

inline double characteristic_map_derivative(const AtomicMeasure& mu, double t, double x0) {
  detail::check_not_atom(mu, x0);
  return 1.0 - t * detail::s_sum(mu, x0);
}

inline CharacteristicCurve trace_characteristic(const AtomicMeasure& mu, double x0, double t,
                                                std::size_t n_samples = 32) {
  detail::check_not_atom(mu, x0);
  if (n_samples < 2) throw ValidationError("n_samples", "need at least 2");
  CharacteristicCurve c;
  c.x0 = x0;
  c.g0 = initial_green(mu, ComplexPoint::boundary(x0)).real();
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double s = t * static_cast<double>(k) / static_cast<double>(n_samples - 1);
    c.samples.emplace_back(s, k == 0 ? x0 : x0 + s * c.g0);
  }
  return c;
}

// Solutions of 1 - t S(x0) = 0, ascending, tangential roots listed twice.
inline std::vector<double> breakdown_points(const AtomicMeasure& mu, double t) {
  detail::require_positive_time(t);
  const auto& at = mu.atoms();
  const std::size_t m = at.size();
  auto f = [&](double x) { return t * detail::s_sum(mu, x) - 1.0; };
  std::vector<double> out;

  {
    const Atom& a = at.front();
    const double far = a.location - std::sqrt(t) - 1.0;
    const double near = a.location - 0.5 * std::sqrt(t * a.weight);
    out.push_back(detail::solve_bracketed(f, far, near));
  }
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double l = at[k].location, r = at[k + 1].location;
    const double gap = r - l;
    double dl = 1e-6 * gap, dr = 1e-6 * gap;
    auto ds = [&](double x) { return detail::s_sum_deriv(mu, x); };
    while (ds(l + dl) >= 0.0 && dl > 1e-300) dl *= 1e-3;
    while (ds(r - dr) <= 0.0 && dr > 1e-300) dr *= 1e-3;
    const double xmin = detail::solve_bracketed(ds, l + dl, r - dr);
    const double ts = t * detail::s_sum(mu, xmin);
    if (std::abs(ts - 1.0) <= 1e-12) {
      out.push_back(xmin);
      out.push_back(xmin);
    } else if (ts < 1.0) {
      const double el = std::min(0.5 * std::sqrt(t * at[k].weight), 0.5 * (xmin - l));
      const double er = std::min(0.5 * std::sqrt(t * at[k + 1].weight), 0.5 * (r - xmin));
      out.push_back(detail::solve_bracketed(f, l + el, xmin));
      out.push_back(detail::solve_bracketed(f, xmin, r - er));
    }
  }
  {
    const Atom& a = at.back();
    const double far = a.location + std::sqrt(t) + 1.0;
    const double near = a.location + 0.5 * std::sqrt(t * a.weight);
    out.push_back(detail::solve_bracketed(f, near, far));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Images under M_t of the maximal intervals where M_t is increasing, i.e.
// the set I_t; the outermost components are rays.
inline std::vector<Interval> injective_image(const AtomicMeasure& mu, double t) {
  const auto c = breakdown_points(mu, t);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Interval> img;
  img.push_back({-inf, characteristic_map(mu, t, c.front())});
  for (std::size_t i = 1; i + 1 < c.size(); i += 2)
    img.push_back({characteristic_map(mu, t, c[i]), characteristic_map(mu, t, c[i + 1])});
  img.push_back({characteristic_map(mu, t, c.back()), inf});
  return img;
}

// supp rho(t,.) = R \ I_t, assembled from the breakdown points.
inline SupportSet support(const AtomicMeasure& mu, double t) {
  const auto c = breakdown_points(mu, t);
  SupportSet s;
  s.time = t;
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) {
    const double lo = characteristic_map(mu, t, c[i]);
    const double hi = characteristic_map(mu, t, c[i + 1]);
    if (!s.intervals.empty() && lo <= s.intervals.back().hi) {
      s.interior_critical.push_back(lo);
      s.intervals.back().hi = std::max(s.intervals.back().hi, hi);
    } else {
      s.intervals.push_back({lo, hi});
    }
  }
  return s;
}

// (B_+, B_-) for the two-source solution with a = 1; B_- is clamped to 0
// once the two bands have merged.
inline std::pair<double, double> b_plus_minus(double t) {
  detail::require_positive_time(t);
  const double r = std::sqrt(t * (t + 8.0));
  const double f1 = 1.0 - 0.25 * (t - r);
  const double bp = (1.0 + 0.5 * (t + r)) * f1 * f1;
  double bm = 0.0;
  if (t < 1.0) {
    const double f2 = 1.0 - 0.25 * (t + r);
    bm = (1.0 + 0.5 * (t - r)) * f2 * f2;
  }
  return {bp, bm};
}

// max over 32 samples s in [0,t] of |G(s, M_s(x0)) - G(0,x0)|, with G(s,.)
// evaluated on the real axis from above by `green`.
inline double verify_constancy(const AtomicMeasure& mu, double t, double x0,
                               const GreenFn& green) {
  if (!(t >= 0.0)) throw ValidationError("t", "must be >= 0");
  detail::check_not_atom(mu, x0);
  if (t > 0.0 && characteristic_map_derivative(mu, t, x0) < 0.0)
    throw ValidationError("x0", "launch point lies in the breakdown domain");
  const cplx g0 = initial_green(mu, ComplexPoint::boundary(x0));
  double worst = 0.0;
  const int n = 32;
  for (int k = 1; k < n && t > 0.0; ++k) {
    const double s = t * k / (n - 1);
    const double x = characteristic_map(mu, s, x0);
    worst = std::max(worst, std::abs(green(s, ComplexPoint::boundary(x)) - g0));
  }
  return worst;
}

// Grid points where exactly one of "in support" and "in I_t" fails to hold,
// i.e. where the two sets overlap in their interiors or leave a hole.
inline std::vector<double> complementarity_violations(const AtomicMeasure& mu, double t,
                                                      const Grid& grid, double tol = 1e-12) {
  const SupportSet s = support(mu, t);
  const auto img = injective_image(mu, t);
  std::vector<double> bad;
  for (double x : grid.points()) {
    bool in_supp_interior = false, in_img_interior = false, near_edge = false;
    for (const auto& iv : s.intervals) {
      if (x > iv.lo + tol && x < iv.hi - tol) in_supp_interior = true;
      if (std::abs(x - iv.lo) <= tol || std::abs(x - iv.hi) <= tol) near_edge = true;
    }
    for (const auto& iv : img)
      if (x > iv.lo + tol && x < iv.hi - tol) in_img_interior = true;
    if (near_edge) continue;
    if (in_supp_interior == in_img_interior) bad.push_back(x);
  }
  return bad;
}

}  // namespace dyson
