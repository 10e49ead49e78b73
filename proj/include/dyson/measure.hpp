#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dyson/error.hpp"

namespace dyson {

using cplx = std::complex<double>;

struct Atom {
  double location;
  double weight;
};

// Initial condition: finitely many weighted point masses.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) { validate(); }

  static AtomicMeasure one_source() { return AtomicMeasure({{0.0, 1.0}}); }
  static AtomicMeasure two_source(double a) {
    if (!(a > 0.0)) throw ValidationError("measure.a", "must be positive");
    return AtomicMeasure({{-a, 0.5}, {a, 0.5}});
  }
  static AtomicMeasure equal_weights(std::vector<double> locations) {
    std::vector<Atom> atoms;
    const double w = 1.0 / static_cast<double>(locations.size());
    for (double x : locations) atoms.push_back({x, w});
    return AtomicMeasure(std::move(atoms));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const Atom& operator[](std::size_t k) const { return atoms_[k]; }

  bool symmetric(double tol = 1e-15) const {
    const std::size_t m = atoms_.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Atom& a = atoms_[k];
      const Atom& b = atoms_[m - 1 - k];
      if (std::abs(a.location + b.location) > tol || std::abs(a.weight - b.weight) > tol)
        return false;
    }
    return true;
  }

 private:
  void validate() const {
    if (atoms_.empty()) throw ValidationError("measure.atoms", "at least one atom required");
    double total = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      const std::string path = "measure.atoms[" + std::to_string(k) + "]";
      if (!std::isfinite(atoms_[k].location))
        throw ValidationError(path + ".location", "must be finite");
      if (!(atoms_[k].weight > 0.0)) throw ValidationError(path + ".weight", "must be positive");
      if (k > 0 && !(atoms_[k].location > atoms_[k - 1].location))
        throw ValidationError(path + ".location", "locations must be strictly increasing");
      total += atoms_[k].weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("measure.atoms", "weights must sum to 1");
  }

  std::vector<Atom> atoms_;
};

enum class HalfPlane { upper, lower, boundary_from_above };

// Complex argument with an explicit half-plane tag; boundary_from_above
// stands for the limit x + i0.
struct ComplexPoint {
  double re = 0.0;
  double im = 0.0;
  HalfPlane half_plane = HalfPlane::upper;

  static ComplexPoint upper(double x, double y) {
    if (!(y > 0.0)) throw ValidationError("point.im", "upper half-plane requires im > 0");
    return {x, y, HalfPlane::upper};
  }
  static ComplexPoint lower(double x, double y) {
    if (!(y < 0.0)) throw ValidationError("point.im", "lower half-plane requires im < 0");
    return {x, y, HalfPlane::lower};
  }
  static ComplexPoint boundary(double x) { return {x, 0.0, HalfPlane::boundary_from_above}; }
  static ComplexPoint from(cplx z) {
    if (z.imag() > 0.0) return upper(z.real(), z.imag());
    if (z.imag() < 0.0) return lower(z.real(), z.imag());
    return boundary(z.real());
  }

  cplx value() const { return {re, im}; }
  ComplexPoint conj() const {
    switch (half_plane) {
      case HalfPlane::upper: return {re, -im, HalfPlane::lower};
      case HalfPlane::lower: return {re, -im, HalfPlane::upper};
      default: return *this;
    }
  }
};

// Uniform grid of n points on [x_min, x_max], endpoints included.
struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n = 2;

  double step() const { return (x_max - x_min) / static_cast<double>(n - 1); }
  double operator[](std::size_t j) const {
    return j + 1 == n ? x_max : x_min + static_cast<double>(j) * step();
  }
  std::vector<double> points() const {
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = (*this)[j];
    return p;
  }
  void validate(const std::string& path = "grid") const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
      throw ValidationError(path, "need finite x_min < x_max");
    if (n < 2) throw ValidationError(path + ".n", "need at least 2 points");
  }
};

}  // namespace dyson
