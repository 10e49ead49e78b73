#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "dyson/error.hpp"

namespace dyson {

struct SimParams {
  std::size_t n_particles = 1;
  double beta = 2.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  double t_end = 1.0;

  void validate(const std::string& path = "sim") const {
    if (n_particles < 1) throw ValidationError(path + ".n_particles", "must be >= 1");
    if (!(beta >= 1.0)) throw ValidationError(path + ".beta", "must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError(path + ".dt", "must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
      throw ValidationError(path + ".t_end", "must be > 0");
  }
};

struct ParticleState {
  std::vector<double> positions;
  double time = 0.0;

  std::size_t size() const { return positions.size(); }
  bool ordered() const { return std::is_sorted(positions.begin(), positions.end()); }
};

struct EmpiricalDensity {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_bins = 1;
  std::vector<double> values;
  double time = 0.0;

  double bin_width() const { return (x_max - x_min) / static_cast<double>(n_bins); }
  double bin_center(std::size_t j) const {
    return x_min + (static_cast<double>(j) + 0.5) * bin_width();
  }
  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * bin_width();
  }
};

struct SimStats {
  std::size_t macro_steps = 0;
  std::size_t accepted_substeps = 0;
  std::size_t rejected_substeps = 0;
};

// Knobs of the step controller used by simulate().
struct StepControl {
  // step_dyson() spreads coincident particles by an arithmetic jitter of
  // this size.
  double jitter = 1e-8;
  // simulate() starts coincident clusters from their isolated law at time
  // tau = min(dt, cluster_time_factor * g^2), g the smallest distance
  // between distinct starting points.
  double cluster_time_factor = 1e-2;
  // gap_floor = gap_floor_factor * diameter.
  double gap_floor_factor = 1e-9;
  // No particle's drift displacement may exceed kick_fraction * diameter / N
  // in one substep. simulate() sizes its steps to respect this; step_dyson()
  // treats a violation like a near-collision and halves.
  double kick_fraction = 30.0;
  // Each Euler step adds h^2 sum v_i^2 to sum x_i^2 beyond the exact
  // dynamics; simulate() keeps h * mean(v^2) <= drift_budget, so the second
  // moment drifts by at most drift_budget per unit time.
  double drift_budget = 2e-3;
  // Rejected steps are halved at most this many times.
  int max_halvings = 20;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

// Counter-based Gaussian stream: each (step, particle, node) addresses an
// independent N(0,1) draw, so results never depend on evaluation order.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  double gaussian(std::uint64_t step, std::uint64_t particle, std::uint64_t node = 1) const {
    std::uint64_t h = detail::mix64(seed_);
    h = detail::mix64(h ^ step);
    h = detail::mix64(h ^ (particle * 0xd1b54a32d192ed03ULL));
    h = detail::mix64(h ^ (node * 0x8cb92ba72f3d8dd7ULL));
    const double u1 = detail::to_unit_open(h);
    const double u2 = detail::to_unit_open(detail::mix64(h ^ 0x5851f42d4c957f2dULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> gaussians(std::uint64_t step, std::size_t n, std::uint64_t node = 1) const {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = gaussian(step, i, node);
    return g;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// v_i = (1/N) sum_{j != i} 1/(x_i - x_j)
inline void dyson_drift(const std::vector<double>& x, std::vector<double>& v) {
  const std::size_t n = x.size();
  v.assign(n, 0.0);
  const double* xp = x.data();
  double* vp = v.data();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xi = xp[i];
    double acc0 = 0.0, acc1 = 0.0;
    std::size_t j = i + 1;
    for (; j + 1 < n; j += 2) {
      const double d0 = 1.0 / (xi - xp[j]);
      const double d1 = 1.0 / (xi - xp[j + 1]);
      acc0 += d0;
      acc1 += d1;
      vp[j] -= d0;
      vp[j + 1] -= d1;
    }
    if (j < n) {
      const double d = 1.0 / (xi - xp[j]);
      acc0 += d;
      vp[j] -= d;
    }
    vp[i] += acc0 + acc1;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) vp[i] *= inv_n;
}

inline double diameter(const std::vector<double>& sorted) {
  return sorted.empty() ? 0.0 : sorted.back() - sorted.front();
}

inline double min_gap(const std::vector<double>& sorted) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) g = std::min(g, sorted[i] - sorted[i - 1]);
  return g;
}

// Spreads runs of coincident particles (positions must be sorted) into a
// centred arithmetic progression with spacing `jitter`.
inline bool jitter_coincident(std::vector<double>& x, double jitter) {
  bool changed = false;
  std::size_t i = 0;
  const std::size_t n = x.size();
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[j] == x[i]) ++j;
    const std::size_t m = j - i;
    if (m > 1) {
      const double c = x[i];
      for (std::size_t k = 0; k < m; ++k)
        x[i + k] = c + (static_cast<double>(k) - 0.5 * static_cast<double>(m - 1)) * jitter;
      changed = true;
    }
    i = j;
  }
  if (changed) std::sort(x.begin(), x.end());
  return changed;
}

// Eigenvalues of the Dumitriu-Edelman tridiagonal model: density
// proportional to prod |mu_i - mu_j|^beta exp(-sum mu^2 / 2).
inline std::vector<double> beta_hermite(std::size_t m, double beta, boost::random::mt19937_64& rng) {
  boost::random::normal_distribution<double> normal;
  Eigen::VectorXd diag(static_cast<Eigen::Index>(m));
  Eigen::VectorXd off(static_cast<Eigen::Index>(m > 1 ? m - 1 : 0));
  for (std::size_t k = 0; k < m; ++k) diag[static_cast<Eigen::Index>(k)] = normal(rng);
  for (std::size_t k = 1; k < m; ++k) {
    boost::random::chi_squared_distribution<double> chi2(beta * static_cast<double>(m - k));
    off[static_cast<Eigen::Index>(k - 1)] = std::sqrt(0.5 * chi2(rng));
  }
  std::vector<double> mu(diag.data(), diag.data() + m);
  if (m > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    mu.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
  }
  return mu;
}

// Replaces each run of coincident particles (positions sorted) of size m by
// the law of an isolated cluster after time tau,
// c + sqrt(2 tau / (beta N)) mu with mu from beta_hermite(m). Exact for a
// single cluster; interactions between clusters are dropped over [0, tau].
inline void spread_clusters(std::vector<double>& x, double tau, double beta, std::uint64_t seed) {
  const std::size_t n = x.size();
  boost::random::mt19937_64 rng(detail::mix64(seed ^ 0x243f6a8885a308d3ULL));
  const double scale = std::sqrt(2.0 * tau / (beta * static_cast<double>(n)));
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[j] == x[i]) ++j;
    const double c = x[i];
    const auto mu = beta_hermite(j - i, beta, rng);
    for (std::size_t k = 0; k < mu.size(); ++k) x[i + k] = c + scale * mu[k];
    i = j;
  }
  std::sort(x.begin(), x.end());
}

inline bool has_coincident(const std::vector<double>& sorted) {
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1]) return true;
  return false;
}

// Smallest distance between distinct values (infinity if there are none).
inline double distinct_gap(const std::vector<double>& sorted) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] != sorted[i - 1]) g = std::min(g, sorted[i] - sorted[i - 1]);
  return g;
}

namespace detail {

struct BridgeStepper {
  const NoiseStream* noise;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::uint64_t step;
  double sigma;
  double gap_factor;
  double kick_fraction;
  int max_depth;
  double drift_budget = std::numeric_limits<double>::infinity();
  std::vector<double> drift, scratch;
  bool drift_valid = false;

  const std::vector<double>& drift_at(const std::vector<double>& x) {
    if (!drift_valid) {
      if (x.size() > 1) dyson_drift(x, drift);
      else drift.assign(x.size(), 0.0);
      drift_valid = true;
    }
    return drift;
  }

  // Largest step allowed by the kick bound and the drift budget.
  double controlled_step(const std::vector<double>& x) {
    const auto& v = drift_at(x);
    double vmax = 0.0, v2 = 0.0;
    for (double vi : v) {
      vmax = std::max(vmax, std::abs(vi));
      v2 += vi * vi;
    }
    if (vmax == 0.0) return std::numeric_limits<double>::infinity();
    const double kick = kick_fraction * diameter(x) / static_cast<double>(x.size()) / vmax;
    return std::min(kick, drift_budget * static_cast<double>(x.size()) / v2);
  }

  // One Euler-Maruyama substep with increments dW (already scaled by
  // sqrt(h)). Rejected on an oversized drift kick or a gap below the floor.
  bool substep(std::vector<double>& x, double h, const std::vector<double>& dW) {
    const std::size_t n = x.size();
    const double diam = diameter(x);
    const auto& v = drift_at(x);
    if (n > 1) {
      const double kick_max = kick_fraction * diam / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        if (!(h * std::abs(v[i]) <= kick_max)) return false;
    }
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = x[i] + h * v[i] + sigma * dW[i];
    std::sort(scratch.begin(), scratch.end());
    if (n > 1 && !(min_gap(scratch) >= gap_factor * diam)) return false;
    for (double y : scratch)
      if (!std::isfinite(y)) return false;
    x.swap(scratch);
    drift_valid = false;
    return true;
  }

  // Advances x over [0,h] with increments dW; on rejection splits the
  // interval via the Brownian bridge (node -> children 2node, 2node+1).
  bool advance(std::vector<double>& x, double h, const std::vector<double>& dW,
               std::uint64_t node, int depth) {
    if (substep(x, h, dW)) {
      ++accepted;
      return true;
    }
    ++rejected;
    if (depth >= max_depth || noise == nullptr) return false;
    const std::size_t n = x.size();
    std::vector<double> a(n), b(n);
    const double half = 0.5 * std::sqrt(h);
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = noise->gaussian(step, i, node);
      a[i] = 0.5 * dW[i] + half * eta;
      b[i] = 0.5 * dW[i] - half * eta;
    }
    return advance(x, 0.5 * h, a, 2 * node, depth + 1) &&
           advance(x, 0.5 * h, b, 2 * node + 1, depth + 1);
  }
};

}  // namespace detail

// One Euler-Maruyama step of size params.dt driven by standard normal
// draws `noise`. Near-collisions are resolved by halving with Brownian
// bridge refinement drawn from the stream keyed by (params.seed, step_index).
inline ParticleState step_dyson(const ParticleState& state, const SimParams& params,
                                const std::vector<double>& noise, std::uint64_t step_index = 0,
                                const StepControl& control = {}) {
  params.validate();
  if (state.size() != params.n_particles)
    throw ValidationError("state.positions", "length differs from n_particles");
  if (noise.size() != state.size()) throw ValidationError("noise", "length differs from N");
  if (!state.ordered()) throw ValidationError("state.positions", "must be nondecreasing");

  const double n = static_cast<double>(params.n_particles);
  const double sigma = std::sqrt(2.0 / (params.beta * n));
  NoiseStream stream(params.seed);
  detail::BridgeStepper stepper{&stream, 0, 0, step_index, sigma, control.gap_floor_factor,
                                control.kick_fraction, control.max_halvings};

  ParticleState next = state;
  jitter_coincident(next.positions, control.jitter);
  std::vector<double> dW(noise.size());
  const double sq = std::sqrt(params.dt);
  for (std::size_t i = 0; i < dW.size(); ++i) dW[i] = sq * noise[i];
  if (!stepper.advance(next.positions, params.dt, dW, 1, 0))
    throw StepUnderflowError(state.time, params.dt * std::ldexp(1.0, -control.max_halvings),
                             "step size underflow near a collision");
  next.time = state.time + params.dt;
  return next;
}

// Integrates from init and records the state at each sample time. Noise for
// macro step k is keyed (seed, k, particle), so runs are bit-reproducible.
inline std::vector<ParticleState> simulate(const ParticleState& init, const SimParams& params,
                                           const std::vector<double>& sample_times,
                                           const StepControl& control = {},
                                           SimStats* stats = nullptr) {
  params.validate();
  if (init.size() != params.n_particles)
    throw ValidationError("init.positions", "length differs from n_particles");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    const double s = sample_times[k];
    if (!(s >= init.time) || !(s <= params.t_end) || (k > 0 && s < sample_times[k - 1]))
      throw ValidationError("sample_times[" + std::to_string(k) + "]",
                            "must be ascending within [t0, t_end]");
  }

  std::vector<ParticleState> out;
  out.reserve(sample_times.size());
  ParticleState cur = init;
  std::sort(cur.positions.begin(), cur.positions.end());
  const std::size_t n = cur.size();
  const double sigma = std::sqrt(2.0 / (params.beta * static_cast<double>(n)));
  NoiseStream stream(params.seed);
  detail::BridgeStepper stepper{&stream, 0, 0, 0, sigma, control.gap_floor_factor,
                                control.kick_fraction, control.max_halvings, control.drift_budget};
  std::vector<double> dW(n);
  std::uint64_t step = 0;
  bool started = false;

  for (double target : sample_times) {
    while (cur.time < target) {
      if (!started) {
        started = true;
        if (has_coincident(cur.positions)) {
          const double g = distinct_gap(cur.positions);
          const double tau = std::min({params.dt, target - cur.time,
                                       control.cluster_time_factor * g * g});
          spread_clusters(cur.positions, tau, params.beta, params.seed);
          const bool last = tau >= target - cur.time;
          cur.time = last ? target : cur.time + tau;
          continue;
        }
      }
      double h = std::min(params.dt, target - cur.time);
      if (n > 1) h = std::min(h, (1.0 - 1e-12) * stepper.controlled_step(cur.positions));
      const bool last = h >= target - cur.time;
      stepper.step = step;
      const double sq = std::sqrt(h);
      for (std::size_t i = 0; i < n; ++i) dW[i] = sq * stream.gaussian(step, i);
      if (!stepper.advance(cur.positions, h, dW, 1, 0))
        throw StepUnderflowError(cur.time, h * std::ldexp(1.0, -control.max_halvings),
                                 "step size underflow near a collision");
      cur.time = last ? target : cur.time + h;
      ++step;
    }
    out.push_back(cur);
  }
  if (stats != nullptr) *stats = {step, stepper.accepted, stepper.rejected};
  return out;
}

inline EmpiricalDensity empirical_density(const ParticleState& state, double x_min, double x_max,
                                          std::size_t n_bins) {
  if (!(x_max > x_min) || n_bins == 0)
    throw ValidationError("grid", "need x_min < x_max and n_bins >= 1");
  EmpiricalDensity d{x_min, x_max, n_bins, std::vector<double>(n_bins, 0.0), state.time};
  const double w = d.bin_width();
  const double inv = 1.0 / (static_cast<double>(state.size()) * w);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double x = state.positions[i];
    if (!(x >= x_min && x <= x_max))
      throw RangeError(i, x, "particle " + std::to_string(i) + " at " + std::to_string(x) +
                                 " lies outside the histogram range");
    auto j = static_cast<std::size_t>((x - x_min) / w);
    if (j >= n_bins) j = n_bins - 1;
    d.values[j] += inv;
  }
  return d;
}

// Kolmogorov-Smirnov distance between the empirical CDF of the state and cdf.
inline double ks_distance(const ParticleState& state, const std::function<double(double)>& cdf) {
  std::vector<double> x = state.positions;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return std::clamp(d, 0.0, 1.0);
}

// KS distance between two empirical CDFs.
inline double ks_distance(const ParticleState& a, const ParticleState& b) {
  std::vector<double> x = a.positions, y = b.positions;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

}  // namespace dyson
