#pragma once

#include <cmath>
#include <vector>

#include <gsl/gsl_sf_dawson.h>

namespace dyson::detail {

// D^(p)(u), p = 0..pmax, for Dawson's function D.
inline std::vector<double> dawson_derivatives(double u, int pmax) {
  std::vector<double> d(static_cast<std::size_t>(pmax) + 1, 0.0);
  if (std::abs(u) > 7.0) {
    // D(u) ~ sum_k (2k-1)!! / (2^{k+1} u^{2k+1}), differentiated termwise.
    double ck = 0.5;
    const double inv = 1.0 / u;
    for (int k = 0; k < 40; ++k) {
      const int n = 2 * k + 1;
      double pw = std::pow(inv, n);
      double fall = 1.0;
      double largest = 0.0;
      for (int p = 0; p <= pmax; ++p) {
        const double term = ck * fall * pw;
        d[static_cast<std::size_t>(p)] += term;
        largest = std::max(largest, std::abs(term));
        fall *= -static_cast<double>(n + p);
        pw *= inv;
      }
      if (largest < 1e-18 * std::abs(d[0])) break;
      ck *= static_cast<double>(2 * k + 1) * 0.5;
    }
    return d;
  }
  d[0] = gsl_sf_dawson(u);
  if (pmax >= 1) d[1] = 1.0 - 2.0 * u * d[0];
  for (int p = 1; p < pmax; ++p)
    d[static_cast<std::size_t>(p) + 1] =
        -2.0 * u * d[static_cast<std::size_t>(p)] - 2.0 * p * d[static_cast<std::size_t>(p) - 1];
  return d;
}

// (-1)^p H_p(u) exp(-u^2), p = 0..pmax: the p-th derivative of exp(-u^2).
inline std::vector<double> gaussian_derivatives(double u, int pmax) {
  std::vector<double> h(static_cast<std::size_t>(pmax) + 1);
  const double e = std::exp(-u * u);
  double hm = 1.0, hp = 2.0 * u;
  h[0] = e;
  if (pmax >= 1) h[1] = -hp * e;
  for (int p = 1; p < pmax; ++p) {
    const double next = 2.0 * u * hp - 2.0 * p * hm;
    hm = hp;
    hp = next;
    h[static_cast<std::size_t>(p) + 1] = ((p + 1) % 2 == 0 ? 1.0 : -1.0) * hp * e;
  }
  return h;
}

}  // namespace dyson::detail
