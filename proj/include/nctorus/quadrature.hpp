#pragma once

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_psi.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "nctorus/error.hpp"
#include "nctorus/lattice.hpp"

namespace nctorus {

struct Rule1D {
  std::vector<double> x, w;
};

// Gauss-Legendre rule on [a, b].
inline Rule1D gauss_legendre(int order, double a, double b) {
  if (order < 1) throw Error("quadrature order must be positive");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> tab(
      gsl_integration_glfixed_table_alloc(static_cast<size_t>(order)), &gsl_integration_glfixed_table_free);
  Rule1D r;
  r.x.resize(static_cast<size_t>(order));
  r.w.resize(static_cast<size_t>(order));
  for (int i = 0; i < order; ++i)
    gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &r.x[static_cast<size_t>(i)], &r.w[static_cast<size_t>(i)],
                                  tab.get());
  return r;
}

// Composite Gauss-Legendre over consecutive panels with the given breaks.
inline Rule1D composite_gauss_legendre(const std::vector<double>& breaks, int order) {
  Rule1D r;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    Rule1D p = gauss_legendre(order, breaks[i], breaks[i + 1]);
    r.x.insert(r.x.end(), p.x.begin(), p.x.end());
    r.w.insert(r.w.end(), p.w.begin(), p.w.end());
  }
  return r;
}

// Quadrature on the unit sphere S^{n-1}: points and weights.
struct SphereRule {
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
};

// n = 2: trapezoid in angle. n = 3: Gauss-Legendre in cos(polar) times
// trapezoid in azimuth (angular nodes in azimuth, angular/2 in polar).
inline SphereRule sphere_rule(int n, int angular) {
  SphereRule s;
  const double pi = std::numbers::pi;
  if (n == 2) {
    for (int i = 0; i < angular; ++i) {
      const double t = 2 * pi * i / angular;
      s.pts.push_back({std::cos(t), std::sin(t)});
      s.w.push_back(2 * pi / angular);
    }
  } else if (n == 3) {
    Rule1D z = gauss_legendre(std::max(2, angular / 2), -1.0, 1.0);
    for (size_t a = 0; a < z.x.size(); ++a) {
      const double st = std::sqrt(1 - z.x[a] * z.x[a]);
      for (int i = 0; i < angular; ++i) {
        const double p = 2 * pi * i / angular;
        s.pts.push_back({st * std::cos(p), st * std::sin(p), z.x[a]});
        s.w.push_back(z.w[a] * 2 * pi / angular);
      }
    }
  } else {
    throw Unsupported("sphere quadrature is provided for n = 2 and n = 3");
  }
  return s;
}

inline double sphere_area(int n) { return 2 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0); }

// 1/Gamma(w) for complex w; exact zeros at non-positive integers.
inline std::complex<double> rgamma(std::complex<double> w) {
  if (w.imag() == 0.0) {
    const double x = w.real();
    if (x <= 0 && x == std::nearbyint(x)) return 0.0;
    return 1.0 / std::tgamma(x);
  }
  gsl_sf_result lnr, arg;
  if (gsl_sf_lngamma_complex_e(w.real(), w.imag(), &lnr, &arg) != 0) throw Error("complex gamma evaluation failed");
  return std::exp(std::complex<double>(-lnr.val, -arg.val));
}

inline double digamma(double x) { return gsl_sf_psi(x); }

}  // namespace nctorus
