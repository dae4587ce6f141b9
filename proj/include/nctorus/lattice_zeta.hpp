#pragma once

// Analytic continuation of Z(alpha, s) = sum_{k != 0} k^alpha |k|^s over Z^n
// by the split Mellin representation
//   |k|^{-2w} Gamma(w) = int_0^lambda + int_lambda^inf t^{w-1} e^{-t|k|^2} dt,
// with Poisson summation on the small-t piece. The lattice theta series
// factorizes over axes, which keeps everything one-dimensional.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nctorus/quadrature.hpp"

namespace nctorus {

struct Laurent {
  std::complex<double> pole;    // coefficient of 1/z
  std::complex<double> finite;  // constant term
};

class LatticeZeta {
 public:
  explicit LatticeZeta(int n, double split = std::numbers::pi) : n_(n), lambda_(split) {
    std::vector<double> small_breaks{0.0, 0.15, 0.3, 0.5, 0.8, 1.2, 1.7, 2.3, lambda_};
    small_ = composite_gauss_legendre(small_breaks, 24);
  }

  int n() const { return n_; }

  // Value at exponent s; throws when s + |alpha| = -n (pole).
  std::complex<double> value(const Lattice& alpha, std::complex<double> s) const {
    const Laurent l = laurent(alpha, s);
    if (l.pole != 0.0) throw IntegerOrderError("lattice zeta has a pole at this exponent");
    return l.finite;
  }

  // Laurent data in z for the exponent s + z.
  Laurent laurent(const Lattice& alpha, std::complex<double> s) const {
    for (int i = 0; i < alpha.size(); ++i)
      if (alpha[i] % 2) return {0.0, 0.0};
    const std::complex<double> w = -s / 2.0;
    const double w0 = (alpha.norm1() + n_) / 2.0;
    double A = 1;
    for (int i = 0; i < n_; ++i) A *= std::tgamma(alpha[i] / 2.0 + 0.5);
    const bool zero_alpha = alpha.is_zero();
    const std::complex<double> unit = zero_alpha ? -std::pow(std::complex<double>(lambda_), w) * rgamma(w + 1.0) : 0.0;
    const std::complex<double> regular = mixed_small(alpha, w) + large(alpha, w);
    if (std::abs(w - w0) < 1e-12) {
      const double g0 = 1.0 / std::tgamma(w0);
      return {-2.0 * A * g0, A * g0 * (std::log(lambda_) - digamma(w0)) + g0 * regular + unit};
    }
    const std::complex<double> main = A * std::pow(std::complex<double>(lambda_), w - w0) / (w - w0);
    return {0.0, rgamma(w) * (main + regular) + unit};
  }

 private:
  // sum_{k in Z} k^a e^{-t k^2}, direct (t not small).
  static double theta_direct(int a, double t) {
    double s = (a == 0) ? 1.0 : 0.0;
    for (int k = 1;; ++k) {
      const double term = std::pow(double(k), a) * std::exp(-t * k * k);
      s += 2 * term;
      if (term < 1e-22 * std::max(1.0, std::abs(s)) && t * k * k > 30) break;
    }
    return s;
  }

  // Poisson side: main power term and exponentially small rest, t small.
  static void theta_poisson(int a, double t, double& main, double& rest) {
    const int b = a / 2;
    main = std::tgamma(b + 0.5) * std::pow(t, -b - 0.5);
    rest = 0;
    const double sq = std::sqrt(t);
    const double pref = ((b % 2) ? -1.0 : 1.0) * std::pow(2 * sq, -a) * std::sqrt(std::numbers::pi / t);
    for (int m = 1;; ++m) {
      const double x = std::numbers::pi * m / sq;
      if (x * x > 745) break;
      double h0 = 1, h1 = 2 * x;
      double h = (a == 0) ? h0 : h1;
      for (int j = 1; j < a; ++j) {
        h = 2 * x * h1 - 2 * j * h0;
        h0 = h1;
        h1 = h;
      }
      rest += 2 * pref * h * std::exp(-x * x);
    }
  }

  std::complex<double> mixed_small(const Lattice& alpha, std::complex<double> w) const {
    std::complex<double> acc = 0;
    for (size_t q = 0; q < small_.x.size(); ++q) {
      const double t = small_.x[q];
      double full = 1, pure = 1;
      for (int i = 0; i < n_; ++i) {
        double m, r;
        theta_poisson(alpha[i], t, m, r);
        full *= m + r;
        pure *= m;
      }
      const double diff = full - pure;
      if (diff == 0.0) continue;
      acc += small_.w[q] * diff * std::exp((w - 1.0) * std::log(t));
    }
    return acc;
  }

  std::complex<double> large(const Lattice& alpha, std::complex<double> w) const {
    const bool zero_alpha = alpha.is_zero();
    const double rw = w.real();
    double upper = lambda_ + 40;
    while ((rw - 1) * std::log(upper) - upper > -60) upper += 10;
    std::vector<double> breaks;
    for (double b = lambda_; b < upper; b += 2.0) breaks.push_back(b);
    breaks.push_back(upper);
    const Rule1D rule = composite_gauss_legendre(breaks, 16);
    std::complex<double> acc = 0;
    for (size_t q = 0; q < rule.x.size(); ++q) {
      const double t = rule.x[q];
      double f;
      if (zero_alpha) {
        double d = 0;  // prod(1 + x_i) - 1 without cancellation
        for (int i = 0; i < n_; ++i) {
          double x = 0;
          for (int k = 1; t * k * k < 60; ++k) x += 2 * std::exp(-t * k * k);
          d = d + x + d * x;
        }
        f = d;
      } else {
        f = 1;
        for (int i = 0; i < n_; ++i) f *= theta_direct(alpha[i], t);
      }
      acc += rule.w[q] * f * std::exp((w - 1.0) * std::log(t));
    }
    return acc;
  }

  int n_;
  double lambda_;
  Rule1D small_;
};

}  // namespace nctorus
