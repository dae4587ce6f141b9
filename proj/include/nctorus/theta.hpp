#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "nctorus/error.hpp"
#include "nctorus/lattice.hpp"

namespace nctorus {

using cplx = std::complex<double>;

// Real antisymmetric deformation matrix.
class ThetaMatrix {
 public:
  ThetaMatrix() = default;
  explicit ThetaMatrix(int n) : n_(n), e_(static_cast<size_t>(n) * n, 0.0) {
    if (n < 1 || n > kMaxDim) throw DimensionMismatch("unsupported dimension " + std::to_string(n));
  }
  ThetaMatrix(int n, std::vector<double> row_major) : n_(n), e_(std::move(row_major)) {
    if (n < 1 || n > kMaxDim) throw DimensionMismatch("unsupported dimension " + std::to_string(n));
    if (e_.size() != static_cast<size_t>(n) * n) throw DimensionMismatch("theta needs n*n entries");
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        if (at(j, l) != -at(l, j)) throw Error("theta is not antisymmetric");
  }

  // Two-dimensional case with theta_12 = t.
  static ThetaMatrix two(double t) { return ThetaMatrix(2, {0.0, t, -t, 0.0}); }

  int n() const { return n_; }
  double at(int j, int l) const { return e_[static_cast<size_t>(j) * n_ + l]; }
  const std::vector<double>& entries() const { return e_; }
  bool operator==(const ThetaMatrix& o) const { return n_ == o.n_ && e_ == o.e_; }

  // c(k,l) reduced to [-1/2, 1/2], with U^k U^l = exp(2 pi i c) U^{k+l}.
  // Moving U_j^{l_j} left past U_m^{k_m} (m > j) costs theta_jm k_m l_j.
  double phase(const Lattice& k, const Lattice& l) const {
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (l[j] == 0) continue;
      for (int m = j + 1; m < n_; ++m) {
        const double t = at(j, m);
        if (t == 0.0 || k[m] == 0) continue;
        const double x = t * (static_cast<double>(k[m]) * l[j]);
        acc += x - std::nearbyint(x);
      }
    }
    return acc - std::nearbyint(acc);
  }

  cplx phase_factor(const Lattice& k, const Lattice& l) const {
    const double c = phase(k, l);
    if (c == 0.0) return {1.0, 0.0};
    return std::polar(1.0, 2.0 * std::numbers::pi * c);
  }

 private:
  int n_ = 0;
  std::vector<double> e_;
};

using ThetaPtr = std::shared_ptr<const ThetaMatrix>;

inline ThetaPtr make_theta(ThetaMatrix t) { return std::make_shared<const ThetaMatrix>(std::move(t)); }

inline bool same_theta(const ThetaPtr& a, const ThetaPtr& b) { return a == b || (a && b && *a == *b); }

}  // namespace nctorus
