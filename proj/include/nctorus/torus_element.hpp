#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "nctorus/theta.hpp"

namespace nctorus {

inline constexpr double kPruneThreshold = 1e-15;

// Finite Fourier series u = sum u_k U^k in the noncommutative torus.
class TorusElement {
 public:
  using Coeffs = std::map<Lattice, cplx>;

  TorusElement() = default;
  explicit TorusElement(ThetaPtr theta) : theta_(std::move(theta)) {
    if (!theta_) throw Error("null theta");
  }
  TorusElement(ThetaPtr theta, Coeffs c) : TorusElement(std::move(theta)) {
    for (auto& [k, v] : c) add(k, v);
    prune();
  }

  static TorusElement scalar(ThetaPtr theta, cplx c) {
    TorusElement u(std::move(theta));
    u.add(Lattice(u.n()), c);
    u.prune();
    return u;
  }
  static TorusElement monomial(ThetaPtr theta, const Lattice& k, cplx c = 1.0) {
    TorusElement u(std::move(theta));
    if (k.size() != u.n()) throw DimensionMismatch("monomial index has wrong length");
    u.add(k, c);
    u.prune();
    return u;
  }
  // U_j (j zero-based), or its inverse for power -1.
  static TorusElement generator(ThetaPtr theta, int j, int power = 1) {
    Lattice k(theta->n());
    k[j] = power;
    return monomial(std::move(theta), k);
  }

  const ThetaPtr& theta() const { return theta_; }
  int n() const { return theta_ ? theta_->n() : 0; }
  const Coeffs& coeffs() const { return c_; }
  bool empty() const { return c_.empty(); }
  size_t size() const { return c_.size(); }

  cplx coeff(const Lattice& k) const {
    auto it = c_.find(k);
    return it == c_.end() ? cplx{} : it->second;
  }

  // Accumulates without pruning; call prune() when done.
  void add(const Lattice& k, cplx v) {
    if (k.size() != n()) throw DimensionMismatch("index length differs from dimension");
    c_[k] += v;
  }
  void prune(double thr = kPruneThreshold) {
    std::erase_if(c_, [thr](const auto& kv) { return std::abs(kv.second) < thr; });
  }

  // True when every coefficient sits at k = 0.
  bool is_scalar() const { return c_.empty() || (c_.size() == 1 && c_.begin()->first.is_zero()); }

  double norm_l2() const {
    double s = 0;
    for (auto& [k, v] : c_) s += std::norm(v);
    return std::sqrt(s);
  }
  double norm_max() const {
    double s = 0;
    for (auto& [k, v] : c_) s = std::max(s, std::abs(v));
    return s;
  }

  TorusElement& operator+=(const TorusElement& o) {
    check(o);
    for (auto& [k, v] : o.c_) c_[k] += v;
    prune();
    return *this;
  }
  TorusElement& operator-=(const TorusElement& o) {
    check(o);
    for (auto& [k, v] : o.c_) c_[k] -= v;
    prune();
    return *this;
  }
  TorusElement& operator*=(cplx s) {
    for (auto& [k, v] : c_) v *= s;
    prune();
    return *this;
  }
  friend TorusElement operator+(TorusElement a, const TorusElement& b) { return a += b; }
  friend TorusElement operator-(TorusElement a, const TorusElement& b) { return a -= b; }
  friend TorusElement operator*(cplx s, TorusElement a) { return a *= s; }
  friend TorusElement operator*(TorusElement a, cplx s) { return a *= s; }

  // Exact equality of supports and coefficients.
  bool operator==(const TorusElement& o) const { return same_theta(theta_, o.theta_) && c_ == o.c_; }

  void check(const TorusElement& o) const {
    if (!same_theta(theta_, o.theta_)) throw DimensionMismatch("elements live over different theta");
  }

 private:
  ThetaPtr theta_;
  Coeffs c_;
};

inline TorusElement multiply(const TorusElement& u, const TorusElement& v) {
  u.check(v);
  const ThetaMatrix& th = *u.theta();
  TorusElement r(u.theta());
  for (auto& [k, a] : u.coeffs())
    for (auto& [l, b] : v.coeffs()) r.add(k + l, a * b * th.phase_factor(k, l));
  r.prune();
  return r;
}

inline TorusElement operator*(const TorusElement& u, const TorusElement& v) { return multiply(u, v); }

// (U^k)* = exp(-2 pi i c(k,-k)) U^{-k}, extended antilinearly.
inline TorusElement adjoint(const TorusElement& u) {
  const ThetaMatrix& th = *u.theta();
  TorusElement r(u.theta());
  for (auto& [k, a] : u.coeffs()) r.add(-k, std::conj(a) * std::conj(th.phase_factor(k, -k)));
  r.prune();
  return r;
}

inline cplx tau(const TorusElement& u) { return u.coeff(Lattice(u.n())); }

// <u|v> = tau(u v*)
inline cplx inner(const TorusElement& u, const TorusElement& v) { return tau(multiply(u, adjoint(v))); }

// delta^beta u = sum k^beta u_k U^k
inline TorusElement delta(const TorusElement& u, const Lattice& beta) {
  TorusElement r(u.theta());
  for (auto& [k, a] : u.coeffs()) r.add(k, a * monomial(k, beta));
  r.prune();
  return r;
}

// alpha_s(U^k) = exp(i s.k) U^k
inline TorusElement act(const std::vector<double>& s, const TorusElement& u) {
  if (static_cast<int>(s.size()) != u.n()) throw DimensionMismatch("action vector has wrong length");
  TorusElement r(u.theta());
  for (auto& [k, a] : u.coeffs()) {
    double ph = 0;
    for (int i = 0; i < u.n(); ++i) ph += s[i] * k[i];
    r.add(k, a * std::polar(1.0, ph));
  }
  r.prune();
  return r;
}

inline TorusElement laplacian_inverse(const TorusElement& u) {
  TorusElement r(u.theta());
  for (auto& [k, a] : u.coeffs())
    if (!k.is_zero()) r.add(k, a / k.norm2_sq());
  r.prune();
  return r;
}

// Max-modulus distance, a convenient test metric.
inline double distance(const TorusElement& a, const TorusElement& b) { return (a - b).norm_max(); }

}  // namespace nctorus
