#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "nctorus/torus_element.hpp"

namespace nctorus {

inline constexpr double kDegreeTol = 1e-9;

inline bool is_integer(cplx z, double tol = 1e-12) {
  return std::abs(z.imag()) < tol && std::abs(z.real() - std::nearbyint(z.real())) < tol;
}

// Snaps numerically integral exponents so that polynomial detection is exact.
inline cplx snap(cplx z) {
  if (is_integer(z)) return {std::nearbyint(z.real()), 0.0};
  return z;
}

// Radial smooth step: 1 on [0, r0], 0 on [r1, inf).
struct Cutoff {
  double r0 = 0.5;
  double r1 = 1.0;
  bool enabled = true;

  static double step(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

  double psi(double r) const {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    const double a = step(r1 - r), b = step(r - r0);
    return a / (a + b);
  }
  double weight(double r) const { return enabled ? 1.0 - psi(r) : 1.0; }

  void validate() const {
    if (!(r0 > 0 && r0 < r1)) throw Error("cutoff needs 0 < r0 < r1");
  }
  bool operator==(const Cutoff&) const = default;
};

// coef * xi^alpha * |xi|^s
struct HomogeneousTerm {
  TorusElement coef;
  Lattice alpha;
  cplx s;

  cplx degree() const { return s + static_cast<double>(alpha.norm1()); }
  bool operator==(const HomogeneousTerm& o) const { return alpha == o.alpha && s == o.s && coef == o.coef; }
  // xi^alpha |xi|^{2m}: smooth at the origin, so no cutoff is applied.
  bool polynomial() const { return s.imag() == 0 && s.real() >= 0 && std::fmod(s.real(), 2.0) == 0.0; }

  template <class Vec>
  cplx scalar_value(const Vec& xi, double r) const {
    const double m = monomial(xi, alpha);
    if (s == cplx{}) return m;
    if (polynomial()) return m * std::pow(r, s.real());
    return m * std::exp(s * std::log(r));
  }
};

struct HomogeneousComponent {
  cplx degree;
  std::vector<HomogeneousTerm> terms;

  // Merges terms with equal (alpha, s), drops empty ones, sorts canonically.
  bool operator==(const HomogeneousComponent& o) const { return degree == o.degree && terms == o.terms; }

  void normalize() {
    std::vector<HomogeneousTerm> out;
    std::sort(terms.begin(), terms.end(), [](const HomogeneousTerm& a, const HomogeneousTerm& b) {
      if (a.alpha != b.alpha) return a.alpha < b.alpha;
      if (a.s.real() != b.s.real()) return a.s.real() < b.s.real();
      return a.s.imag() < b.s.imag();
    });
    for (auto& t : terms) {
      if (!out.empty() && out.back().alpha == t.alpha && out.back().s == t.s)
        out.back().coef += t.coef;
      else
        out.push_back(t);
    }
    std::erase_if(out, [](const HomogeneousTerm& t) { return t.coef.empty(); });
    terms = std::move(out);
  }
};

// Smoothing part stored as lattice samples inside |k|_inf <= box.
struct Remainder {
  int box = 0;
  cplx decay = -1e300;  // declared exponent; -inf-ish means rapid decay
  std::map<Lattice, TorusElement> samples;
  bool operator==(const Remainder& o) const = default;
};

class ClassicalSymbol {
 public:
  ClassicalSymbol() = default;
  ClassicalSymbol(ThetaPtr theta, cplx order, Cutoff cutoff = {})
      : theta_(std::move(theta)), order_(snap(order)), cutoff_(cutoff) {
    if (!theta_) throw Error("null theta");
    cutoff_.validate();
  }

  const ThetaPtr& theta() const { return theta_; }
  int n() const { return theta_->n(); }
  cplx order() const { return order_; }
  const Cutoff& cutoff() const { return cutoff_; }
  void set_cutoff(const Cutoff& c) {
    c.validate();
    cutoff_ = c;
  }
  // Number of stored components minus one.
  int depth() const { return static_cast<int>(comps_.size()) - 1; }
  const std::vector<HomogeneousComponent>& components() const { return comps_; }
  const std::optional<Remainder>& remainder() const { return rem_; }
  std::optional<Remainder>& remainder() { return rem_; }

  const HomogeneousComponent& component(int j) const { return comps_.at(static_cast<size_t>(j)); }

  bool operator==(const ClassicalSymbol& o) const {
    return same_theta(theta_, o.theta_) && order_ == o.order_ && cutoff_ == o.cutoff_ && comps_ == o.comps_ &&
           rem_ == o.rem_;
  }

  void ensure_depth(int j) {
    while (static_cast<int>(comps_.size()) <= j)
      comps_.push_back({order_ - static_cast<double>(comps_.size()), {}});
  }

  // Places a term in the component matching its degree.
  void add_term(HomogeneousTerm t) {
    if (t.coef.n() != n() || t.alpha.size() != n()) throw DimensionMismatch("term dimension mismatch");
    if (!same_theta(t.coef.theta(), theta_)) throw DimensionMismatch("term theta mismatch");
    t.s = snap(t.s);
    const cplx gap = order_ - t.degree();
    const double j = std::nearbyint(gap.real());
    if (std::abs(gap - cplx(j, 0)) > kDegreeTol || j < 0)
      throw Error("term degree does not fit below the symbol order");
    ensure_depth(static_cast<int>(j));
    comps_[static_cast<size_t>(j)].terms.push_back(std::move(t));
  }

  void add_term(const TorusElement& coef, const Lattice& alpha, cplx s) { add_term({coef, alpha, s}); }

  void add_sample(const Lattice& k, const TorusElement& v) {
    if (!rem_) rem_ = Remainder{};
    rem_->box = std::max(rem_->box, k.norm_inf());
    auto [it, fresh] = rem_->samples.try_emplace(k, v);
    if (!fresh) it->second += v;
    if (it->second.empty()) rem_->samples.erase(it);
  }

  void normalize() {
    for (auto& c : comps_) c.normalize();
    while (!comps_.empty() && comps_.back().terms.empty()) comps_.pop_back();
  }

  bool is_scalar() const {
    for (auto& c : comps_)
      for (auto& t : c.terms)
        if (!t.coef.is_scalar()) return false;
    if (rem_)
      for (auto& [k, v] : rem_->samples)
        if (!v.is_scalar()) return false;
    return true;
  }
  bool has_homogeneous_part() const {
    for (auto& c : comps_)
      if (!c.terms.empty()) return true;
    return false;
  }

  // Value at xi: sum of cutoff-weighted components, plus the remainder
  // sample when xi is a lattice point.
  TorusElement eval(const std::vector<double>& xi) const {
    if (static_cast<int>(xi.size()) != n()) throw DimensionMismatch("evaluation point has wrong length");
    TorusElement out(theta_);
    double r = 0;
    for (double x : xi) r += x * x;
    r = std::sqrt(r);
    const double w = cutoff_.weight(r);
    for (auto& c : comps_)
      for (auto& t : c.terms) {
        const bool poly = t.polynomial();
        const double wt = poly ? 1.0 : w;
        if (wt == 0.0) continue;
        if (!poly && r == 0.0) throw Error("singular term evaluated at the origin without cutoff");
        const cplx v = wt * t.scalar_value(xi, r);
        for (auto& [k, a] : t.coef.coeffs()) out.add(k, a * v);
      }
    if (rem_) {
      Lattice k(n());
      bool lattice = true;
      for (int i = 0; i < n() && lattice; ++i) {
        const double ri = std::nearbyint(xi[i]);
        lattice = ri == xi[i] && std::abs(ri) < 1e9;
        if (lattice) k[i] = static_cast<int>(ri);
      }
      if (lattice)
        if (auto it = rem_->samples.find(k); it != rem_->samples.end())
          for (auto& [l, a] : it->second.coeffs()) out.add(l, a);
    }
    out.prune();
    return out;
  }

  TorusElement eval(const Lattice& k) const { return eval(to_real(k)); }

  static std::vector<double> to_real(const Lattice& k) {
    std::vector<double> x(static_cast<size_t>(k.size()));
    for (int i = 0; i < k.size(); ++i) x[static_cast<size_t>(i)] = k[i];
    return x;
  }

  // tau of the value, computed without building the element.
  cplx eval_trace(const Lattice& k) const {
    const auto xi = to_real(k);
    const double r = k.norm2();
    const double w = cutoff_.weight(r);
    const Lattice zero(n());
    cplx acc = 0;
    for (auto& c : comps_)
      for (auto& t : c.terms) {
        const bool poly = t.polynomial();
        const double wt = poly ? 1.0 : w;
        if (wt == 0.0) continue;
        const cplx a = t.coef.coeff(zero);
        if (a == cplx{}) continue;
        acc += a * wt * t.scalar_value(xi, r);
      }
    if (rem_)
      if (auto it = rem_->samples.find(k); it != rem_->samples.end()) acc += tau(it->second);
    return acc;
  }

 private:
  ThetaPtr theta_;
  cplx order_;
  Cutoff cutoff_;
  std::vector<HomogeneousComponent> comps_;
  std::optional<Remainder> rem_;
};

// Convenience: a one-term symbol coef * xi^alpha * |xi|^s.
inline ClassicalSymbol monomial_symbol(const TorusElement& coef, const Lattice& alpha, cplx s, Cutoff cut = {}) {
  ClassicalSymbol r(coef.theta(), snap(s + static_cast<double>(alpha.norm1())), cut);
  r.add_term(coef, alpha, s);
  r.normalize();
  return r;
}

inline ClassicalSymbol unit_symbol(const ThetaPtr& theta) {
  return monomial_symbol(TorusElement::scalar(theta, 1.0), Lattice(theta->n()), 0.0);
}

}  // namespace nctorus
