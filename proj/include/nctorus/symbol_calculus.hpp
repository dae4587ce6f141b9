#pragma once

#include <vector>

#include "nctorus/symbol.hpp"

namespace nctorus {

// ---------------------------------------------------------------------------
// Linear structure
// ---------------------------------------------------------------------------

inline ClassicalSymbol scale(const ClassicalSymbol& a, cplx c) {
  ClassicalSymbol r(a.theta(), a.order(), a.cutoff());
  for (auto& comp : a.components())
    for (auto& t : comp.terms) r.add_term(c * t.coef, t.alpha, t.s);
  if (a.remainder()) {
    for (auto& [k, v] : a.remainder()->samples) r.add_sample(k, c * v);
    if (r.remainder()) {
      r.remainder()->box = a.remainder()->box;
      r.remainder()->decay = a.remainder()->decay;
    }
  }
  r.normalize();
  return r;
}

// Sum of two symbols whose orders differ by an integer. The result carries
// the order with the larger real part and the cutoff of the first operand.
inline ClassicalSymbol add(const ClassicalSymbol& a, const ClassicalSymbol& b) {
  if (!same_theta(a.theta(), b.theta())) throw DimensionMismatch("symbols over different theta");
  const cplx gap = a.order() - b.order();
  if (!is_integer(gap, kDegreeTol)) throw Error("cannot add symbols whose orders differ by a non-integer");
  const cplx q = gap.real() >= 0 ? a.order() : b.order();
  ClassicalSymbol r(a.theta(), q, a.cutoff());
  for (const ClassicalSymbol* s : {&a, &b}) {
    for (auto& comp : s->components())
      for (auto& t : comp.terms) r.add_term(t);
    if (s->remainder()) {
      for (auto& [k, v] : s->remainder()->samples) r.add_sample(k, v);
      if (r.remainder()) {
        r.remainder()->box = std::max(r.remainder()->box, s->remainder()->box);
        const cplx d = s->remainder()->decay;
        if (d.real() > r.remainder()->decay.real()) r.remainder()->decay = d;
      }
    }
  }
  r.normalize();
  return r;
}

inline ClassicalSymbol subtract(const ClassicalSymbol& a, const ClassicalSymbol& b) { return add(a, scale(b, -1.0)); }

// Left (or right) multiplication of every coefficient by a fixed element.
inline ClassicalSymbol left_multiply(const TorusElement& x, const ClassicalSymbol& a, bool right = false) {
  ClassicalSymbol r(a.theta(), a.order(), a.cutoff());
  auto mul = [&](const TorusElement& c) { return right ? multiply(c, x) : multiply(x, c); };
  for (auto& comp : a.components())
    for (auto& t : comp.terms) r.add_term(mul(t.coef), t.alpha, t.s);
  if (a.remainder()) {
    for (auto& [k, v] : a.remainder()->samples) r.add_sample(k, mul(v));
    if (r.remainder()) *r.remainder() = Remainder{a.remainder()->box, a.remainder()->decay, r.remainder()->samples};
  }
  r.normalize();
  return r;
}

// ---------------------------------------------------------------------------
// Term calculus
// ---------------------------------------------------------------------------

// d/dxi_j (xi^alpha |xi|^s) = alpha_j xi^{alpha-e_j}|xi|^s + s xi^{alpha+e_j}|xi|^{s-2}
inline std::vector<HomogeneousTerm> derive_term(const HomogeneousTerm& t, int j) {
  std::vector<HomogeneousTerm> out;
  if (t.alpha[j] > 0) {
    Lattice a = t.alpha;
    a[j] -= 1;
    out.push_back({static_cast<double>(t.alpha[j]) * t.coef, a, t.s});
  }
  if (t.s != cplx{}) {
    Lattice a = t.alpha;
    a[j] += 1;
    out.push_back({t.s * t.coef, a, snap(t.s - 2.0)});
  }
  std::erase_if(out, [](const HomogeneousTerm& x) { return x.coef.empty(); });
  return out;
}

inline HomogeneousComponent derive_component(const HomogeneousComponent& c, const Lattice& beta) {
  HomogeneousComponent cur = c;
  for (int j = 0; j < beta.size(); ++j)
    for (int m = 0; m < beta[j]; ++m) {
      HomogeneousComponent next{cur.degree - 1.0, {}};
      for (auto& t : cur.terms)
        for (auto& d : derive_term(t, j)) next.terms.push_back(std::move(d));
      next.normalize();
      cur = std::move(next);
    }
  return cur;
}

inline HomogeneousComponent derivation_component(const HomogeneousComponent& c, const Lattice& alpha) {
  HomogeneousComponent out{c.degree, {}};
  for (auto& t : c.terms) out.terms.push_back({delta(t.coef, alpha), t.alpha, t.s});
  out.normalize();
  return out;
}

// Pointwise product of two components (coefficients multiply in A_theta).
inline HomogeneousComponent multiply_components(const HomogeneousComponent& a, const HomogeneousComponent& b) {
  HomogeneousComponent out{a.degree + b.degree, {}};
  for (auto& x : a.terms)
    for (auto& y : b.terms) out.terms.push_back({multiply(x.coef, y.coef), x.alpha + y.alpha, snap(x.s + y.s)});
  out.normalize();
  return out;
}

// Homogeneous part only; lattice remainders do not differentiate.
inline ClassicalSymbol xi_derivative(const ClassicalSymbol& a, const Lattice& beta) {
  ClassicalSymbol r(a.theta(), a.order() - static_cast<double>(beta.norm1()), a.cutoff());
  for (auto& c : a.components())
    for (auto& t : derive_component(c, beta).terms) r.add_term(t);
  r.normalize();
  return r;
}

inline ClassicalSymbol coeff_derivation(const ClassicalSymbol& a, const Lattice& alpha) {
  ClassicalSymbol r(a.theta(), a.order(), a.cutoff());
  for (auto& c : a.components())
    for (auto& t : c.terms) r.add_term(delta(t.coef, alpha), t.alpha, t.s);
  if (a.remainder()) {
    for (auto& [k, v] : a.remainder()->samples) r.add_sample(k, delta(v, alpha));
    if (r.remainder()) *r.remainder() = Remainder{a.remainder()->box, a.remainder()->decay, r.remainder()->samples};
  }
  r.normalize();
  return r;
}

// Composition law truncated after component J:
// (a#b)_{qa+qb-j} = sum_{k+l+|alpha|=j} (1/alpha!) d_xi^alpha a_{qa-k} . delta^alpha b_{qb-l}
inline ClassicalSymbol sharp(const ClassicalSymbol& a, const ClassicalSymbol& b, int J) {
  if (J < 0) throw Error("sharp depth must be >= 0");
  if (!same_theta(a.theta(), b.theta())) throw DimensionMismatch("symbols over different theta");
  const int n = a.n();
  ClassicalSymbol r(a.theta(), a.order() + b.order(), a.cutoff());
  const int na = a.depth() + 1, nb = b.depth() + 1;
  for (int m = 0; m <= J; ++m)
    for_each_multi_index(n, m, [&](const Lattice& alpha) {
      const double inv = 1.0 / factorial(alpha);
      std::vector<HomogeneousComponent> da, db;
      for (int k = 0; k < na && k + m <= J; ++k) da.push_back(derive_component(a.component(k), alpha));
      for (int l = 0; l < nb && l + m <= J; ++l) db.push_back(derivation_component(b.component(l), alpha));
      for (size_t k = 0; k < da.size(); ++k) {
        if (da[k].terms.empty()) continue;
        for (size_t l = 0; l < db.size() && static_cast<int>(k + l) + m <= J; ++l) {
          if (db[l].terms.empty()) continue;
          for (auto& t : multiply_components(da[k], db[l]).terms) r.add_term(inv * t.coef, t.alpha, t.s);
        }
      }
    });
  r.normalize();
  return r;
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

// Taylor form sum_{l=1}^{L} (1/l!) d_j^l a, a symbol of order q-1.
inline ClassicalSymbol forward_difference_series(const ClassicalSymbol& a, int j, int L) {
  if (L < 1) throw Error("difference depth must be >= 1");
  ClassicalSymbol r(a.theta(), a.order() - 1.0, a.cutoff());
  Lattice e = Lattice::unit(a.n(), j);
  double fact = 1;
  std::vector<HomogeneousComponent> cur(a.components().begin(), a.components().end());
  for (int l = 1; l <= L; ++l) {
    fact *= l;
    for (auto& c : cur) {
      c = derive_component(c, e);
      for (auto& t : c.terms) r.add_term((1.0 / fact) * t.coef, t.alpha, t.s);
    }
  }
  r.normalize();
  return r;
}

// Exact difference Delta_j^p a at xi: sum_m C(p,m)(-1)^{p-m} a(xi + m e_j).
inline TorusElement difference_exact(const ClassicalSymbol& a, int j, const std::vector<double>& xi, int p = 1) {
  TorusElement out(a.theta());
  double binom = 1;
  for (int m = 0; m <= p; ++m) {
    std::vector<double> x = xi;
    x[static_cast<size_t>(j)] += m;
    const double sgn = ((p - m) % 2) ? -1.0 : 1.0;
    out += (sgn * binom) * a.eval(x);
    binom = binom * (p - m) / (m + 1);
  }
  return out;
}

inline TorusElement difference_exact(const ClassicalSymbol& a, int j, const Lattice& k, int p = 1) {
  return difference_exact(a, j, ClassicalSymbol::to_real(k), p);
}

// ---------------------------------------------------------------------------
// Euler primitive: h = (q+n)^{-1} sum_j d_j (xi_j h) for degree q != -n
// ---------------------------------------------------------------------------

inline std::vector<HomogeneousComponent> euler_primitive(const HomogeneousComponent& h, int n) {
  const cplx qn = h.degree + static_cast<double>(n);
  if (std::abs(qn) < kDegreeTol) throw NonDecomposable("component of degree -n has no Euler primitive");
  std::vector<HomogeneousComponent> out;
  for (int j = 0; j < n; ++j) {
    HomogeneousComponent c{h.degree + 1.0, {}};
    for (auto& t : h.terms) c.terms.push_back({(1.0 / qn) * t.coef, t.alpha + Lattice::unit(n, j), t.s});
    c.normalize();
    out.push_back(std::move(c));
  }
  return out;
}

// Scalar value of one component at xi (no cutoff).
inline TorusElement eval_component(const HomogeneousComponent& c, const ThetaPtr& theta, const std::vector<double>& xi) {
  double r = 0;
  for (double x : xi) r += x * x;
  r = std::sqrt(r);
  TorusElement out(theta);
  for (auto& t : c.terms) {
    const cplx v = t.scalar_value(xi, r);
    for (auto& [k, a] : t.coef.coeffs()) out.add(k, a * v);
  }
  out.prune();
  return out;
}

}  // namespace nctorus
