#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "nctorus/lattice_zeta.hpp"
#include "nctorus/symbol.hpp"

namespace nctorus {

// int_{S^{n-1}} xi^alpha dsigma
inline double sphere_moment(const Lattice& alpha) {
  double num = 1;
  for (int i = 0; i < alpha.size(); ++i) {
    if (alpha[i] % 2) return 0.0;
    num *= std::tgamma((alpha[i] + 1) / 2.0);
  }
  return 2 * num / std::tgamma((alpha.norm1() + alpha.size()) / 2.0);
}

struct TraceEstimate {
  cplx value;
  double error = 0;
  std::vector<int> levels;  // box radii used (empty for closed forms)
};

using MeromorphicValue = Laurent;

// Sum over the degree -n component of tau(coef) * moment(alpha).
inline cplx nc_residue(const ClassicalSymbol& rho) {
  const int n = rho.n();
  if (!is_integer(rho.order())) return 0.0;
  const int j = static_cast<int>(std::nearbyint(rho.order().real())) + n;
  if (j < 0 || j > rho.depth()) return 0.0;
  cplx acc = 0;
  for (auto& t : rho.component(j).terms) acc += tau(t.coef) * sphere_moment(t.alpha);
  return acc;
}

namespace detail {

struct ScalarTerm {
  cplx c;
  Lattice alpha;
  cplx s;
  bool poly;
  cplx degree;
};

inline std::vector<ScalarTerm> scalar_terms(const ClassicalSymbol& rho) {
  std::vector<ScalarTerm> out;
  for (auto& comp : rho.components())
    for (auto& t : comp.terms) {
      const cplx c = tau(t.coef);
      if (c != cplx{}) out.push_back({c, t.alpha, t.s, t.polynomial(), t.degree()});
    }
  return out;
}

inline cplx remainder_trace(const ClassicalSymbol& rho) {
  cplx acc = 0;
  if (rho.remainder())
    for (auto& [k, v] : rho.remainder()->samples) acc += tau(v);
  return acc;
}

// Lattice points with 0 < |k| < r1 see a cutoff weight other than 1.
inline cplx cutoff_correction(const ClassicalSymbol& rho, const std::vector<ScalarTerm>& terms) {
  const Cutoff& cut = rho.cutoff();
  if (!cut.enabled || cut.r1 <= 1.0) return 0.0;
  cplx acc = 0;
  const int R = static_cast<int>(std::ceil(cut.r1));
  for_each_in_box(rho.n(), R, [&](const Lattice& k) {
    const double r = k.norm2();
    if (r == 0 || r >= cut.r1) return;
    const auto xi = ClassicalSymbol::to_real(k);
    for (auto& t : terms)
      if (!t.poly) acc += t.c * (cut.weight(r) - 1.0) * monomial(xi, t.alpha) * std::exp(t.s * std::log(r));
  });
  return acc;
}

inline cplx solve_constant(const std::vector<int>& K, const std::vector<cplx>& S, const std::vector<cplx>& exps) {
  const int m = static_cast<int>(exps.size());
  Eigen::MatrixXcd A(m + 1, m + 1);
  Eigen::VectorXcd b(m + 1);
  for (int i = 0; i <= m; ++i) {
    A(i, 0) = 1.0;
    for (int j = 0; j < m; ++j) A(i, j + 1) = std::exp(exps[static_cast<size_t>(j)] * std::log(double(K[static_cast<size_t>(i)])));
    b(i) = S[static_cast<size_t>(i)];
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

}  // namespace detail

inline std::vector<int> default_lattice_levels(int n) {
  if (n == 2) return {64, 128, 256};
  if (n == 3) return {16, 32, 64};
  return {8, 16, 32};
}

// sum_k tau[rho(k)], extrapolated in the box radius. Partial sums use
// trapezoid weights on the box boundary so that the tail expansion only
// contains the exponents deg+n, deg+n-2, ... of the components.
inline TraceEstimate lattice_trace(const ClassicalSymbol& rho, std::vector<int> levels = {}) {
  const int n = rho.n();
  const auto terms = detail::scalar_terms(rho);
  const cplx rem = detail::remainder_trace(rho);
  if (terms.empty()) return {rem, 0.0, {}};
  if (rho.order().real() >= -n) throw DivergenceError("lattice trace needs Re(order) < -n for the homogeneous part");
  if (levels.empty()) levels = default_lattice_levels(n);
  std::sort(levels.begin(), levels.end());
  const int L = static_cast<int>(levels.size());
  if (L < 2) throw Error("lattice trace needs at least two box levels");

  std::vector<cplx> exps;
  for (auto& t : terms)
    for (int m = 0; m < 3; ++m) {
      const cplx e = t.degree + static_cast<double>(n - 2 * m);
      bool seen = false;
      for (auto& x : exps) seen = seen || std::abs(x - e) < 1e-9;
      if (!seen) exps.push_back(e);
    }
  std::sort(exps.begin(), exps.end(), [](cplx a, cplx b) { return a.real() > b.real(); });

  std::vector<cplx> S(static_cast<size_t>(L), 0.0);
  const Cutoff& cut = rho.cutoff();
  const int Kmax = levels.back();
  std::vector<double> xi(static_cast<size_t>(n));
  for_each_in_box(n, Kmax, [&](const Lattice& k) {
    const double r = k.norm2();
    const double w = cut.weight(r);
    for (int i = 0; i < n; ++i) xi[static_cast<size_t>(i)] = k[i];
    cplx v = 0;
    for (auto& t : terms) {
      if (t.poly) {
        v += t.c * monomial(xi, t.alpha) * std::pow(r, t.s.real());
      } else if (w != 0.0) {
        v += t.c * w * monomial(xi, t.alpha) * std::exp(t.s * std::log(r));
      }
    }
    if (v == cplx{}) return;
    const int m = k.norm_inf();
    for (int li = 0; li < L; ++li) {
      const int K = levels[static_cast<size_t>(li)];
      if (m > K) continue;
      double wt = 1;
      if (m == K)
        for (int i = 0; i < n; ++i)
          if (std::abs(k[i]) == K) wt *= 0.5;
      S[static_cast<size_t>(li)] += wt * v;
    }
  });

  const int m = std::min<int>(L - 1, static_cast<int>(exps.size()));
  std::vector<cplx> e_all(exps.begin(), exps.begin() + m);
  const cplx best = detail::solve_constant(levels, S, e_all);
  // Same extrapolation with one level and one exponent fewer.
  std::vector<int> lv(levels.begin() + 1, levels.end());
  std::vector<cplx> Sv(S.begin() + 1, S.end());
  std::vector<cplx> e_less(exps.begin(), exps.begin() + std::max(0, m - 1));
  const cplx coarse = detail::solve_constant(lv, Sv, e_less);
  return {best + rem, std::abs(best - coarse), levels};
}

// Canonical trace: finite part of the regularized lattice sum, i.e. the
// analytic continuation of sum_k tau[rho(k)] in the homogeneous exponents.
// Each term contributes tau(coef) * Z(alpha, s) from the lattice zeta.
// Smoothing symbols (no homogeneous part) reduce to the remainder sum.
inline cplx canonical_trace(const ClassicalSymbol& rho) {
  if (rho.has_homogeneous_part() && is_integer(rho.order())) throw IntegerOrderError("canonical trace undefined at integer order; use gauged_trace");
  const auto terms = detail::scalar_terms(rho);
  LatticeZeta zeta(rho.n());
  cplx acc = detail::remainder_trace(rho) + detail::cutoff_correction(rho, terms);
  const Lattice zero(rho.n());
  for (auto& t : terms) {
    acc += t.c * zeta.value(t.alpha, t.s);
    if (t.poly && t.alpha == zero && t.s == cplx{}) acc += t.c;
  }
  return acc;
}

// Laurent data at z = 0 of TR for the gauged family
// (1 - psi)|xi|^z rho + psi rho.
inline MeromorphicValue gauged_trace(const ClassicalSymbol& rho) {
  const auto terms = detail::scalar_terms(rho);
  LatticeZeta zeta(rho.n());
  MeromorphicValue out{0.0, detail::remainder_trace(rho) + detail::cutoff_correction(rho, terms)};
  const Lattice zero(rho.n());
  for (auto& t : terms) {
    const Laurent l = zeta.laurent(t.alpha, t.s);
    out.pole += t.c * l.pole;
    out.finite += t.c * l.finite;
    if (t.poly && t.alpha == zero && t.s == cplx{}) out.finite += t.c;
  }
  return out;
}

// Finite part of int tau[rho(xi)] dxi over R^n for the symbol as written:
// closed-form tails over |xi| >= r1 plus a shell quadrature for |xi| < r1,
// plus the remainder's lattice sum. This differs from canonical_trace by
// the lattice-versus-integral defect of the smooth symbol.
inline cplx regularized_integral(const ClassicalSymbol& rho, int radial = 64, int angular = 256) {
  const int n = rho.n();
  const auto terms = detail::scalar_terms(rho);
  const Cutoff& cut = rho.cutoff();
  const double R = cut.r1;
  cplx acc = detail::remainder_trace(rho);
  for (auto& t : terms) {
    const cplx e = t.degree + static_cast<double>(n);
    if (std::abs(e) < 1e-12) throw IntegerOrderError("degree -n term has no finite-part integral");
    acc += -t.c * sphere_moment(t.alpha) * std::exp(e * std::log(R)) / e;
  }
  const SphereRule sph = sphere_rule(n, angular);
  const Rule1D rad = composite_gauss_legendre({0.0, cut.r0, cut.r1}, radial);
  for (size_t a = 0; a < rad.x.size(); ++a) {
    const double r = rad.x[a];
    const double w = cut.weight(r);
    for (size_t b = 0; b < sph.pts.size(); ++b) {
      cplx v = 0;
      for (auto& t : terms) {
        const double mono = monomial(sph.pts[b], t.alpha) * std::pow(r, t.alpha.norm1());
        if (t.poly)
          v += t.c * mono * std::pow(r, t.s.real());
        else if (w != 0.0)
          v += t.c * w * mono * std::exp(t.s * std::log(r));
      }
      acc += rad.w[a] * sph.w[b] * std::pow(r, n - 1) * v;
    }
  }
  return acc;
}

// Bound on the lattice tail sum_{|k|_inf > box} |tau remainder(k)| assuming
// the declared decay, with the constant fitted on the outermost shell.
inline double remainder_tail_bound(const ClassicalSymbol& rho) {
  if (!rho.remainder() || rho.remainder()->samples.empty()) return 0.0;
  const Remainder& rem = *rho.remainder();
  const double p = rem.decay.real();
  const int n = rho.n();
  if (p + n >= 0) return INFINITY;
  double C = 0;
  for (auto& [k, v] : rem.samples)
    if (k.norm_inf() == rem.box) C = std::max(C, std::abs(tau(v)) * std::pow(k.norm2(), -p));
  return C * sphere_area(n) * std::pow(double(rem.box), p + n) / (-p - n);
}

}  // namespace nctorus
