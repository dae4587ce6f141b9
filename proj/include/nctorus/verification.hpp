#pragma once

// Verification suite: each check measures one identity or invariant and
// compares against a configured tolerance. Reports are emitted as JSON
// lines sorted by id; with identical config and seed the output is
// byte-identical.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nctorus/commutator.hpp"
#include "nctorus/config.hpp"
#include "nctorus/io.hpp"
#include "nctorus/trace.hpp"

namespace nctorus {

struct Report {
  std::string id;
  std::string anchor;      // identity the check measures
  double measured = 0;
  std::string relation;    // "<", ">=" or "=="
  double expected = 0;
  bool pass = false;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
  double runtime = 0;      // seconds; only printed on request

  nlohmann::ordered_json to_json(bool with_runtime = false) const {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["anchor"] = anchor;
    j["measured"] = measured;
    j["relation"] = relation;
    j["expected"] = expected;
    j["pass"] = pass;
    if (!detail.empty()) j["detail"] = detail;
    if (with_runtime) j["runtime"] = runtime;
    return j;
  }
};

inline Report make_report(std::string id, std::string anchor, double measured, std::string rel, double expected) {
  Report r{std::move(id), std::move(anchor), measured, std::move(rel), expected};
  if (r.relation == "<")
    r.pass = measured < expected;
  else if (r.relation == ">=")
    r.pass = measured >= expected;
  else
    r.pass = measured == expected;
  if (!std::isfinite(measured)) r.pass = false;
  return r;
}

// ---------------------------------------------------------------------------
// Random inputs
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

// Per-check stream so that selecting a subset does not change results.
inline Rng check_rng(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : id) h = (h ^ ch) * 1099511628211ull;
  return Rng(seed ^ h);
}

inline double uniform(Rng& g, double a = 0.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(g);
}
inline int uniform_int(Rng& g, int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }

inline cplx random_coefficient(Rng& g) { return std::polar(uniform(g), uniform(g, 0.0, 2 * std::numbers::pi)); }

inline Lattice random_lattice(Rng& g, int n, int box) {
  Lattice k(n);
  for (int i = 0; i < n; ++i) k[i] = uniform_int(g, -box, box);
  return k;
}

inline TorusElement random_element(const ThetaPtr& th, Rng& g, int terms, int box) {
  TorusElement u(th);
  for (int t = 0; t < terms; ++t) u.add(random_lattice(g, th->n(), box), random_coefficient(g));
  u.prune();
  return u;
}

inline Lattice random_multi_index(Rng& g, int n, int total) {
  Lattice a(n);
  for (int m = 0; m < total; ++m) ++a[uniform_int(g, 0, n - 1)];
  return a;
}

// Symbol with components of degree order - j, j <= depth, each holding two
// terms c * xi^alpha |xi|^s with |alpha| <= 2.
inline ClassicalSymbol random_symbol(const ThetaPtr& th, Rng& g, cplx order, int depth, bool scalar = false) {
  const int n = th->n();
  ClassicalSymbol s(th, order);
  for (int j = 0; j <= depth; ++j)
    for (int t = 0; t < 2; ++t) {
      const Lattice a = random_multi_index(g, n, uniform_int(g, 0, 2));
      const TorusElement c = scalar ? TorusElement::scalar(th, random_coefficient(g))
                                    : random_element(th, g, 3, 2);
      s.add_term((1.0 / (j + 1)) * c, a, order - static_cast<double>(j) - static_cast<double>(a.norm1()));
    }
  s.normalize();
  return s;
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

struct SuiteContext {
  const RunConfig& cfg;
  ThetaPtr theta;
  std::optional<SmoothingWitness> witness_cache;

  const SmoothingWitness& witness() {
    if (!witness_cache) {
      BumpParams p;
      p.chi_box = cfg.chi_box;
      p.rho_box = cfg.rho_box;
      p.axis_order = cfg.axis_order;
      p.radial_order = cfg.radial_order;
      p.angular = cfg.angular;
      witness_cache = build_smoothing_witness(theta, p);
    }
    return *witness_cache;
  }
  Rng rng(const std::string& id) const { return check_rng(cfg.seed, id); }
};

struct Check {
  std::string id;
  std::function<Report(SuiteContext&)> run;
};

namespace checks {

inline double elem_err(const TorusElement& a, const TorusElement& b) { return (a - b).norm_max(); }

inline std::vector<Report> algebra(SuiteContext& cx) {
  const RunConfig& c = cx.cfg;
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  Rng g = cx.rng("algebra");
  std::vector<TorusElement> els;
  for (int i = 0; i < c.random_elements; ++i) els.push_back(random_element(th, g, c.element_terms, c.element_box));
  double trac = 0, assoc = 0, star = 0;
  for (size_t i = 0; i < els.size(); ++i) {
    const TorusElement& u = els[i];
    const TorusElement& v = els[(i + 1) % els.size()];
    const TorusElement& w = els[(i + 2) % els.size()];
    trac = std::max(trac, std::abs(tau(u * v) - tau(v * u)));
    assoc = std::max(assoc, elem_err((u * v) * w, u * (v * w)));
    star = std::max(star, elem_err(adjoint(u * v), adjoint(v) * adjoint(u)));
  }
  double ortho = 0;
  const int B = 3;
  for_each_in_box(n, B, [&](const Lattice& k) {
    for_each_in_box(n, B, [&](const Lattice& l) {
      const cplx ip = inner(TorusElement::monomial(th, k), TorusElement::monomial(th, l));
      ortho = std::max(ortho, std::abs(ip - (k == l ? 1.0 : 0.0)));
    });
  });
  // U_l U_j = e^{2 pi i theta_jl} U_j U_l
  double gen = 0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const TorusElement uj = TorusElement::generator(th, j), ul = TorusElement::generator(th, l);
      const cplx ph = std::polar(1.0, 2 * std::numbers::pi * th->at(j, l));
      gen = std::max(gen, elem_err(ul * uj, ph * (uj * ul)));
    }
  std::vector<Report> out;
  out.push_back(make_report("algebra.traciality", "tau(uv) = tau(vu)", trac, "<", c.tol_algebra));
  out.push_back(make_report("algebra.associativity", "(uv)w = u(vw)", assoc, "<", c.tol_algebra));
  out.push_back(make_report("algebra.adjoint", "(uv)* = v* u*", star, "<", c.tol_algebra));
  out.push_back(make_report("algebra.orthonormality", "tau(U^k (U^l)*) = [k = l]", ortho, "<", c.tol_algebra));
  out.push_back(make_report("algebra.generators", "U_l U_j = exp(2 pi i theta_jl) U_j U_l", gen, "<", c.tol_algebra));
  for (auto& r : out) r.detail["samples"] = c.random_elements;
  bool commutative = true;
  for (double v : th->entries()) commutative = commutative && v == 0.0;
  if (commutative) {
    // Products reduce to convolution of coefficient sequences.
    double conv = 0;
    for (size_t i = 0; i + 1 < els.size(); ++i) {
      std::map<Lattice, cplx> ref;
      for (auto& [k, a] : els[i].coeffs())
        for (auto& [l, b] : els[i + 1].coeffs()) ref[k + l] += a * b;
      conv = std::max(conv, elem_err(els[i] * els[i + 1], TorusElement(th, ref)));
    }
    out.push_back(make_report("algebra.convolution", "theta = 0: (uv)_m = sum_{k+l=m} u_k v_l", conv, "<", c.tol_algebra));
  }
  return out;
}

// Largest deviation of two operators over U^k, |k|_inf <= box.
inline double operator_gap(const PsiDOPtr& A, const PsiDOPtr& B, int box) {
  double e = 0;
  for_each_in_box(A->n(), box, [&](const Lattice& k) {
    const TorusElement uk = TorusElement::monomial(A->theta(), k);
    e = std::max(e, (nctorus::apply(A, uk) - nctorus::apply(B, uk)).norm_max());
  });
  return e;
}

inline Report delta_commutator_check(SuiteContext& cx) {
  Rng g = cx.rng("operator.delta_commutator");
  double e = 0;
  for (int i = 0; i < 3; ++i) {
    const ClassicalSymbol rho = random_symbol(cx.theta, g, -0.5 - 0.25 * i, 1);
    for (int j = 0; j < cx.theta->n(); ++j) {
      auto [lhs, rhs] = delta_commutator(rho, j);
      e = std::max(e, operator_gap(lhs, rhs, cx.cfg.operator_box));
    }
  }
  Report r = make_report("operator.delta_commutator", "[delta_j, P_rho] = P_{delta_j rho}", e, "<", cx.cfg.tol_identity);
  r.detail["box"] = cx.cfg.operator_box;
  return r;
}

inline Report unitary_commutator_check(SuiteContext& cx) {
  Rng g = cx.rng("operator.unitary_commutator");
  double e = 0;
  for (int i = 0; i < 3; ++i) {
    const ClassicalSymbol rho = random_symbol(cx.theta, g, -0.5 - 0.25 * i, 1, true);
    for (int j = 0; j < cx.theta->n(); ++j) {
      auto [lhs, rhs] = unitary_commutator(rho, j);
      e = std::max(e, operator_gap(lhs, rhs, cx.cfg.operator_box));
    }
  }
  Report r = make_report("operator.unitary_commutator", "P_{Delta_j rho} = [P_{U_j^{-1} rho}, U_j]", e, "<",
                         cx.cfg.tol_identity);
  r.detail["box"] = cx.cfg.operator_box;
  return r;
}

inline Report tau_split_check(SuiteContext& cx) {
  Rng g = cx.rng("symbol.tau_split");
  const int n = cx.theta->n();
  double e = 0;
  for (int i = 0; i < cx.cfg.random_symbols; ++i) {
    const ClassicalSymbol rho = random_symbol(cx.theta, g, uniform(g, -3.0, 1.0), 2);
    const TauSplit sp = tau_split(rho);
    for (int p = 0; p < 20; ++p) {
      std::vector<double> xi(static_cast<size_t>(n));
      for (auto& x : xi) x = uniform(g, -8.0, 8.0);
      TorusElement re = sp.scalar.eval(xi);
      for (int j = 0; j < n; ++j) re += delta(sp.sigma[static_cast<size_t>(j)].eval(xi), Lattice::unit(n, j));
      const TorusElement v = rho.eval(xi);
      e = std::max(e, elem_err(v, re) / std::max(1.0, v.norm_max()));
    }
  }
  Report r = make_report("symbol.tau_split", "rho = tau[rho] + sum_j delta_j sigma_j", e, "<", cx.cfg.tol_tau_split);
  r.detail["symbols"] = cx.cfg.random_symbols;
  r.detail["points_per_symbol"] = 20;
  return r;
}

inline Report composition_check(SuiteContext& cx) {
  Rng g = cx.rng("operator.composition");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  const int J = cx.cfg.compose;
  const std::vector<double> radii{8, 16, 32, 64};
  double worst = 0;
  nlohmann::ordered_json slopes = nlohmann::ordered_json::array();
  for (int p = 0; p < cx.cfg.symbol_pairs; ++p) {
    ClassicalSymbol a(th, 0.0), b(th, 0.0);
    if (p == 0) {
      // U_1 xi_1 |xi|^{-2} and U_2 |xi|^{-1}
      a = monomial_symbol(TorusElement::generator(th, 0), Lattice::unit(n, 0), -2.0);
      b = monomial_symbol(TorusElement::generator(th, std::min(1, n - 1)), Lattice(n), -1.0);
    } else {
      a = random_symbol(th, g, -0.5 - 0.25 * p, 1);
      b = random_symbol(th, g, -1.0 + 0.125 * p, 1);
    }
    std::vector<double> x, y;
    for (double rr : radii) {
      const Lattice k = probe_point(n, rr);
      x.push_back(k.norm2());
      y.push_back(std::max(compose_check(a, b, J, k), 1e-300));
    }
    const double slope = loglog_slope(x, y);
    const double expected = (a.order() + b.order()).real() - J - 1;
    worst = std::max(worst, std::abs(slope - expected));
    slopes.push_back({{"slope", slope}, {"expected", expected}});
  }
  Report r = make_report("operator.composition", "P_a P_b - P_{a #_J b} = O(|k|^{q_a + q_b - J - 1})", worst, "<",
                         cx.cfg.tol_slope);
  r.detail["J"] = J;
  r.detail["pairs"] = slopes;
  return r;
}

inline Report difference_series_check(SuiteContext& cx) {
  Rng g = cx.rng("symbol.difference_series");
  const int n = cx.theta->n();
  const int L = cx.cfg.difference;
  const std::vector<double> radii{16, 32, 64, 128};
  double worst = 0;
  for (int i = 0; i < 3; ++i) {
    const ClassicalSymbol rho = random_symbol(cx.theta, g, -0.5 - 0.5 * i, 0);
    for (int j = 0; j < n; ++j) {
      const ClassicalSymbol ser = forward_difference_series(rho, j, L);
      std::vector<double> x, y;
      for (double rr : radii) {
        const auto xi = ClassicalSymbol::to_real(probe_point(n, rr));
        x.push_back(std::sqrt(std::inner_product(xi.begin(), xi.end(), xi.begin(), 0.0)));
        y.push_back(std::max(elem_err(difference_exact(rho, j, xi), ser.eval(xi)), 1e-300));
      }
      worst = std::max(worst, std::abs(loglog_slope(x, y) - (rho.order().real() - L - 1)));
    }
  }
  Report r = make_report("symbol.difference_series", "Delta_j rho - sum_{l<=L} d_j^l rho / l! = O(|xi|^{q-L-1})",
                         worst, "<", cx.cfg.tol_slope);
  r.detail["L"] = L;
  return r;
}

// Delta_j rho_j - d_j rho = -(e^D - 1) sum_{m>=N} B_m D^m rho / m!, so the
// leading exponent drops by one when B_N = 0 (odd N >= 3).
inline double difference_residual_exponent(double q, int N) { return q - N - 1 - ((N >= 3 && N % 2) ? 1 : 0); }

inline Report derivative_to_difference_check(SuiteContext& cx) {
  Rng g = cx.rng("symbol.derivative_to_difference");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  double worst = 0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int N : {4, 5}) {
    // past the pre-asymptotic range, above the rounding floor
    const std::vector<double> radii = N == 4 ? std::vector<double>{20, 40, 80} : std::vector<double>{10, 20, 40};
    for (int i = 0; i < 3; ++i) {
      const ClassicalSymbol rho = i == 0 ? monomial_symbol(TorusElement::scalar(th, 1.0), Lattice(n), -1.0)
                                         : random_symbol(th, g, -0.5 - 0.5 * i, 0);
      for (int j = 0; j < n; ++j) {
        const ClassicalSymbol rj = derivative_to_difference(rho, j, N);
        const ClassicalSymbol dj = xi_derivative(rho, Lattice::unit(n, j));
        std::vector<double> x, y;
        for (double rr : radii) {
          std::vector<double> xi(static_cast<size_t>(n));
          for (int m = 0; m < n; ++m) xi[static_cast<size_t>(m)] = rr * (m == 0 ? 0.6 : 0.8 / std::sqrt(n - 1.0));
          x.push_back(rr);
          y.push_back(std::max(elem_err(difference_exact(rj, j, xi), dj.eval(xi)), 1e-300));
        }
        const double slope = loglog_slope(x, y);
        const double expected = difference_residual_exponent(rho.order().real(), N);
        worst = std::max(worst, std::abs(slope - expected));
        if (j == 0) rows.push_back({{"N", N}, {"order", rho.order().real()}, {"slope", slope}, {"expected", expected}});
      }
    }
  }
  Report r = make_report("symbol.derivative_to_difference", "Delta_j rho_j - d_j rho = O(|xi|^{q-N-1}), one order more when B_N = 0",
                         worst, "<", cx.cfg.tol_slope);
  r.detail["fits"] = rows;
  return r;
}

inline std::vector<double> trace_orders(int n) {
  const double shift = -(n - 2.0);
  return {-2.5 + shift, -3.5 + shift, -4.25 + shift};
}

inline Report trace_agreement_check(SuiteContext& cx) {
  Rng g = cx.rng("trace.agreement");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  const auto orders = trace_orders(n);
  double worst = 0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < 5; ++i) {
    const double q = orders[static_cast<size_t>(i) % orders.size()];
    ClassicalSymbol rho = random_symbol(th, g, q, 1);
    rho = add(rho, monomial_symbol(TorusElement::scalar(th, 1.0), Lattice(n), q));
    const TraceEstimate lat = lattice_trace(rho);
    const cplx tr = canonical_trace(rho);
    const double rel = std::abs(tr - lat.value) / std::abs(lat.value);
    worst = std::max(worst, rel);
    rows.push_back({{"order", q},
                    {"canonical", {tr.real(), tr.imag()}},
                    {"lattice", {lat.value.real(), lat.value.imag()}},
                    {"extrapolation_error", lat.error}});
  }
  Report r = make_report("trace.agreement", "TR(P) = sum_k tau[rho(k)] for Re q < -n", worst, "<", cx.cfg.tol_trace);
  r.detail["symbols"] = rows;
  return r;
}

// Residue from a quadrature of the degree -n component over the sphere.
inline cplx residue_by_quadrature(const ClassicalSymbol& rho, int angular) {
  const int n = rho.n();
  if (!is_integer(rho.order())) return 0.0;
  const int j = static_cast<int>(std::nearbyint(rho.order().real())) + n;
  if (j < 0 || j > rho.depth()) return 0.0;
  const SphereRule sph = sphere_rule(n, angular);
  cplx acc = 0;
  for (size_t p = 0; p < sph.pts.size(); ++p)
    acc += sph.w[p] * tau(eval_component(rho.component(j), rho.theta(), sph.pts[p]));
  return acc;
}

inline Report residue_pole_check(SuiteContext& cx) {
  Rng g = cx.rng("trace.residue_pole");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  double worst = 0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  const std::vector<int> orders{-n, -n + 1, -n - 1, 0, -1, -n, -n + 1, -n - 2, 1, -n};
  for (size_t i = 0; i < orders.size(); ++i) {
    const int q = orders[i];
    ClassicalSymbol rho = i == 0 ? monomial_symbol(TorusElement::scalar(th, 1.0), Lattice(n), -double(n))
                                 : random_symbol(th, g, double(q), std::max(1, q + n + 1));
    const cplx res = nc_residue(rho);
    const Laurent l = gauged_trace(rho);
    const cplx quad = residue_by_quadrature(rho, cx.cfg.sphere_angular);
    worst = std::max({worst, std::abs(l.pole + res), std::abs(quad - res)});
    rows.push_back({{"order", q}, {"residue", {res.real(), res.imag()}}, {"pole", {l.pole.real(), l.pole.imag()}}});
  }
  Report r = make_report("trace.residue_pole", "Res_{z=0} TR(P(z)) = -Res(P)", worst, "<", cx.cfg.tol_pole);
  r.detail["symbols"] = rows;
  return r;
}

inline Report res_commutator_check(SuiteContext& cx) {
  Rng g = cx.rng("trace.res_commutator");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  double worst = 0;
  for (int p = 0; p < cx.cfg.symbol_pairs; ++p) {
    const double q1 = -0.5 + 0.25 * p;
    const double q2 = -double(n) + (p % 3) - q1;
    const ClassicalSymbol a = random_symbol(th, g, q1, 2);
    const ClassicalSymbol b = random_symbol(th, g, q2, 2);
    worst = std::max(worst, std::abs(commutator_residue(a, b)));
  }
  return make_report("trace.res_commutator", "Res(a # b) = Res(b # a)", worst, "<", cx.cfg.tol_res_commutator);
}

inline Report tr_commutator_check(SuiteContext& cx) {
  Rng g = cx.rng("trace.tr_commutator");
  const ThetaPtr& th = cx.theta;
  const int box = cx.cfg.symbolize_box;
  const int J = 8;
  double worst = 0, tail = 0;
  for (int p = 0; p < std::min(cx.cfg.symbol_pairs, 3); ++p) {
    const double q1 = -0.25 - 0.125 * p, q2 = -0.4;
    const ClassicalSymbol a = random_symbol(th, g, q1, 1);
    const ClassicalSymbol b = random_symbol(th, g, q2, 1);
    const ClassicalSymbol hom = subtract(sharp(a, b, J), sharp(b, a, J));
    const PsiDOPtr comm = commutator_op(symbol_op(a), symbol_op(b));
    const ClassicalSymbol full = symbolize(comm, hom, box, cplx(q1 + q2 - J - 1));
    worst = std::max(worst, std::abs(canonical_trace(full)));
    tail = std::max(tail, remainder_tail_bound(full));
  }
  Report r = make_report("trace.tr_commutator", "TR([A, B]) = 0 for q_A + q_B not in Z", worst + tail, "<",
                         cx.cfg.tol_tr_commutator);
  r.detail["trace"] = worst;
  r.detail["tail_bound"] = tail;
  r.detail["J"] = J;
  r.detail["box"] = box;
  return r;
}

inline Report smoothing_residue_check(SuiteContext& cx) {
  Rng g = cx.rng("trace.smoothing_residue");
  ClassicalSymbol s(cx.theta, -1.0);
  for (int i = 0; i < 10; ++i) s.add_sample(random_lattice(g, cx.theta->n(), 5), random_element(cx.theta, g, 3, 2));
  return make_report("trace.smoothing_residue", "Res(R) = 0 for smoothing R", std::abs(nc_residue(s)), "==", 0.0);
}

inline Report sphere_moment_check(SuiteContext& cx) {
  const int n = cx.theta->n();
  const SphereRule sph = sphere_rule(n, cx.cfg.sphere_angular);
  double worst = 0;
  for (int m = 0; m <= 8; ++m)
    for_each_multi_index(n, m, [&](const Lattice& a) {
      double q = 0;
      for (size_t p = 0; p < sph.pts.size(); ++p) q += sph.w[p] * monomial(sph.pts[p], a);
      const double exact = sphere_moment(a);
      worst = std::max(worst, exact == 0 ? std::abs(q) : std::abs(q - exact) / std::abs(exact));
    });
  Report r = make_report("trace.sphere_moments", "int_S xi^a = 2 prod G((a_i+1)/2) / G((|a|+n)/2)", worst, "<",
                         cx.cfg.tol_sphere);
  r.detail["max_degree"] = 8;
  return r;
}

// theta = 0: trace of the Fourier multiplier family by grid averaging in x.
inline Report multiplier_trace_check(SuiteContext& cx) {
  Rng g = cx.rng("trace.multiplier");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  const double q = -6.0 - (n - 2) + 0.5;
  ClassicalSymbol rho = random_symbol(th, g, q, 1);
  rho = add(rho, monomial_symbol(TorusElement::scalar(th, 1.0), Lattice(n), q));

  // Grid mean of each coefficient function sum_l c_l e^{i l.x}.
  const int G = 8;
  auto grid_mean = [&](const TorusElement& c) {
    cplx acc = 0;
    int count = 0;
    for_each_in_box(n, G / 2, [&](const Lattice& m) {
      bool inside = true;
      for (int i = 0; i < n; ++i) inside = inside && m[i] < G / 2;
      if (!inside) return;
      cplx v = 0;
      for (auto& [l, a] : c.coeffs()) {
        double ph = 0;
        for (int i = 0; i < n; ++i) ph += l[i] * (2 * std::numbers::pi * m[i] / G);
        v += a * std::polar(1.0, ph);
      }
      acc += v;
      ++count;
    });
    return acc / double(count);
  };
  struct Scalar {
    cplx c;
    Lattice alpha;
    cplx s;
  };
  std::vector<Scalar> terms;
  for (auto& comp : rho.components())
    for (auto& t : comp.terms) terms.push_back({grid_mean(t.coef), t.alpha, t.s});
  const int K = n == 2 ? 400 : 60;
  cplx direct = 0;
  for_each_in_box(n, K, [&](const Lattice& k) {
    if (k.is_zero()) return;
    double r2 = 0, mono;
    for (int i = 0; i < n; ++i) r2 += double(k[i]) * k[i];
    for (auto& t : terms) {
      mono = 1;
      for (int i = 0; i < n; ++i) mono *= std::pow(double(k[i]), t.alpha[i]);
      direct += t.c * mono * std::exp(0.5 * t.s * std::log(r2));
    }
  });
  const TraceEstimate lat = lattice_trace(rho);
  const double rel = std::abs(lat.value - direct) / std::abs(direct);
  Report r = make_report("trace.multiplier", "theta = 0: Tr(P) = sum_k mean_x rho(x, k)", rel, "<", cx.cfg.tol_series);
  r.detail["box"] = K;
  return r;
}

inline std::vector<Report> witness_checks(SuiteContext& cx) {
  const SmoothingWitness& w = cx.witness();
  const RunConfig& c = cx.cfg;
  std::vector<Report> out;
  out.push_back(make_report("witness.normalization", "(2 pi)^{-n} sum_k chi(k) = 1", w.normalization_error(), "<",
                            c.tol_normalization));
  out.push_back(make_report("witness.telescoping", "chi(k) = sum_j Delta_j rho_j(k)",
                            w.telescoping_error(c.telescope_box), "<", c.tol_telescoping));
  out.back().detail["box"] = c.telescope_box;
  out.push_back(make_report("witness.presentation", "R_0 = sum_j [P_j, U_j]",
                            operator_gap(w.r0(), w.commutator_presentation(), c.presentation_box), "<",
                            c.tol_presentation));
  out.back().detail["box"] = c.presentation_box;
  return out;
}

// Residue of each emitted commutator, via its symbol.
inline double part_residues(const CommutatorDecomposition& d, const ThetaPtr& th) {
  const int n = th->n();
  double worst = 0;
  for (auto& u : d.u_parts) {
    const ClassicalSymbol uj = monomial_symbol(TorusElement::generator(th, u.axis), Lattice(n), 0.0);
    worst = std::max(worst, std::abs(commutator_residue(u.symbol, uj)));
  }
  for (auto& p : d.delta_parts) {
    const ClassicalSymbol xj = monomial_symbol(TorusElement::scalar(th, 1.0), Lattice::unit(n, p.axis), 0.0);
    worst = std::max(worst, std::abs(commutator_residue(xj, p.symbol)));
  }
  return worst;
}

inline std::vector<Report> decomposition_checks(SuiteContext& cx) {
  Rng g = cx.rng("decomposition");
  const ThetaPtr& th = cx.theta;
  const int n = th->n();
  const int depth = cx.cfg.decompose;
  const TorusElement one = TorusElement::scalar(th, 1.0);
  DecomposeOptions opt;
  opt.depth = depth;

  struct Case {
    std::string name;
    ClassicalSymbol rho;
  };
  std::vector<Case> cases;
  cases.push_back({"scalar_order_minus_n_minus_1", monomial_symbol(one, Lattice(n), -double(n) - 1)});
  {
    ClassicalSymbol mixed = monomial_symbol(3.0 * one, Lattice(n), -double(n));
    mixed = add(mixed, monomial_symbol(TorusElement::generator(th, 0), Lattice(n), -double(n)));
    mixed = add(mixed, monomial_symbol(random_element(th, g, 3, 2), Lattice::unit(n, 0), -double(n) - 2));
    cases.push_back({"mixed_order_minus_n", mixed});
  }
  {
    // Scalar degree -n part with nonzero mean plus a zero-mean part that
    // needs the divergence solver.
    ClassicalSymbol r = random_symbol(th, g, -1.0, n);
    Lattice a11(n), a12(n);
    a11[0] = 2;
    a12[0] = 1;
    a12[1 % n] += 1;
    r = add(r, monomial_symbol(2.0 * one, a11, -double(n) - 2));
    r = add(r, monomial_symbol(0.7 * one, a12, -double(n) - 2));
    r = add(r, monomial_symbol(0.5 * one, Lattice::unit(n, 0), -2.0));
    cases.push_back({"random_order_minus_1", r});
  }
  {
    ClassicalSymbol r = random_symbol(th, g, -double(n) + 0.5, 1);
    r = add(r, monomial_symbol(one, Lattice(n), -double(n) + 0.5));
    cases.push_back({"random_order_minus_n_plus_half", r});
  }

  double minM = INFINITY, base_err = 0, res = 0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (auto& cs : cases) {
    const bool integral = is_integer(cs.rho.order());
    const ClassicalSymbol pivot = integral ? default_residue_pivot(th) : cx.witness().r0_symbol();
    const CommutatorDecomposition d = decompose(cs.rho, pivot, opt);
    const DecayFit fit = residual_decay(d.residual, {4, 8, 16, 32});
    const cplx expect = integral ? nc_residue(cs.rho) : canonical_trace(cs.rho);
    const double be = std::abs(d.base->first - expect);
    const double pr = part_residues(d, th);
    minM = std::min(minM, fit.exponent);
    base_err = std::max(base_err, be);
    res = std::max(res, pr);
    nlohmann::ordered_json row{{"case", cs.name}};
    if (fit.exact)
      row["residual"] = "zero";
    else
      row["decay_exponent"] = fit.exponent;
    row["base"] = {d.base->first.real(), d.base->first.imag()};
    row["u_parts"] = d.u_parts.size();
    row["delta_parts"] = d.delta_parts.size();
    rows.push_back(row);
  }
  // Cases whose residual vanishes identically do not constrain M.
  if (std::isinf(minM)) minM = 1e300;
  std::vector<Report> out;
  out.push_back(make_report("decomposition.base", "base coefficient = Res(P) (integer order) or TR(P)", base_err, "<",
                            cx.cfg.tol_base));
  out.push_back(make_report("decomposition.part_residues", "Res([P_j, U_j]) = Res([delta_j, Q_j]) = 0", res, "<",
                            cx.cfg.tol_res_commutator));
  out.push_back(make_report("decomposition.reassembly", "P - c P_0 - sum commutators = O(|k|^{-M})", minM, ">=",
                            double(depth - 1)));
  out.back().detail["cases"] = rows;
  out.back().detail["depth"] = depth;
  return out;
}

inline Report serialization_check(SuiteContext& cx) {
  Rng g = cx.rng("io.roundtrip");
  const ThetaPtr& th = cx.theta;
  int failures = 0;
  for (int i = 0; i < 5; ++i) {
    const TorusElement u = random_element(th, g, cx.cfg.element_terms, cx.cfg.element_box);
    std::stringstream s1;
    write_element(s1, u);
    const std::string t1 = s1.str();
    const TorusElement u2 = read_element(s1);
    std::ostringstream s1b;
    write_element(s1b, u2);
    if (!(u2.coeffs() == u.coeffs()) || s1b.str() != t1) ++failures;

    ClassicalSymbol rho = random_symbol(th, g, uniform(g, -3, 1), 2);
    for (int k = 0; k < 4; ++k) rho.add_sample(random_lattice(g, th->n(), 3), random_element(th, g, 2, 1));
    rho.remainder()->decay = -7.5;
    std::stringstream s2;
    write_symbol(s2, rho);
    const std::string t2 = s2.str();
    const ClassicalSymbol rho2 = read_symbol(s2);
    std::ostringstream s2b;
    write_symbol(s2b, rho2);
    if (!(rho2 == rho) || s2b.str() != t2) ++failures;

    const PsiDOPtr P = commutator_op(
        symbol_op(rho), sum_op({{random_coefficient(g), multiplication_op(u)}, {-1.0, derivation_op(th, 0)},
                                {0.5, difference_op(rho, 0, 2)}}));
    std::stringstream s3;
    write_psido(s3, P);
    const std::string t3 = s3.str();
    const PsiDOPtr P2 = read_psido(s3);
    std::ostringstream s3b;
    write_psido(s3b, P2);
    if (!same_tree(*P, *P2) || s3b.str() != t3) ++failures;
  }
  const std::string ct = config_text(cx.cfg);
  const RunConfig back = parse_config(ct);
  if (!(back == cx.cfg) || config_text(back) != ct) ++failures;
  return make_report("io.roundtrip", "parse(print(x)) = x", failures, "==", 0.0);
}

}  // namespace checks

// All checks in canonical order. Checks producing several reports share
// one entry whose id is the common prefix.
inline std::vector<std::pair<std::string, std::function<std::vector<Report>(SuiteContext&)>>> suite_checks() {
  using F = std::function<std::vector<Report>(SuiteContext&)>;
  auto one = [](Report (*f)(SuiteContext&)) { return F([f](SuiteContext& c) { return std::vector<Report>{f(c)}; }); };
  return {
      {"algebra", F(checks::algebra)},
      {"decomposition", F(checks::decomposition_checks)},
      {"io.roundtrip", one(checks::serialization_check)},
      {"operator.composition", one(checks::composition_check)},
      {"operator.delta_commutator", one(checks::delta_commutator_check)},
      {"operator.unitary_commutator", one(checks::unitary_commutator_check)},
      {"symbol.derivative_to_difference", one(checks::derivative_to_difference_check)},
      {"symbol.difference_series", one(checks::difference_series_check)},
      {"symbol.tau_split", one(checks::tau_split_check)},
      {"trace.agreement", one(checks::trace_agreement_check)},
      {"trace.multiplier", one(checks::multiplier_trace_check)},
      {"trace.res_commutator", one(checks::res_commutator_check)},
      {"trace.residue_pole", one(checks::residue_pole_check)},
      {"trace.smoothing_residue", one(checks::smoothing_residue_check)},
      {"trace.sphere_moments", one(checks::sphere_moment_check)},
      {"trace.tr_commutator", one(checks::tr_commutator_check)},
      {"witness", F(checks::witness_checks)},
  };
}

inline std::vector<std::string> split_selection(const std::string& sel) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : sel + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return out;
}

// A pattern selects an id when it equals the id or is a dot-separated
// prefix of it ("trace" selects "trace.agreement").
inline bool selected(const std::string& id, const std::vector<std::string>& pats) {
  if (pats.empty()) return true;
  for (auto& p : pats) {
    if (id == p) return true;
    if (id.size() > p.size() && id.compare(0, p.size(), p) == 0 && id[p.size()] == '.') return true;
    if (p.size() > id.size() && p.compare(0, id.size(), id) == 0 && p[id.size()] == '.') return true;
  }
  return false;
}

inline bool is_commutative(const RunConfig& c) {
  return std::all_of(c.theta.begin(), c.theta.end(), [](double v) { return v == 0.0; });
}

inline std::vector<Report> run_suite(const RunConfig& cfg, const std::string& selection = {}) {
  validate(cfg);
  SuiteContext cx{cfg, cfg.make_theta_ptr(), std::nullopt};
  const auto pats = split_selection(selection);
  std::vector<Report> out;
  for (auto& [id, run] : suite_checks()) {
    if (!selected(id, pats)) continue;
    if (id == "trace.multiplier" && !is_commutative(cfg)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Report> rs;
    try {
      rs = run(cx);
    } catch (const Error& e) {
      Report r = make_report(id, "", NAN, "<", 0.0);
      r.detail["error"] = e.what();
      rs.push_back(r);
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : rs)
      if (selected(r.id, pats)) {
        r.runtime = dt / double(rs.size());
        out.push_back(std::move(r));
      }
  }
  std::sort(out.begin(), out.end(), [](const Report& a, const Report& b) { return a.id < b.id; });
  return out;
}

inline bool all_pass(const std::vector<Report>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const Report& r) { return r.pass; });
}

inline void write_reports(std::ostream& out, const std::vector<Report>& rs, bool with_runtime = false) {
  for (auto& r : rs) out << r.to_json(with_runtime).dump() << '\n';
}

}  // namespace nctorus
