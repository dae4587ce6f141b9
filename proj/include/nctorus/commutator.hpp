#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nctorus/psido.hpp"
#include "nctorus/quadrature.hpp"
#include "nctorus/trace.hpp"

namespace nctorus {

// ---------------------------------------------------------------------------
// tau projection: rho = tau[rho] + sum_j delta_j sigma_j, sigma_j = delta_j Lap^{-1} rho
// ---------------------------------------------------------------------------

struct TauSplit {
  ClassicalSymbol scalar;
  std::vector<ClassicalSymbol> sigma;
};

inline TauSplit tau_split(const ClassicalSymbol& rho) {
  const int n = rho.n();
  auto transform = [&](auto&& f) {
    ClassicalSymbol r(rho.theta(), rho.order(), rho.cutoff());
    for (auto& c : rho.components())
      for (auto& t : c.terms) r.add_term(f(t.coef), t.alpha, t.s);
    if (rho.remainder()) {
      for (auto& [k, v] : rho.remainder()->samples) r.add_sample(k, f(v));
      if (!r.remainder()) r.remainder() = Remainder{};
      r.remainder()->box = rho.remainder()->box;
      r.remainder()->decay = rho.remainder()->decay;
    }
    r.normalize();
    return r;
  };
  TauSplit out{transform([&](const TorusElement& c) { return TorusElement::scalar(rho.theta(), tau(c)); }), {}};
  for (int j = 0; j < n; ++j)
    out.sigma.push_back(transform(
        [&](const TorusElement& c) { return delta(laplacian_inverse(c), Lattice::unit(n, j)); }));
  return out;
}

// Drops components of degree below base_order - (keep - 1).
inline ClassicalSymbol truncate_below(const ClassicalSymbol& a, cplx base_order, int keep) {
  ClassicalSymbol r(a.theta(), a.order(), a.cutoff());
  for (auto& c : a.components()) {
    const double gap = (base_order - c.degree).real();
    if (gap > keep - 1 + 1e-9) continue;
    for (auto& t : c.terms) r.add_term(t);
  }
  r.normalize();
  return r;
}

// rho_j = sum_{l<N} ((-1)^l / (l+1)) Delta_j^l rho, differences in Taylor
// form, so that Delta_j rho_j = d_j rho up to O(|xi|^{q-N-1}).
inline ClassicalSymbol derivative_to_difference(const ClassicalSymbol& rho, int j, int N) {
  if (N < 1) throw Error("difference depth must be >= 1");
  ClassicalSymbol hom = rho;
  hom.remainder().reset();
  ClassicalSymbol acc = truncate_below(hom, rho.order(), N);
  ClassicalSymbol cur = acc;
  for (int l = 1; l < N; ++l) {
    cur = truncate_below(forward_difference_series(cur, j, N), rho.order(), N);
    acc = add(acc, scale(cur, ((l % 2) ? -1.0 : 1.0) / (l + 1)));
  }
  ClassicalSymbol out(rho.theta(), rho.order(), rho.cutoff());
  for (auto& c : acc.components())
    for (auto& t : c.terms) out.add_term(t);
  out.normalize();
  return out;
}

// Scalar degree -n component with zero sphere mean written as
// sum_j d_j F_j, F_j spanned by xi^gamma |xi|^{1-n-|gamma|}. On the sphere
// the data are polynomials, so a finite basis suffices; the fit is checked
// at independent points.
inline std::vector<HomogeneousComponent> solve_divergence(const HomogeneousComponent& h, const ThetaPtr& theta) {
  const int n = theta->n();
  int D = 0;
  for (auto& t : h.terms) D = std::max<int>(D, static_cast<int>(t.alpha.norm1()));
  const int G = D + 1;
  struct Basis {
    int axis;
    Lattice gamma;
  };
  std::vector<Basis> basis;
  for (int j = 0; j < n; ++j)
    for (int g = 0; g <= G; ++g) for_each_multi_index(n, g, [&](const Lattice& a) { basis.push_back({j, a}); });
  const TorusElement one = TorusElement::scalar(theta, 1.0);
  auto field_div = [&](const Basis& b) {
    HomogeneousComponent f{cplx(1.0 - n), {{one, b.gamma, cplx(1.0 - n - b.gamma.norm1())}}};
    return derive_component(f, Lattice::unit(n, b.axis));
  };
  std::vector<HomogeneousComponent> divs;
  for (auto& b : basis) divs.push_back(field_div(b));

  const SphereRule fit = sphere_rule(n, n == 2 ? 4 * (G + 4) : 2 * (G + 4));
  const SphereRule check = sphere_rule(n, n == 2 ? 4 * (G + 4) + 3 : 2 * (G + 4) + 3);
  auto scalar_at = [&](const HomogeneousComponent& c, const std::vector<double>& x) {
    return tau(eval_component(c, theta, x));
  };
  const Eigen::Index rows = static_cast<Eigen::Index>(fit.pts.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd A(rows, cols);
  Eigen::VectorXcd rhs(rows);
  for (Eigen::Index p = 0; p < rows; ++p) {
    for (Eigen::Index b = 0; b < cols; ++b) A(p, b) = scalar_at(divs[static_cast<size_t>(b)], fit.pts[static_cast<size_t>(p)]);
    rhs(p) = scalar_at(h, fit.pts[static_cast<size_t>(p)]);
  }
  const Eigen::VectorXcd x = A.completeOrthogonalDecomposition().solve(rhs);
  double scale_h = 1e-300, err = 0;
  for (auto& pt : check.pts) {
    cplx v = 0;
    for (Eigen::Index b = 0; b < cols; ++b) v += x(b) * scalar_at(divs[static_cast<size_t>(b)], pt);
    const cplx target = scalar_at(h, pt);
    scale_h = std::max(scale_h, std::abs(target));
    err = std::max(err, std::abs(v - target));
  }
  if (err > 1e-9 * std::max(1.0, scale_h))
    throw UnsupportedDecomposition("degree -n component is not a divergence within the term algebra (residual " +
                                   std::to_string(err) + ")");
  std::vector<HomogeneousComponent> out(static_cast<size_t>(n), HomogeneousComponent{cplx(1.0 - n), {}});
  for (Eigen::Index b = 0; b < cols; ++b) {
    if (std::abs(x(b)) < 1e-14) continue;
    const Basis& bs = basis[static_cast<size_t>(b)];
    out[static_cast<size_t>(bs.axis)].terms.push_back({x(b) * one, bs.gamma, cplx(1.0 - n - bs.gamma.norm1())});
  }
  for (auto& c : out) c.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing witness
// ---------------------------------------------------------------------------

struct BumpParams {
  double flat = 1.0;                         // bump = 1 on [-flat, flat]
  double support = 1.5 * std::numbers::pi;   // bump = 0 outside (-support, support)
  int chi_box = 60;                          // lattice box for chi samples
  int rho_box = 24;                          // lattice box for rho_j samples
  int axis_order = 200;                      // 1-D nodes for chi
  int radial_order = 200;                    // polar radial nodes for rho_j
  int angular = 512;                         // polar angular nodes for rho_j
};

struct SmoothingWitness {
  ClassicalSymbol chi;               // chi(k) samples
  std::vector<ClassicalSymbol> rho;  // rho_j(k) samples, sum_j Delta_j rho_j = chi
  BumpParams params;

  // R_0 = (2 pi)^{-n} P_chi
  ClassicalSymbol r0_symbol() const { return scale(chi, std::pow(2 * std::numbers::pi, -chi.n())); }
  PsiDOPtr r0() const { return symbol_op(r0_symbol()); }

  // P_j = (2 pi)^{-n} P_{U_j^{-1} rho_j}; R_0 = sum_j [P_j, U_j]
  PsiDOPtr commutator_presentation() const {
    const int n = chi.n();
    const double c = std::pow(2 * std::numbers::pi, -n);
    std::vector<std::pair<cplx, PsiDOPtr>> parts;
    for (int j = 0; j < n; ++j) {
      const ThetaPtr& th = chi.theta();
      PsiDOPtr Pj = symbol_op(scale(left_multiply(TorusElement::generator(th, j, -1), rho[static_cast<size_t>(j)]), c));
      parts.push_back({1.0, commutator_op(Pj, multiplication_op(TorusElement::generator(th, j, 1)))});
    }
    return sum_op(std::move(parts));
  }

  double normalization_error() const {
    cplx s = 0;
    for (auto& [k, v] : chi.remainder()->samples) s += tau(v);
    return std::abs(s * std::pow(2 * std::numbers::pi, -chi.n()) - 1.0);
  }

  // max_{|k|_inf <= radius} |chi(k) - sum_j Delta_j rho_j(k)|
  double telescoping_error(int radius) const {
    const int n = chi.n();
    double e = 0;
    for_each_in_box(n, radius, [&](const Lattice& k) {
      cplx t = tau(chi.eval(k));
      for (int j = 0; j < n; ++j) t -= tau(difference_exact(rho[static_cast<size_t>(j)], j, k));
      e = std::max(e, std::abs(t));
    });
    return e;
  }
};

namespace detail {

inline double bump(double t, double a, double c) {
  t = std::abs(t);
  if (t <= a) return 1.0;
  if (t >= c) return 0.0;
  const double u = (t - a) / (c - a);
  const double f = Cutoff::step(1 - u), g = Cutoff::step(u);
  return f / (f + g);
}

// int bump(t) e^{-i kappa t} dt
inline double bump_transform(double kappa, double a, double c, const Rule1D& rule) {
  double flat = (kappa == 0) ? 2 * a : 2 * std::sin(kappa * a) / kappa;
  double s = 0;
  for (size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * bump(rule.x[i], a, c) * std::cos(kappa * rule.x[i]);
  return flat + 2 * s;
}

}  // namespace detail

inline SmoothingWitness build_smoothing_witness(const ThetaPtr& theta, const BumpParams& p = {}) {
  const int n = theta->n();
  const double pi = std::numbers::pi;
  if (!(p.flat > 0 && p.flat < p.support && p.support < 2 * pi))
    throw InvalidBump("bump must equal 1 near 0 and be supported inside (-2 pi, 2 pi)");
  if (n != 2 && n != 3) throw Unsupported("smoothing witness is provided for n = 2 and n = 3");
  const double a = p.flat, c = p.support;

  // chi(k) = prod_i bhat(k_i)
  std::vector<double> breaks;
  const int panels = std::max(1, p.axis_order / 25);
  for (int i = 0; i <= panels; ++i) breaks.push_back(a + (c - a) * i / panels);
  const Rule1D axis = composite_gauss_legendre(breaks, std::max(2, p.axis_order / panels));
  std::vector<double> bhat(static_cast<size_t>(2 * p.chi_box + 1));
  for (int m = -p.chi_box; m <= p.chi_box; ++m) bhat[static_cast<size_t>(m + p.chi_box)] = detail::bump_transform(m, a, c, axis);

  SmoothingWitness w{ClassicalSymbol(theta, 0.0), {}, p};
  for_each_in_box(n, p.chi_box, [&](const Lattice& k) {
    double v = 1;
    for (int i = 0; i < n; ++i) v *= bhat[static_cast<size_t>(k[i] + p.chi_box)];
    w.chi.add_sample(k, TorusElement::scalar(theta, v));
  });
  w.chi.remainder()->box = p.chi_box;

  // rho_j(k) = int e^{-i x.k} (e^{i x_j} - 1) chi_check(x) / nu(x) dx, in polar
  // coordinates out to the boundary of the support cube.
  const SphereRule dirs = sphere_rule(n, p.angular);
  const Rule1D unit_radial = gauss_legendre(p.radial_order, 0.0, 1.0);
  const int B = p.rho_box;
  const int side = 2 * B + 1;
  size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<size_t>(side);
  std::vector<std::vector<cplx>> acc(static_cast<size_t>(n), std::vector<cplx>(total, 0.0));
  std::vector<std::vector<cplx>> pw(static_cast<size_t>(n), std::vector<cplx>(static_cast<size_t>(side)));
  std::vector<double> x(static_cast<size_t>(n));
  for (size_t d = 0; d < dirs.pts.size(); ++d) {
    const auto& om = dirs.pts[d];
    double inf = 0;
    for (double v : om) inf = std::max(inf, std::abs(v));
    const double R = c / inf;
    for (size_t q = 0; q < unit_radial.x.size(); ++q) {
      const double r = R * unit_radial.x[q];
      const double wr = R * unit_radial.w[q] * dirs.w[d] * std::pow(r, n - 1);
      double nu = 0, chk = 1;
      for (int i = 0; i < n; ++i) {
        x[static_cast<size_t>(i)] = r * om[static_cast<size_t>(i)];
        nu += 2 * (1 - std::cos(x[static_cast<size_t>(i)]));
        chk *= detail::bump(x[static_cast<size_t>(i)], a, c);
      }
      if (chk == 0.0) continue;
      for (int i = 0; i < n; ++i) {
        const cplx e = std::polar(1.0, -x[static_cast<size_t>(i)]);
        cplx v = std::pow(e, -B);
        for (int m = 0; m < side; ++m) {
          pw[static_cast<size_t>(i)][static_cast<size_t>(m)] = v;
          v *= e;
        }
      }
      for (int j = 0; j < n; ++j) {
        const cplx f = wr * chk * (std::polar(1.0, x[static_cast<size_t>(j)]) - 1.0) / nu;
        auto& out = acc[static_cast<size_t>(j)];
        if (n == 2) {
          for (int m1 = 0; m1 < side; ++m1) {
            const cplx t = f * pw[0][static_cast<size_t>(m1)];
            cplx* row = &out[static_cast<size_t>(m1) * side];
            for (int m2 = 0; m2 < side; ++m2) row[m2] += t * pw[1][static_cast<size_t>(m2)];
          }
        } else {
          for (int m1 = 0; m1 < side; ++m1)
            for (int m2 = 0; m2 < side; ++m2) {
              const cplx t = f * pw[0][static_cast<size_t>(m1)] * pw[1][static_cast<size_t>(m2)];
              cplx* row = &out[(static_cast<size_t>(m1) * side + m2) * side];
              for (int m3 = 0; m3 < side; ++m3) row[m3] += t * pw[2][static_cast<size_t>(m3)];
            }
        }
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    ClassicalSymbol rj(theta, 1.0 - n);
    size_t idx = 0;
    for_each_in_box(n, B, [&](const Lattice& k) { rj.add_sample(k, TorusElement::scalar(theta, acc[static_cast<size_t>(j)][idx++])); });
    rj.remainder()->box = B;
    rj.remainder()->decay = 1.0 - n;
    w.rho.push_back(std::move(rj));
  }
  return w;
}

// nu(x) = sum_j 2 (1 - cos x_j)
inline double nu(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += 2 * (1 - std::cos(v));
  return s;
}

// ---------------------------------------------------------------------------
// Decomposition into commutators
// ---------------------------------------------------------------------------

struct UPart {
  int axis;
  ClassicalSymbol symbol;  // U_j^{-1} rho_j
  PsiDOPtr op;             // [P_j, U_j]
};

struct DeltaPart {
  int axis;
  ClassicalSymbol symbol;  // sigma_j
  PsiDOPtr op;             // [delta_j, Q_j]
};

struct CommutatorDecomposition {
  std::optional<std::pair<cplx, ClassicalSymbol>> base;  // coefficient and pivot symbol
  std::vector<UPart> u_parts;
  std::vector<DeltaPart> delta_parts;
  PsiDOPtr input;
  PsiDOPtr residual;

  // base + sum of commutators + residual
  PsiDOPtr reassembled() const {
    std::vector<std::pair<cplx, PsiDOPtr>> t;
    if (base) t.push_back({base->first, symbol_op(base->second)});
    for (auto& u : u_parts) t.push_back({1.0, u.op});
    for (auto& d : delta_parts) t.push_back({1.0, d.op});
    t.push_back({1.0, residual});
    return sum_op(std::move(t));
  }
};

struct DecomposeOptions {
  int depth = 6;  // difference series depth N
};

// Default integer-order pivot: (1 - psi)|xi|^{-n} / |S^{n-1}|, residue 1.
inline ClassicalSymbol default_residue_pivot(const ThetaPtr& theta) {
  const int n = theta->n();
  return monomial_symbol(TorusElement::scalar(theta, 1.0 / sphere_area(n)), Lattice(n), -double(n));
}

inline CommutatorDecomposition decompose(const ClassicalSymbol& rho, const ClassicalSymbol& pivot,
                                         const DecomposeOptions& opt = {}) {
  const int n = rho.n();
  const ThetaPtr& th = rho.theta();
  CommutatorDecomposition out;
  out.input = symbol_op(rho);
  ClassicalSymbol work = rho;
  const bool integral = is_integer(rho.order());
  if (integral) {
    if (!is_integer(pivot.order()) || std::abs(nc_residue(pivot) - 1.0) > 1e-10)
      throw InvalidPivot("integer-order pivot must have residue 1");
    const cplx c = nc_residue(rho);
    out.base = std::make_pair(c, pivot);
    if (c != cplx{}) work = subtract(rho, scale(pivot, c));
  } else {
    const TraceEstimate tp = lattice_trace(pivot);
    if (std::abs(tp.value - 1.0) > 1e-6) throw InvalidPivot("non-integer-order pivot must have trace 1");
    out.base = std::make_pair(canonical_trace(rho), pivot);
  }

  TauSplit split = tau_split(work);
  for (int j = 0; j < n; ++j) {
    ClassicalSymbol& s = split.sigma[static_cast<size_t>(j)];
    if (!s.has_homogeneous_part() && !(s.remainder() && !s.remainder()->samples.empty())) continue;
    out.delta_parts.push_back({j, s, commutator_op(derivation_op(th, j), symbol_op(s))});
  }

  // Scalar part as a divergence, component by component.
  const ClassicalSymbol& sc = split.scalar;
  std::vector<ClassicalSymbol> field(static_cast<size_t>(n), ClassicalSymbol(th, work.order() + 1.0, work.cutoff()));
  for (auto& comp : sc.components()) {
    if (comp.terms.empty()) continue;
    std::vector<HomogeneousComponent> prim;
    if (std::abs(comp.degree + double(n)) < kDegreeTol)
      prim = solve_divergence(comp, th);
    else
      prim = euler_primitive(comp, n);
    for (int j = 0; j < n; ++j)
      for (auto& t : prim[static_cast<size_t>(j)].terms) field[static_cast<size_t>(j)].add_term(t);
  }
  for (int j = 0; j < n; ++j) {
    ClassicalSymbol& f = field[static_cast<size_t>(j)];
    f.normalize();
    if (!f.has_homogeneous_part()) continue;
    ClassicalSymbol rj = derivative_to_difference(f, j, opt.depth);
    ClassicalSymbol pj = left_multiply(TorusElement::generator(th, j, -1), rj);
    out.u_parts.push_back({j, pj, commutator_op(symbol_op(pj), multiplication_op(TorusElement::generator(th, j, 1)))});
  }

  std::vector<std::pair<cplx, PsiDOPtr>> t{{1.0, out.input}};
  if (out.base && out.base->first != cplx{}) t.push_back({-out.base->first, symbol_op(out.base->second)});
  for (auto& u : out.u_parts) t.push_back({-1.0, u.op});
  for (auto& d : out.delta_parts) t.push_back({-1.0, d.op});
  out.residual = sum_op(std::move(t));
  return out;
}

// Residue of the commutator [A, B] computed from its symbol a#b - b#a.
inline cplx commutator_residue(const ClassicalSymbol& a, const ClassicalSymbol& b) {
  const cplx q = a.order() + b.order();
  if (!is_integer(q)) return 0.0;
  const int J = std::max(0, static_cast<int>(std::nearbyint(q.real())) + a.n() + 1);
  return nc_residue(subtract(sharp(a, b, J), sharp(b, a, J)));
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Lattice point near radius r in a fixed generic direction.
inline Lattice probe_point(int n, double r) {
  static const double dir[kMaxDim] = {0.3624, 0.9320, 0.41, 0.27, 0.19, 0.13};
  double nn = 0;
  for (int i = 0; i < n; ++i) nn += dir[i] * dir[i];
  Lattice k(n);
  for (int i = 0; i < n; ++i) k[i] = static_cast<int>(std::nearbyint(r * dir[i] / std::sqrt(nn)));
  return k;
}

struct DecayFit {
  std::vector<double> radii, norms;
  double exponent;  // M with norm ~ |k|^{-M}; +inf when the residual vanishes
  bool exact = false;
};

inline DecayFit residual_decay(const PsiDOPtr& P, const std::vector<double>& radii) {
  DecayFit f;
  for (double r : radii) {
    const Lattice k = probe_point(P->n(), r);
    f.radii.push_back(k.norm2());
    f.norms.push_back(nctorus::apply(P, TorusElement::monomial(P->theta(), k)).norm_l2());
  }
  f.exact = std::all_of(f.norms.begin(), f.norms.end(), [](double v) { return v == 0.0; });
  if (f.exact) {
    f.exponent = INFINITY;
    return f;
  }
  for (double& v : f.norms) v = std::max(v, 1e-300);
  f.exponent = -loglog_slope(f.radii, f.norms);
  return f;
}

}  // namespace nctorus
