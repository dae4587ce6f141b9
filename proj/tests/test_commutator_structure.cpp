#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nctorus/nctorus.hpp"

using namespace nctorus;

namespace {

const double kPi = std::numbers::pi;

ThetaPtr golden() { return make_theta(ThetaMatrix::two((std::sqrt(5.0) - 1) / 2)); }

ClassicalSymbol radial(const ThetaPtr& th, double q, cplx c = 1.0) {
  return monomial_symbol(TorusElement::scalar(th, c), Lattice(th->n()), q);
}

const SmoothingWitness& shared_witness() {
  static const SmoothingWitness w = build_smoothing_witness(golden());
  return w;
}

double max_lattice_symbol(const PsiDOPtr& P, int box, double min_norm) {
  double worst = 0;
  for_each_in_box(P->n(), box, [&](const Lattice& k) {
    if (k.norm2() < min_norm) return;
    worst = std::max(worst, lattice_symbol(P, k).norm_l2());
  });
  return worst;
}

}  // namespace

TEST(TauSplit, ScalarSymbolHasNoSigma) {
  const ThetaPtr th = golden();
  const TauSplit s = tau_split(radial(th, -1.5, 2.0));
  EXPECT_EQ(s.scalar, radial(th, -1.5, 2.0));
  for (auto& sj : s.sigma) EXPECT_FALSE(sj.has_homogeneous_part());
}

TEST(TauSplit, MonomialCoefficient) {
  const ThetaPtr th = golden();
  Lattice k(2);
  k[0] = k[1] = 1;
  const ClassicalSymbol rho = monomial_symbol(TorusElement::monomial(th, k), Lattice(2), -1.0);
  const TauSplit s = tau_split(rho);
  EXPECT_FALSE(s.scalar.has_homogeneous_part());
  const std::vector<double> xi{0.7, -2.1};
  for (int j = 0; j < 2; ++j) {
    const TorusElement v = s.sigma[static_cast<size_t>(j)].eval(xi);
    const TorusElement want = (double(k[j]) / (k.norm2() * k.norm2())) * rho.eval(xi);
    EXPECT_LT((v - want).norm_max(), 1e-15);
  }
}

TEST(TauSplit, Reassembles) {
  const ThetaPtr th = golden();
  Rng g(3);
  for (int rep = 0; rep < 5; ++rep) {
    const ClassicalSymbol rho = random_symbol(th, g, -0.5 - rep, 2);
    const TauSplit s = tau_split(rho);
    for (int p = 0; p < 10; ++p) {
      const std::vector<double> xi{uniform(g, -5, 5), uniform(g, -5, 5)};
      TorusElement v = s.scalar.eval(xi);
      for (int j = 0; j < 2; ++j) v += delta(s.sigma[static_cast<size_t>(j)].eval(xi), Lattice::unit(2, j));
      EXPECT_LT((v - rho.eval(xi)).norm_max(), 1e-12);
    }
  }
}

TEST(DerivativeToDifference, PolynomialCasesAreExact) {
  const ThetaPtr th = golden();
  const TorusElement one = TorusElement::scalar(th, 1.0);
  for (int j = 0; j < 2; ++j) {
    const ClassicalSymbol xj = monomial_symbol(one, Lattice::unit(2, j), 0.0);
    const ClassicalSymbol rj = derivative_to_difference(xj, j, 4);
    const ClassicalSymbol c = monomial_symbol(3.0 * one, Lattice(2), 0.0);
    const ClassicalSymbol rc = derivative_to_difference(c, j, 4);
    for (const Lattice& k : {Lattice::unit(2, 0), probe_point(2, 7.0), probe_point(2, 40.0)}) {
      EXPECT_LT((difference_exact(rj, j, k) - one).norm_max(), 1e-12);
      EXPECT_LT(difference_exact(rc, j, k).norm_max(), 1e-12);
    }
  }
}

TEST(DerivativeToDifference, ResidualDecay) {
  const ThetaPtr th = golden();
  const ClassicalSymbol rho = radial(th, -1.0);
  const ClassicalSymbol d = xi_derivative(rho, Lattice::unit(2, 0));
  // B_N = 0 for odd N >= 3, so N = 5 gains one extra order over N = 4
  const std::vector<std::pair<int, std::vector<double>>> runs{{4, {20, 40, 80}}, {5, {10, 20, 40}}};
  for (auto& [N, radii] : runs) {
    const ClassicalSymbol rj = derivative_to_difference(rho, 0, N);
    std::vector<double> x, y;
    for (double r : radii) {
      const Lattice k = probe_point(2, r);
      x.push_back(k.norm2());
      y.push_back((difference_exact(rj, 0, k) - d.eval(k)).norm_max());
    }
    const double want = N == 4 ? -6.0 : -8.0;
    EXPECT_NEAR(loglog_slope(x, y), want, 0.3) << N;
    EXPECT_NEAR(checks::difference_residual_exponent(-1.0, N), want, 0.0);
  }
}

TEST(SolveDivergence, ZeroMeanComponent) {
  const ThetaPtr th = golden();
  Lattice a(2);
  a[0] = a[1] = 1;
  const ClassicalSymbol rho = monomial_symbol(TorusElement::scalar(th, 1.0), a, -4.0);
  const HomogeneousComponent& h = rho.component(0);
  const auto F = solve_divergence(h, th);
  ASSERT_EQ(F.size(), 2u);
  Rng g(12);
  for (int p = 0; p < 20; ++p) {
    const std::vector<double> xi{uniform(g, -3, 3), uniform(g, -3, 3)};
    TorusElement div(th);
    for (int j = 0; j < 2; ++j) div += eval_component(derive_component(F[static_cast<size_t>(j)], Lattice::unit(2, j)), th, xi);
    EXPECT_LT((div - eval_component(h, th, xi)).norm_max(), 1e-10);
  }
  EXPECT_THROW(solve_divergence(radial(th, -2.0).component(0), th), UnsupportedDecomposition);
}

TEST(Witness, Identities) {
  const SmoothingWitness& w = shared_witness();
  EXPECT_LT(w.normalization_error(), 1e-8);
  EXPECT_LT(w.telescoping_error(20), 1e-6);
  // k = 0 alone
  cplx t = tau(w.chi.eval(Lattice(2)));
  for (int j = 0; j < 2; ++j) t -= tau(difference_exact(w.rho[static_cast<size_t>(j)], j, Lattice(2)));
  EXPECT_LT(std::abs(t), 1e-6);
  EXPECT_LT(checks::operator_gap(w.r0(), w.commutator_presentation(), 8), 1e-6);
  EXPECT_NEAR(nc_residue(w.r0_symbol()).real(), 0.0, 0.0);
}

TEST(Witness, Preconditions) {
  BumpParams p;
  p.support = 2 * kPi + 0.1;
  EXPECT_THROW(build_smoothing_witness(golden(), p), InvalidBump);
  p = BumpParams{};
  p.flat = p.support;
  EXPECT_THROW(build_smoothing_witness(golden(), p), InvalidBump);
  std::vector<double> z(16, 0.0);
  EXPECT_THROW(build_smoothing_witness(make_theta(ThetaMatrix(4, z))), Unsupported);
}

TEST(Nu, ZeroSetAndOrigin) {
  Rng g(13);
  for (int p = 0; p < 200; ++p) {
    std::vector<double> x{uniform(g, -1.99 * kPi, 1.99 * kPi), uniform(g, -1.99 * kPi, 1.99 * kPi)};
    if (std::abs(x[0]) + std::abs(x[1]) < 1e-3) continue;
    EXPECT_GT(nu(x), 0.0);
  }
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const std::vector<double> x{0.6 * h, -0.8 * h};
    EXPECT_NEAR(nu(x) / (h * h), 1.0, h);
  }
}

TEST(Decompose, PivotItself) {
  const ThetaPtr th = golden();
  const ClassicalSymbol piv = default_residue_pivot(th);
  const CommutatorDecomposition d = decompose(piv, piv);
  ASSERT_TRUE(d.base.has_value());
  EXPECT_NEAR(std::abs(d.base->first - 1.0), 0.0, 1e-12);
  EXPECT_TRUE(d.u_parts.empty());
  EXPECT_TRUE(d.delta_parts.empty());
}

TEST(Decompose, BaseCoefficientIsResidue) {
  const ThetaPtr th = golden();
  const CommutatorDecomposition d = decompose(radial(th, -2.0, 1.5), default_residue_pivot(th));
  EXPECT_NEAR(d.base->first.real(), 2 * kPi * 1.5, 1e-12);
  EXPECT_THROW(decompose(radial(th, -2.0), radial(th, -2.0)), InvalidPivot);
}

TEST(Decompose, OrderMinusThreeResidual) {
  const ThetaPtr th = golden();
  DecomposeOptions opt;
  opt.depth = 6;
  const CommutatorDecomposition d = decompose(radial(th, -3.0), default_residue_pivot(th), opt);
  EXPECT_EQ(d.base->first, cplx(0.0));
  // the residual is smoothing: small away from the origin, fast decay
  EXPECT_LT(max_lattice_symbol(d.residual, 16, 8.0), 1e-6);
  const DecayFit f = residual_decay(d.residual, {8, 16, 32});
  EXPECT_TRUE(f.exact || f.exponent >= 5.0) << f.exponent;
  EXPECT_LT(checks::part_residues(d, th), 1e-8);
  // reassembly is exact by construction
  EXPECT_LT(max_lattice_symbol(difference_of(d.reassembled(), d.input), 4, 0.0), 1e-12);
}

TEST(Decompose, NonScalarCoefficients) {
  const ThetaPtr th = golden();
  Rng g(14);
  const ClassicalSymbol rho = random_symbol(th, g, -2.0, 2);
  const CommutatorDecomposition d = decompose(rho, default_residue_pivot(th));
  EXPECT_NEAR(std::abs(d.base->first - nc_residue(rho)), 0.0, 1e-14);
  EXPECT_LT(checks::part_residues(d, th), 1e-8);
  const DecayFit f = residual_decay(d.residual, {16, 32, 64});
  EXPECT_TRUE(f.exact || f.exponent >= 5.0) << f.exponent;
}
