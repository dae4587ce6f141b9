#include <gtest/gtest.h>

#include <Eigen/Dense>

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

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_m.
void legendre_rule(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<size_t>(m), 0);
  w.assign(static_cast<size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (m + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<size_t>(i)] = z;
    w[static_cast<size_t>(i)] = 2 / ((1 - z * z) * dp * dp);
  }
}

// Integral of xi^a over S^{n-1}, n = 2 or 3, by an independent product rule.
double sphere_moment_oracle(const Lattice& a) {
  if (a.size() == 2) {
    const int M = 64;
    double s = 0;
    for (int i = 0; i < M; ++i) {
      const double t = 2 * kPi * i / M;
      s += std::pow(std::cos(t), a[0]) * std::pow(std::sin(t), a[1]);
    }
    return s * 2 * kPi / M;
  }
  std::vector<double> z, wz;
  legendre_rule(24, z, wz);
  const int M = 64;
  double s = 0;
  for (size_t i = 0; i < z.size(); ++i) {
    const double rho = std::sqrt(1 - z[i] * z[i]);
    for (int j = 0; j < M; ++j) {
      const double t = 2 * kPi * j / M;
      s += wz[i] * (2 * kPi / M) * std::pow(rho * std::cos(t), a[0]) * std::pow(rho * std::sin(t), a[1]) *
           std::pow(z[i], a[2]);
    }
  }
  return s;
}

// sum over 0 < |k|_inf <= K of |k|^q, directly.
double brute_lattice_sum(double q, int K) {
  double s = 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b)
      if (a || b) s += std::pow(double(a) * a + double(b) * b, q / 2);
  return s;
}

}  // namespace

TEST(SphereMoment, ClosedFormAgainstQuadrature) {
  for (int n : {2, 3})
    for (int m = 0; m <= 8; ++m)
      for_each_multi_index(n, m, [&](const Lattice& a) {
        const double exact = sphere_moment(a), oracle = sphere_moment_oracle(a);
        if (exact == 0)
          EXPECT_LT(std::abs(oracle), 1e-12);
        else
          EXPECT_LT(std::abs(exact - oracle) / exact, 1e-10) << a.str();
      });
  EXPECT_NEAR(sphere_moment(Lattice(2)), 2 * kPi, 1e-15);
  EXPECT_NEAR(sphere_moment(Lattice(3)), 4 * kPi, 1e-14);
}

TEST(Residue, Examples) {
  const ThetaPtr th = golden();
  EXPECT_NEAR(nc_residue(radial(th, -2)).real(), 2 * kPi, 1e-14);
  Lattice a(2);
  a[0] = a[1] = 1;
  EXPECT_EQ(nc_residue(monomial_symbol(TorusElement::scalar(th, 1.0), a, -4.0)), cplx(0.0));
  // differential operators
  Lattice b(2);
  b[0] = 2;
  EXPECT_EQ(nc_residue(monomial_symbol(TorusElement::scalar(th, 1.0), b, 0.0)), cplx(0.0));
  // non-integer order and smoothing symbols
  EXPECT_EQ(nc_residue(radial(th, -2.5)), cplx(0.0));
  ClassicalSymbol s(th, -1.0);
  s.add_sample(Lattice(2), TorusElement::scalar(th, 1.0));
  EXPECT_EQ(nc_residue(s), cplx(0.0));
  // only tau of the coefficient contributes
  const ClassicalSymbol u = monomial_symbol(TorusElement::generator(th, 0), Lattice(2), -2.0);
  EXPECT_EQ(nc_residue(u), cplx(0.0));
}

TEST(LatticeZeta, KnownValues) {
  // sum_{k != 0} |k|^{-4} = 4 zeta(2) beta(2)
  const double catalan = 0.915965594177219015054603514932;
  LatticeZeta z2(2);
  EXPECT_NEAR(z2.value(Lattice(2), -4.0).real(), 4 * (kPi * kPi / 6) * catalan, 1e-12);
  // Epstein zeta at 0 is -1 in every dimension
  EXPECT_NEAR(z2.value(Lattice(2), 0.0).real(), -1.0, 1e-12);
  LatticeZeta z3(3);
  EXPECT_NEAR(z3.value(Lattice(3), 0.0).real(), -1.0, 1e-12);
  // independence of the splitting parameter
  LatticeZeta alt(2, 1.7);
  Lattice a(2);
  a[0] = 2;
  EXPECT_NEAR(std::abs(alt.value(a, -5.3) - z2.value(a, -5.3)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(alt.value(Lattice(2), 1.5) - z2.value(Lattice(2), 1.5)), 0.0, 1e-11);
}

TEST(LatticeTrace, PureRemainder) {
  const ThetaPtr th = golden();
  ClassicalSymbol s(th, -10.0);
  s.add_sample(Lattice(2), TorusElement::scalar(th, 1.0));
  EXPECT_EQ(lattice_trace(s).value, cplx(1.0));
  s.add_sample(Lattice::unit(2, 0), TorusElement::scalar(th, 0.25) + TorusElement::generator(th, 1));
  EXPECT_EQ(lattice_trace(s).value, canonical_trace(s));
}

TEST(LatticeTrace, AgainstBruteForceSum) {
  const ThetaPtr th = golden();
  const double brute = brute_lattice_sum(-4.0, 2000);
  const TraceEstimate t = lattice_trace(radial(th, -4.0));
  EXPECT_LT(std::abs(t.value - brute) / brute, 1e-6);
  EXPECT_THROW(lattice_trace(radial(th, -2.0)), DivergenceError);
}

TEST(CanonicalTrace, AgreesWithLatticeTrace) {
  const ThetaPtr th = golden();
  const ClassicalSymbol s = radial(th, -3.5);
  EXPECT_LT(std::abs(canonical_trace(s) - lattice_trace(s).value) / std::abs(lattice_trace(s).value), 1e-4);
  Rng g(5);
  for (double q : {-2.5, -3.5, -4.25, -2.5, -3.5}) {
    const ClassicalSymbol r = add(random_symbol(th, g, q, 1), radial(th, q));
    const TraceEstimate lt = lattice_trace(r);
    EXPECT_LT(std::abs(canonical_trace(r) - lt.value) / std::abs(lt.value), 1e-3) << q;
  }
  EXPECT_THROW(canonical_trace(radial(th, -2.0)), IntegerOrderError);
}

TEST(CanonicalTrace, ThreeDimensionalAgreement) {
  const ThetaPtr th = make_theta(ThetaMatrix(3, {0, 0.3, 0.1, -0.3, 0, 0.7, -0.1, -0.7, 0}));
  const ClassicalSymbol r = radial(th, -4.5);
  const TraceEstimate lt = lattice_trace(r);
  EXPECT_LT(std::abs(canonical_trace(r) - lt.value) / std::abs(lt.value), 1e-3);
}

TEST(RegularizedIntegral, RadialOracle) {
  // finite part of int (1 - psi)|xi|^q dxi = 2 pi [int_{r0}^{r1} (1-psi) r^{q+1} dr + 1/(-q-2)]
  const ThetaPtr th = golden();
  const double q = -2.5;
  const Cutoff c;
  const int M = 20000;
  double inner = 0;
  for (int i = 0; i <= M; ++i) {
    const double r = c.r0 + (c.r1 - c.r0) * i / M;
    const double w = (i == 0 || i == M) ? 1 : (i % 2 ? 4 : 2);
    inner += w * (1 - c.psi(r)) * std::pow(r, q + 1);
  }
  inner *= (c.r1 - c.r0) / M / 3;
  const double tail = 2 * kPi / (-q - 2);
  EXPECT_NEAR(tail, 4 * kPi, 1e-14);
  EXPECT_NEAR(regularized_integral(radial(th, q)).real(), 2 * kPi * inner + tail, 1e-9);
}

TEST(GaugedTrace, Examples) {
  const ThetaPtr th = golden();
  const Laurent l = gauged_trace(radial(th, -2.0));
  EXPECT_NEAR(l.pole.real(), -2 * kPi, 1e-12);
  const ClassicalSymbol s = radial(th, -3.5);
  const Laurent m = gauged_trace(s);
  EXPECT_EQ(m.pole, cplx(0.0));
  EXPECT_NEAR(std::abs(m.finite - canonical_trace(s)), 0.0, 1e-12);
}

TEST(GaugedTrace, PoleIsMinusResidue) {
  const ThetaPtr th = golden();
  Rng g(8);
  for (int q : {-2, -1, 0, -3, 1}) {
    const ClassicalSymbol s = random_symbol(th, g, double(q), std::max(1, q + 3));
    EXPECT_LT(std::abs(gauged_trace(s).pole + nc_residue(s)), 1e-10) << q;
  }
}

TEST(TraceProperties, ResidueOfCommutators) {
  const ThetaPtr th = golden();
  Rng g(9);
  for (int p = 0; p < 5; ++p) {
    const ClassicalSymbol a = random_symbol(th, g, -0.5 + 0.25 * p, 2);
    const ClassicalSymbol b = random_symbol(th, g, -2.0 + 0.5 - 0.25 * p, 2);
    EXPECT_LT(std::abs(commutator_residue(a, b)), 1e-8);
  }
}

TEST(TraceProperties, CompressedCommutatorTrace) {
  // Tr(P A P B P - P B P A P) on the box |k|_inf <= 5 vanishes.
  const ThetaPtr th = golden();
  Rng g(10);
  const PsiDOPtr A = symbol_op(random_symbol(th, g, -3.0, 1));
  const PsiDOPtr B = symbol_op(random_symbol(th, g, -3.0, 1));
  std::vector<Lattice> basis;
  for_each_in_box(2, 5, [&](const Lattice& k) { basis.push_back(k); });
  const Eigen::Index N = static_cast<Eigen::Index>(basis.size());
  auto matrix = [&](const PsiDOPtr& P) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
    for (Eigen::Index c = 0; c < N; ++c) {
      const TorusElement v = nctorus::apply(P, TorusElement::monomial(th, basis[static_cast<size_t>(c)]));
      for (Eigen::Index r = 0; r < N; ++r) M(r, c) = v.coeff(basis[static_cast<size_t>(r)]);
    }
    return M;
  };
  const Eigen::MatrixXcd MA = matrix(A), MB = matrix(B);
  EXPECT_LT(std::abs((MA * MB - MB * MA).trace()), 1e-10);
}

TEST(TraceProperties, TraceOfSymbolizedCommutator) {
  const ThetaPtr th = golden();
  Rng g(11);
  const ClassicalSymbol a = random_symbol(th, g, -0.25, 1), b = random_symbol(th, g, -0.4, 1);
  const int J = 8;
  const ClassicalSymbol hom = subtract(sharp(a, b, J), sharp(b, a, J));
  const ClassicalSymbol full = symbolize(commutator_op(symbol_op(a), symbol_op(b)), hom, 24, -0.65 - J - 1);
  const double tail = remainder_tail_bound(full);
  EXPECT_LT(tail, 1e-6);
  EXPECT_LT(std::abs(canonical_trace(full)), 1e-6);
}

TEST(TraceProperties, RemainderTailBound) {
  const ThetaPtr th = golden();
  EXPECT_EQ(remainder_tail_bound(radial(th, -3.5)), 0.0);
  ClassicalSymbol s(th, -5.0);
  for_each_in_box(2, 4, [&](const Lattice& k) {
    if (!k.is_zero()) s.add_sample(k, TorusElement::scalar(th, std::pow(k.norm2(), -5.0)));
  });
  s.remainder()->decay = -5.0;
  const double b = remainder_tail_bound(s);
  // true tail sum_{|k|_inf > 4} |k|^{-5} lies below the bound
  const double tail = brute_lattice_sum(-5.0, 400) - brute_lattice_sum(-5.0, 4);
  EXPECT_GT(b, tail);
  EXPECT_LT(b, 10 * tail);
}

TEST(MultiplierTrace, CommutativeCase) {
  RunConfig cfg;
  cfg.theta = {0, 0, 0, 0};
  const auto rs = run_suite(cfg, "trace.multiplier");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_TRUE(rs[0].pass) << rs[0].to_json().dump();
}
