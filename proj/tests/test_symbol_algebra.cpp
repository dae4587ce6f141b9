#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nctorus/nctorus.hpp"

using namespace nctorus;

namespace {

ThetaPtr golden() { return make_theta(ThetaMatrix::two((std::sqrt(5.0) - 1) / 2)); }

std::vector<double> point(Rng& g, int n, double rmin, double rmax) {
  std::vector<double> x(static_cast<size_t>(n));
  double r2 = 0;
  for (auto& v : x) {
    v = uniform(g, -1, 1);
    r2 += v * v;
  }
  const double r = uniform(g, rmin, rmax) / std::sqrt(r2);
  for (auto& v : x) v *= r;
  return x;
}

// Central difference of the value in direction j, fourth order.
TorusElement fd_derivative(const ClassicalSymbol& a, std::vector<double> x, int j, double h) {
  auto at = [&](double t) {
    auto y = x;
    y[static_cast<size_t>(j)] += t;
    return a.eval(y);
  };
  return (1.0 / (12 * h)) * (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h));
}

}  // namespace

TEST(Cutoff, Profile) {
  Cutoff c;
  EXPECT_EQ(c.psi(0.0), 1.0);
  EXPECT_EQ(c.psi(0.5), 1.0);
  EXPECT_EQ(c.psi(1.0), 0.0);
  EXPECT_EQ(c.psi(3.0), 0.0);
  EXPECT_NEAR(c.psi(0.75), 0.5, 1e-15);
  double prev = 1;
  for (int i = 0; i <= 100; ++i) {
    const double v = c.psi(0.5 + 0.005 * i);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_THROW((Cutoff{1.0, 0.5, true}).validate(), Error);
}

TEST(Symbol, EvalMatchesFormula) {
  const ThetaPtr th = golden();
  Rng g(1);
  const TorusElement c = random_element(th, g, 4, 2);
  Lattice a(2);
  a[0] = 2;
  a[1] = 1;
  const ClassicalSymbol s = monomial_symbol(c, a, -4.3);
  for (int i = 0; i < 20; ++i) {
    const auto x = point(g, 2, 1.0, 30.0);
    const double r = std::hypot(x[0], x[1]);
    const cplx f = x[0] * x[0] * x[1] * std::pow(r, -4.3);
    EXPECT_LT(distance(s.eval(x), f * c), 1e-14 * std::max(1.0, std::abs(f)));
  }
  // inside the cutoff ball the non-polynomial term vanishes
  EXPECT_TRUE(s.eval(std::vector<double>{0.1, 0.2}).empty());
  // polynomial terms are exact everywhere
  const ClassicalSymbol p = monomial_symbol(c, a, 2.0);
  EXPECT_LT(distance(p.eval(std::vector<double>{0.1, 0.2}), (0.01 * 0.2 * 0.05) * c), 1e-16);
}

TEST(Symbol, DegreeBookkeeping) {
  const ThetaPtr th = golden();
  ClassicalSymbol s(th, -1.5);
  const TorusElement one = TorusElement::scalar(th, 1.0);
  s.add_term(one, Lattice::unit(2, 0), -3.5);  // degree -2.5 -> component 1
  EXPECT_EQ(s.depth(), 1);
  EXPECT_TRUE(s.component(0).terms.empty());
  EXPECT_THROW(s.add_term(one, Lattice(2), -1.2), Error);  // not order - j
  EXPECT_THROW(s.add_term(one, Lattice(2), 0.5), Error);   // above the order
  EXPECT_THROW(add(s, monomial_symbol(one, Lattice(2), -1.0)), Error);
}

TEST(Symbol, Homogeneity) {
  const ThetaPtr th = golden();
  Rng g(2);
  const ClassicalSymbol s = random_symbol(th, g, -0.7, 3);
  for (auto& c : s.components())
    for (int i = 0; i < 5; ++i) {
      const auto x = point(g, 2, 1.0, 5.0);
      const double t = uniform(g, 1.5, 6.0);
      std::vector<double> tx{t * x[0], t * x[1]};
      const TorusElement lhs = eval_component(c, th, tx);
      const TorusElement rhs = std::exp(c.degree * std::log(t)) * eval_component(c, th, x);
      EXPECT_LT(distance(lhs, rhs), 1e-12 * std::max(1.0, rhs.norm_max()));
    }
}

TEST(SymbolCalculus, XiDerivativeMatchesFiniteDifference) {
  const ThetaPtr th = golden();
  Rng g(3);
  const ClassicalSymbol s = random_symbol(th, g, 0.4, 2);
  for (int j = 0; j < 2; ++j) {
    const ClassicalSymbol d = xi_derivative(s, Lattice::unit(2, j));
    EXPECT_NEAR(d.order().real(), -0.6, 1e-15);
    for (int i = 0; i < 10; ++i) {
      const auto x = point(g, 2, 2.0, 10.0);
      EXPECT_LT(distance(d.eval(x), fd_derivative(s, x, j, 1e-3)), 1e-9);
    }
  }
}

TEST(SymbolCalculus, CoefficientDerivation) {
  const ThetaPtr th = golden();
  Rng g(4);
  const ClassicalSymbol s = random_symbol(th, g, -1.0, 2);
  Lattice a(2);
  a[0] = 1;
  a[1] = 2;
  const ClassicalSymbol d = coeff_derivation(s, a);
  for (int i = 0; i < 10; ++i) {
    const auto x = point(g, 2, 1.0, 10.0);
    EXPECT_LT(distance(d.eval(x), delta(s.eval(x), a)), 1e-13);
  }
}

TEST(SymbolCalculus, SharpWithUnit) {
  const ThetaPtr th = golden();
  Rng g(5);
  const ClassicalSymbol s = random_symbol(th, g, -0.5, 2);
  const ClassicalSymbol one = unit_symbol(th);
  for (int J : {0, 2, 4}) {
    EXPECT_EQ(sharp(s, one, J), truncate_below(s, s.order(), J + 1));
    EXPECT_EQ(sharp(one, s, J), truncate_below(s, s.order(), J + 1));
  }
}

TEST(SymbolCalculus, SharpOfScalarPolynomialsIsProduct) {
  const ThetaPtr th = golden();
  Lattice a(2), b(2);
  a[0] = 2;
  b[0] = 1;
  b[1] = 1;
  const ClassicalSymbol p = monomial_symbol(TorusElement::scalar(th, 2.0), a, 0.0);
  const ClassicalSymbol q = monomial_symbol(TorusElement::scalar(th, -1.0), b, 2.0);
  const ClassicalSymbol r = sharp(p, q, 6);
  for (double x0 : {0.3, 2.0, -5.0})
    for (double x1 : {0.7, -3.0}) {
      std::vector<double> x{x0, x1};
      EXPECT_LT(distance(r.eval(x), multiply(p.eval(x), q.eval(x))), 1e-12);
    }
}

TEST(SymbolCalculus, SharpPrincipalComponentIsPointwiseProduct) {
  const ThetaPtr th = golden();
  Rng g(6);
  const ClassicalSymbol a = random_symbol(th, g, -0.5, 1), b = random_symbol(th, g, -1.25, 1);
  const ClassicalSymbol r = sharp(a, b, 2);
  for (int i = 0; i < 10; ++i) {
    const auto x = point(g, 2, 1.0, 10.0);
    const TorusElement lhs = eval_component(r.component(0), th, x);
    const TorusElement rhs = eval_component(a.component(0), th, x) * eval_component(b.component(0), th, x);
    EXPECT_LT(distance(lhs, rhs), 1e-13);
  }
}

TEST(SymbolCalculus, ExactDifference) {
  const ThetaPtr th = golden();
  Rng g(7);
  const ClassicalSymbol s = random_symbol(th, g, -1.0, 1);
  const std::vector<double> x{3.0, 4.5};
  const TorusElement d2 = difference_exact(s, 1, x, 2);
  const TorusElement ref = s.eval(std::vector<double>{3.0, 6.5}) - 2.0 * s.eval(std::vector<double>{3.0, 5.5}) + s.eval(x);
  EXPECT_LT(distance(d2, ref), 1e-15);
}

TEST(SymbolCalculus, DifferenceSeriesOrder) {
  const ThetaPtr th = golden();
  const ClassicalSymbol s = monomial_symbol(TorusElement::scalar(th, 1.0), Lattice(2), -1.0);
  for (int L : {1, 2, 3}) {
    const ClassicalSymbol ser = forward_difference_series(s, 0, L);
    EXPECT_NEAR(ser.order().real(), -2.0, 0);
    std::vector<double> x, y;
    for (double r : {16.0, 32.0, 64.0}) {
      const std::vector<double> xi{0.6 * r, 0.8 * r};
      x.push_back(r);
      y.push_back(distance(difference_exact(s, 0, xi), ser.eval(xi)));
    }
    EXPECT_NEAR(loglog_slope(x, y), -1.0 - L - 1, 0.3) << "L=" << L;
  }
}

TEST(SymbolCalculus, EulerPrimitive) {
  const ThetaPtr th = golden();
  Rng g(8);
  const ClassicalSymbol s = random_symbol(th, g, -1.3, 0);
  const auto F = euler_primitive(s.component(0), 2);
  ClassicalSymbol f0(th, -0.3), f1(th, -0.3);
  for (auto& t : F[0].terms) f0.add_term(t);
  for (auto& t : F[1].terms) f1.add_term(t);
  for (int i = 0; i < 10; ++i) {
    const auto x = point(g, 2, 2.0, 10.0);
    const TorusElement div = fd_derivative(f0, x, 0, 1e-3) + fd_derivative(f1, x, 1, 1e-3);
    EXPECT_LT(distance(div, s.eval(x)), 1e-9);
  }
  const ClassicalSymbol crit = monomial_symbol(TorusElement::scalar(th, 1.0), Lattice(2), -2.0);
  EXPECT_THROW(euler_primitive(crit.component(0), 2), NonDecomposable);
}

TEST(SymbolCalculus, ThreeDimensionalSharpPrincipal) {
  const ThetaPtr th = make_theta(ThetaMatrix(3, {0, 0.3, 0.1, -0.3, 0, 0.7, -0.1, -0.7, 0}));
  Rng g(9);
  const ClassicalSymbol a = random_symbol(th, g, -0.5, 1), b = random_symbol(th, g, -1.0, 1);
  const ClassicalSymbol r = sharp(a, b, 1);
  const std::vector<double> x{1.5, -2.0, 3.0};
  EXPECT_LT(distance(eval_component(r.component(0), th, x),
                     eval_component(a.component(0), th, x) * eval_component(b.component(0), th, x)),
            1e-13);
}
