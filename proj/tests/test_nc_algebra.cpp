#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nctorus/nctorus.hpp"

using namespace nctorus;

namespace {

const double kGolden = (std::sqrt(5.0) - 1) / 2;

ThetaPtr golden() { return make_theta(ThetaMatrix::two(kGolden)); }

ThetaPtr three() { return make_theta(ThetaMatrix(3, {0, 0.3, 0.1, -0.3, 0, 0.7, -0.1, -0.7, 0})); }

// Oracle: reduce a word of generator powers to normal order using only the
// commutation rule U_l^b U_j^a = exp(2 pi i theta_jl a b) U_j^a U_l^b.
cplx normal_order_phase(const ThetaMatrix& th, std::vector<std::pair<int, int>> word) {
  double phase = 0;
  for (size_t pass = 0; pass < word.size(); ++pass)
    for (size_t i = 0; i + 1 < word.size(); ++i) {
      auto [l, b] = word[i];
      auto [j, a] = word[i + 1];
      if (l > j) {
        phase += th.at(j, l) * a * b;
        std::swap(word[i], word[i + 1]);
      }
    }
  return std::polar(1.0, 2 * std::numbers::pi * phase);
}

std::vector<std::pair<int, int>> word_of(const Lattice& k) {
  std::vector<std::pair<int, int>> w;
  for (int i = 0; i < k.size(); ++i)
    if (k[i] != 0) w.push_back({i, k[i]});
  return w;
}

}  // namespace

TEST(Theta, RejectsNonAntisymmetric) {
  EXPECT_THROW(ThetaMatrix(2, {0, 1, 1, 0}), Error);
  EXPECT_THROW(ThetaMatrix(2, {0.1, 0, 0, 0}), Error);
  EXPECT_THROW(ThetaMatrix(2, {0, 1, -1}), DimensionMismatch);
  EXPECT_THROW(ThetaMatrix(7), DimensionMismatch);
}

TEST(Algebra, GeneratorRelationExact) {
  for (const ThetaPtr& th : {golden(), three()}) {
    const int n = th->n();
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const TorusElement uj = TorusElement::generator(th, j), ul = TorusElement::generator(th, l);
        const TorusElement lhs = ul * uj;
        const TorusElement rhs = std::polar(1.0, 2 * std::numbers::pi * th->at(j, l)) * (uj * ul);
        EXPECT_LT(distance(lhs, rhs), 1e-15) << j << "," << l;
      }
  }
}

TEST(Algebra, PhaseMatchesWordReduction) {
  const ThetaPtr th = three();
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Lattice k = random_lattice(g, 3, 4), l = random_lattice(g, 3, 4);
    auto w = word_of(k);
    auto wl = word_of(l);
    w.insert(w.end(), wl.begin(), wl.end());
    const cplx expect = normal_order_phase(*th, w);
    const TorusElement prod = TorusElement::monomial(th, k) * TorusElement::monomial(th, l);
    EXPECT_LT(std::abs(prod.coeff(k + l) - expect), 1e-13);
    EXPECT_EQ(prod.size(), 1u);
  }
}

TEST(Algebra, RandomElementProperties) {
  const ThetaPtr th = golden();
  std::mt19937_64 g(11);
  std::vector<TorusElement> els;
  for (int i = 0; i < 100; ++i) els.push_back(random_element(th, g, 20, 4));
  for (size_t i = 0; i < els.size(); ++i) {
    const TorusElement &u = els[i], &v = els[(i + 1) % 100], &w = els[(i + 7) % 100];
    EXPECT_LT(std::abs(tau(u * v) - tau(v * u)), 1e-13);
    EXPECT_LT(distance((u * v) * w, u * (v * w)), 1e-13);
    EXPECT_LT(distance(adjoint(u * v), adjoint(v) * adjoint(u)), 1e-13);
    EXPECT_LT(distance(adjoint(adjoint(u)), u), 1e-15);
    // tau(u u*) is the squared coefficient norm
    EXPECT_NEAR(inner(u, u).real(), u.norm_l2() * u.norm_l2(), 1e-12);
    EXPECT_NEAR(inner(u, u).imag(), 0.0, 1e-13);
  }
}

TEST(Algebra, Orthonormality) {
  const ThetaPtr th = golden();
  for_each_in_box(2, 3, [&](const Lattice& k) {
    for_each_in_box(2, 3, [&](const Lattice& l) {
      const cplx ip = inner(TorusElement::monomial(th, k), TorusElement::monomial(th, l));
      EXPECT_LT(std::abs(ip - cplx(k == l ? 1.0 : 0.0)), 1e-15);
    });
  });
}

TEST(Algebra, CommutativeDegenerationIsConvolution) {
  const ThetaPtr th = make_theta(ThetaMatrix(2));
  std::mt19937_64 g(3);
  for (int i = 0; i < 20; ++i) {
    const TorusElement u = random_element(th, g, 10, 3), v = random_element(th, g, 10, 3);
    std::map<Lattice, cplx> ref;
    for (auto& [k, a] : u.coeffs())
      for (auto& [l, b] : v.coeffs()) ref[k + l] += a * b;
    EXPECT_LT(distance(u * v, TorusElement(th, ref)), 1e-14);
    EXPECT_LT(distance(u * v, v * u), 1e-14);
  }
}

TEST(Algebra, DerivationsAndAction) {
  const ThetaPtr th = golden();
  std::mt19937_64 g(5);
  for (int i = 0; i < 20; ++i) {
    const TorusElement u = random_element(th, g, 8, 3), v = random_element(th, g, 8, 3);
    for (int j = 0; j < 2; ++j) {
      const Lattice e = Lattice::unit(2, j);
      EXPECT_LT(distance(delta(u * v, e), delta(u, e) * v + u * delta(v, e)), 1e-12);
    }
    const std::vector<double> s{0.3, -1.1};
    EXPECT_LT(distance(act(s, u * v), act(s, u) * act(s, v)), 1e-13);
    EXPECT_NEAR(std::abs(tau(delta(u, Lattice::unit(2, 0)))), 0.0, 1e-15);
    // sum_j delta_j^2 Lap^{-1} u = u - tau(u)
    const TorusElement L = laplacian_inverse(u);
    TorusElement back(th);
    for (int j = 0; j < 2; ++j) {
      Lattice twice(2);
      twice[j] = 2;
      back += delta(L, twice);
    }
    EXPECT_LT(distance(back, u - TorusElement::scalar(th, tau(u))), 1e-13);
  }
}

TEST(Algebra, DimensionChecks) {
  const ThetaPtr a = golden(), b = make_theta(ThetaMatrix::two(0.1));
  EXPECT_THROW(TorusElement::generator(a, 0) * TorusElement::generator(b, 0), DimensionMismatch);
  EXPECT_THROW(TorusElement::monomial(a, Lattice(3)), DimensionMismatch);
}
