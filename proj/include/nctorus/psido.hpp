#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nctorus/symbol_calculus.hpp"

namespace nctorus {

class PsiDO;
using PsiDOPtr = std::shared_ptr<const PsiDO>;

// Operator tree. Leaves act diagonally (symbol, difference) or by left
// multiplication / derivation; inner nodes are evaluated lazily.
class PsiDO {
 public:
  struct Symbol {
    ClassicalSymbol rho;
  };
  // k -> Delta_axis^power rho(k), evaluated exactly.
  struct Difference {
    ClassicalSymbol rho;
    int axis;
    int power;
  };
  struct Multiplication {
    TorusElement a;
  };
  struct Derivation {
    int axis;
  };
  struct Sum {
    std::vector<std::pair<cplx, PsiDOPtr>> terms;
  };
  struct Product {
    PsiDOPtr left, right;
  };
  struct Commutator {
    PsiDOPtr left, right;
  };
  using Node = std::variant<Symbol, Difference, Multiplication, Derivation, Sum, Product, Commutator>;

  PsiDO(ThetaPtr theta, Node node) : theta_(std::move(theta)), node_(std::move(node)) {}

  const ThetaPtr& theta() const { return theta_; }
  const Node& node() const { return node_; }
  int n() const { return theta_->n(); }

 private:
  ThetaPtr theta_;
  Node node_;
};

inline PsiDOPtr symbol_op(const ClassicalSymbol& rho) {
  return std::make_shared<const PsiDO>(rho.theta(), PsiDO::Symbol{rho});
}
inline PsiDOPtr difference_op(const ClassicalSymbol& rho, int axis, int power = 1) {
  return std::make_shared<const PsiDO>(rho.theta(), PsiDO::Difference{rho, axis, power});
}
inline PsiDOPtr multiplication_op(const TorusElement& a) {
  return std::make_shared<const PsiDO>(a.theta(), PsiDO::Multiplication{a});
}
inline PsiDOPtr derivation_op(const ThetaPtr& theta, int axis) {
  return std::make_shared<const PsiDO>(theta, PsiDO::Derivation{axis});
}
inline PsiDOPtr sum_op(std::vector<std::pair<cplx, PsiDOPtr>> terms) {
  if (terms.empty()) throw Error("empty operator sum");
  ThetaPtr th = terms.front().second->theta();
  for (auto& [c, p] : terms)
    if (!same_theta(th, p->theta())) throw DimensionMismatch("operator sum over different theta");
  return std::make_shared<const PsiDO>(th, PsiDO::Sum{std::move(terms)});
}
inline PsiDOPtr product_op(PsiDOPtr a, PsiDOPtr b) {
  if (!same_theta(a->theta(), b->theta())) throw DimensionMismatch("operator product over different theta");
  ThetaPtr th = a->theta();
  return std::make_shared<const PsiDO>(th, PsiDO::Product{std::move(a), std::move(b)});
}
inline PsiDOPtr commutator_op(PsiDOPtr a, PsiDOPtr b) {
  if (!same_theta(a->theta(), b->theta())) throw DimensionMismatch("operator commutator over different theta");
  ThetaPtr th = a->theta();
  return std::make_shared<const PsiDO>(th, PsiDO::Commutator{std::move(a), std::move(b)});
}
inline PsiDOPtr difference_of(PsiDOPtr a, PsiDOPtr b) { return sum_op({{1.0, std::move(a)}, {-1.0, std::move(b)}}); }

namespace detail {

// sum_k u_k f(k) U^k, with f(k) an element multiplied on the left.
template <class F>
TorusElement apply_diagonal(const TorusElement& u, F&& f) {
  const ThetaMatrix& th = *u.theta();
  TorusElement out(u.theta());
  for (auto& [k, uk] : u.coeffs()) {
    const TorusElement v = f(k);
    for (auto& [l, a] : v.coeffs()) out.add(l + k, uk * a * th.phase_factor(l, k));
  }
  out.prune();
  return out;
}

}  // namespace detail

inline TorusElement apply(const PsiDO& P, const TorusElement& u) {
  if (!same_theta(P.theta(), u.theta())) throw DimensionMismatch("operator and vector over different theta");
  return std::visit(
      [&](const auto& node) -> TorusElement {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, PsiDO::Symbol>) {
          return detail::apply_diagonal(u, [&](const Lattice& k) { return node.rho.eval(k); });
        } else if constexpr (std::is_same_v<T, PsiDO::Difference>) {
          return detail::apply_diagonal(
              u, [&](const Lattice& k) { return difference_exact(node.rho, node.axis, k, node.power); });
        } else if constexpr (std::is_same_v<T, PsiDO::Multiplication>) {
          return multiply(node.a, u);
        } else if constexpr (std::is_same_v<T, PsiDO::Derivation>) {
          return delta(u, Lattice::unit(u.n(), node.axis));
        } else if constexpr (std::is_same_v<T, PsiDO::Sum>) {
          TorusElement out(u.theta());
          for (auto& [c, p] : node.terms) out += c * nctorus::apply(*p, u);
          return out;
        } else if constexpr (std::is_same_v<T, PsiDO::Product>) {
          return nctorus::apply(*node.left, nctorus::apply(*node.right, u));
        } else {
          return nctorus::apply(*node.left, nctorus::apply(*node.right, u)) - nctorus::apply(*node.right, nctorus::apply(*node.left, u));
        }
      },
      P.node());
}

inline TorusElement apply(const PsiDOPtr& P, const TorusElement& u) { return nctorus::apply(*P, u); }

// rho_P(k) = P(U^k) (U^k)^{-1}
inline TorusElement lattice_symbol(const PsiDOPtr& P, const Lattice& k) {
  const TorusElement uk = TorusElement::monomial(P->theta(), k);
  return multiply(nctorus::apply(P, uk), adjoint(uk));
}

// ||P1 P2 U^k - P_{rho1 # rho2} U^k|| in the coefficient l2 norm.
inline double compose_check(const ClassicalSymbol& r1, const ClassicalSymbol& r2, int J, const Lattice& k) {
  const TorusElement uk = TorusElement::monomial(r1.theta(), k);
  const TorusElement lhs = nctorus::apply(*symbol_op(r1), nctorus::apply(*symbol_op(r2), uk));
  const TorusElement rhs = nctorus::apply(*symbol_op(sharp(r1, r2, J)), uk);
  return (lhs - rhs).norm_l2();
}

// ([delta_j, P_rho], P_{delta_j rho})
inline std::pair<PsiDOPtr, PsiDOPtr> delta_commutator(const ClassicalSymbol& rho, int j) {
  return {commutator_op(derivation_op(rho.theta(), j), symbol_op(rho)),
          symbol_op(coeff_derivation(rho, Lattice::unit(rho.n(), j)))};
}

// ([P_{U_j^{-1} rho}, U_j], P_{Delta_j rho}) for scalar rho.
inline std::pair<PsiDOPtr, PsiDOPtr> unitary_commutator(const ClassicalSymbol& rho, int j) {
  if (!rho.is_scalar()) throw Unsupported("unitary commutator identity needs a scalar-valued symbol");
  const TorusElement uinv = TorusElement::generator(rho.theta(), j, -1);
  const TorusElement u = TorusElement::generator(rho.theta(), j, 1);
  return {commutator_op(symbol_op(left_multiply(uinv, rho)), multiplication_op(u)), difference_op(rho, j)};
}

// Homogeneous part of the operator plus an exact lattice remainder on
// |k|_inf <= box: remainder(k) = rho_P(k) - hom(k).
inline ClassicalSymbol symbolize(const PsiDOPtr& P, const ClassicalSymbol& hom, int box, cplx decay) {
  ClassicalSymbol r = hom;
  r.remainder().reset();
  for_each_in_box(P->n(), box, [&](const Lattice& k) { r.add_sample(k, lattice_symbol(P, k) - hom.eval(k)); });
  if (!r.remainder()) r.remainder() = Remainder{};
  r.remainder()->box = box;
  r.remainder()->decay = decay;
  return r;
}

}  // namespace nctorus
