#pragma once

// Line-oriented text formats. Tokens are whitespace separated, '#' starts a
// comment, blank lines are ignored. Doubles are printed in shortest
// round-trip form, so parse(print(x)) reproduces x bit for bit.
//
//   element                        symbol
//   n 2                            n 2
//   theta t11 t12 t21 t22          theta ...
//   k1 k2 re im                    order re im
//   ...                            depth J
//   end                            cutoff r0 r1 enabled
//                                  remainder box decay_re decay_im   (optional)
//                                  term deg_re deg_im a1 .. an s_re s_im
//                                  k1 k2 re im  ...  end              (coefficient)
//                                  sample k1 .. kn
//                                  k1 k2 re im  ...  end              (sample value)
//                                  end
//
//   psido                          tree grammar
//   n 2                              (symbol NAME) (diff NAME axis power)
//   theta ...                        (mul NAME) (delta axis)
//   symbol NAME <body> end           (sum (re im EXPR) ...) (product A B)
//   element NAME <terms> end         (commutator A B)
//   tree EXPR

#include <charconv>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nctorus/psido.hpp"

namespace nctorus {

inline std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line split into tokens; false at end of input.
  bool next(std::vector<std::string>& toks) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (auto p = line.find('#'); p != std::string::npos) line.resize(p);
      std::istringstream ss(line);
      toks.clear();
      for (std::string t; ss >> t;) toks.push_back(t);
      if (!toks.empty()) return true;
    }
    return false;
  }
  std::vector<std::string> expect(const std::string& what) {
    std::vector<std::string> t;
    if (!next(t)) throw ParseError("unexpected end of input, expected " + what, line_);
    return t;
  }
  int line() const { return line_; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_); }

  double num(const std::string& s) const {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("bad number '" + s + "'");
    return v;
  }
  int integer(const std::string& s) const {
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

 private:
  std::istream& in_;
  int line_ = 0;
};

inline void print_header(std::ostream& out, const ThetaMatrix& th) {
  out << "n " << th.n() << "\ntheta";
  for (double v : th.entries()) out << ' ' << fmt_double(v);
  out << '\n';
}

inline ThetaPtr read_header(LineReader& r) {
  auto t = r.expect("n");
  if (t.size() != 2 || t[0] != "n") r.fail("expected 'n <dimension>'");
  const int n = r.integer(t[1]);
  if (n < 1 || n > kMaxDim) r.fail("dimension out of range");
  t = r.expect("theta");
  if (t[0] != "theta" || t.size() != static_cast<size_t>(n * n + 1)) r.fail("expected 'theta' with n*n entries");
  std::vector<double> e;
  for (size_t i = 1; i < t.size(); ++i) e.push_back(r.num(t[i]));
  try {
    return make_theta(ThetaMatrix(n, e));
  } catch (const Error& err) {
    r.fail(err.what());
  }
}

inline void print_terms(std::ostream& out, const TorusElement& u) {
  for (auto& [k, v] : u.coeffs()) {
    for (int i = 0; i < k.size(); ++i) out << k[i] << ' ';
    out << fmt_double(v.real()) << ' ' << fmt_double(v.imag()) << '\n';
  }
  out << "end\n";
}

inline TorusElement read_terms(LineReader& r, const ThetaPtr& th) {
  const int n = th->n();
  TorusElement u(th);
  for (;;) {
    auto t = r.expect("coefficient line or 'end'");
    if (t.size() == 1 && t[0] == "end") break;
    if (t.size() != static_cast<size_t>(n + 2)) r.fail("coefficient line needs n indices and re im");
    Lattice k(n);
    for (int i = 0; i < n; ++i) k[i] = r.integer(t[static_cast<size_t>(i)]);
    u.add(k, {r.num(t[static_cast<size_t>(n)]), r.num(t[static_cast<size_t>(n + 1)])});
  }
  u.prune(0.0);
  return u;
}

inline void print_symbol_body(std::ostream& out, const ClassicalSymbol& s) {
  out << "order " << fmt_double(s.order().real()) << ' ' << fmt_double(s.order().imag()) << '\n';
  out << "depth " << s.depth() << '\n';
  out << "cutoff " << fmt_double(s.cutoff().r0) << ' ' << fmt_double(s.cutoff().r1) << ' '
      << (s.cutoff().enabled ? 1 : 0) << '\n';
  if (s.remainder())
    out << "remainder " << s.remainder()->box << ' ' << fmt_double(s.remainder()->decay.real()) << ' '
        << fmt_double(s.remainder()->decay.imag()) << '\n';
  for (auto& c : s.components())
    for (auto& t : c.terms) {
      out << "term " << fmt_double(c.degree.real()) << ' ' << fmt_double(c.degree.imag());
      for (int i = 0; i < t.alpha.size(); ++i) out << ' ' << t.alpha[i];
      out << ' ' << fmt_double(t.s.real()) << ' ' << fmt_double(t.s.imag()) << '\n';
      print_terms(out, t.coef);
    }
  if (s.remainder())
    for (auto& [k, v] : s.remainder()->samples) {
      out << "sample";
      for (int i = 0; i < k.size(); ++i) out << ' ' << k[i];
      out << '\n';
      print_terms(out, v);
    }
  out << "end\n";
}

inline ClassicalSymbol read_symbol_body(LineReader& r, const ThetaPtr& th) {
  const int n = th->n();
  auto t = r.expect("order");
  if (t.size() != 3 || t[0] != "order") r.fail("expected 'order re im'");
  const cplx q{r.num(t[1]), r.num(t[2])};
  t = r.expect("depth");
  if (t.size() != 2 || t[0] != "depth") r.fail("expected 'depth J'");
  const int J = r.integer(t[1]);
  t = r.expect("cutoff");
  if (t.size() != 4 || t[0] != "cutoff") r.fail("expected 'cutoff r0 r1 enabled'");
  Cutoff cut{r.num(t[1]), r.num(t[2]), t[3] != "0"};
  if (!(cut.r0 > 0 && cut.r0 < cut.r1)) r.fail("cutoff needs 0 < r0 < r1");
  ClassicalSymbol s(th, q, cut);
  std::optional<Remainder> rem;
  for (;;) {
    t = r.expect("term, sample, remainder or 'end'");
    if (t[0] == "end" && t.size() == 1) break;
    if (t[0] == "remainder") {
      if (t.size() != 4) r.fail("expected 'remainder box decay_re decay_im'");
      rem = Remainder{r.integer(t[1]), {r.num(t[2]), r.num(t[3])}, {}};
    } else if (t[0] == "term") {
      if (t.size() != static_cast<size_t>(n + 5)) r.fail("term line needs deg_re deg_im, n exponents, s_re s_im");
      const cplx deg{r.num(t[1]), r.num(t[2])};
      Lattice a(n);
      for (int i = 0; i < n; ++i) {
        a[i] = r.integer(t[static_cast<size_t>(3 + i)]);
        if (a[i] < 0) r.fail("negative monomial exponent");
      }
      const cplx sp{r.num(t[static_cast<size_t>(3 + n)]), r.num(t[static_cast<size_t>(4 + n)])};
      const int line = r.line();
      TorusElement c = read_terms(r, th);
      try {
        if (std::abs(snap(sp) + double(a.norm1()) - deg) > kDegreeTol) throw Error("term degree inconsistent with exponents");
        s.add_term(c, a, sp);
      } catch (const Error& e) {
        throw ParseError(e.what(), line);
      }
    } else if (t[0] == "sample") {
      if (t.size() != static_cast<size_t>(n + 1)) r.fail("sample line needs n indices");
      Lattice k(n);
      for (int i = 0; i < n; ++i) k[i] = r.integer(t[static_cast<size_t>(1 + i)]);
      TorusElement v = read_terms(r, th);
      if (!rem) r.fail("sample before remainder header");
      rem->samples[k] = v;
    } else {
      r.fail("unknown symbol entry '" + t[0] + "'");
    }
  }
  if (J >= 0) s.ensure_depth(J);
  if (rem) s.remainder() = rem;
  return s;
}

inline std::string kind_of(std::istream& in) {
  LineReader r(in);
  std::vector<std::string> t;
  if (!r.next(t)) throw ParseError("empty input", 0);
  return t[0];
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline void write_element(std::ostream& out, const TorusElement& u) {
  out << "element\n";
  detail::print_header(out, *u.theta());
  detail::print_terms(out, u);
}

inline TorusElement read_element(std::istream& in) {
  detail::LineReader r(in);
  auto t = r.expect("element");
  if (t.size() != 1 || t[0] != "element") r.fail("expected 'element'");
  ThetaPtr th = detail::read_header(r);
  return detail::read_terms(r, th);
}

inline void write_symbol(std::ostream& out, const ClassicalSymbol& s) {
  out << "symbol\n";
  detail::print_header(out, *s.theta());
  detail::print_symbol_body(out, s);
}

inline ClassicalSymbol read_symbol(std::istream& in) {
  detail::LineReader r(in);
  auto t = r.expect("symbol");
  if (t.size() != 1 || t[0] != "symbol") r.fail("expected 'symbol'");
  ThetaPtr th = detail::read_header(r);
  return detail::read_symbol_body(r, th);
}

inline ClassicalSymbol read_symbol_with_theta(std::istream& in, const ThetaPtr& th) {
  ClassicalSymbol s = read_symbol(in);
  if (!same_theta(s.theta(), th)) throw DimensionMismatch("symbol theta differs from the expected one");
  return s;
}

inline void write_psido(std::ostream& out, const PsiDOPtr& P) {
  std::ostringstream defs;
  int ns = 0, ne = 0;
  std::function<std::string(const PsiDO&)> expr = [&](const PsiDO& p) -> std::string {
    return std::visit(
        [&](const auto& node) -> std::string {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, PsiDO::Symbol>) {
            const std::string name = "s" + std::to_string(ns++);
            defs << "symbol " << name << '\n';
            detail::print_symbol_body(defs, node.rho);
            return "(symbol " + name + ")";
          } else if constexpr (std::is_same_v<T, PsiDO::Difference>) {
            const std::string name = "s" + std::to_string(ns++);
            defs << "symbol " << name << '\n';
            detail::print_symbol_body(defs, node.rho);
            return "(diff " + name + " " + std::to_string(node.axis) + " " + std::to_string(node.power) + ")";
          } else if constexpr (std::is_same_v<T, PsiDO::Multiplication>) {
            const std::string name = "e" + std::to_string(ne++);
            defs << "element " << name << '\n';
            detail::print_terms(defs, node.a);
            return "(mul " + name + ")";
          } else if constexpr (std::is_same_v<T, PsiDO::Derivation>) {
            return "(delta " + std::to_string(node.axis) + ")";
          } else if constexpr (std::is_same_v<T, PsiDO::Sum>) {
            std::string s = "(sum";
            for (auto& [c, q] : node.terms) {
              const std::string sub = expr(*q);
              s += " (" + fmt_double(c.real()) + " " + fmt_double(c.imag()) + " " + sub + ")";
            }
            return s + ")";
          } else {
            const std::string l = expr(*node.left);
            const std::string r = expr(*node.right);
            return (std::is_same_v<T, PsiDO::Product> ? "(product " : "(commutator ") + l + " " + r + ")";
          }
        },
        p.node());
  };
  const std::string tree = expr(*P);
  out << "psido\n";
  detail::print_header(out, *P->theta());
  out << defs.str() << "tree " << tree << '\n';
}

inline PsiDOPtr read_psido(std::istream& in) {
  detail::LineReader r(in);
  auto t = r.expect("psido");
  if (t.size() != 1 || t[0] != "psido") r.fail("expected 'psido'");
  ThetaPtr th = detail::read_header(r);
  std::map<std::string, ClassicalSymbol> syms;
  std::map<std::string, TorusElement> elems;
  for (;;) {
    t = r.expect("symbol, element or tree");
    if (t[0] == "symbol" && t.size() == 2) {
      syms.emplace(t[1], detail::read_symbol_body(r, th));
    } else if (t[0] == "element" && t.size() == 2) {
      elems.emplace(t[1], detail::read_terms(r, th));
    } else if (t[0] == "tree") {
      break;
    } else {
      r.fail("unexpected '" + t[0] + "'");
    }
  }
  // Re-split the tree tokens so parentheses stand alone.
  std::string text;
  for (size_t i = 1; i < t.size(); ++i) text += t[i] + ' ';
  std::vector<std::string> tok;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '(' || ch == ')' || ch == ' ') {
        if (!cur.empty()) tok.push_back(cur), cur.clear();
        if (ch != ' ') tok.push_back(std::string(1, ch));
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) tok.push_back(cur);
  }
  size_t pos = 0;
  auto take = [&]() -> const std::string& {
    if (pos >= tok.size()) r.fail("truncated tree expression");
    return tok[pos++];
  };
  auto expect_tok = [&](const char* s) {
    if (take() != s) r.fail(std::string("expected '") + s + "' in tree");
  };
  std::function<PsiDOPtr()> parse = [&]() -> PsiDOPtr {
    expect_tok("(");
    const std::string head = take();
    PsiDOPtr res;
    auto sym = [&](const std::string& name) -> const ClassicalSymbol& {
      auto it = syms.find(name);
      if (it == syms.end()) r.fail("unknown symbol '" + name + "'");
      return it->second;
    };
    if (head == "symbol") {
      res = symbol_op(sym(take()));
    } else if (head == "diff") {
      const ClassicalSymbol& s = sym(take());
      const int axis = r.integer(take());
      const int power = r.integer(take());
      res = difference_op(s, axis, power);
    } else if (head == "mul") {
      auto it = elems.find(take());
      if (it == elems.end()) r.fail("unknown element");
      res = multiplication_op(it->second);
    } else if (head == "delta") {
      res = derivation_op(th, r.integer(take()));
    } else if (head == "sum") {
      std::vector<std::pair<cplx, PsiDOPtr>> terms;
      while (pos < tok.size() && tok[pos] == "(") {
        ++pos;
        const double re = r.num(take()), im = r.num(take());
        terms.push_back({{re, im}, parse()});
        expect_tok(")");
      }
      res = sum_op(std::move(terms));
    } else if (head == "product" || head == "commutator") {
      PsiDOPtr a = parse();
      PsiDOPtr b = parse();
      res = head == "product" ? product_op(a, b) : commutator_op(a, b);
    } else {
      r.fail("unknown tree node '" + head + "'");
    }
    expect_tok(")");
    return res;
  };
  PsiDOPtr P = parse();
  if (pos != tok.size()) r.fail("trailing tokens after tree");
  return P;
}

// Structural equality of operator trees (used for round-trip checks).
inline bool same_tree(const PsiDO& a, const PsiDO& b) {
  if (a.node().index() != b.node().index() || !same_theta(a.theta(), b.theta())) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node());
        if constexpr (std::is_same_v<T, PsiDO::Symbol>) {
          return x.rho == y.rho;
        } else if constexpr (std::is_same_v<T, PsiDO::Difference>) {
          return x.rho == y.rho && x.axis == y.axis && x.power == y.power;
        } else if constexpr (std::is_same_v<T, PsiDO::Multiplication>) {
          return x.a == y.a;
        } else if constexpr (std::is_same_v<T, PsiDO::Derivation>) {
          return x.axis == y.axis;
        } else if constexpr (std::is_same_v<T, PsiDO::Sum>) {
          if (x.terms.size() != y.terms.size()) return false;
          for (size_t i = 0; i < x.terms.size(); ++i)
            if (x.terms[i].first != y.terms[i].first || !same_tree(*x.terms[i].second, *y.terms[i].second)) return false;
          return true;
        } else {
          return same_tree(*x.left, *y.left) && same_tree(*x.right, *y.right);
        }
      },
      a.node());
}

}  // namespace nctorus
