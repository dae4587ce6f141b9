#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "nctorus/error.hpp"

namespace nctorus {

inline constexpr int kMaxDim = 6;

// Integer vector of runtime length n <= kMaxDim. Used both for lattice
// points k in Z^n and for multi-indices alpha in N_0^n.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(int n) : n_(n) {
    if (n < 0 || n > kMaxDim) throw DimensionMismatch("dimension out of range: " + std::to_string(n));
  }
  Lattice(std::initializer_list<int> v) : Lattice(static_cast<int>(v.size())) {
    int i = 0;
    for (int x : v) c_[i++] = x;
  }

  static Lattice unit(int n, int j) {
    Lattice e(n);
    e[j] = 1;
    return e;
  }

  int size() const { return n_; }
  int& operator[](int i) { return c_[i]; }
  int operator[](int i) const { return c_[i]; }

  bool is_zero() const {
    for (int i = 0; i < n_; ++i)
      if (c_[i] != 0) return false;
    return true;
  }
  long norm1() const {
    long s = 0;
    for (int i = 0; i < n_; ++i) s += std::abs(c_[i]);
    return s;
  }
  int norm_inf() const {
    int s = 0;
    for (int i = 0; i < n_; ++i) s = std::max(s, std::abs(c_[i]));
    return s;
  }
  double norm2_sq() const {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += double(c_[i]) * c_[i];
    return s;
  }
  double norm2() const { return std::sqrt(norm2_sq()); }

  Lattice operator+(const Lattice& o) const {
    check(o);
    Lattice r(n_);
    for (int i = 0; i < n_; ++i) r.c_[i] = c_[i] + o.c_[i];
    return r;
  }
  Lattice operator-(const Lattice& o) const {
    check(o);
    Lattice r(n_);
    for (int i = 0; i < n_; ++i) r.c_[i] = c_[i] - o.c_[i];
    return r;
  }
  Lattice operator-() const {
    Lattice r(n_);
    for (int i = 0; i < n_; ++i) r.c_[i] = -c_[i];
    return r;
  }

  bool operator==(const Lattice& o) const {
    if (n_ != o.n_) return false;
    for (int i = 0; i < n_; ++i)
      if (c_[i] != o.c_[i]) return false;
    return true;
  }
  std::strong_ordering operator<=>(const Lattice& o) const {
    if (auto c = n_ <=> o.n_; c != 0) return c;
    for (int i = 0; i < n_; ++i)
      if (auto c = c_[i] <=> o.c_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < n_; ++i) s += (i ? "," : "") + std::to_string(c_[i]);
    return s + ")";
  }

 private:
  void check(const Lattice& o) const {
    if (o.n_ != n_) throw DimensionMismatch("lattice dimension mismatch");
  }

  std::array<int, kMaxDim> c_{};
  int n_ = 0;
};

// alpha! = prod alpha_i!
inline double factorial(const Lattice& a) {
  double f = 1;
  for (int i = 0; i < a.size(); ++i)
    for (int m = 2; m <= a[i]; ++m) f *= m;
  return f;
}

// k^beta for real vector k.
template <class Vec>
double monomial(const Vec& x, const Lattice& beta) {
  double p = 1;
  for (int i = 0; i < beta.size(); ++i)
    for (int m = 0; m < beta[i]; ++m) p *= x[i];
  return p;
}

// Calls f(k) for every k with |k|_inf <= radius, in lexicographic order.
template <class F>
void for_each_in_box(int n, int radius, F&& f) {
  Lattice k(n);
  for (int i = 0; i < n; ++i) k[i] = -radius;
  while (true) {
    f(static_cast<const Lattice&>(k));
    int i = n - 1;
    while (i >= 0 && k[i] == radius) {
      k[i] = -radius;
      --i;
    }
    if (i < 0) break;
    ++k[i];
  }
}

// Calls f(alpha) for every multi-index with |alpha| == total.
template <class F>
void for_each_multi_index(int n, int total, F&& f) {
  Lattice a(n);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == n - 1) {
      a[pos] = left;
      f(static_cast<const Lattice&>(a));
      return;
    }
    for (int v = left; v >= 0; --v) {
      a[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  if (n == 0) return;
  rec(rec, 0, total);
}

}  // namespace nctorus
