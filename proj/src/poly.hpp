#pragma once

#include "rat.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qelim {

// Interned variable. Ids are assigned in first-use order and never recycled,
// so any id comparison is stable within a session.
class Var {
public:
  Var() : id_(-1) {}
  static Var named(const std::string &name);
  static Var fresh(const std::string &hint);
  const std::string &name() const;
  int32_t id() const { return id_; }
  bool valid() const { return id_ >= 0; }
  bool operator==(const Var &o) const { return id_ == o.id_; }
  bool operator!=(const Var &o) const { return id_ != o.id_; }
  bool operator<(const Var &o) const { return id_ < o.id_; }

private:
  explicit Var(int32_t id) : id_(id) {}
  int32_t id_;
};

// Exponent vector, sparse, sorted by variable id, all exponents positive.
class Monomial {
public:
  Monomial() = default;
  static Monomial var(Var v, int e = 1);

  int degree(Var v) const;
  int total_degree() const;
  bool is_one() const { return exps_.empty(); }
  const std::vector<std::pair<Var, int>> &exps() const { return exps_; }

  Monomial times(const Monomial &o) const;
  bool divides(const Monomial &o) const;     // this | o
  Monomial divide_into(const Monomial &o) const; // o / this, requires divides

  // Fixed storage order: lex, lowest variable id most significant.
  // Any multiplicative total order works here; all variable-order dependent
  // algorithms take an explicit order instead of relying on this one.
  bool operator<(const Monomial &o) const;
  bool operator==(const Monomial &o) const { return exps_ == o.exps_; }

private:
  std::vector<std::pair<Var, int>> exps_;
};

class Polynomial {
public:
  Polynomial() = default;
  static Polynomial zero() { return Polynomial(); }
  static Polynomial constant(const Rat &c);
  static Polynomial variable(Var v);
  static Polynomial term(const Rat &c, const Monomial &m);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // Requires is_constant.
  Rat constant_value() const;

  const std::vector<std::pair<Monomial, Rat>> &terms() const { return terms_; }
  size_t term_count() const { return terms_.size(); }

  Polynomial operator-() const;
  Polynomial operator+(const Polynomial &o) const;
  Polynomial operator-(const Polynomial &o) const;
  Polynomial operator*(const Polynomial &o) const;
  Polynomial operator*(const Rat &c) const;
  bool operator==(const Polynomial &o) const { return terms_ == o.terms_; }
  bool operator!=(const Polynomial &o) const { return !(terms_ == o.terms_); }
  // Storage-order comparison, usable as a map key.
  bool operator<(const Polynomial &o) const;

  Polynomial pow(int e) const;

  int degree(Var v) const;
  int total_degree() const;
  bool contains(Var v) const { return degree(v) > 0; }
  std::vector<Var> variables() const; // sorted by id

  // Dense coefficient list in v, index = exponent, size = degree+1.
  // Zero polynomial gives {0}.
  std::vector<Polynomial> coeffs_in(Var v) const;
  static Polynomial from_coeffs(Var v, const std::vector<Polynomial> &cs);
  Polynomial coeff_of(Var v, int e) const;
  Polynomial leading_coeff(Var v) const;
  Polynomial trailing_coeff(Var v) const; // coefficient of v^0

  Polynomial derivative(Var v) const;

  // Substitute a rational for one variable.
  Polynomial eval(Var v, const Rat &val) const;
  // Substitute several variables at once.
  Polynomial eval(const std::map<Var, Rat> &vals) const;
  // Requires all variables assigned.
  Rat eval_all(const std::map<Var, Rat> &vals) const;
  // Polynomial composition in one variable.
  Polynomial substitute(Var v, const Polynomial &p) const;
  Polynomial rename(Var from, Var to) const;

  // q * this for rational q != 0 keeps the zero set; normalize() returns the
  // unique primitive integer-coefficient representative with positive leading
  // coefficient (storage order) and the rational unit it was divided by.
  // normalize() of 0 is (0, 1).
  std::pair<Polynomial, Rat> normalize() const;
  Polynomial normalized() const { return normalize().first; }
  bool is_normalized() const;

  // Exact division; nullopt when not divisible.
  std::optional<Polynomial> divide_exact(const Polynomial &d) const;

  std::string to_string() const;      // human form, e.g. 2*x^2*y - 1/3
  std::string to_sexpr() const;       // grammar form, e.g. (+ (* 2 (^ x 2) y) -1/3)

private:
  // Invariant: sorted ascending by monomial storage order, coefficients nonzero.
  std::vector<std::pair<Monomial, Rat>> terms_;
  friend Polynomial add_impl(const Polynomial &, const Polynomial &, bool);
};

Polynomial operator*(const Rat &c, const Polynomial &p);

// gcd of the two, normalized (primitive, positive leading coefficient).
// gcd(0,0) = 0.
Polynomial poly_gcd(const Polynomial &a, const Polynomial &b);

// Resultant w.r.t. v. Conventions: res = 0 when either input is 0;
// res(p, q) = q^deg_v(p) when deg_v(q) = 0 (and symmetrically).
Polynomial resultant(const Polynomial &p, const Polynomial &q, Var v);

// disc(p) = (-1)^(n(n-1)/2) res(p, p') / lc, n = deg_v(p) >= 1.
// deg 1 gives 1.
Polynomial discriminant(const Polynomial &p, Var v);

// Determinant by fraction-free Gaussian elimination; exact over polynomials.
Polynomial det_bareiss(std::vector<std::vector<Polynomial>> m);

// Pseudo-remainder of p by q w.r.t. v: lc(q)^(dp-dq+1) * p = k*q + rem.
Polynomial pseudo_rem(const Polynomial &p, const Polynomial &q, Var v);

} // namespace qelim
