#pragma once

#include "poly.hpp"

#include <map>
#include <memory>

namespace qelim {

// A real algebraic number. Either an exact rational, or the unique root of an
// irreducible primitive integer polynomial inside an open isolating interval.
// Invariants: interval endpoints are never roots of the defining polynomial,
// and the interval never straddles 0, so sign() never needs refinement.
// Copies share the interval, so refining one copy refines them all.
class RealAlg {
public:
  RealAlg() : RealAlg(Rat(0)) {}
  explicit RealAlg(const Rat &q);

  // All real roots of a nonzero univariate polynomial, ascending.
  static std::vector<RealAlg> roots_of(const Polynomial &p, Var v);

  bool is_rational() const;
  const Rat &rat() const;            // requires is_rational
  const Polynomial &defpoly() const; // requires !is_rational; univariate in defvar
  Var defvar() const;
  Rat lo() const;
  Rat hi() const;

  int sign() const;
  void refine_below(const Rat &width) const;
  void refine_step() const; // halve the interval once

  static int compare(const RealAlg &a, const RealAlg &b);
  int compare_rat(const Rat &q) const;
  bool operator<(const RealAlg &o) const { return compare(*this, o) < 0; }
  bool operator==(const RealAlg &o) const { return compare(*this, o) == 0; }
  bool operator!=(const RealAlg &o) const { return compare(*this, o) != 0; }

  friend RealAlg operator+(const RealAlg &a, const RealAlg &b);
  friend RealAlg operator-(const RealAlg &a, const RealAlg &b);
  friend RealAlg operator*(const RealAlg &a, const RealAlg &b);
  friend RealAlg operator/(const RealAlg &a, const RealAlg &b); // b != 0
  RealAlg neg() const;
  static RealAlg sqrt_of(const RealAlg &a); // a >= 0

  double approx() const;
  std::string to_string() const; // rational text or decimal~ for algebraic
  std::string to_sexpr() const;  // rational literal or (alg <poly> <lo> <hi>)

private:
  struct Inner;
  std::shared_ptr<Inner> in_;
  RealAlg(Polynomial def, Var v, Rat lo, Rat hi);
};

// Sign of p at the point; every variable of p must be assigned.
int sign_at(const Polynomial &p, const std::map<Var, RealAlg> &point);

// Exact value of p at the point. Uses resultant arithmetic; all defining
// polynomials of the result chain are kept irreducible.
RealAlg eval_at(const Polynomial &p, const std::map<Var, RealAlg> &point);

// 1 + max |a_i / a_n| for univariate p of positive degree; all real roots lie
// strictly inside (-bound, bound).
Rat cauchy_bound(const Polynomial &p, Var v);

// A simple rational strictly inside the open interval (a, b); requires a < b.
Rat rat_strictly_between(const RealAlg &a, const RealAlg &b);

} // namespace qelim
