#pragma once

#include "formula.hpp"

namespace qelim {

// A substitution candidate for an existentially quantified variable. Value
// points denote (p + q*sqrt(r)) / s over the remaining variables; MinusInf
// and the +epsilon variant are handled symbolically during substitution.
enum class TpKind { MinusInf, Value, ValueEps };

struct TestPoint {
  TpKind kind = TpKind::MinusInf;
  Polynomial p, q, r, s; // unused for MinusInf

  std::string to_string(Var v) const;
};

struct TpCand {
  TestPoint tp;
  FormulaPtr guard; // side condition under which tp is a root description
};

// Every irreducible factor (taken in v) of every atom polynomial must have
// degree at most 2 in v for v to be eliminable.
bool vts_eligible(const FormulaPtr &qf, Var v);

// The factors that block elimination: irreducible, degree >= 3 in v.
std::vector<Polynomial> vts_blockers(const FormulaPtr &qf, Var v);

// Elimination set for "exists v": -infinity plus, per irreducible factor of
// an atom polynomial, its symbolic roots (shifted by +epsilon when the atom
// relation is strict). Deduplicated.
std::vector<TpCand> vts_elim_set(const FormulaPtr &qf, Var v);

// qf with every atom p rel 0 replaced by an equivalent v-free condition for
// v = tp. Atoms not mentioning v pass through. No extended atoms allowed.
FormulaPtr vts_substitute(const FormulaPtr &qf, Var v, const TestPoint &tp);

// One elimination step: the pieces guard /\ qf[v // tp], false pieces
// dropped. "exists v. qf" is equivalent to the disjunction of the pieces.
// Empty when qf is unsatisfiable for every candidate. Requires eligibility.
std::vector<std::pair<TpCand, FormulaPtr>> vts_branches(const FormulaPtr &qf, Var v);

// Concrete value for a recorded test point once all other variables of phi
// (the formula the point was drawn from) are fixed. MinusInf resolves below
// every root of phi's v-polynomials at the point, ValueEps strictly between
// the designated root and the next one up.
RealAlg resolve_test_point(const TestPoint &tp, const FormulaPtr &phi, Var v,
                           const std::map<Var, RealAlg> &outer);

} // namespace qelim
