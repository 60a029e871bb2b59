#pragma once

#include "poly.hpp"
#include "realalg.hpp"

#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace qelim {

enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };

Rel rel_complement(Rel r); // negation: < becomes >=
Rel rel_mirror(Rel r);     // scaling by -1: < becomes >
bool rel_eval(Rel r, int sign);
std::string rel_name(Rel r);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// p rel 0 with p normalized (primitive integer coefficients, positive leading
// coefficient); the relation absorbs the sign of the dropped unit.
struct Atom {
  Polynomial poly;
  Rel rel;
};

// "the index-th real root of poly, taken in rvar"; 1-based, ascending.
// Appears only in solution formulas, never in engine input.
struct IndexedRoot {
  Polynomial poly;
  Var rvar;
  int index;
};

struct ExtAtom {
  Var var; // compared against the root
  Rel rel;
  IndexedRoot root;
};

enum class Quant { Exists, Forall };

struct Block {
  Quant q;
  std::vector<Var> vars;
};

// Immutable; negation is resolved structurally (no Not nodes). And/Or hold at
// least two children, sorted and deduplicated; quantifier nodes hold one body.
struct Formula {
  enum class Kind { True, False, Atom, Ext, And, Or, Exists, Forall };
  Kind kind;
  qelim::Atom atom;               // Kind::Atom
  ExtAtom ext;                    // Kind::Ext
  std::vector<FormulaPtr> kids;   // And/Or; body for quantifiers as kids[0]
  std::vector<Var> qvars;         // Exists/Forall
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_bool(bool b);
FormulaPtr f_atom(const Polynomial &p, Rel r); // normalizes, folds constants
FormulaPtr f_ext(Var v, Rel r, IndexedRoot root);
FormulaPtr f_and(std::vector<FormulaPtr> kids);
FormulaPtr f_or(std::vector<FormulaPtr> kids);
FormulaPtr f_not(const FormulaPtr &f); // full structural negation
FormulaPtr f_exists(std::vector<Var> vs, const FormulaPtr &body);
FormulaPtr f_forall(std::vector<Var> vs, const FormulaPtr &body);
FormulaPtr f_quant(Quant q, std::vector<Var> vs, const FormulaPtr &body);

int formula_cmp(const FormulaPtr &a, const FormulaPtr &b);
bool formula_eq(const FormulaPtr &a, const FormulaPtr &b);

// Rebuild bottom-up through the simplifying constructors.
FormulaPtr simplify(const FormulaPtr &f);

std::vector<Var> free_vars(const FormulaPtr &f);
bool is_quantifier_free(const FormulaPtr &f);
bool contains_ext(const FormulaPtr &f);

// All distinct atom polynomials of the quantifier-free part.
std::vector<Polynomial> atom_polys(const FormulaPtr &f);

// Rewrite every atom; quantifier structure is preserved.
FormulaPtr map_atoms(const FormulaPtr &f,
                     const std::function<FormulaPtr(const Atom &)> &fn);

struct PrenexForm {
  std::vector<Block> blocks; // outermost first; adjacent blocks alternate
  FormulaPtr matrix;         // quantifier-free
};

// Standard prenexification; bound variables are renamed when reuse would
// capture. Input may nest quantifiers arbitrarily.
PrenexForm prenex(const FormulaPtr &f);

// Truth under a total assignment; quantifier-free input only. Extended atoms
// are evaluated by isolating the referenced roots at the point.
bool evaluate_ground(const FormulaPtr &f, const std::map<Var, RealAlg> &point);

FormulaPtr parse_formula(const std::string &text); // throws ParseError
std::string print_formula(const FormulaPtr &f);

// Real roots in v of p at the point (other variables of p must be assigned).
// Ascending, deduplicated. Throws UnsupportedError when p vanishes
// identically at the point or the elimination chain degenerates.
std::vector<RealAlg> roots_at(const Polynomial &p, Var v,
                              const std::map<Var, RealAlg> &point);

} // namespace qelim
