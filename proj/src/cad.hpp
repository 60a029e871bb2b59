#pragma once

#include "formula.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>

namespace qelim {

// Irreducible normalized factors of the inputs, constants dropped, sorted,
// deduplicated.
std::vector<Polynomial> factor_basis(const std::vector<Polynomial> &polys);

// One projection step w.r.t. v: leading and trailing coefficients and
// discriminants of the inputs with positive degree in v, plus pairwise
// resultants, as a factor basis. Inputs without v pass through untouched.
std::vector<Polynomial> projection_step(const std::vector<Polynomial> &polys, Var v);

// Full cascade for a lifting order (index 0 = base). Result[k] holds the
// basis polynomials whose main variable is order[k].
std::vector<std::vector<Polynomial>>
projection_chain(const std::vector<Polynomial> &polys, const std::vector<Var> &order);

enum class LevelQ { Free, Exists, Forall };

// Equational-constraint handling. Single designates one constraint per CAD
// lifetime and keeps it across runs; MultipleUnsafe reduces the projection by
// every conjunct constraint with no curtain-completeness guarantee and marks
// results unverified.
enum class EcMode { Off, Single, MultipleUnsafe };

struct CadStats {
  long proj_polys = 0;
  long ec_count = 0; // distinct constraints ever designated
  long cells_total = 0;
  long cells_leaf = 0; // full-depth cells
  long true_cells = 0; // full-depth cells true in the latest run
  long curtain_events = 0;
};

struct SectionRef {
  Polynomial poly; // basis polynomial, normalized
  int index;       // 1-based among its own real roots over the base point
};

struct CadCell;
using CellPtr = std::shared_ptr<CadCell>;

struct CadCell {
  int level = 0; // coordinates assigned so far
  int dim = 0;   // sector levels among them
  std::vector<RealAlg> sample;
  bool is_section = false;
  std::optional<SectionRef> sec;    // sections: the defining root
  std::optional<SectionRef> lo, hi; // sectors: bounding roots when present
  CadCell *parent = nullptr;

  std::vector<CellPtr> kids;
  bool stack_built = false;
  bool ec_restricted = false; // kids are sections of the equational constraint only

  int truth_run = -1; // run id the truth belongs to
  bool truth = false;

  std::map<Polynomial, int> signs; // memoized signs at this cell's sample
};

struct CadRun {
  FormulaPtr solution;          // over the free variables (may use root atoms)
  bool decided = false;         // no free variables: the result is `truth`
  bool truth = false;
  std::vector<RealAlg> witness; // full sample of a satisfying leaf
  bool witness_valid = false;   // only when every level is existential
  bool unverified = false;      // produced under an unsafe restriction
};

// A cylindrical algebraic decomposition that can be reused: later runs merge
// their polynomials into the basis, split existing stacks and re-evaluate
// truth values, keeping subtrees whose geometry is unchanged.
class Cad {
public:
  // order low (lifted first) to high; quant parallel to it, Free levels form
  // a prefix.
  Cad(std::vector<Var> order, std::vector<LevelQ> quant, EcMode ec_mode,
      std::chrono::steady_clock::time_point deadline = {}, bool deadline_set = false);

  // matrix must be quantifier-free, without extended atoms, and its
  // variables must be covered by the order.
  // allow_new_ec=false blocks fresh constraint designation for this run;
  // a constraint committed by an earlier run is still reused
  CadRun run(const FormulaPtr &matrix, bool allow_new_ec = true);

  // Fraction of the matrix's factor basis already present in this CAD.
  double overlap(const FormulaPtr &matrix) const;
  // This CAD's order must be a prefix of the candidate's (quantifier tags
  // included) for reuse to be sound.
  bool order_compatible(const std::vector<Var> &order,
                        const std::vector<LevelQ> &quant) const;
  // Extension point: append quantified levels above the current ones.
  void append_levels(const std::vector<Var> &order, const std::vector<LevelQ> &quant);

  CadStats stats() const; // derived from the current tree
  const std::vector<Var> &order() const { return order_; }
  const std::vector<LevelQ> &quant() const { return quant_; }
  // Factor set identifying the designated equational constraint, if any.
  const std::vector<Polynomial> &ec_factors() const { return ec_factors_; }
  bool ec_active() const { return ec_on_; }

  // Sign-invariance audit: re-samples full-depth cells and compares the sign
  // of every basis polynomial on each level. True when all match.
  bool audit(int cells, int resamples_per_cell, uint64_t seed) const;

  void leaf_cells(std::vector<CellPtr> &out) const;

private:
  struct CurtainAbort {};

  std::vector<Var> order_;
  std::vector<LevelQ> quant_;
  std::map<Var, size_t> var_pos_;
  size_t free_count_ = 0;
  EcMode ec_mode_ = EcMode::Off;
  bool ec_forced_off_ = false; // a curtain disabled the restriction for good
  bool ec_on_ = false;
  std::vector<Polynomial> ec_factors_;
  std::vector<Polynomial> ec_built_; // designation the restricted stacks follow
  std::set<std::vector<Polynomial>> ecs_seen_; // every designation ever made
  std::chrono::steady_clock::time_point deadline_;
  bool deadline_set_ = false;

  std::vector<std::vector<Polynomial>> basis_; // basis_[k]: main var order_[k]
  std::set<Polynomial> full_top_; // top polys whose full projection was emitted
  CellPtr root_;
  int run_id_ = -1;
  long curtain_events_ = 0;
  std::vector<FormulaPtr> pieces_; // solution disjuncts of the current run

  void check_deadline() const;
  size_t level_of(const Polynomial &p) const;
  std::map<Var, RealAlg> point_of(const CadCell &cell) const;
  int sign_of(CadCell &cell, const Polynomial &p) const;
  // folds every atom whose variables are all assigned at the cell
  FormulaPtr eval_partial(const FormulaPtr &f, CadCell &cell) const;
  // p vanishes identically in v over the cell's sample
  bool nullifies(const Polynomial &p, CadCell &cell, Var v) const;
  // roots in v of the Lazard residue of p over the cell's sample; on a
  // curtain these are the limits of the neighboring root curves
  std::vector<RealAlg> roots_over(const Polynomial &p, const CadCell &cell, Var v) const;
  void build_stack(CadCell &cell, bool restrict_ec);
  void merge_stack(CadCell &cell, const std::vector<Polynomial> &added);
  void merge_level(CadCell &cell, size_t level, const std::vector<Polynomial> &added);
  bool decide_quant(CadCell &cell, const FormulaPtr &residual);
  void walk_free(CadCell &cell, const FormulaPtr &residual);
  FormulaPtr cell_desc(const CadCell &cell) const;
  void distribute(const std::vector<Polynomial> &fs,
                  std::vector<std::vector<Polynomial>> *added);
  std::vector<Polynomial> ec_projection() const;
  std::vector<Polynomial> top_projection(const FormulaPtr &matrix);
  void designate_ec(const FormulaPtr &matrix, bool allow_new_ec);
  CadRun run_once(const FormulaPtr &matrix, bool allow_new_ec);
};

} // namespace qelim
