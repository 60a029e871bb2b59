#pragma once

#include "cad.hpp"
#include "ordering.hpp"
#include "vts.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <string>

namespace qelim {

enum class QeMode { Poly, Whole, VtsOnly, CadOnly };
enum class Traversal { Depth, Breadth };

QeMode qe_mode_from(const std::string &name);       // throws std::invalid_argument
Traversal traversal_from(const std::string &name);  // same
EcMode ec_mode_from(const std::string &name);       // same

struct QeOptions {
  QeMode mode = QeMode::Poly;
  OrderStrategy ordering = OrderStrategy::Brown;
  std::vector<Var> user_order; // base first, only for OrderStrategy::User
  Traversal traversal = Traversal::Depth;
  EcMode ec_mode = EcMode::Single;
  double share_threshold = 0.5;
  bool groebner = false;
  bool want_witness = false;
  double timeout_sec = 0; // 0 disables the deadline
};

struct QeStats {
  long proj_polys = 0;
  long ec_count = 0;
  long cells_total = 0;
  long cells_leaf = 0;
  long true_cells = 0;
  long curtain_events = 0;
  long cad_builds = 0;
  long iqers_solved = 0;    // stalled results shipped to a CAD
  long vts_eliminated = 0;  // quantifiers removed by substitution
  std::string to_json() const;
};

struct Witness {
  std::map<Var, RealAlg> assignment;
  bool verified = false;
};

struct QeResult {
  FormulaPtr solution;  // quantifier-free, over the free variables
  bool decided = false; // fully quantified input: the answer is `truth`
  bool truth = false;
  std::optional<Witness> witness;
  QeStats stats;
  bool unverified = false; // an unsafe restriction produced this result
};

// Quantifier elimination over the reals. The input may nest quantifiers
// arbitrarily; the matrix must be plain Tarski (no root atoms).
QeResult qe(const FormulaPtr &problem, const QeOptions &opts);

} // namespace qelim
