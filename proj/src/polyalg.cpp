#include "polyalg.hpp"

#include "errors.hpp"
#include "groebner.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>

namespace qelim {

QeMode qe_mode_from(const std::string &name) {
  if (name == "poly")
    return QeMode::Poly;
  if (name == "whole")
    return QeMode::Whole;
  if (name == "vts")
    return QeMode::VtsOnly;
  if (name == "cad")
    return QeMode::CadOnly;
  throw std::invalid_argument("unknown mode: " + name);
}

Traversal traversal_from(const std::string &name) {
  if (name == "depth")
    return Traversal::Depth;
  if (name == "breadth")
    return Traversal::Breadth;
  throw std::invalid_argument("unknown traversal: " + name);
}

EcMode ec_mode_from(const std::string &name) {
  if (name == "off")
    return EcMode::Off;
  if (name == "single")
    return EcMode::Single;
  if (name == "multiple-unsafe")
    return EcMode::MultipleUnsafe;
  throw std::invalid_argument("unknown ec mode: " + name);
}

std::string QeStats::to_json() const {
  nlohmann::json j;
  j["proj_poly_count"] = proj_polys;
  j["ec_count"] = ec_count;
  j["cells_total"] = cells_total;
  j["cells_leaf"] = cells_leaf;
  j["true_cells"] = true_cells;
  j["curtain_events"] = curtain_events;
  j["cad_builds"] = cad_builds;
  j["iqers_solved"] = iqers_solved;
  j["vts_eliminated"] = vts_eliminated;
  return j.dump();
}

namespace {

struct Deadline {
  std::chrono::steady_clock::time_point at{};
  bool set = false;
  void check() const {
    if (set && std::chrono::steady_clock::now() > at)
      throw TimeoutError();
  }
};

struct PathStep {
  Var var;
  TestPoint tp;
  FormulaPtr parent; // the formula the point was drawn from
};

// Intermediate quantifier elimination result: a quantifier-free formula over
// the variables not yet substituted away, plus the substitution trail that
// produced it.
struct Iqer {
  FormulaPtr formula;
  std::vector<PathStep> path;
  size_t birth = 0;
};

// State of one block's substitution phase on termination: every branch has
// either eliminated the whole block, folded to a constant, or stalled on a
// variable set whose irreducible factors exceed degree 2.
struct VtsPhase {
  bool negated = false; // the block was universal, worked on the negation
  std::vector<Iqer> leaves;
  std::vector<Iqer> stalled;
  long eliminated = 0; // deepest substitution chain
};

std::vector<Var> remaining_vars(const std::vector<Var> &block_vars, const Iqer &iq) {
  std::vector<Var> rem;
  for (Var v : block_vars) {
    bool used = false;
    for (auto &st : iq.path)
      if (st.var == v)
        used = true;
    if (!used)
      rem.push_back(v);
  }
  return rem;
}

VtsPhase run_vts(const FormulaPtr &matrix, const Block &blk, const Deadline &dl) {
  VtsPhase ph;
  ph.negated = blk.q == Quant::Forall;
  size_t birth = 0;
  std::deque<Iqer> work;
  work.push_back({simplify(ph.negated ? f_not(matrix) : matrix), {}, birth++});
  while (!work.empty()) {
    dl.check();
    Iqer cur = std::move(work.front());
    work.pop_front();
    ph.eliminated = std::max(ph.eliminated, static_cast<long>(cur.path.size()));
    if (cur.formula->kind == Formula::Kind::True ||
        cur.formula->kind == Formula::Kind::False) {
      ph.leaves.push_back(std::move(cur));
      continue;
    }
    std::vector<Var> rem = remaining_vars(blk.vars, cur);
    if (rem.empty()) {
      ph.leaves.push_back(std::move(cur));
      continue;
    }
    // innermost-first: scan the remaining variables from the inside of the
    // block outward
    const Var *pick = nullptr;
    for (auto it = rem.rbegin(); it != rem.rend(); ++it)
      if (vts_eligible(cur.formula, *it)) {
        pick = &*it;
        break;
      }
    if (!pick) {
      ph.stalled.push_back(std::move(cur));
      continue;
    }
    for (auto &[cand, piece] : vts_branches(cur.formula, *pick)) {
      Iqer kid{piece, cur.path, birth++};
      kid.path.push_back({*pick, cand.tp, cur.formula});
      work.push_back(std::move(kid));
    }
  }
  return ph;
}

void add_stats(QeStats &agg, const CadStats &st) {
  agg.proj_polys += st.proj_polys;
  agg.ec_count += st.ec_count;
  agg.cells_total += st.cells_total;
  agg.cells_leaf += st.cells_leaf;
  agg.true_cells += st.true_cells;
  agg.curtain_events += st.curtain_events;
}

std::vector<Polynomial> conjunct_eqs(const FormulaPtr &m) {
  std::vector<FormulaPtr> kids;
  if (m->kind == Formula::Kind::And)
    kids = m->kids;
  else
    kids = {m};
  std::vector<Polynomial> eqs;
  for (auto &k : kids)
    if (k->kind == Formula::Kind::Atom && k->atom.rel == Rel::Eq)
      eqs.push_back(k->atom.poly);
  return eqs;
}

// Free variables of the whole problem, in first-appearance order.
std::vector<Var> problem_frees(const PrenexForm &pf) {
  std::vector<Var> bound;
  for (auto &b : pf.blocks)
    bound.insert(bound.end(), b.vars.begin(), b.vars.end());
  std::vector<Var> out;
  for (Var v : free_vars(pf.matrix))
    if (std::find(bound.begin(), bound.end(), v) == bound.end())
      out.push_back(v);
  return out;
}

std::vector<Var> cad_order_for(const QeOptions &opts, const std::vector<Var> &frees,
                               const std::vector<std::vector<Var>> &qgroups,
                               const FormulaPtr &matrix) {
  OrderInput oin;
  oin.groups.push_back(frees);
  for (auto &g : qgroups)
    oin.groups.push_back(g);
  oin.polys = atom_polys(matrix);
  oin.ecs = conjunct_eqs(matrix);
  oin.user = opts.user_order;
  return choose_order(opts.ordering, oin);
}

struct FullCadOut {
  CadRun run;
  CadStats stats;
  std::vector<Var> order;
};

// One partial CAD over every quantifier level of the residual problem.
FullCadOut full_cad(const PrenexForm &pf, const QeOptions &opts, const Deadline &dl) {
  std::vector<Var> frees = problem_frees(pf);
  std::vector<std::vector<Var>> qgroups;
  for (auto &b : pf.blocks)
    qgroups.push_back(b.vars);
  FullCadOut out;
  out.order = cad_order_for(opts, frees, qgroups, pf.matrix);
  std::vector<LevelQ> quant(frees.size(), LevelQ::Free);
  for (auto &b : pf.blocks)
    quant.insert(quant.end(), b.vars.size(),
                 b.q == Quant::Exists ? LevelQ::Exists : LevelQ::Forall);
  Cad cad(out.order, quant, opts.ec_mode, dl.at, dl.set);
  out.run = cad.run(pf.matrix);
  out.stats = cad.stats();
  return out;
}

// Sorts stalled results into processing order. Depth traversal prefers the
// deepest substitution chains (fewest remaining quantified variables).
void order_iqers(std::vector<Iqer> &iqers, Traversal tr) {
  std::stable_sort(iqers.begin(), iqers.end(), [&](const Iqer &x, const Iqer &y) {
    if (x.path.size() != y.path.size())
      return tr == Traversal::Depth ? x.path.size() > y.path.size()
                                    : x.path.size() < y.path.size();
    return x.birth < y.birth;
  });
}

// Share test against the last shipment: the fraction of the incoming
// polynomials having a nonconstant gcd with some previous one.
bool share_ok(const std::vector<Polynomial> &incoming,
              const std::vector<Polynomial> &last, double threshold) {
  if (incoming.empty())
    return true;
  size_t hits = 0;
  for (auto &p : incoming)
    for (auto &q : last)
      if (poly_gcd(p, q).total_degree() >= 1) {
        ++hits;
        break;
      }
  return static_cast<double>(hits) >= threshold * static_cast<double>(incoming.size());
}

FormulaPtr groebner_preprocess(const PrenexForm &pf) {
  if (pf.matrix->kind != Formula::Kind::And)
    return pf.matrix;
  std::vector<Polynomial> eqs = conjunct_eqs(pf.matrix);
  if (eqs.size() < 2)
    return pf.matrix;
  // lex order with the innermost quantified variable most significant, so
  // the reduced basis triangularizes toward the free variables
  std::vector<Var> order = problem_frees(pf);
  for (auto &b : pf.blocks)
    order.insert(order.end(), b.vars.begin(), b.vars.end());
  std::reverse(order.begin(), order.end());
  std::vector<Polynomial> basis = groebner_basis(eqs, order);
  std::vector<FormulaPtr> kids;
  for (auto &k : pf.matrix->kids)
    if (!(k->kind == Formula::Kind::Atom && k->atom.rel == Rel::Eq))
      kids.push_back(k);
  for (auto &g : basis)
    kids.push_back(f_atom(g, Rel::Eq));
  return f_and(std::move(kids));
}

struct Controller {
  const QeOptions &opts;
  Deadline dl;
  PrenexForm pf;
  std::vector<Var> frees;
  std::vector<Var> params;
  QeResult out;

  Controller(const FormulaPtr &problem, const QeOptions &o) : opts(o) {
    if (contains_ext(problem))
      throw UnsupportedError("root atoms are not valid engine input");
    if (o.timeout_sec > 0) {
      dl.at = std::chrono::steady_clock::now() +
              std::chrono::microseconds(static_cast<long>(o.timeout_sec * 1e6));
      dl.set = true;
    }
    pf = prenex(problem);
    if (opts.groebner)
      pf.matrix = groebner_preprocess(pf);
    frees = problem_frees(pf);
    // outer-block variables are parameters from the innermost block's view
    params = frees;
    for (size_t bi = 0; bi + 1 < pf.blocks.size(); ++bi)
      params.insert(params.end(), pf.blocks[bi].vars.begin(),
                    pf.blocks[bi].vars.end());
  }

  QeResult run() {
    if (pf.blocks.empty()) {
      finish(pf.matrix);
      return std::move(out);
    }
    switch (opts.mode) {
    case QeMode::CadOnly:
      run_cad_only();
      break;
    case QeMode::VtsOnly:
      run_vts_only();
      break;
    case QeMode::Whole:
      run_hybrid(true);
      break;
    case QeMode::Poly:
      run_hybrid(false);
      break;
    }
    if (opts.want_witness)
      attach_witness();
    return std::move(out);
  }

  void finish(FormulaPtr solution) {
    out.solution = simplify(std::move(solution));
    if (out.solution->kind == Formula::Kind::True) {
      out.decided = true;
      out.truth = true;
    } else if (out.solution->kind == Formula::Kind::False) {
      out.decided = true;
      out.truth = false;
    }
  }

  void run_cad_only() {
    auto fc = full_cad(pf, opts, dl);
    add_stats(out.stats, fc.stats);
    ++out.stats.cad_builds;
    out.unverified = fc.run.unverified;
    if (fc.run.decided) {
      out.decided = true;
      out.truth = fc.run.truth;
      out.solution = f_bool(out.truth);
      if (fc.run.witness_valid) {
        cad_witness_ = fc.run.witness;
        cad_order_ = fc.order;
      }
    } else {
      finish(fc.run.solution);
    }
  }

  void run_vts_only() {
    FormulaPtr m = pf.matrix;
    for (size_t bi = pf.blocks.size(); bi-- > 0;) {
      VtsPhase ph = run_vts(m, pf.blocks[bi], dl);
      out.stats.vts_eliminated += ph.eliminated;
      if (!ph.stalled.empty())
        throw UnsupportedError("substitution stalled on a factor of degree > 2");
      std::vector<FormulaPtr> parts;
      for (auto &l : ph.leaves)
        parts.push_back(l.formula);
      FormulaPtr joined = simplify(f_or(std::move(parts)));
      if (pf.blocks.size() == 1 && joined->kind == Formula::Kind::True)
        take_true_leaf(ph);
      m = ph.negated ? f_not(joined) : joined;
    }
    finish(m);
  }

  // Poly and whole mode share the substitution phase on the innermost block
  // and the outer-block handling; they differ in how the stalled state
  // reaches CAD.
  void run_hybrid(bool whole) {
    const Block &inner = pf.blocks.back();
    VtsPhase ph = run_vts(pf.matrix, inner, dl);
    out.stats.vts_eliminated = ph.eliminated;

    FormulaPtr inner_solution;
    if (ph.stalled.empty()) {
      std::vector<FormulaPtr> parts;
      for (auto &l : ph.leaves)
        parts.push_back(l.formula);
      FormulaPtr joined = simplify(f_or(std::move(parts)));
      if (pf.blocks.size() == 1 && joined->kind == Formula::Kind::True)
        take_true_leaf(ph);
      inner_solution = ph.negated ? f_not(joined) : joined;
    } else if (whole) {
      inner_solution = solve_whole(ph, inner);
    } else {
      inner_solution = solve_poly(ph, inner);
    }
    inner_solution = simplify(inner_solution);

    // constants absorb through any quantifier prefix
    if (pf.blocks.size() == 1 || outer_done_ ||
        inner_solution->kind == Formula::Kind::True ||
        inner_solution->kind == Formula::Kind::False) {
      finish(inner_solution);
      return;
    }
    if (contains_ext(inner_solution)) {
      // root-bounded cells cannot be requantified; start over on the
      // original problem with the one-decomposition strategy
      QeOptions retry = opts;
      retry.mode = QeMode::Whole;
      retry.want_witness = false;
      Controller again(original(), retry);
      QeResult r = again.run();
      out.stats.cad_builds += r.stats.cad_builds;
      out.stats.proj_polys += r.stats.proj_polys;
      out.stats.cells_total += r.stats.cells_total;
      out.stats.cells_leaf += r.stats.cells_leaf;
      out.stats.true_cells += r.stats.true_cells;
      out.stats.curtain_events += r.stats.curtain_events;
      out.stats.ec_count += r.stats.ec_count;
      out.unverified |= r.unverified;
      out.solution = r.solution;
      out.decided = r.decided;
      out.truth = r.truth;
      return;
    }
    // outer blocks: one partial CAD over the residual problem
    PrenexForm residual;
    residual.blocks.assign(pf.blocks.begin(), pf.blocks.end() - 1);
    residual.matrix = inner_solution;
    auto fc = full_cad(residual, opts, dl);
    add_stats(out.stats, fc.stats);
    ++out.stats.cad_builds;
    out.unverified |= fc.run.unverified;
    if (fc.run.decided) {
      out.decided = true;
      out.truth = fc.run.truth;
      out.solution = f_bool(out.truth);
    } else {
      finish(fc.run.solution);
    }
  }

  // The collapsed alternative: the termination state as one disjunction,
  // quantified over whatever the substitutions left behind, decided by a
  // single CAD spanning every remaining level.
  FormulaPtr solve_whole(VtsPhase &ph, const Block &inner) {
    if (FormulaPtr t = true_leaf_shortcut(ph))
      return t;
    std::vector<FormulaPtr> parts;
    for (auto &s : ph.stalled)
      parts.push_back(s.formula);
    for (auto &l : ph.leaves)
      parts.push_back(l.formula);
    FormulaPtr collapsed = simplify(f_or(parts));
    std::vector<Var> rem;
    {
      auto fv = free_vars(collapsed);
      for (Var v : inner.vars)
        if (std::find(fv.begin(), fv.end(), v) != fv.end())
          rem.push_back(v);
    }
    phase_ = std::move(ph);

    bool pure = frees.empty() && pf.blocks.size() == 1;
    PrenexForm wp;
    if (pure) {
      // decide the existential form directly; a universal block flips the
      // ground answer afterwards and keeps the sample as its counterexample
      if (!rem.empty())
        wp.blocks.push_back({Quant::Exists, rem});
      wp.matrix = collapsed;
      auto fc = full_cad(wp, opts, dl);
      add_stats(out.stats, fc.stats);
      ++out.stats.cad_builds;
      out.unverified |= fc.run.unverified;
      if (fc.run.witness_valid) {
        cad_witness_ = fc.run.witness;
        cad_order_ = fc.order;
      }
      whole_collapse_ = true;
      return phase_.negated ? f_bool(!fc.run.truth) : f_bool(fc.run.truth);
    }
    wp.blocks.assign(pf.blocks.begin(), pf.blocks.end() - 1);
    if (!rem.empty())
      wp.blocks.push_back({phase_.negated ? Quant::Forall : Quant::Exists, rem});
    wp.matrix = phase_.negated ? f_not(collapsed) : collapsed;
    auto fc = full_cad(wp, opts, dl);
    add_stats(out.stats, fc.stats);
    ++out.stats.cad_builds;
    out.unverified |= fc.run.unverified;
    outer_done_ = true;
    if (fc.run.decided)
      return f_bool(fc.run.truth);
    return fc.run.solution;
  }

  // The poly-algorithm proper: stalled results are shipped one at a time to
  // a CAD that is reused whenever the share criteria allow.
  FormulaPtr solve_poly(VtsPhase &ph, const Block &inner) {
    if (FormulaPtr t = true_leaf_shortcut(ph))
      return t;
    order_iqers(ph.stalled, opts.traversal);
    phase_ = std::move(ph);

    std::unique_ptr<Cad> cad;
    std::vector<Polynomial> last_polys;
    int runs_on_cad = 0;
    std::vector<FormulaPtr> solved;
    bool absorbed = false;

    auto retire = [&]() {
      if (cad) {
        add_stats(out.stats, cad->stats());
        cad.reset();
      }
    };

    for (auto &iq : phase_.stalled) {
      dl.check();
      std::vector<Var> rem = remaining_vars(inner.vars, iq);
      std::vector<Polynomial> polys = atom_polys(iq.formula);

      bool reuse = false;
      if (cad) {
        // free variables are fixed per problem, so the share criteria are
        // the gcd overlap with the previous shipment and order compatibility
        std::vector<Var> want = cad->order();
        std::vector<LevelQ> wantq = cad->quant();
        for (Var v : rem)
          if (std::find(want.begin(), want.end(), v) == want.end()) {
            want.push_back(v);
            wantq.push_back(LevelQ::Exists);
          }
        reuse = share_ok(polys, last_polys, opts.share_threshold) &&
                cad->order_compatible(want, wantq);
        if (reuse && want.size() > cad->order().size()) {
          std::vector<Var> extra(want.begin() + cad->order().size(), want.end());
          std::vector<LevelQ> extraq(extra.size(), LevelQ::Exists);
          cad->append_levels(extra, extraq);
        }
      }
      if (!reuse) {
        retire();
        std::vector<Var> order = cad_order_for(opts, params, {rem}, iq.formula);
        std::vector<LevelQ> quant(params.size(), LevelQ::Free);
        quant.insert(quant.end(), rem.size(), LevelQ::Exists);
        cad = std::make_unique<Cad>(order, quant, opts.ec_mode, dl.at, dl.set);
        ++out.stats.cad_builds;
        runs_on_cad = 0;
      }
      // constraints are identified while repurposing, never on a first build
      CadRun run = cad->run(iq.formula, runs_on_cad > 0);
      ++runs_on_cad;
      ++out.stats.iqers_solved;
      last_polys = std::move(polys);
      out.unverified |= run.unverified;

      if (run.decided) {
        solved.push_back(f_bool(run.truth));
        if (run.truth) {
          // absorbing under the disjunction: nothing else can change it
          if (run.witness_valid) {
            cad_witness_ = run.witness;
            cad_order_ = cad->order();
            witness_src_ = iq;
          }
          absorbed = true;
          break;
        }
      } else {
        solved.push_back(run.solution);
        if (solved.back()->kind == Formula::Kind::True) {
          absorbed = true;
          break;
        }
      }
    }
    retire();

    std::vector<FormulaPtr> parts;
    if (absorbed) {
      parts.push_back(f_true());
    } else {
      for (auto &l : phase_.leaves)
        parts.push_back(l.formula);
      parts.insert(parts.end(), solved.begin(), solved.end());
    }
    FormulaPtr joined = simplify(f_or(std::move(parts)));
    if (!witness_src_ && pf.blocks.size() == 1 &&
        joined->kind == Formula::Kind::True)
      take_true_leaf(phase_);
    return phase_.negated ? f_not(joined) : joined;
  }

  // A constant-true branch absorbs the disjunction before any lifting.
  FormulaPtr true_leaf_shortcut(VtsPhase &ph) {
    bool hit = false;
    for (auto &l : ph.leaves)
      hit |= l.formula->kind == Formula::Kind::True;
    if (!hit)
      return nullptr;
    bool neg = ph.negated;
    phase_ = std::move(ph);
    if (pf.blocks.size() == 1)
      take_true_leaf(phase_);
    return f_bool(!neg);
  }

  void take_true_leaf(const VtsPhase &ph) {
    for (auto &l : ph.leaves)
      if (l.formula->kind == Formula::Kind::True) {
        witness_src_ = l;
        return;
      }
  }

  FormulaPtr original() const {
    FormulaPtr f = pf.matrix;
    for (size_t bi = pf.blocks.size(); bi-- > 0;)
      f = f_quant(pf.blocks[bi].q, pf.blocks[bi].vars, f);
    return f;
  }

  // Witness assembly: sample values for the variables a CAD decided, then
  // the substitution trail resolved from the last point taken back to the
  // first, each in terms of the values already fixed.
  void attach_witness() {
    if (pf.blocks.size() != 1 || !frees.empty())
      return;
    const Block &blk = pf.blocks.back();
    bool want_true = blk.q == Quant::Exists;
    if (!out.decided || out.truth != want_true)
      return;

    std::map<Var, RealAlg> w;
    if (opts.mode == QeMode::CadOnly && cad_witness_.empty() &&
        blk.q == Quant::Forall) {
      // counterexample: one extra decomposition of the negated matrix
      PrenexForm np;
      np.blocks = {{Quant::Exists, blk.vars}};
      np.matrix = f_not(pf.matrix);
      auto fc = full_cad(np, opts, dl);
      add_stats(out.stats, fc.stats);
      ++out.stats.cad_builds;
      if (!fc.run.witness_valid)
        throw InternalError("decided problem produced no witness sample");
      cad_witness_ = fc.run.witness;
      cad_order_ = fc.order;
    }
    for (size_t i = 0; i < cad_order_.size() && i < cad_witness_.size(); ++i)
      w.emplace(cad_order_[i], cad_witness_[i]);

    if (whole_collapse_ && !witness_src_) {
      // the sample satisfies the collapsed disjunction; find a branch it
      // belongs to and take that branch's trail
      for (auto &p : phase_.stalled) {
        std::map<Var, RealAlg> pt;
        for (Var v : free_vars(p.formula))
          pt.emplace(v, w.count(v) ? w.at(v) : RealAlg(Rat(0)));
        if (evaluate_ground(p.formula, pt)) {
          witness_src_ = p;
          break;
        }
      }
      if (!witness_src_)
        take_true_leaf(phase_);
    }

    // variables no step constrained: the formula held identically in them
    for (Var v : blk.vars) {
      bool on_path = false;
      if (witness_src_)
        for (auto &st : witness_src_->path)
          if (st.var == v)
            on_path = true;
      if (!on_path && !w.count(v))
        w.emplace(v, RealAlg(Rat(0)));
    }
    if (witness_src_)
      for (auto it = witness_src_->path.rbegin(); it != witness_src_->path.rend();
           ++it) {
        std::map<Var, RealAlg> outer;
        for (Var v : free_vars(it->parent))
          if (!(v == it->var))
            outer.emplace(v, w.at(v));
        w.emplace(it->var, resolve_test_point(it->tp, it->parent, it->var, outer));
      }

    bool value = evaluate_ground(pf.matrix, w);
    if (value != want_true)
      throw InternalError("witness failed verification");
    Witness wit;
    wit.assignment = std::move(w);
    wit.verified = true;
    out.witness = std::move(wit);
  }

  VtsPhase phase_;
  std::optional<Iqer> witness_src_;
  std::vector<RealAlg> cad_witness_;
  std::vector<Var> cad_order_;
  bool whole_collapse_ = false;
  bool outer_done_ = false;
};

} // namespace

QeResult qe(const FormulaPtr &problem, const QeOptions &opts) {
  Controller c(problem, opts);
  return c.run();
}

} // namespace qelim
