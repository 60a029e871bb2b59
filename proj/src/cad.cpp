#include "cad.hpp"

#include "errors.hpp"
#include "factor.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <random>
#include <set>
#include <tuple>

namespace qelim {

// ----------------------------------------------------------- factor basis

std::vector<Polynomial> factor_basis(const std::vector<Polynomial> &polys) {
  std::set<Polynomial> out;
  for (auto &p : polys) {
    if (p.is_zero() || p.is_constant())
      continue;
    for (auto &[f, e] : factor(p).factors) {
      (void)e;
      if (!f.is_constant())
        out.insert(f);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<Polynomial> projection_step(const std::vector<Polynomial> &polys, Var v) {
  std::vector<Polynomial> raw;
  std::vector<const Polynomial *> with;
  for (auto &p : polys) {
    if (p.degree(v) == 0) {
      raw.push_back(p);
      continue;
    }
    with.push_back(&p);
    raw.push_back(p.leading_coeff(v));
    raw.push_back(p.trailing_coeff(v));
    if (p.degree(v) >= 2)
      raw.push_back(discriminant(p, v));
  }
  for (size_t i = 0; i < with.size(); ++i)
    for (size_t j = i + 1; j < with.size(); ++j)
      raw.push_back(resultant(*with[i], *with[j], v));
  return factor_basis(raw);
}

std::vector<std::vector<Polynomial>>
projection_chain(const std::vector<Polynomial> &polys, const std::vector<Var> &order) {
  size_t n = order.size();
  std::map<Var, size_t> pos;
  for (size_t i = 0; i < n; ++i)
    pos[order[i]] = i;
  std::vector<std::vector<Polynomial>> levels(n);
  auto put = [&](const std::vector<Polynomial> &fs) {
    for (auto &f : fs) {
      size_t k = 0;
      for (Var v : f.variables()) {
        auto it = pos.find(v);
        if (it == pos.end())
          throw std::invalid_argument("projection_chain: variable " + v.name() +
                                      " not in the order");
        k = std::max(k, it->second);
      }
      levels[k].push_back(f);
    }
  };
  put(factor_basis(polys));
  for (size_t k = n; k-- > 1;) {
    std::sort(levels[k].begin(), levels[k].end());
    levels[k].erase(std::unique(levels[k].begin(), levels[k].end()), levels[k].end());
    put(projection_step(levels[k], order[k]));
  }
  if (n) {
    std::sort(levels[0].begin(), levels[0].end());
    levels[0].erase(std::unique(levels[0].begin(), levels[0].end()), levels[0].end());
  }
  return levels;
}

// --------------------------------------------------------------- helpers

namespace {

// remainder of q by def in w; def is univariate in w, so its leading
// coefficient is a nonzero rational
Polynomial rem_in(Polynomial q, const Polynomial &def, Var w) {
  int dd = def.degree(w);
  Rat lcd = def.leading_coeff(w).constant_value();
  while (q.degree(w) >= dd) {
    int dq = q.degree(w);
    Polynomial fac =
        q.leading_coeff(w) * (Rat(1) / lcd) * Polynomial::term(1, Monomial::var(w, dq - dd));
    q = q - fac * def;
    if (q.degree(w) == dq) // safety: leading term must vanish
      throw InternalError("rem_in: no progress");
  }
  return q;
}

} // namespace

// -------------------------------------------------------------------- Cad

Cad::Cad(std::vector<Var> order, std::vector<LevelQ> quant, EcMode ec_mode,
         std::chrono::steady_clock::time_point deadline, bool deadline_set)
    : order_(std::move(order)), quant_(std::move(quant)), ec_mode_(ec_mode),
      deadline_(deadline), deadline_set_(deadline_set) {
  assert(order_.size() == quant_.size());
  for (size_t i = 0; i < order_.size(); ++i)
    var_pos_[order_[i]] = i;
  free_count_ = 0;
  while (free_count_ < quant_.size() && quant_[free_count_] == LevelQ::Free)
    ++free_count_;
  for (size_t i = free_count_; i < quant_.size(); ++i)
    assert(quant_[i] != LevelQ::Free);
  basis_.resize(order_.size());
}

void Cad::check_deadline() const {
  if (deadline_set_ && std::chrono::steady_clock::now() > deadline_)
    throw TimeoutError();
}

size_t Cad::level_of(const Polynomial &p) const {
  size_t k = 0;
  for (Var v : p.variables()) {
    auto it = var_pos_.find(v);
    if (it == var_pos_.end())
      throw std::invalid_argument("cad: variable " + v.name() + " not in the order");
    k = std::max(k, it->second);
  }
  return k;
}

std::map<Var, RealAlg> Cad::point_of(const CadCell &cell) const {
  std::map<Var, RealAlg> pt;
  for (size_t i = 0; i < cell.sample.size(); ++i)
    pt.emplace(order_[i], cell.sample[i]);
  return pt;
}

int Cad::sign_of(CadCell &cell, const Polynomial &p) const {
  auto it = cell.signs.find(p);
  if (it != cell.signs.end())
    return it->second;
  int s = sign_at(p, point_of(cell));
  cell.signs.emplace(p, s);
  return s;
}

FormulaPtr Cad::eval_partial(const FormulaPtr &f, CadCell &cell) const {
  switch (f->kind) {
  case Formula::Kind::True:
  case Formula::Kind::False:
    return f;
  case Formula::Kind::Atom: {
    for (Var v : f->atom.poly.variables())
      if (var_pos_.at(v) >= static_cast<size_t>(cell.level))
        return f;
    return f_bool(rel_eval(f->atom.rel, sign_of(cell, f->atom.poly)));
  }
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::vector<FormulaPtr> kids;
    kids.reserve(f->kids.size());
    for (auto &k : f->kids)
      kids.push_back(eval_partial(k, cell));
    return f->kind == Formula::Kind::And ? f_and(std::move(kids)) : f_or(std::move(kids));
  }
  default:
    throw InternalError("eval_partial: quantifier or extended atom in matrix");
  }
}

bool Cad::nullifies(const Polynomial &p, CadCell &cell, Var v) const {
  if (p.degree(v) == 0)
    return false;
  for (auto &c : p.coeffs_in(v)) {
    if (c.is_zero())
      continue;
    if (c.is_constant() || sign_of(cell, c) != 0)
      return false;
  }
  return true;
}

std::vector<RealAlg> Cad::roots_over(const Polynomial &p, const CadCell &cell,
                                     Var v) const {
  check_deadline();
  Polynomial q = p;
  for (size_t i = 0; i < cell.sample.size(); ++i) {
    Var w = order_[i];
    if (q.degree(w) == 0)
      continue;
    const RealAlg &a = cell.sample[i];
    if (a.is_rational()) {
      Rat c = a.rat();
      Polynomial lin = Polynomial::variable(w) - Polynomial::constant(c);
      for (;;) {
        Polynomial e = q.eval(w, c);
        if (!e.is_zero()) {
          q = e;
          break;
        }
        q = *q.divide_exact(lin);
      }
    } else {
      Polynomial def = a.defpoly().rename(a.defvar(), w);
      for (;;) {
        auto d = q.divide_exact(def);
        if (!d)
          break;
        q = *d;
      }
      q = rem_in(q, def, w);
    }
  }
  // the residue is reduced below the degree of every defining polynomial, so
  // it cannot vanish at the sample unless it is the zero polynomial
  if (q.is_zero())
    throw InternalError("cad: zero residue in lifting");
  if (q.degree(v) == 0)
    return {};
  return roots_at(q, v, point_of(cell));
}

void Cad::build_stack(CadCell &cell, bool restrict_ec) {
  size_t L = static_cast<size_t>(cell.level);
  Var v = order_[L];
  const std::vector<Polynomial> &polys = restrict_ec ? ec_factors_ : basis_[L];
  std::vector<std::pair<RealAlg, SectionRef>> roots;
  for (auto &p : polys) {
    if (restrict_ec && level_of(p) != L)
      continue; // constraint factors living on lower levels don't cut here
    if (nullifies(p, cell, v)) {
      ++curtain_events_;
      // Single mode pre-checks curtains in decide_quant, so this factor can
      // only nullify under the unsafe multiple mode: drop its sections and
      // carry on without completeness guarantees.
      if (restrict_ec)
        continue;
      // p is identically zero here; the residue roots below are the limits
      // of its root curves and still refine the stack
    }
    int idx = 1;
    for (auto &r : roots_over(p, cell, v))
      roots.push_back({r, SectionRef{p, idx++}});
  }
  std::sort(roots.begin(), roots.end(), [](const auto &a, const auto &b) {
    return RealAlg::compare(a.first, b.first) < 0;
  });
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](const auto &a, const auto &b) {
                            return RealAlg::compare(a.first, b.first) == 0;
                          }),
              roots.end());

  auto child = [&](RealAlg coord, bool is_sec) {
    auto c = std::make_shared<CadCell>();
    c->level = cell.level + 1;
    c->dim = cell.dim + (is_sec ? 0 : 1);
    c->sample = cell.sample;
    c->sample.push_back(std::move(coord));
    c->is_section = is_sec;
    c->parent = &cell;
    return c;
  };

  std::vector<CellPtr> kids;
  if (roots.empty()) {
    if (!restrict_ec)
      kids.push_back(child(RealAlg(Rat(0)), false));
  } else {
    for (size_t i = 0; i < roots.size(); ++i) {
      if (!restrict_ec) {
        RealAlg s = i == 0 ? RealAlg(floor_int(roots[0].first.lo()) - 1)
                           : RealAlg(rat_strictly_between(roots[i - 1].first, roots[i].first));
        auto c = child(s, false);
        if (i > 0)
          c->lo = roots[i - 1].second;
        c->hi = roots[i].second;
        kids.push_back(std::move(c));
      }
      auto c = child(roots[i].first, true);
      c->sec = roots[i].second;
      kids.push_back(std::move(c));
    }
    if (!restrict_ec) {
      auto c = child(RealAlg(ceil_int(roots.back().first.hi()) + 1), false);
      c->lo = roots.back().second;
      kids.push_back(std::move(c));
    }
  }
  cell.kids = std::move(kids);
  cell.stack_built = true;
  cell.ec_restricted = restrict_ec;
}

void Cad::merge_stack(CadCell &cell, const std::vector<Polynomial> &added) {
  size_t L = static_cast<size_t>(cell.level);
  Var v = order_[L];
  std::vector<std::pair<RealAlg, SectionRef>> roots;
  for (auto &p : added) {
    if (nullifies(p, cell, v))
      ++curtain_events_; // the residue roots still refine the stack
    int idx = 1;
    for (auto &r : roots_over(p, cell, v))
      roots.push_back({r, SectionRef{p, idx++}});
  }
  if (roots.empty())
    return;
  // existing sections keep their cells; old sectors are reused for whichever
  // gap still contains their sample
  for (auto &k : cell.kids)
    if (k->is_section)
      roots.push_back({k->sample.back(), *k->sec});
  std::sort(roots.begin(), roots.end(), [](const auto &a, const auto &b) {
    return RealAlg::compare(a.first, b.first) < 0;
  });
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](const auto &a, const auto &b) {
                            return RealAlg::compare(a.first, b.first) == 0;
                          }),
              roots.end());

  std::map<const CadCell *, CellPtr> old_sections;
  std::vector<CellPtr> old_sectors;
  for (auto &k : cell.kids) {
    if (k->is_section)
      old_sections.emplace(k.get(), k);
    else
      old_sectors.push_back(k);
  }
  auto find_section = [&](const RealAlg &r) -> CellPtr {
    for (auto &[ptr, k] : old_sections) {
      (void)ptr;
      if (RealAlg::compare(k->sample.back(), r) == 0)
        return k;
    }
    return nullptr;
  };
  auto find_sector = [&](const RealAlg *lo, const RealAlg *hi) -> CellPtr {
    for (auto it = old_sectors.begin(); it != old_sectors.end(); ++it) {
      const RealAlg &s = (*it)->sample.back();
      if (lo && RealAlg::compare(s, *lo) <= 0)
        continue;
      if (hi && RealAlg::compare(s, *hi) >= 0)
        continue;
      CellPtr k = *it;
      old_sectors.erase(it);
      return k;
    }
    return nullptr;
  };

  auto child = [&](RealAlg coord, bool is_sec) {
    auto c = std::make_shared<CadCell>();
    c->level = cell.level + 1;
    c->dim = cell.dim + (is_sec ? 0 : 1);
    c->sample = cell.sample;
    c->sample.push_back(std::move(coord));
    c->is_section = is_sec;
    c->parent = &cell;
    return c;
  };

  std::vector<CellPtr> kids;
  for (size_t i = 0; i <= roots.size(); ++i) {
    const RealAlg *lo = i > 0 ? &roots[i - 1].first : nullptr;
    const RealAlg *hi = i < roots.size() ? &roots[i].first : nullptr;
    CellPtr sec = find_sector(lo, hi);
    if (!sec) {
      RealAlg s = !hi ? (!lo ? RealAlg(Rat(0)) : RealAlg(ceil_int(lo->hi()) + 1))
                      : (!lo ? RealAlg(floor_int(hi->lo()) - 1)
                             : RealAlg(rat_strictly_between(*lo, *hi)));
      sec = child(std::move(s), false);
    }
    sec->lo = i > 0 ? std::optional<SectionRef>(roots[i - 1].second) : std::nullopt;
    sec->hi = i < roots.size() ? std::optional<SectionRef>(roots[i].second) : std::nullopt;
    kids.push_back(std::move(sec));
    if (i < roots.size()) {
      CellPtr s = find_section(roots[i].first);
      if (!s) {
        s = child(roots[i].first, true);
        s->sec = roots[i].second;
      }
      kids.push_back(std::move(s));
    }
  }
  cell.kids = std::move(kids);
}

void Cad::merge_level(CadCell &cell, size_t level, const std::vector<Polynomial> &added) {
  if (static_cast<size_t>(cell.level) == level) {
    // restricted stacks hold sections of the committed constraint only; a
    // run that needs more rebuilds them through decide_quant
    if (cell.stack_built && !cell.ec_restricted)
      merge_stack(cell, added);
    return;
  }
  for (auto &k : cell.kids)
    merge_level(*k, level, added);
}

bool Cad::decide_quant(CadCell &cell, const FormulaPtr &residual) {
  check_deadline();
  FormulaPtr res = eval_partial(residual, cell);
  auto set_truth = [&](bool b) {
    cell.truth_run = run_id_;
    cell.truth = b;
    return b;
  };
  if (res->kind == Formula::Kind::True)
    return set_truth(true);
  if (res->kind == Formula::Kind::False)
    return set_truth(false);
  size_t L = static_cast<size_t>(cell.level);
  if (L == order_.size())
    throw InternalError("cad: undecided matrix at full depth");
  bool want_ec = ec_on_ && L == order_.size() - 1;
  if (want_ec && ec_mode_ == EcMode::Single) {
    // Curtain check: a constraint factor that vanishes identically over this
    // cell leaves the fiber unconstrained, so its sections confine nothing.
    // Over a point cell the full one-line lift is still sign-correct; over a
    // positive-dimension cell we give the restriction up for the whole CAD.
    for (auto &p : ec_factors_) {
      bool flat = level_of(p) == L ? nullifies(p, cell, order_[L])
                                   : sign_of(cell, p) == 0;
      if (flat) {
        ++curtain_events_;
        if (cell.dim > 0)
          throw CurtainAbort{};
        want_ec = false;
        break;
      }
    }
  }
  if (cell.stack_built && cell.ec_restricted && !want_ec) {
    cell.kids.clear();
    cell.stack_built = false;
  }
  if (!cell.stack_built)
    build_stack(cell, want_ec);
  // a full stack serves a restricted run through the constraint's sections
  bool view_ec = want_ec && !cell.ec_restricted;
  auto skip = [&](const CadCell &k) {
    if (!view_ec)
      return false;
    if (!k.is_section)
      return true;
    return std::find(ec_factors_.begin(), ec_factors_.end(), k.sec->poly) ==
           ec_factors_.end();
  };
  if (quant_[L] == LevelQ::Exists) {
    for (auto &k : cell.kids)
      if (!skip(*k) && decide_quant(*k, res))
        return set_truth(true);
    return set_truth(false);
  }
  for (auto &k : cell.kids)
    if (!skip(*k) && !decide_quant(*k, res))
      return set_truth(false);
  return set_truth(true);
}

FormulaPtr Cad::cell_desc(const CadCell &cell) const {
  std::vector<const CadCell *> path;
  for (const CadCell *c = &cell; c && c->level > 0; c = c->parent)
    path.push_back(c);
  std::reverse(path.begin(), path.end());
  std::vector<FormulaPtr> conj;
  for (const CadCell *c : path) {
    Var v = order_[static_cast<size_t>(c->level - 1)];
    if (c->is_section) {
      conj.push_back(f_ext(v, Rel::Eq, IndexedRoot{c->sec->poly, v, c->sec->index}));
    } else {
      if (c->lo)
        conj.push_back(f_ext(v, Rel::Gt, IndexedRoot{c->lo->poly, v, c->lo->index}));
      if (c->hi)
        conj.push_back(f_ext(v, Rel::Lt, IndexedRoot{c->hi->poly, v, c->hi->index}));
    }
  }
  return f_and(std::move(conj));
}

void Cad::walk_free(CadCell &cell, const FormulaPtr &residual) {
  check_deadline();
  FormulaPtr res = eval_partial(residual, cell);
  cell.truth_run = run_id_;
  if (res->kind == Formula::Kind::False) {
    cell.truth = false;
    return;
  }
  if (res->kind == Formula::Kind::True) {
    cell.truth = true;
    pieces_.push_back(cell_desc(cell));
    return;
  }
  size_t L = static_cast<size_t>(cell.level);
  if (L == free_count_) {
    bool b = decide_quant(cell, res);
    if (b)
      pieces_.push_back(cell_desc(cell));
    return;
  }
  // free levels sit below any quantified one, so a restriction (which lives
  // on the top level of an existential block) never applies here
  if (!cell.stack_built)
    build_stack(cell, false);
  for (auto &k : cell.kids)
    walk_free(*k, res);
}

void Cad::distribute(const std::vector<Polynomial> &fs,
                     std::vector<std::vector<Polynomial>> *added) {
  for (auto &f : fs) {
    size_t k = level_of(f);
    auto &lvl = basis_[k];
    if (std::find(lvl.begin(), lvl.end(), f) == lvl.end()) {
      lvl.push_back(f);
      if (added)
        (*added)[k].push_back(f);
    }
  }
}

std::vector<Polynomial> Cad::ec_projection() const {
  Var v = order_.back();
  // lower-level constraint factors pass through projection_step untouched;
  // the base gets split along the degeneracy locus they mark
  std::vector<Polynomial> raw = projection_step(ec_factors_, v);
  for (auto &g : basis_.back()) {
    if (std::find(ec_factors_.begin(), ec_factors_.end(), g) != ec_factors_.end())
      continue;
    for (auto &f : ec_factors_)
      if (f.degree(v) > 0)
        raw.push_back(resultant(f, g, v));
  }
  return factor_basis(raw);
}

std::vector<Polynomial> Cad::top_projection(const FormulaPtr &matrix) {
  Var v = order_.back();
  if (ec_on_) {
    for (auto &f : ec_factors_)
      if (f.degree(v) > 0)
        full_top_.insert(f); // crossed with the whole level below
    return ec_projection();
  }
  // Incremental: full projection only for the polynomials this run decides
  // on, crossed against the whole level. Pairs between polynomials no run
  // ever combined are skipped; their stacks still refine each other, the
  // decision only needs the run's own polynomials delineable.
  std::vector<Polynomial> need;
  for (auto &p : factor_basis(atom_polys(matrix)))
    if (level_of(p) == basis_.size() - 1 && !full_top_.count(p))
      need.push_back(p);
  std::vector<Polynomial> raw = projection_step(need, v);
  for (auto &p : need)
    for (auto &g : basis_.back())
      if (!(g == p) && std::find(need.begin(), need.end(), g) == need.end())
        raw.push_back(resultant(p, g, v));
  full_top_.insert(need.begin(), need.end());
  return factor_basis(raw);
}

void Cad::designate_ec(const FormulaPtr &matrix, bool allow_new_ec) {
  ec_factors_.clear();
  ec_on_ = false;
  if (ec_mode_ == EcMode::Off || ec_forced_off_ || order_.empty())
    return;
  // sections-only lifting is an existential argument: over a universal or
  // free top level it would lose the sectors (the equation can still hold
  // there when a lower-level factor vanishes)
  if (quant_.back() != LevelQ::Exists)
    return;
  Var top = order_.back();
  std::vector<FormulaPtr> conjuncts;
  if (matrix->kind == Formula::Kind::And)
    conjuncts = matrix->kids;
  else
    conjuncts = {matrix};
  // candidate constraints: conjunct equations that cut the top fiber. The
  // factor set keeps lower-level factors as well: they mark where the
  // equation degenerates to the whole fiber.
  struct Cand {
    int deg;
    size_t terms;
    std::vector<Polynomial> fs;
  };
  std::vector<Cand> cands;
  for (auto &k : conjuncts) {
    if (k->kind != Formula::Kind::Atom || k->atom.rel != Rel::Eq)
      continue;
    int d = k->atom.poly.degree(top);
    if (d <= 0)
      continue;
    cands.push_back({d, k->atom.poly.term_count(), factor_basis({k->atom.poly})});
  }
  if (ec_mode_ == EcMode::MultipleUnsafe) {
    if (!allow_new_ec)
      return;
    // every conjunct equation reduces the projection, with no
    // curtain-completeness checks; results are stamped unverified
    std::set<Polynomial> merged;
    for (auto &c : cands) {
      ecs_seen_.insert(c.fs);
      merged.insert(c.fs.begin(), c.fs.end());
    }
    ec_factors_.assign(merged.begin(), merged.end());
    ec_on_ = !ec_factors_.empty();
    return;
  }
  // single mode commits to at most one constraint per CAD lifetime, so the
  // restricted stacks keep paying off across runs; a matrix without the
  // committed equation runs unrestricted
  if (!ec_built_.empty()) {
    for (auto &c : cands)
      if (c.fs == ec_built_) {
        ec_factors_ = ec_built_;
        ec_on_ = true;
        return;
      }
    return;
  }
  if (!allow_new_ec)
    return;
  const Cand *best = nullptr;
  for (auto &c : cands)
    if (!best || std::tie(c.deg, c.terms, c.fs) < std::tie(best->deg, best->terms, best->fs))
      best = &c;
  if (!best)
    return;
  ec_factors_ = best->fs;
  ecs_seen_.insert(ec_factors_);
  ec_on_ = true;
}

CadRun Cad::run(const FormulaPtr &matrix, bool allow_new_ec) {
  assert(is_quantifier_free(matrix) && !contains_ext(matrix));
  for (;;) {
    try {
      return run_once(matrix, allow_new_ec);
    } catch (CurtainAbort &) {
      // the equational shortcut broke down over a positive-dimensional cell;
      // rebuild without it (extra basis entries from the restricted
      // projection stay: they only refine)
      ec_forced_off_ = true;
      root_.reset();
    }
  }
}

CadRun Cad::run_once(const FormulaPtr &matrix, bool allow_new_ec) {
  ++run_id_;
  pieces_.clear();
  designate_ec(matrix, allow_new_ec);
  if (root_ && ec_on_ && ec_factors_ != ec_built_) {
    // restricted stacks in the tree follow the old designation; drop them
    std::function<void(CadCell &)> scrub = [&](CadCell &c) {
      if (c.stack_built && c.ec_restricted) {
        c.kids.clear();
        c.stack_built = false;
        return;
      }
      for (auto &k : c.kids)
        scrub(*k);
    };
    scrub(*root_);
  }
  if (ec_on_)
    ec_built_ = ec_factors_;

  std::vector<std::vector<Polynomial>> added(basis_.size());
  distribute(factor_basis(atom_polys(matrix)), &added);
  for (size_t k = basis_.size(); k-- > 1;) {
    check_deadline();
    auto proj = k == basis_.size() - 1 ? top_projection(matrix)
                                       : projection_step(basis_[k], order_[k]);
    distribute(proj, &added);
  }

  if (!root_)
    root_ = std::make_shared<CadCell>();
  else
    for (size_t k = 0; k < basis_.size(); ++k)
      if (!added[k].empty())
        merge_level(*root_, k, added[k]);

  CadRun out;
  out.unverified = ec_on_ && ec_mode_ == EcMode::MultipleUnsafe;
  if (free_count_ == 0) {
    out.decided = true;
    out.truth = decide_quant(*root_, matrix);
    if (out.truth) {
      std::vector<RealAlg> w;
      CadCell *c = root_.get();
      while (w.size() < order_.size()) {
        CadCell *next = nullptr;
        for (auto &k : c->kids)
          if (k->truth_run == run_id_ && k->truth) {
            next = k.get();
            break;
          }
        if (!next)
          break; // decided by partial evaluation: any completion works
        w.push_back(next->sample.back());
        c = next;
      }
      while (w.size() < order_.size())
        w.push_back(RealAlg(Rat(0)));
      out.witness = std::move(w);
      out.witness_valid = true;
      for (LevelQ q : quant_)
        if (q != LevelQ::Exists)
          out.witness_valid = false;
    }
    out.solution = f_bool(out.truth);
  } else {
    walk_free(*root_, matrix);
    out.solution = f_or(pieces_);
  }
  return out;
}

double Cad::overlap(const FormulaPtr &matrix) const {
  auto fs = factor_basis(atom_polys(matrix));
  if (fs.empty())
    return 1.0;
  size_t hit = 0;
  for (auto &f : fs) {
    size_t k;
    try {
      k = level_of(f);
    } catch (const std::invalid_argument &) {
      continue; // variables outside this CAD never match
    }
    if (std::find(basis_[k].begin(), basis_[k].end(), f) != basis_[k].end())
      ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(fs.size());
}

bool Cad::order_compatible(const std::vector<Var> &order,
                           const std::vector<LevelQ> &quant) const {
  if (order.size() < order_.size())
    return false;
  for (size_t i = 0; i < order_.size(); ++i)
    if (order[i] != order_[i] || quant[i] != quant_[i])
      return false;
  // appended levels must be quantified: free levels form a prefix
  for (size_t i = order_.size(); i < quant.size(); ++i)
    if (quant[i] == LevelQ::Free && !(free_count_ == order_.size() && i == free_count_))
      return false;
  return true;
}

void Cad::append_levels(const std::vector<Var> &order, const std::vector<LevelQ> &quant) {
  assert(order_compatible(order, quant));
  if (order.size() > order_.size())
    full_top_.clear(); // the old top becomes interior, with a full cascade
  for (size_t i = order_.size(); i < order.size(); ++i) {
    var_pos_[order[i]] = i;
    quant_.push_back(quant[i]);
    order_.push_back(order[i]);
    basis_.emplace_back();
    if (quant[i] == LevelQ::Free)
      ++free_count_;
  }
}

CadStats Cad::stats() const {
  CadStats s;
  for (auto &lvl : basis_)
    s.proj_polys += static_cast<long>(lvl.size());
  s.ec_count = static_cast<long>(ecs_seen_.size());
  s.curtain_events = curtain_events_;
  if (!root_)
    return s;
  std::function<void(const CadCell &)> walk = [&](const CadCell &c) {
    if (c.level > 0) {
      ++s.cells_total;
      if (static_cast<size_t>(c.level) == order_.size()) {
        ++s.cells_leaf;
        if (c.truth_run == run_id_ && c.truth)
          ++s.true_cells;
      }
    }
    for (auto &k : c.kids)
      walk(*k);
  };
  walk(*root_);
  return s;
}

void Cad::leaf_cells(std::vector<CellPtr> &out) const {
  if (!root_)
    return;
  std::function<void(const CellPtr &)> walk = [&](const CellPtr &c) {
    if (static_cast<size_t>(c->level) == order_.size()) {
      out.push_back(c);
      return;
    }
    for (auto &k : c->kids)
      walk(k);
  };
  walk(root_);
}

bool Cad::audit(int cells, int resamples_per_cell, uint64_t seed) const {
  std::vector<CellPtr> leaves;
  leaf_cells(leaves);
  if (leaves.empty())
    return true;
  std::mt19937_64 rng(seed);
  std::shuffle(leaves.begin(), leaves.end(), rng);
  if (cells < static_cast<int>(leaves.size()))
    leaves.resize(static_cast<size_t>(cells));

  auto jitter = [&](const RealAlg &lo, const RealAlg &hi) {
    // a random rational strictly between lo and hi
    Rat t(static_cast<long>(rng() % 13) + 2, 16); // 2/16 .. 14/16
    t.canonicalize();
    RealAlg mid = lo + (hi - lo) * RealAlg(t);
    if (mid.is_rational())
      return mid.rat();
    return rat_strictly_between(lo, hi);
  };

  for (auto &leaf : leaves) {
    std::vector<const CadCell *> path;
    for (const CadCell *c = leaf.get(); c && c->level > 0; c = c->parent)
      path.push_back(c);
    std::reverse(path.begin(), path.end());

    for (int round = 0; round < resamples_per_cell; ++round) {
      bool ok = true;
      std::vector<RealAlg> coords;
      for (const CadCell *c : path) {
        size_t L = static_cast<size_t>(c->level - 1);
        Var v = order_[L];
        CadCell probe; // carries the resampled prefix for roots_over
        probe.level = static_cast<int>(L);
        probe.sample = coords;
        RealAlg coord = c->sample.back();
        if (c->is_section) {
          auto rs = roots_over(c->sec->poly, probe, v);
          if (static_cast<int>(rs.size()) < c->sec->index) {
            ok = false;
            break;
          }
          coord = rs[static_cast<size_t>(c->sec->index - 1)];
        } else {
          std::optional<RealAlg> lo, hi;
          if (c->lo) {
            auto rs = roots_over(c->lo->poly, probe, v);
            if (static_cast<int>(rs.size()) < c->lo->index) {
              ok = false;
              break;
            }
            lo = rs[static_cast<size_t>(c->lo->index - 1)];
          }
          if (c->hi) {
            auto rs = roots_over(c->hi->poly, probe, v);
            if (static_cast<int>(rs.size()) < c->hi->index) {
              ok = false;
              break;
            }
            hi = rs[static_cast<size_t>(c->hi->index - 1)];
          }
          if (lo && hi) {
            if (RealAlg::compare(*lo, *hi) >= 0) {
              ok = false;
              break;
            }
            coord = RealAlg(jitter(*lo, *hi));
          } else if (lo) {
            coord = RealAlg(ceil_int(lo->hi()) + 1 + static_cast<long>(rng() % 3));
          } else if (hi) {
            coord = RealAlg(floor_int(hi->lo()) - 1 - static_cast<long>(rng() % 3));
          } else {
            coord = RealAlg(Rat(static_cast<long>(rng() % 7)) - 3);
          }
        }
        coords.push_back(coord);
      }
      if (!ok)
        return false;
      // every basis polynomial must keep its sign on every level of the cell
      for (size_t L = 0; L < path.size(); ++L) {
        std::map<Var, RealAlg> news, olds;
        for (size_t i = 0; i <= L; ++i) {
          news.emplace(order_[i], coords[i]);
          olds.emplace(order_[i], path[i]->sample.back());
        }
        for (auto &p : basis_[L]) {
          if (sign_at(p, news) != sign_at(p, olds))
            return false;
        }
      }
    }
  }
  return true;
}

} // namespace qelim
