#include "formula.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <set>

namespace qelim {

// -------------------------------------------------------------------- rels

Rel rel_complement(Rel r) {
  switch (r) {
  case Rel::Eq: return Rel::Ne;
  case Rel::Ne: return Rel::Eq;
  case Rel::Lt: return Rel::Ge;
  case Rel::Le: return Rel::Gt;
  case Rel::Gt: return Rel::Le;
  case Rel::Ge: return Rel::Lt;
  }
  return Rel::Eq;
}

Rel rel_mirror(Rel r) {
  switch (r) {
  case Rel::Lt: return Rel::Gt;
  case Rel::Le: return Rel::Ge;
  case Rel::Gt: return Rel::Lt;
  case Rel::Ge: return Rel::Le;
  default: return r;
  }
}

bool rel_eval(Rel r, int sign) {
  switch (r) {
  case Rel::Eq: return sign == 0;
  case Rel::Ne: return sign != 0;
  case Rel::Lt: return sign < 0;
  case Rel::Le: return sign <= 0;
  case Rel::Gt: return sign > 0;
  case Rel::Ge: return sign >= 0;
  }
  return false;
}

std::string rel_name(Rel r) {
  switch (r) {
  case Rel::Eq: return "=";
  case Rel::Ne: return "/=";
  case Rel::Lt: return "<";
  case Rel::Le: return "<=";
  case Rel::Gt: return ">";
  case Rel::Ge: return ">=";
  }
  return "?";
}

namespace {

// sign-set encoding: bit 0 negative, bit 1 zero, bit 2 positive
int rel_mask(Rel r) {
  switch (r) {
  case Rel::Lt: return 1;
  case Rel::Eq: return 2;
  case Rel::Gt: return 4;
  case Rel::Le: return 3;
  case Rel::Ge: return 6;
  case Rel::Ne: return 5;
  }
  return 0;
}

Rel mask_rel(int m) {
  switch (m) {
  case 1: return Rel::Lt;
  case 2: return Rel::Eq;
  case 4: return Rel::Gt;
  case 3: return Rel::Le;
  case 6: return Rel::Ge;
  case 5: return Rel::Ne;
  }
  throw InternalError("mask_rel: not a relation mask");
}

} // namespace

// ------------------------------------------------------------- constructors

FormulaPtr f_true() {
  static FormulaPtr t = std::make_shared<Formula>(Formula{Formula::Kind::True, {}, {}, {}, {}});
  return t;
}

FormulaPtr f_false() {
  static FormulaPtr t = std::make_shared<Formula>(Formula{Formula::Kind::False, {}, {}, {}, {}});
  return t;
}

FormulaPtr f_bool(bool b) { return b ? f_true() : f_false(); }

FormulaPtr f_atom(const Polynomial &p, Rel r) {
  auto [norm, unit] = p.normalize();
  if (norm.is_constant())
    return f_bool(rel_eval(r, sgn(p.is_zero() ? Rat(0) : p.constant_value())));
  if (sgn(unit) < 0)
    r = rel_mirror(r);
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->atom = Atom{norm, r};
  return f;
}

FormulaPtr f_ext(Var v, Rel r, IndexedRoot root) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Ext;
  f->ext = ExtAtom{v, r, std::move(root)};
  return f;
}

int formula_cmp(const FormulaPtr &a, const FormulaPtr &b) {
  if (a.get() == b.get())
    return 0;
  auto ik = [](Formula::Kind k) { return static_cast<int>(k); };
  if (a->kind != b->kind)
    return ik(a->kind) < ik(b->kind) ? -1 : 1;
  auto cmp_poly = [](const Polynomial &x, const Polynomial &y) {
    return x < y ? -1 : (y < x ? 1 : 0);
  };
  switch (a->kind) {
  case Formula::Kind::True:
  case Formula::Kind::False:
    return 0;
  case Formula::Kind::Atom: {
    int c = cmp_poly(a->atom.poly, b->atom.poly);
    if (c)
      return c;
    return static_cast<int>(a->atom.rel) - static_cast<int>(b->atom.rel);
  }
  case Formula::Kind::Ext: {
    if (a->ext.var != b->ext.var)
      return a->ext.var < b->ext.var ? -1 : 1;
    if (a->ext.rel != b->ext.rel)
      return static_cast<int>(a->ext.rel) < static_cast<int>(b->ext.rel) ? -1 : 1;
    int c = cmp_poly(a->ext.root.poly, b->ext.root.poly);
    if (c)
      return c;
    if (a->ext.root.rvar != b->ext.root.rvar)
      return a->ext.root.rvar < b->ext.root.rvar ? -1 : 1;
    return a->ext.root.index - b->ext.root.index;
  }
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    size_t n = std::min(a->kids.size(), b->kids.size());
    for (size_t i = 0; i < n; ++i) {
      int c = formula_cmp(a->kids[i], b->kids[i]);
      if (c)
        return c;
    }
    if (a->kids.size() != b->kids.size())
      return a->kids.size() < b->kids.size() ? -1 : 1;
    return 0;
  }
  case Formula::Kind::Exists:
  case Formula::Kind::Forall: {
    size_t n = std::min(a->qvars.size(), b->qvars.size());
    for (size_t i = 0; i < n; ++i)
      if (a->qvars[i] != b->qvars[i])
        return a->qvars[i] < b->qvars[i] ? -1 : 1;
    if (a->qvars.size() != b->qvars.size())
      return a->qvars.size() < b->qvars.size() ? -1 : 1;
    return formula_cmp(a->kids[0], b->kids[0]);
  }
  }
  return 0;
}

bool formula_eq(const FormulaPtr &a, const FormulaPtr &b) { return formula_cmp(a, b) == 0; }

namespace {

FormulaPtr make_junction(Formula::Kind kind, std::vector<FormulaPtr> kids) {
  // kind is And or Or; the other is the absorbing dual
  const bool is_and = kind == Formula::Kind::And;
  std::vector<FormulaPtr> flat;
  for (auto &k : kids) {
    if (k->kind == kind) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
      continue;
    }
    if (k->kind == Formula::Kind::True) {
      if (!is_and)
        return f_true();
      continue;
    }
    if (k->kind == Formula::Kind::False) {
      if (is_and)
        return f_false();
      continue;
    }
    flat.push_back(k);
  }
  // merge sign conditions on a shared polynomial
  std::map<Polynomial, int> masks;
  std::vector<FormulaPtr> rest;
  for (auto &k : flat) {
    if (k->kind == Formula::Kind::Atom) {
      auto it = masks.find(k->atom.poly);
      int m = rel_mask(k->atom.rel);
      if (it == masks.end())
        masks.emplace(k->atom.poly, m);
      else if (is_and)
        it->second &= m;
      else
        it->second |= m;
    } else
      rest.push_back(k);
  }
  std::vector<FormulaPtr> out;
  for (auto &[p, m] : masks) {
    if (m == 0) {
      if (is_and)
        return f_false();
      continue;
    }
    if (m == 7) {
      if (!is_and)
        return f_true();
      continue;
    }
    out.push_back(f_atom(p, mask_rel(m)));
  }
  out.insert(out.end(), rest.begin(), rest.end());
  std::sort(out.begin(), out.end(),
            [](const FormulaPtr &x, const FormulaPtr &y) { return formula_cmp(x, y) < 0; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const FormulaPtr &x, const FormulaPtr &y) { return formula_eq(x, y); }),
            out.end());
  if (out.empty())
    return f_bool(is_and);
  if (out.size() == 1)
    return out[0];
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->kids = std::move(out);
  return f;
}

} // namespace

FormulaPtr f_and(std::vector<FormulaPtr> kids) {
  return make_junction(Formula::Kind::And, std::move(kids));
}

FormulaPtr f_or(std::vector<FormulaPtr> kids) {
  return make_junction(Formula::Kind::Or, std::move(kids));
}

FormulaPtr f_not(const FormulaPtr &f) {
  switch (f->kind) {
  case Formula::Kind::True:
    return f_false();
  case Formula::Kind::False:
    return f_true();
  case Formula::Kind::Atom:
    return f_atom(f->atom.poly, rel_complement(f->atom.rel));
  case Formula::Kind::Ext:
    return f_ext(f->ext.var, rel_complement(f->ext.rel), f->ext.root);
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::vector<FormulaPtr> kids;
    kids.reserve(f->kids.size());
    for (auto &k : f->kids)
      kids.push_back(f_not(k));
    return f->kind == Formula::Kind::And ? f_or(std::move(kids)) : f_and(std::move(kids));
  }
  case Formula::Kind::Exists:
    return f_forall(f->qvars, f_not(f->kids[0]));
  case Formula::Kind::Forall:
    return f_exists(f->qvars, f_not(f->kids[0]));
  }
  throw InternalError("f_not: bad kind");
}

FormulaPtr f_quant(Quant q, std::vector<Var> vs, const FormulaPtr &body) {
  auto fv = free_vars(body);
  std::vector<Var> used;
  for (Var v : vs)
    if (std::find(fv.begin(), fv.end(), v) != fv.end())
      used.push_back(v);
  if (used.empty())
    return body;
  Formula::Kind k = q == Quant::Exists ? Formula::Kind::Exists : Formula::Kind::Forall;
  if (body->kind == k) {
    std::vector<Var> merged = used;
    merged.insert(merged.end(), body->qvars.begin(), body->qvars.end());
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->qvars = std::move(merged);
    f->kids = {body->kids[0]};
    return f;
  }
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->qvars = std::move(used);
  f->kids = {body};
  return f;
}

FormulaPtr f_exists(std::vector<Var> vs, const FormulaPtr &body) {
  return f_quant(Quant::Exists, std::move(vs), body);
}

FormulaPtr f_forall(std::vector<Var> vs, const FormulaPtr &body) {
  return f_quant(Quant::Forall, std::move(vs), body);
}

// ----------------------------------------------------------------- queries

namespace {
void free_vars_rec(const FormulaPtr &f, std::set<Var> &bound, std::set<Var> &out) {
  switch (f->kind) {
  case Formula::Kind::True:
  case Formula::Kind::False:
    return;
  case Formula::Kind::Atom:
    for (Var v : f->atom.poly.variables())
      if (!bound.count(v))
        out.insert(v);
    return;
  case Formula::Kind::Ext:
    if (!bound.count(f->ext.var))
      out.insert(f->ext.var);
    for (Var v : f->ext.root.poly.variables())
      if (!bound.count(v))
        out.insert(v);
    return;
  case Formula::Kind::And:
  case Formula::Kind::Or:
    for (auto &k : f->kids)
      free_vars_rec(k, bound, out);
    return;
  case Formula::Kind::Exists:
  case Formula::Kind::Forall: {
    std::vector<Var> added;
    for (Var v : f->qvars)
      if (bound.insert(v).second)
        added.push_back(v);
    free_vars_rec(f->kids[0], bound, out);
    for (Var v : added)
      bound.erase(v);
    return;
  }
  }
}
} // namespace

std::vector<Var> free_vars(const FormulaPtr &f) {
  std::set<Var> bound, out;
  free_vars_rec(f, bound, out);
  return {out.begin(), out.end()};
}

bool is_quantifier_free(const FormulaPtr &f) {
  switch (f->kind) {
  case Formula::Kind::Exists:
  case Formula::Kind::Forall:
    return false;
  case Formula::Kind::And:
  case Formula::Kind::Or:
    for (auto &k : f->kids)
      if (!is_quantifier_free(k))
        return false;
    return true;
  default:
    return true;
  }
}

bool contains_ext(const FormulaPtr &f) {
  switch (f->kind) {
  case Formula::Kind::Ext:
    return true;
  case Formula::Kind::And:
  case Formula::Kind::Or:
  case Formula::Kind::Exists:
  case Formula::Kind::Forall:
    for (auto &k : f->kids)
      if (contains_ext(k))
        return true;
    return false;
  default:
    return false;
  }
}

namespace {
void atom_polys_rec(const FormulaPtr &f, std::set<Polynomial> &out) {
  switch (f->kind) {
  case Formula::Kind::Atom:
    out.insert(f->atom.poly);
    return;
  case Formula::Kind::Ext:
    out.insert(f->ext.root.poly);
    return;
  case Formula::Kind::And:
  case Formula::Kind::Or:
  case Formula::Kind::Exists:
  case Formula::Kind::Forall:
    for (auto &k : f->kids)
      atom_polys_rec(k, out);
    return;
  default:
    return;
  }
}
} // namespace

std::vector<Polynomial> atom_polys(const FormulaPtr &f) {
  std::set<Polynomial> s;
  atom_polys_rec(f, s);
  return {s.begin(), s.end()};
}

FormulaPtr map_atoms(const FormulaPtr &f,
                     const std::function<FormulaPtr(const Atom &)> &fn) {
  switch (f->kind) {
  case Formula::Kind::Atom:
    return fn(f->atom);
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::vector<FormulaPtr> kids;
    kids.reserve(f->kids.size());
    for (auto &k : f->kids)
      kids.push_back(map_atoms(k, fn));
    return f->kind == Formula::Kind::And ? f_and(std::move(kids)) : f_or(std::move(kids));
  }
  case Formula::Kind::Exists:
  case Formula::Kind::Forall:
    return f_quant(f->kind == Formula::Kind::Exists ? Quant::Exists : Quant::Forall, f->qvars,
                   map_atoms(f->kids[0], fn));
  default:
    return f;
  }
}

FormulaPtr simplify(const FormulaPtr &f) {
  switch (f->kind) {
  case Formula::Kind::Atom:
    return f_atom(f->atom.poly, f->atom.rel);
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::vector<FormulaPtr> kids;
    for (auto &k : f->kids)
      kids.push_back(simplify(k));
    return f->kind == Formula::Kind::And ? f_and(std::move(kids)) : f_or(std::move(kids));
  }
  case Formula::Kind::Exists:
  case Formula::Kind::Forall:
    return f_quant(f->kind == Formula::Kind::Exists ? Quant::Exists : Quant::Forall, f->qvars,
                   simplify(f->kids[0]));
  default:
    return f;
  }
}

// ------------------------------------------------------------------ prenex

namespace {

Polynomial apply_renames(const Polynomial &p, const std::map<Var, Var> &env) {
  Polynomial r = p;
  for (Var v : p.variables()) {
    auto it = env.find(v);
    if (it != env.end() && it->second != v)
      r = r.rename(v, it->second);
  }
  return r;
}

FormulaPtr uniquify(const FormulaPtr &f, std::map<Var, Var> env, std::set<Var> &used) {
  switch (f->kind) {
  case Formula::Kind::True:
  case Formula::Kind::False:
    return f;
  case Formula::Kind::Atom:
    return f_atom(apply_renames(f->atom.poly, env), f->atom.rel);
  case Formula::Kind::Ext: {
    auto it = env.find(f->ext.var);
    Var v = it != env.end() ? it->second : f->ext.var;
    return f_ext(v, f->ext.rel,
                 IndexedRoot{apply_renames(f->ext.root.poly, env), f->ext.root.rvar,
                             f->ext.root.index});
  }
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::vector<FormulaPtr> kids;
    for (auto &k : f->kids)
      kids.push_back(uniquify(k, env, used));
    return f->kind == Formula::Kind::And ? f_and(std::move(kids)) : f_or(std::move(kids));
  }
  case Formula::Kind::Exists:
  case Formula::Kind::Forall: {
    std::vector<Var> vs;
    for (Var v : f->qvars) {
      if (used.count(v)) {
        Var nv = Var::fresh(v.name());
        used.insert(nv);
        env[v] = nv;
        vs.push_back(nv);
      } else {
        used.insert(v);
        env[v] = v;
        vs.push_back(v);
      }
    }
    return f_quant(f->kind == Formula::Kind::Exists ? Quant::Exists : Quant::Forall, vs,
                   uniquify(f->kids[0], env, used));
  }
  }
  throw InternalError("uniquify: bad kind");
}

struct RawPrenex {
  std::vector<Block> blocks;
  FormulaPtr matrix;
};

RawPrenex prenex_rec(const FormulaPtr &f) {
  switch (f->kind) {
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::vector<RawPrenex> parts;
    for (auto &k : f->kids)
      parts.push_back(prenex_rec(k));
    // Interleave block lists, grouping equal quantifiers to limit alternation.
    std::vector<Block> blocks;
    std::vector<size_t> pos(parts.size(), 0);
    for (;;) {
      int pick = -1;
      // prefer continuing the current quantifier kind
      for (size_t i = 0; i < parts.size(); ++i) {
        if (pos[i] >= parts[i].blocks.size())
          continue;
        if (!blocks.empty() && parts[i].blocks[pos[i]].q == blocks.back().q) {
          pick = static_cast<int>(i);
          break;
        }
        if (pick < 0)
          pick = static_cast<int>(i);
      }
      if (pick < 0)
        break;
      Block b = parts[static_cast<size_t>(pick)].blocks[pos[static_cast<size_t>(pick)]++];
      if (!blocks.empty() && blocks.back().q == b.q)
        blocks.back().vars.insert(blocks.back().vars.end(), b.vars.begin(), b.vars.end());
      else
        blocks.push_back(std::move(b));
    }
    std::vector<FormulaPtr> mats;
    for (auto &p : parts)
      mats.push_back(p.matrix);
    FormulaPtr m =
        f->kind == Formula::Kind::And ? f_and(std::move(mats)) : f_or(std::move(mats));
    return {std::move(blocks), m};
  }
  case Formula::Kind::Exists:
  case Formula::Kind::Forall: {
    RawPrenex inner = prenex_rec(f->kids[0]);
    Quant q = f->kind == Formula::Kind::Exists ? Quant::Exists : Quant::Forall;
    std::vector<Block> blocks;
    blocks.push_back(Block{q, f->qvars});
    for (auto &b : inner.blocks) {
      if (blocks.back().q == b.q)
        blocks.back().vars.insert(blocks.back().vars.end(), b.vars.begin(), b.vars.end());
      else
        blocks.push_back(b);
    }
    return {std::move(blocks), inner.matrix};
  }
  default:
    return {{}, f};
  }
}

} // namespace

PrenexForm prenex(const FormulaPtr &f) {
  std::set<Var> used;
  for (Var v : free_vars(f))
    used.insert(v);
  FormulaPtr u = uniquify(f, {}, used);
  RawPrenex raw = prenex_rec(u);
  // Quantified variables that simplification dropped would make empty blocks.
  std::vector<Block> blocks;
  for (auto &b : raw.blocks) {
    std::vector<Var> vs;
    auto fv = free_vars(raw.matrix);
    for (Var v : b.vars)
      if (std::find(fv.begin(), fv.end(), v) != fv.end())
        vs.push_back(v);
    if (vs.empty())
      continue;
    if (!blocks.empty() && blocks.back().q == b.q)
      blocks.back().vars.insert(blocks.back().vars.end(), vs.begin(), vs.end());
    else
      blocks.push_back(Block{b.q, vs});
  }
  return {std::move(blocks), raw.matrix};
}

// ------------------------------------------------------------- ground eval

bool evaluate_ground(const FormulaPtr &f, const std::map<Var, RealAlg> &point) {
  switch (f->kind) {
  case Formula::Kind::True:
    return true;
  case Formula::Kind::False:
    return false;
  case Formula::Kind::Atom:
    return rel_eval(f->atom.rel, sign_at(f->atom.poly, point));
  case Formula::Kind::Ext: {
    auto roots = roots_at(f->ext.root.poly, f->ext.root.rvar, point);
    if (f->ext.root.index < 1 || static_cast<size_t>(f->ext.root.index) > roots.size())
      return false;
    const RealAlg &val = point.at(f->ext.var);
    int c = RealAlg::compare(val, roots[static_cast<size_t>(f->ext.root.index - 1)]);
    return rel_eval(f->ext.rel, c);
  }
  case Formula::Kind::And:
    for (auto &k : f->kids)
      if (!evaluate_ground(k, point))
        return false;
    return true;
  case Formula::Kind::Or:
    for (auto &k : f->kids)
      if (evaluate_ground(k, point))
        return true;
    return false;
  default:
    throw std::invalid_argument("evaluate_ground: formula has quantifiers");
  }
}

// ---------------------------------------------------------------- roots_at

std::vector<RealAlg> roots_at(const Polynomial &p, Var v, const std::map<Var, RealAlg> &point) {
  std::map<Var, Rat> rats;
  std::vector<Var> algs;
  for (Var w : p.variables()) {
    if (w == v)
      continue;
    auto it = point.find(w);
    if (it == point.end())
      throw std::invalid_argument("roots_at: unassigned variable " + w.name());
    if (it->second.is_rational())
      rats.emplace(w, it->second.rat());
    else
      algs.push_back(w);
  }
  Polynomial q = p.eval(rats);
  if (algs.empty()) {
    if (q.degree(v) == 0) {
      if (q.is_zero())
        throw UnsupportedError("roots_at: polynomial vanishes identically at the point");
      return {};
    }
    return RealAlg::roots_of(q, v);
  }
  // Nullification check on the coefficients.
  bool all_zero = true;
  for (auto &c : q.coeffs_in(v))
    if (!c.is_zero() && sign_at(c, point) != 0) {
      all_zero = false;
      break;
    }
  if (all_zero)
    throw UnsupportedError("roots_at: polynomial vanishes identically at the point");
  Polynomial g = q;
  for (Var w : algs) {
    const RealAlg &al = point.at(w);
    Polynomial def = al.defpoly().rename(al.defvar(), w);
    g = resultant(g, def, w);
  }
  if (g.is_zero())
    throw UnsupportedError("roots_at: degenerate elimination chain");
  if (g.degree(v) == 0)
    return {};
  std::vector<RealAlg> out;
  for (auto &cand : RealAlg::roots_of(g, v)) {
    auto pt = point;
    pt.insert_or_assign(v, cand);
    if (sign_at(q, pt) == 0)
      out.push_back(cand);
  }
  return out;
}

// ------------------------------------------------------------------ parser

namespace {

struct Token {
  enum T { LP, RP, Sym, Num, End } t;
  std::string text;
  Rat num;
  size_t pos;
};

bool is_op_char(char c) { return std::string("=/<>+*^-").find(c) != std::string::npos; }
bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(const std::string &s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ';') { // comment to end of line
      while (i < s.size() && s[i] != '\n')
        ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({Token::LP, "(", Rat(0), i++});
      continue;
    }
    if (c == ')') {
      out.push_back({Token::RP, ")", Rat(0), i++});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      size_t start = i;
      if (c == '-')
        ++i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
        ++i;
      if (i < s.size() && s[i] == '/' && i + 1 < s.size() &&
          std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
          ++i;
      }
      std::string text = s.substr(start, i - start);
      auto q = rat_parse(text);
      if (!q)
        throw ParseError("bad number '" + text + "'", start);
      out.push_back({Token::Num, text, *q, start});
      continue;
    }
    if (is_ident_start(c)) {
      size_t start = i;
      while (i < s.size() && is_ident_char(s[i]))
        ++i;
      out.push_back({Token::Sym, s.substr(start, i - start), Rat(0), start});
      continue;
    }
    if (is_op_char(c)) {
      size_t start = i;
      while (i < s.size() && is_op_char(s[i]))
        ++i;
      out.push_back({Token::Sym, s.substr(start, i - start), Rat(0), start});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Token::End, "", Rat(0), s.size()});
  return out;
}

const std::set<std::string> &keywords() {
  static std::set<std::string> k{"and", "or",  "not", "exists", "forall", "true",
                                 "false", "root", "alg", "+",   "-",      "*",
                                 "^",   "=",   "/=",  "<",     "<=",     ">",
                                 ">="};
  return k;
}

struct Parser {
  const std::vector<Token> &toks;
  size_t i = 0;

  const Token &peek() const { return toks[i]; }
  Token next() { return toks[i++]; }
  void expect(Token::T t, const char *what) {
    if (peek().t != t)
      throw ParseError(std::string("expected ") + what + ", got '" + peek().text + "'", peek().pos);
    ++i;
  }

  Polynomial term() {
    const Token &t = peek();
    if (t.t == Token::Num) {
      next();
      return Polynomial::constant(t.num);
    }
    if (t.t == Token::Sym) {
      if (keywords().count(t.text))
        throw ParseError("'" + t.text + "' is reserved", t.pos);
      next();
      return Polynomial::variable(Var::named(t.text));
    }
    if (t.t != Token::LP)
      throw ParseError("expected a term, got '" + t.text + "'", t.pos);
    next();
    const Token &head = peek();
    if (head.t != Token::Sym)
      throw ParseError("expected an operator, got '" + head.text + "'", head.pos);
    std::string op = head.text;
    next();
    std::vector<Polynomial> args;
    if (op == "^") {
      Polynomial base = term();
      const Token &e = peek();
      if (e.t != Token::Num || den(e.num) != 1 || sgn(e.num) < 0)
        throw ParseError("exponent must be a nonnegative integer", e.pos);
      next();
      expect(Token::RP, "')'");
      return base.pow(static_cast<int>(num(e.num).get_si()));
    }
    while (peek().t != Token::RP && peek().t != Token::End)
      args.push_back(term());
    expect(Token::RP, "')'");
    if (args.empty())
      throw ParseError("operator '" + op + "' needs arguments", head.pos);
    if (op == "+") {
      Polynomial r;
      for (auto &a : args)
        r = r + a;
      return r;
    }
    if (op == "-") {
      if (args.size() == 1)
        return -args[0];
      Polynomial r = args[0];
      for (size_t k = 1; k < args.size(); ++k)
        r = r - args[k];
      return r;
    }
    if (op == "*") {
      Polynomial r = Polynomial::constant(1);
      for (auto &a : args)
        r = r * a;
      return r;
    }
    throw ParseError("unknown arithmetic operator '" + op + "'", head.pos);
  }

  FormulaPtr formula() {
    const Token &t = peek();
    if (t.t == Token::Sym && t.text == "true") {
      next();
      return f_true();
    }
    if (t.t == Token::Sym && t.text == "false") {
      next();
      return f_false();
    }
    if (t.t != Token::LP)
      throw ParseError("expected a formula, got '" + t.text + "'", t.pos);
    next();
    const Token &head = peek();
    if (head.t != Token::Sym)
      throw ParseError("expected an operator, got '" + head.text + "'", head.pos);
    std::string op = head.text;
    size_t op_pos = head.pos;
    next();
    if (op == "and" || op == "or") {
      std::vector<FormulaPtr> kids;
      while (peek().t != Token::RP && peek().t != Token::End)
        kids.push_back(formula());
      expect(Token::RP, "')'");
      if (kids.empty())
        throw ParseError("'" + op + "' needs arguments", op_pos);
      return op == "and" ? f_and(std::move(kids)) : f_or(std::move(kids));
    }
    if (op == "not") {
      FormulaPtr k = formula();
      expect(Token::RP, "')'");
      return f_not(k);
    }
    if (op == "exists" || op == "forall") {
      expect(Token::LP, "'('");
      std::vector<Var> vs;
      while (peek().t == Token::Sym) {
        if (keywords().count(peek().text))
          throw ParseError("'" + peek().text + "' is reserved", peek().pos);
        vs.push_back(Var::named(next().text));
      }
      expect(Token::RP, "')'");
      if (vs.empty())
        throw ParseError("quantifier needs at least one variable", op_pos);
      FormulaPtr body = formula();
      expect(Token::RP, "')'");
      return op == "exists" ? f_exists(vs, body) : f_forall(vs, body);
    }
    Rel rel;
    if (op == "=")
      rel = Rel::Eq;
    else if (op == "/=")
      rel = Rel::Ne;
    else if (op == "<")
      rel = Rel::Lt;
    else if (op == "<=")
      rel = Rel::Le;
    else if (op == ">")
      rel = Rel::Gt;
    else if (op == ">=")
      rel = Rel::Ge;
    else
      throw ParseError("unknown operator '" + op + "'", op_pos);
    Polynomial lhs = term();
    Polynomial rhs = term();
    expect(Token::RP, "')'");
    return f_atom(lhs - rhs, rel);
  }
};

} // namespace

FormulaPtr parse_formula(const std::string &text) {
  auto toks = lex(text);
  Parser p{toks};
  FormulaPtr f = p.formula();
  if (p.peek().t != Token::End)
    throw ParseError("trailing input '" + p.peek().text + "'", p.peek().pos);
  return f;
}

// ----------------------------------------------------------------- printer

std::string print_formula(const FormulaPtr &f) {
  switch (f->kind) {
  case Formula::Kind::True:
    return "true";
  case Formula::Kind::False:
    return "false";
  case Formula::Kind::Atom:
    return "(" + rel_name(f->atom.rel) + " " + f->atom.poly.to_sexpr() + " 0)";
  case Formula::Kind::Ext:
    return "(" + rel_name(f->ext.rel) + " " + f->ext.var.name() + " (root " +
           std::to_string(f->ext.root.index) + " " + f->ext.root.poly.to_sexpr() + " " +
           f->ext.root.rvar.name() + "))";
  case Formula::Kind::And:
  case Formula::Kind::Or: {
    std::string s = f->kind == Formula::Kind::And ? "(and" : "(or";
    for (auto &k : f->kids)
      s += " " + print_formula(k);
    return s + ")";
  }
  case Formula::Kind::Exists:
  case Formula::Kind::Forall: {
    std::string s = f->kind == Formula::Kind::Exists ? "(exists (" : "(forall (";
    for (size_t i = 0; i < f->qvars.size(); ++i)
      s += (i ? " " : "") + f->qvars[i].name();
    return s + ") " + print_formula(f->kids[0]) + ")";
  }
  }
  throw InternalError("print_formula: bad kind");
}

} // namespace qelim
