#include "vts.hpp"

#include "errors.hpp"
#include "factor.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <tuple>

namespace qelim {

namespace {

// sign conditions for A + B*sqrt(R), R >= 0 under the candidate's guard

FormulaPtr cond_eq(const Polynomial &A, const Polynomial &B, const Polynomial &R) {
  Polynomial d = A * A - B * B * R;
  return f_and({f_atom(A * B, Rel::Le), f_atom(d, Rel::Eq)});
}

FormulaPtr cond_lt(const Polynomial &A, const Polynomial &B, const Polynomial &R) {
  Polynomial d = A * A - B * B * R;
  return f_or({f_and({f_atom(A, Rel::Lt), f_atom(B, Rel::Le)}),
               f_and({f_atom(A, Rel::Lt), f_atom(d, Rel::Gt)}),
               f_and({f_atom(B, Rel::Le), f_atom(d, Rel::Lt)})});
}

FormulaPtr sqrt_sign_cond(Rel rel, const Polynomial &A, const Polynomial &B,
                          const Polynomial &R) {
  switch (rel) {
  case Rel::Eq: return cond_eq(A, B, R);
  case Rel::Ne: return f_not(cond_eq(A, B, R));
  case Rel::Lt: return cond_lt(A, B, R);
  case Rel::Gt: return cond_lt(-A, -B, R);
  case Rel::Le: return f_or({cond_lt(A, B, R), cond_eq(A, B, R)});
  case Rel::Ge: return f_or({cond_lt(-A, -B, R), cond_eq(A, B, R)});
  }
  throw InternalError("sqrt_sign_cond: bad rel");
}

// G rel 0 at v = (p + q*sqrt(r))/s. Multiplying through by s^deg turns the
// left side into A + B*sqrt(r); odd degrees pick up the sign of s.
FormulaPtr value_sub(const Polynomial &G, Rel rel, Var v, const TestPoint &tp) {
  auto cs = G.coeffs_in(v);
  size_t d = cs.size() - 1;
  std::vector<Polynomial> spow(d + 1);
  spow[0] = Polynomial::constant(1);
  for (size_t i = 1; i <= d; ++i)
    spow[i] = spow[i - 1] * tp.s;
  Polynomial A, B;
  for (size_t i = d + 1; i-- > 0;) {
    Polynomial na = A * tp.p + B * tp.q * tp.r;
    Polynomial nb = A * tp.q + B * tp.p;
    A = na + cs[i] * spow[d - i];
    B = nb;
  }
  bool no_sqrt = B.is_zero() || tp.r.is_zero();
  FormulaPtr core = no_sqrt ? f_atom(A, rel) : sqrt_sign_cond(rel, A, B, tp.r);
  if (d % 2 == 0 || rel == Rel::Eq || rel == Rel::Ne)
    return core;
  FormulaPtr mirrored =
      no_sqrt ? f_atom(A, rel_mirror(rel)) : sqrt_sign_cond(rel_mirror(rel), A, B, tp.r);
  return f_or({f_and({f_atom(tp.s, Rel::Gt), core}),
               f_and({f_atom(tp.s, Rel::Lt), mirrored})});
}

// G rel 0 at v -> -infinity: the highest non-vanishing coefficient decides,
// with the parity of its exponent flipping the sign.
FormulaPtr minf_sub(const Polynomial &G, Rel rel, Var v) {
  auto cs = G.coeffs_in(v);
  auto all_zero = [&]() {
    std::vector<FormulaPtr> zs;
    for (auto &c : cs)
      zs.push_back(f_atom(c, Rel::Eq));
    return f_and(std::move(zs));
  };
  auto cascade = [&](Rel strict) {
    std::vector<FormulaPtr> cases;
    for (size_t k = cs.size(); k-- > 0;) {
      std::vector<FormulaPtr> conj;
      for (size_t j = k + 1; j < cs.size(); ++j)
        conj.push_back(f_atom(cs[j], Rel::Eq));
      Rel rk = k % 2 == 1 ? rel_mirror(strict) : strict;
      conj.push_back(f_atom(cs[k], rk));
      cases.push_back(f_and(std::move(conj)));
    }
    return f_or(std::move(cases));
  };
  switch (rel) {
  case Rel::Eq: return all_zero();
  case Rel::Ne: return f_not(all_zero());
  case Rel::Lt: return cascade(Rel::Lt);
  case Rel::Gt: return cascade(Rel::Gt);
  case Rel::Le: return f_or({cascade(Rel::Lt), all_zero()});
  case Rel::Ge: return f_or({cascade(Rel::Gt), all_zero()});
  }
  throw InternalError("minf_sub: bad rel");
}

// G rel 0 at v = w + epsilon: the first derivative of G not vanishing at w
// decides the sign on the right of w.
FormulaPtr eps_sub(const Polynomial &G, Rel rel, Var v, const TestPoint &w) {
  std::vector<Polynomial> derivs{G};
  while (derivs.back().degree(v) > 0)
    derivs.push_back(derivs.back().derivative(v));
  auto all_zero = [&]() {
    std::vector<FormulaPtr> zs;
    for (auto &g : derivs)
      zs.push_back(value_sub(g, Rel::Eq, v, w));
    return f_and(std::move(zs));
  };
  auto cascade = [&](Rel strict) {
    std::vector<FormulaPtr> cases;
    for (size_t k = 0; k < derivs.size(); ++k) {
      std::vector<FormulaPtr> conj;
      for (size_t j = 0; j < k; ++j)
        conj.push_back(value_sub(derivs[j], Rel::Eq, v, w));
      conj.push_back(value_sub(derivs[k], strict, v, w));
      cases.push_back(f_and(std::move(conj)));
    }
    return f_or(std::move(cases));
  };
  switch (rel) {
  case Rel::Eq: return all_zero();
  case Rel::Ne: return f_not(all_zero());
  case Rel::Lt: return cascade(Rel::Lt);
  case Rel::Gt: return cascade(Rel::Gt);
  case Rel::Le: return f_or({cascade(Rel::Lt), all_zero()});
  case Rel::Ge: return f_or({cascade(Rel::Gt), all_zero()});
  }
  throw InternalError("eps_sub: bad rel");
}

std::vector<Polynomial> v_factors(const FormulaPtr &qf, Var v) {
  std::vector<Polynomial> out;
  for (auto &p : atom_polys(qf)) {
    if (p.degree(v) == 0)
      continue;
    for (auto &[f, e] : factor(p).factors) {
      (void)e;
      if (f.degree(v) > 0)
        out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

} // namespace

std::string TestPoint::to_string(Var v) const {
  switch (kind) {
  case TpKind::MinusInf:
    return v.name() + " -> -inf";
  case TpKind::Value:
  case TpKind::ValueEps: {
    std::string e = "(" + p.to_string();
    if (!q.is_zero())
      e += " + " + q.to_string() + "*sqrt(" + r.to_string() + ")";
    e += ") / (" + s.to_string() + ")";
    if (kind == TpKind::ValueEps)
      e += " + eps";
    return v.name() + " -> " + e;
  }
  }
  return "?";
}

bool vts_eligible(const FormulaPtr &qf, Var v) { return vts_blockers(qf, v).empty(); }

std::vector<Polynomial> vts_blockers(const FormulaPtr &qf, Var v) {
  std::vector<Polynomial> out;
  for (auto &f : v_factors(qf, v))
    if (f.degree(v) > 2)
      out.push_back(f);
  return out;
}

namespace {

struct RelKindOfAtom {
  bool strict_present = false; // atom with <, > or /=
  bool weak_present = false;   // atom with =, <= or >=
};

} // namespace

std::vector<TpCand> vts_elim_set(const FormulaPtr &qf, Var v) {
  // Which factors appear under strict vs weak relations decides whether the
  // root itself or root + epsilon enters the set.
  std::map<Polynomial, RelKindOfAtom> uses;
  std::function<void(const FormulaPtr &)> walk = [&](const FormulaPtr &f) {
    switch (f->kind) {
    case Formula::Kind::Atom: {
      if (f->atom.poly.degree(v) == 0)
        return;
      bool strict =
          f->atom.rel == Rel::Lt || f->atom.rel == Rel::Gt || f->atom.rel == Rel::Ne;
      for (auto &[g, e] : factor(f->atom.poly).factors) {
        (void)e;
        if (g.degree(v) == 0)
          continue;
        auto &u = uses[g];
        (strict ? u.strict_present : u.weak_present) = true;
      }
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (auto &k : f->kids)
        walk(k);
      return;
    case Formula::Kind::Ext:
      throw InternalError("vts_elim_set: extended atom in input");
    default:
      return;
    }
  };
  walk(qf);

  std::vector<TpCand> out;
  out.push_back({TestPoint{TpKind::MinusInf, {}, {}, {}, {}}, f_true()});
  auto seen_key = [](const TestPoint &tp) {
    return std::make_tuple(static_cast<int>(tp.kind), tp.p, tp.q, tp.r, tp.s);
  };
  std::set<std::tuple<int, Polynomial, Polynomial, Polynomial, Polynomial>> seen;
  auto add = [&](TestPoint tp, FormulaPtr guard, bool strict) {
    if (guard->kind == Formula::Kind::False)
      return;
    tp.kind = strict ? TpKind::ValueEps : TpKind::Value;
    if (!seen.insert(seen_key(tp)).second)
      return;
    out.push_back({std::move(tp), std::move(guard)});
  };

  for (auto &[g, u] : uses) {
    int d = g.degree(v);
    std::vector<bool> strict_modes;
    if (u.weak_present)
      strict_modes.push_back(false);
    if (u.strict_present)
      strict_modes.push_back(true);
    if (d == 1) {
      Polynomial a = g.coeff_of(v, 1), b = g.coeff_of(v, 0);
      for (bool st : strict_modes)
        add(TestPoint{TpKind::Value, -b, Polynomial(), Polynomial(), a}, f_atom(a, Rel::Ne),
            st);
    } else if (d == 2) {
      Polynomial a = g.coeff_of(v, 2), b = g.coeff_of(v, 1), c = g.coeff_of(v, 0);
      Polynomial disc = b * b - Polynomial::constant(4) * a * c;
      FormulaPtr guard = f_and({f_atom(a, Rel::Ne), f_atom(disc, Rel::Ge)});
      Polynomial two_a = Polynomial::constant(2) * a;
      for (bool st : strict_modes) {
        add(TestPoint{TpKind::Value, -b, Polynomial::constant(1), disc, two_a}, guard, st);
        add(TestPoint{TpKind::Value, -b, Polynomial::constant(-1), disc, two_a}, guard, st);
      }
      if (!a.is_constant()) {
        FormulaPtr dguard = f_and({f_atom(a, Rel::Eq), f_atom(b, Rel::Ne)});
        for (bool st : strict_modes)
          add(TestPoint{TpKind::Value, -c, Polynomial(), Polynomial(), b}, dguard, st);
      }
    }
    // degree > 2 factors make v ineligible; callers check first
  }
  return out;
}

FormulaPtr vts_substitute(const FormulaPtr &qf, Var v, const TestPoint &tp) {
  return map_atoms(qf, [&](const Atom &a) -> FormulaPtr {
    if (a.poly.degree(v) == 0)
      return f_atom(a.poly, a.rel);
    switch (tp.kind) {
    case TpKind::MinusInf:
      return minf_sub(a.poly, a.rel, v);
    case TpKind::Value:
      return value_sub(a.poly, a.rel, v, tp);
    case TpKind::ValueEps: {
      TestPoint w = tp;
      w.kind = TpKind::Value;
      return eps_sub(a.poly, a.rel, v, w);
    }
    }
    throw InternalError("vts_substitute: bad kind");
  });
}

std::vector<std::pair<TpCand, FormulaPtr>> vts_branches(const FormulaPtr &qf, Var v) {
  assert(vts_eligible(qf, v));
  std::vector<std::pair<TpCand, FormulaPtr>> out;
  for (auto &cand : vts_elim_set(qf, v)) {
    FormulaPtr piece = f_and({cand.guard, vts_substitute(qf, v, cand.tp)});
    if (piece->kind == Formula::Kind::False)
      continue;
    out.push_back({cand, piece});
  }
  return out;
}

namespace {

// all roots in v of phi's atom polynomials at the point, ascending
std::vector<RealAlg> roots_along(const FormulaPtr &phi, Var v,
                                 const std::map<Var, RealAlg> &outer) {
  std::vector<RealAlg> roots;
  for (auto &p : atom_polys(phi)) {
    if (p.degree(v) == 0)
      continue;
    std::vector<RealAlg> rs;
    try {
      rs = roots_at(p, v, outer);
    } catch (const UnsupportedError &) {
      continue; // vanishes identically: no constraint along v
    }
    roots.insert(roots.end(), rs.begin(), rs.end());
  }
  std::sort(roots.begin(), roots.end(),
            [](const RealAlg &a, const RealAlg &b) { return RealAlg::compare(a, b) < 0; });
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](const RealAlg &a, const RealAlg &b) {
                            return RealAlg::compare(a, b) == 0;
                          }),
              roots.end());
  return roots;
}

} // namespace

RealAlg resolve_test_point(const TestPoint &tp, const FormulaPtr &phi, Var v,
                           const std::map<Var, RealAlg> &outer) {
  if (tp.kind == TpKind::MinusInf) {
    auto roots = roots_along(phi, v, outer);
    if (roots.empty())
      return RealAlg(Rat(0));
    // lo() bounds the smallest root from below, so this is strictly less
    Rat below = floor_int(roots.front().lo()) - 1;
    return RealAlg(below);
  }
  RealAlg P = eval_at(tp.p, outer);
  RealAlg S = eval_at(tp.s, outer);
  RealAlg val = P / S;
  if (!tp.q.is_zero() && !tp.r.is_zero()) {
    RealAlg Q = eval_at(tp.q, outer);
    RealAlg R = eval_at(tp.r, outer);
    if (R.sign() > 0)
      val = val + Q * RealAlg::sqrt_of(R) / S;
  }
  if (tp.kind == TpKind::Value)
    return val;
  // ValueEps: strictly between val and the next root up (val + 1 when none)
  auto roots = roots_along(phi, v, outer);
  for (auto &r : roots) {
    if (RealAlg::compare(r, val) > 0)
      return RealAlg(rat_strictly_between(val, r));
  }
  return val + RealAlg(Rat(1));
}

} // namespace qelim
