#include "realalg.hpp"

#include "errors.hpp"
#include "factor.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace qelim {

struct RealAlg::Inner {
  Polynomial def; // irreducible, univariate in var, degree >= 2; unused for rationals
  Var var;
  mutable Rat lo, hi; // open isolating interval; lo == hi == value for rationals
  bool rational = false;
};

RealAlg::RealAlg(const Rat &q) : in_(std::make_shared<Inner>()) {
  in_->lo = q;
  in_->hi = q;
  in_->rational = true;
}

RealAlg::RealAlg(Polynomial def, Var v, Rat lo, Rat hi) : in_(std::make_shared<Inner>()) {
  in_->def = std::move(def);
  in_->var = v;
  in_->lo = std::move(lo);
  in_->hi = std::move(hi);
}

bool RealAlg::is_rational() const { return in_->rational; }
const Rat &RealAlg::rat() const {
  assert(is_rational());
  return in_->lo;
}
const Polynomial &RealAlg::defpoly() const {
  assert(!is_rational());
  return in_->def;
}
Var RealAlg::defvar() const { return in_->var; }
Rat RealAlg::lo() const { return in_->lo; }
Rat RealAlg::hi() const { return in_->hi; }

int RealAlg::sign() const {
  if (is_rational())
    return sgn(in_->lo);
  // The interval never straddles 0.
  if (sgn(in_->lo) >= 0)
    return 1;
  return -1;
}

// ------------------------------------------------------------- dense helpers

namespace {

using RVec = std::vector<Rat>; // ascending coefficients

RVec dense_of(const Polynomial &p, Var v) {
  auto cs = p.coeffs_in(v);
  RVec f(cs.size());
  for (size_t i = 0; i < cs.size(); ++i) {
    assert(cs[i].is_constant());
    f[i] = cs[i].constant_value();
  }
  return f;
}

Rat dense_eval(const RVec &f, const Rat &x) {
  Rat r(0);
  for (size_t i = f.size(); i-- > 0;)
    r = r * x + f[i];
  return r;
}

// f(x + t), in place
void shift_by(RVec &f, const Rat &t) {
  if (f.size() < 2)
    return;
  for (size_t i = 0; i + 1 < f.size(); ++i)
    for (size_t j = f.size() - 1; j-- > i;)
      f[j] += t * f[j + 1];
}

int variations(const RVec &f) {
  int n = 0, last = 0;
  for (auto &c : f) {
    int s = sgn(c);
    if (s == 0)
      continue;
    if (last != 0 && s != last)
      ++n;
    last = s;
  }
  return n;
}

// Number-of-roots bound for the open interval (a, b): 0 and 1 are exact.
int descartes_count(const RVec &f, const Rat &a, const Rat &b) {
  RVec u = f;
  shift_by(u, a); // f(x + a)
  Rat c = b - a;
  Rat pw(1);
  for (auto &x : u) {
    x *= pw;
    pw *= c;
  } // f(c x + a)
  std::reverse(u.begin(), u.end());
  shift_by(u, Rat(1));
  return variations(u);
}

void isolate_rec(const RVec &f, const Rat &a, const Rat &b,
                 std::vector<std::pair<Rat, Rat>> &out) {
  int n = descartes_count(f, a, b);
  if (n == 0)
    return;
  if (n == 1) {
    out.emplace_back(a, b);
    return;
  }
  Rat m = (a + b) / 2;
  // Irreducible inputs of degree >= 2 have no rational roots.
  assert(sgn(dense_eval(f, m)) != 0);
  isolate_rec(f, a, m, out);
  isolate_rec(f, m, b, out);
}

RVec uni_rem(RVec f, const RVec &g) {
  assert(g.size() >= 1 && sgn(g.back()) != 0);
  while (f.size() >= g.size()) {
    if (sgn(f.back()) == 0) {
      f.pop_back();
      continue;
    }
    Rat c = f.back() / g.back();
    size_t off = f.size() - g.size();
    for (size_t j = 0; j + 1 < g.size(); ++j)
      f[off + j] -= c * g[j];
    f.pop_back();
  }
  while (!f.empty() && sgn(f.back()) == 0)
    f.pop_back();
  return f;
}

} // namespace

Rat cauchy_bound(const Polynomial &p, Var v) {
  int n = p.degree(v);
  if (n < 1)
    throw std::invalid_argument("cauchy_bound: positive degree required");
  RVec f = dense_of(p, v);
  Rat m(0);
  for (size_t i = 0; i + 1 < f.size(); ++i) {
    Rat a = rat_abs(f[i]);
    if (a > m)
      m = a;
  }
  return Rat(1) + m / rat_abs(f.back());
}

// --------------------------------------------------------------- refinement

void RealAlg::refine_step() const {
  if (is_rational())
    return;
  RVec f = dense_of(in_->def, in_->var);
  Rat m = (in_->lo + in_->hi) / 2;
  int sm = sgn(dense_eval(f, m));
  assert(sm != 0); // irreducible of degree >= 2
  int slo = sgn(dense_eval(f, in_->lo));
  if (slo != sm)
    in_->hi = m;
  else
    in_->lo = m;
}

void RealAlg::refine_below(const Rat &width) const {
  while (in_->hi - in_->lo >= width)
    refine_step();
}

// --------------------------------------------------------------- isolation

std::vector<RealAlg> RealAlg::roots_of(const Polynomial &p, Var v) {
  if (p.is_zero())
    throw std::invalid_argument("roots_of: zero polynomial");
  std::vector<RealAlg> roots;
  if (p.degree(v) == 0)
    return roots;
  for (auto &f : irreducible_factors(p)) {
    if (f.degree(v) == 0)
      continue; // content factor
    if (f.degree(v) == 1) {
      Rat a = f.leading_coeff(v).constant_value();
      Rat b = f.trailing_coeff(v).constant_value();
      roots.push_back(RealAlg(Rat(-b / a)));
      continue;
    }
    RVec d = dense_of(f, v);
    Rat B = cauchy_bound(f, v);
    std::vector<std::pair<Rat, Rat>> ivs;
    isolate_rec(d, -B, Rat(0), ivs);
    isolate_rec(d, Rat(0), B, ivs);
    for (auto &[lo, hi] : ivs)
      roots.push_back(RealAlg(f, v, lo, hi));
  }
  std::sort(roots.begin(), roots.end(),
            [](const RealAlg &a, const RealAlg &b) { return compare(a, b) < 0; });
  return roots;
}

// ---------------------------------------------------------------- comparison

int RealAlg::compare_rat(const Rat &q) const {
  if (is_rational())
    return cmp(in_->lo, q);
  for (;;) {
    if (q <= in_->lo)
      return 1; // value > lo >= q... value in (lo,hi), q <= lo < value
    if (q >= in_->hi)
      return -1;
    // q strictly inside; q is not the value (irreducible def), so refine.
    refine_step();
  }
}

int RealAlg::compare(const RealAlg &a, const RealAlg &b) {
  if (a.in_ == b.in_)
    return 0;
  if (a.is_rational() && b.is_rational())
    return cmp(a.in_->lo, b.in_->lo);
  if (a.is_rational())
    return -b.compare_rat(a.in_->lo);
  if (b.is_rational())
    return a.compare_rat(b.in_->lo);
  bool same_def = false;
  if (a.in_->def.degree(a.in_->var) == b.in_->def.degree(b.in_->var)) {
    Polynomial bd = b.in_->var == a.in_->var ? b.in_->def : b.in_->def.rename(b.in_->var, a.in_->var);
    same_def = (a.in_->def == bd);
  }
  RVec fa = dense_of(a.in_->def, a.in_->var);
  for (;;) {
    if (a.in_->hi <= b.in_->lo)
      return -1;
    if (b.in_->hi <= a.in_->lo)
      return 1;
    if (same_def) {
      Rat ilo = std::max(a.in_->lo, b.in_->lo);
      Rat ihi = std::min(a.in_->hi, b.in_->hi);
      if (ilo < ihi) {
        int s1 = sgn(dense_eval(fa, ilo)), s2 = sgn(dense_eval(fa, ihi));
        assert(s1 != 0 && s2 != 0);
        if (s1 != s2)
          return 0; // the shared root lies in the overlap
      }
    }
    a.refine_step();
    b.refine_step();
  }
}

// ---------------------------------------------------------------- operations

namespace {

Var op_var_z() {
  static Var v = Var::named("#z");
  return v;
}
Var op_var_y() {
  static Var v = Var::named("#y");
  return v;
}

// Candidates must contain the true value exactly once; narrows by refining
// inputs until a single candidate interval still meets the target interval.
RealAlg identify_among(std::vector<RealAlg> cands, const std::vector<const RealAlg *> &ins,
                       const std::function<std::pair<Rat, Rat>()> &target) {
  for (;;) {
    auto [tlo, thi] = target();
    std::vector<size_t> live;
    for (size_t i = 0; i < cands.size(); ++i)
      if (cands[i].lo() <= thi && tlo <= cands[i].hi())
        live.push_back(i);
    if (live.size() == 1)
      return cands[live[0]];
    if (live.empty())
      throw InternalError("algebraic identification lost its target");
    for (auto *r : ins)
      r->refine_step();
    for (auto &c : cands)
      c.refine_step();
  }
}

std::pair<Rat, Rat> interval_add(const RealAlg &a, const RealAlg &b) {
  return {a.lo() + b.lo(), a.hi() + b.hi()};
}

std::pair<Rat, Rat> interval_mul(const RealAlg &a, const RealAlg &b) {
  Rat p1 = a.lo() * b.lo(), p2 = a.lo() * b.hi(), p3 = a.hi() * b.lo(), p4 = a.hi() * b.hi();
  Rat lo = std::min(std::min(p1, p2), std::min(p3, p4));
  Rat hi = std::max(std::max(p1, p2), std::max(p3, p4));
  return {lo, hi};
}

// def(x - c) for a shifted value, def(x / c) cleared for a scaled one.
Polynomial def_shift(const Polynomial &def, Var v, const Rat &c) {
  return def.substitute(v, Polynomial::variable(v) - Polynomial::constant(c)).normalized();
}

Polynomial def_scale(const Polynomial &def, Var v, const Rat &c) {
  assert(sgn(c) != 0);
  int n = def.degree(v);
  auto cs = def.coeffs_in(v);
  Polynomial r;
  for (int i = 0; i <= n; ++i)
    r = r + cs[static_cast<size_t>(i)] * Polynomial::constant(rat_pow(c, static_cast<unsigned long>(n - i))) *
            Polynomial::variable(v).pow(i);
  return r.normalized();
}

std::vector<RealAlg> roots_of_all_factors(const Polynomial &h, Var v) {
  // roots_of already factors and sorts
  return RealAlg::roots_of(h, v);
}

} // namespace

RealAlg RealAlg::neg() const {
  if (is_rational())
    return RealAlg(Rat(-in_->lo));
  Polynomial nd = in_->def.substitute(in_->var, -Polynomial::variable(in_->var)).normalized();
  return RealAlg(nd, in_->var, -in_->hi, -in_->lo);
}

RealAlg operator+(const RealAlg &a, const RealAlg &b) {
  if (a.is_rational() && b.is_rational())
    return RealAlg(Rat(a.rat() + b.rat()));
  if (a.is_rational() || b.is_rational()) {
    const RealAlg &alg = a.is_rational() ? b : a;
    const Rat &c = (a.is_rational() ? a : b).rat();
    if (sgn(c) == 0)
      return alg;
    Polynomial nd = def_shift(alg.defpoly(), alg.defvar(), c);
    RealAlg r(nd, alg.defvar(), alg.lo() + c, alg.hi() + c);
    // The shifted interval may straddle 0; the value itself is irrational,
    // so refinement restores the invariant.
    while (sgn(r.in_->lo) < 0 && sgn(r.in_->hi) > 0)
      r.refine_step();
    return r;
  }
  Var z = op_var_z(), y = op_var_y();
  Polynomial da = a.defpoly().rename(a.defvar(), z);
  Polynomial db = b.defpoly().rename(b.defvar(), y);
  Polynomial h = resultant(da.substitute(z, Polynomial::variable(z) - Polynomial::variable(y)),
                           db, y);
  auto cands = roots_of_all_factors(h, z);
  return identify_among(cands, {&a, &b}, [&] { return interval_add(a, b); });
}

RealAlg operator-(const RealAlg &a, const RealAlg &b) { return a + b.neg(); }

RealAlg operator*(const RealAlg &a, const RealAlg &b) {
  if (a.is_rational() && b.is_rational())
    return RealAlg(Rat(a.rat() * b.rat()));
  if (a.is_rational() || b.is_rational()) {
    const RealAlg &alg = a.is_rational() ? b : a;
    const Rat &c = (a.is_rational() ? a : b).rat();
    if (sgn(c) == 0)
      return RealAlg(Rat(0));
    Polynomial nd = def_scale(alg.defpoly(), alg.defvar(), c);
    Rat l = alg.lo() * c, h = alg.hi() * c;
    if (sgn(c) < 0)
      std::swap(l, h);
    return RealAlg(nd, alg.defvar(), l, h);
  }
  Var z = op_var_z(), y = op_var_y();
  Polynomial da = a.defpoly().rename(a.defvar(), z);
  Polynomial db = b.defpoly().rename(b.defvar(), y);
  // y^m * da(z/y): roots pair up as products of roots.
  int m = da.degree(z);
  auto cs = da.coeffs_in(z);
  Polynomial hom;
  for (int i = 0; i <= m; ++i)
    hom = hom + cs[static_cast<size_t>(i)] * Polynomial::variable(z).pow(i) *
              Polynomial::variable(y).pow(m - i);
  Polynomial h = resultant(hom, db, y);
  auto cands = roots_of_all_factors(h, z);
  return identify_among(cands, {&a, &b}, [&] { return interval_mul(a, b); });
}

RealAlg operator/(const RealAlg &a, const RealAlg &b) {
  if (b.is_rational()) {
    if (sgn(b.rat()) == 0)
      throw std::invalid_argument("division by zero");
    return a * RealAlg(Rat(1 / b.rat()));
  }
  // 1/b: reverse coefficients (b != 0, and def(0) != 0 for irreducible defs).
  while (sgn(b.lo()) == 0 || sgn(b.hi()) == 0)
    b.refine_step();
  Var v = b.defvar();
  auto cs = b.defpoly().coeffs_in(v);
  std::reverse(cs.begin(), cs.end());
  Polynomial inv_def = Polynomial::from_coeffs(v, cs).normalized();
  Rat l = Rat(1) / b.hi(), h = Rat(1) / b.lo();
  if (l > h)
    std::swap(l, h);
  RealAlg ib(inv_def, v, l, h);
  return a * ib;
}

namespace {
// Candidates live on the sqrt scale, so match candidate squares to a's interval.
RealAlg sqrt_identify(const RealAlg &a, std::vector<RealAlg> cands) {
  for (;;) {
    std::vector<size_t> live;
    for (size_t i = 0; i < cands.size(); ++i) {
      Rat sl = cands[i].lo(), sh = cands[i].hi();
      if (sgn(sl) < 0)
        sl = Rat(0); // candidates are nonnegative values
      Rat ql = sl * sl, qh = sh * sh;
      if (ql <= a.hi() && a.lo() <= qh)
        live.push_back(i);
    }
    if (live.size() == 1)
      return cands[live[0]];
    if (live.empty())
      throw InternalError("sqrt identification lost its target");
    a.refine_step();
    for (auto &c : cands)
      c.refine_step();
  }
}
} // namespace

RealAlg RealAlg::sqrt_of(const RealAlg &a) {
  if (a.sign() < 0)
    throw std::invalid_argument("sqrt of a negative number");
  if (a.is_rational()) {
    // exact if numerator and denominator are perfect squares
    Int n = num(a.rat()), d = den(a.rat());
    if (mpz_perfect_square_p(n.get_mpz_t()) && mpz_perfect_square_p(d.get_mpz_t())) {
      Int rn, rd;
      mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
      mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
      return RealAlg(Rat(rn, rd));
    }
    Var z = op_var_z();
    Polynomial def = Polynomial::constant(Rat(d)) * Polynomial::variable(z).pow(2) -
                     Polynomial::constant(Rat(n));
    for (auto &r : roots_of(def, z))
      if (r.sign() > 0)
        return r;
    throw InternalError("sqrt: positive root missing");
  }
  Var z = op_var_z();
  Polynomial h = a.defpoly().rename(a.defvar(), z).substitute(z, Polynomial::variable(z).pow(2));
  std::vector<RealAlg> cands;
  for (auto &r : roots_of_all_factors(h, z))
    if (r.sign() >= 0)
      cands.push_back(r);
  return sqrt_identify(a, std::move(cands));
}

// ------------------------------------------------------------------ sign_at

namespace {

// Sound outward interval for p over the point box; exact for rational coords.
std::pair<Rat, Rat> box_eval(const Polynomial &p, const std::map<Var, RealAlg> &point) {
  Rat lo(0), hi(0);
  for (auto &[m, c] : p.terms()) {
    Rat tlo(1), thi(1);
    for (auto &[v, e] : m.exps()) {
      const RealAlg &al = point.at(v);
      Rat xl = al.lo(), xh = al.hi();
      // Intervals never straddle 0, so endpoint powers bound the power range.
      Rat pl = rat_pow(xl, static_cast<unsigned long>(e));
      Rat ph = rat_pow(xh, static_cast<unsigned long>(e));
      if (pl > ph)
        std::swap(pl, ph);
      // interval product (tlo,thi) * (pl,ph)
      Rat q1 = tlo * pl, q2 = tlo * ph, q3 = thi * pl, q4 = thi * ph;
      tlo = std::min(std::min(q1, q2), std::min(q3, q4));
      thi = std::max(std::max(q1, q2), std::max(q3, q4));
    }
    if (sgn(c) >= 0) {
      lo += c * tlo;
      hi += c * thi;
    } else {
      lo += c * thi;
      hi += c * tlo;
    }
  }
  return {lo, hi};
}

} // namespace

int sign_at(const Polynomial &p, const std::map<Var, RealAlg> &point) {
  std::map<Var, Rat> rats;
  for (Var v : p.variables()) {
    auto it = point.find(v);
    if (it == point.end())
      throw std::invalid_argument("sign_at: unassigned variable " + v.name());
    if (it->second.is_rational())
      rats.emplace(v, it->second.rat());
  }
  Polynomial q = p.eval(rats);
  if (q.is_constant())
    return sgn(q.constant_value());
  std::vector<Var> algs = q.variables();
  if (algs.size() == 1) {
    // One algebraic coordinate: reduce mod the minimal polynomial. A nonzero
    // remainder of smaller degree cannot vanish at the root, so its sign is
    // decidable by refinement.
    Var v = algs[0];
    const RealAlg &al = point.at(v);
    RVec def = dense_of(al.defpoly().rename(al.defvar(), v), v);
    RVec r = uni_rem(dense_of(q, v), def);
    if (r.empty())
      return 0;
    Polynomial rp;
    for (size_t i = 0; i < r.size(); ++i)
      rp = rp + Polynomial::term(r[i], Monomial::var(v, static_cast<int>(i)));
    for (;;) {
      auto [lo, hi] = box_eval(rp, point);
      if (sgn(lo) > 0)
        return 1;
      if (sgn(hi) < 0)
        return -1;
      al.refine_step();
    }
  }
  // Several algebraic coordinates: interval refinement first, exact fallback.
  for (int round = 0; round < 10; ++round) {
    auto [lo, hi] = box_eval(q, point);
    if (sgn(lo) > 0)
      return 1;
    if (sgn(hi) < 0)
      return -1;
    for (Var v : algs)
      point.at(v).refine_step();
  }
  return eval_at(q, point).sign();
}

RealAlg eval_at(const Polynomial &p, const std::map<Var, RealAlg> &point) {
  if (p.is_constant())
    return RealAlg(p.constant_value());
  Var v = p.variables().back();
  auto it = point.find(v);
  if (it == point.end())
    throw std::invalid_argument("eval_at: unassigned variable " + v.name());
  auto cs = p.coeffs_in(v);
  RealAlg acc = eval_at(cs.back(), point);
  for (size_t i = cs.size() - 1; i-- > 0;)
    acc = acc * it->second + eval_at(cs[i], point);
  return acc;
}

// ------------------------------------------------------------------- output

double RealAlg::approx() const {
  if (is_rational())
    return in_->lo.get_d();
  refine_below(Rat(1, Int(1) << 48));
  Rat mid = (in_->lo + in_->hi) / 2;
  return mid.get_d();
}

std::string RealAlg::to_string() const {
  if (is_rational())
    return rat_to_string(in_->lo);
  std::ostringstream os;
  os.precision(12);
  os << approx() << "~";
  return os.str();
}

std::string RealAlg::to_sexpr() const {
  if (is_rational())
    return rat_to_string(in_->lo);
  return "(alg " + in_->def.to_sexpr() + " " + rat_to_string(in_->lo) + " " +
         rat_to_string(in_->hi) + ")";
}

Rat rat_strictly_between(const RealAlg &a, const RealAlg &b) {
  assert(RealAlg::compare(a, b) < 0);
  for (;;) {
    // upper bound of a is strict when a is irrational (open interval)
    Rat lo = a.is_rational() ? a.rat() : a.hi();
    Rat hi = b.is_rational() ? b.rat() : b.lo();
    if (lo < hi)
      return simplest_in((3 * lo + hi) / 4, (lo + 3 * hi) / 4);
    a.refine_step();
    b.refine_step();
  }
}

} // namespace qelim
