#include "factor.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <mutex>
#include <random>
#include <stdexcept>

namespace qelim {

namespace {

// ----------------------------------------------------- dense integer helpers

using IVec = std::vector<Int>; // coefficients ascending, trailing zeros trimmed

void itrim(IVec &f) {
  while (!f.empty() && sgn(f.back()) == 0)
    f.pop_back();
}

int ideg(const IVec &f) { return static_cast<int>(f.size()) - 1; }

IVec from_poly(const Polynomial &p, Var v) {
  auto cs = p.coeffs_in(v);
  IVec f(cs.size());
  for (size_t i = 0; i < cs.size(); ++i) {
    assert(cs[i].is_constant());
    Rat c = cs[i].constant_value();
    assert(den(c) == 1);
    f[i] = num(c);
  }
  itrim(f);
  return f;
}

Polynomial to_poly(const IVec &f, Var v) {
  Polynomial p;
  for (size_t i = 0; i < f.size(); ++i)
    p = p + Polynomial::term(Rat(f[i]), Monomial::var(v, static_cast<int>(i)));
  return p;
}

// Exact division over Q; empty optional when not divisible.
std::optional<IVec> idiv_exact(const IVec &f, const IVec &g) {
  if (g.empty())
    return std::nullopt;
  std::vector<Rat> r(f.begin(), f.end());
  int df = ideg(f), dg = ideg(g);
  if (df < dg)
    return f.empty() ? std::optional<IVec>(IVec{}) : std::nullopt;
  std::vector<Rat> q(static_cast<size_t>(df - dg) + 1);
  Rat lg(g.back());
  for (int k = df; k >= dg; --k) {
    Rat c = r[static_cast<size_t>(k)] / lg;
    q[static_cast<size_t>(k - dg)] = c;
    if (sgn(c) != 0)
      for (int j = 0; j <= dg; ++j)
        r[static_cast<size_t>(k - dg + j)] -= c * Rat(g[static_cast<size_t>(j)]);
  }
  for (auto &c : r)
    if (sgn(c) != 0)
      return std::nullopt;
  IVec iq(q.size());
  for (size_t i = 0; i < q.size(); ++i) {
    if (den(q[i]) != 1)
      return std::nullopt;
    iq[i] = num(q[i]);
  }
  itrim(iq);
  return iq;
}

IVec iprimitive(IVec f) {
  Int g(0);
  for (auto &c : f)
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  if (sgn(g) == 0)
    return f;
  if (sgn(f.back()) < 0)
    g = -g;
  for (auto &c : f)
    c /= g;
  return f;
}

// --------------------------------------------------------- arithmetic mod p

using u64 = uint64_t;
using ZpPoly = std::vector<u64>; // coefficients in [0, p), ascending, trimmed

struct Zp {
  u64 p;
  u64 add(u64 a, u64 b) const { return (a + b) % p; }
  u64 sub(u64 a, u64 b) const { return (a + p - b) % p; }
  u64 mul(u64 a, u64 b) const { return static_cast<u64>((__uint128_t)a * b % p); }
  u64 pow(u64 a, u64 e) const {
    u64 r = 1;
    while (e) {
      if (e & 1)
        r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  u64 inv(u64 a) const { return pow(a % p, p - 2); }
};

void ztrim(ZpPoly &f) {
  while (!f.empty() && f.back() == 0)
    f.pop_back();
}

int zdeg(const ZpPoly &f) { return static_cast<int>(f.size()) - 1; }

ZpPoly zmul(const Zp &F, const ZpPoly &a, const ZpPoly &b) {
  if (a.empty() || b.empty())
    return {};
  ZpPoly r(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0)
      continue;
    for (size_t j = 0; j < b.size(); ++j)
      r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
  }
  ztrim(r);
  return r;
}

ZpPoly zsub(const Zp &F, ZpPoly a, const ZpPoly &b) {
  if (a.size() < b.size())
    a.resize(b.size(), 0);
  for (size_t i = 0; i < b.size(); ++i)
    a[i] = F.sub(a[i], b[i]);
  ztrim(a);
  return a;
}

ZpPoly zmonic(const Zp &F, ZpPoly f) {
  ztrim(f);
  if (f.empty() || f.back() == 1)
    return f;
  u64 c = F.inv(f.back());
  for (auto &x : f)
    x = F.mul(x, c);
  return f;
}

ZpPoly zrem(const Zp &F, ZpPoly a, const ZpPoly &b) {
  assert(!b.empty());
  u64 ilc = F.inv(b.back());
  while (zdeg(a) >= zdeg(b)) {
    u64 c = F.mul(a.back(), ilc);
    size_t off = a.size() - b.size();
    for (size_t j = 0; j < b.size(); ++j)
      a[off + j] = F.sub(a[off + j], F.mul(c, b[j]));
    ztrim(a);
  }
  return a;
}

ZpPoly zgcd(const Zp &F, ZpPoly a, ZpPoly b) {
  ztrim(a);
  ztrim(b);
  while (!b.empty()) {
    a = zrem(F, a, b);
    std::swap(a, b);
  }
  return zmonic(F, a);
}

ZpPoly zpowmod(const Zp &F, ZpPoly base, const Int &e, const ZpPoly &mod) {
  ZpPoly r{1};
  base = zrem(F, std::move(base), mod);
  size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (size_t i = bits; i-- > 0;) {
    r = zrem(F, zmul(F, r, r), mod);
    if (mpz_tstbit(e.get_mpz_t(), i))
      r = zrem(F, zmul(F, r, base), mod);
  }
  return r;
}

ZpPoly zdiv_fwd(const Zp &F, ZpPoly a, const ZpPoly &b);

// Cantor-Zassenhaus split of a product of irreducibles all of degree d.
void equal_degree(const Zp &F, const ZpPoly &f, int d, std::mt19937_64 &rng,
                  std::vector<ZpPoly> &out) {
  if (zdeg(f) == d) {
    out.push_back(f);
    return;
  }
  Int e = (int_pow(Int(static_cast<unsigned long>(F.p)), static_cast<unsigned long>(d)) - 1) / 2;
  for (;;) {
    ZpPoly r(static_cast<size_t>(zdeg(f)), 0);
    for (auto &c : r)
      c = rng() % F.p;
    r.push_back(1); // keep it nonconstant
    ZpPoly s = zpowmod(F, r, e, f);
    if (s.empty())
      continue;
    s[0] = F.sub(s[0], 1);
    ZpPoly g = zgcd(F, s, f);
    if (zdeg(g) > 0 && zdeg(g) < zdeg(f)) {
      equal_degree(F, g, d, rng, out);
      equal_degree(F, zdiv_fwd(F, f, g), d, rng, out);
      return;
    }
  }
}

ZpPoly zdiv(const Zp &F, ZpPoly a, const ZpPoly &b) {
  // quotient of exact division
  assert(!b.empty());
  u64 ilc = F.inv(b.back());
  ZpPoly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, 0);
  while (zdeg(a) >= zdeg(b)) {
    u64 c = F.mul(a.back(), ilc);
    size_t off = a.size() - b.size();
    q[off] = c;
    for (size_t j = 0; j < b.size(); ++j)
      a[off + j] = F.sub(a[off + j], F.mul(c, b[j]));
    ztrim(a);
  }
  assert(a.empty());
  ztrim(q);
  return q;
}

ZpPoly zdiv_fwd(const Zp &F, ZpPoly a, const ZpPoly &b) { return zdiv(F, std::move(a), b); }

std::vector<ZpPoly> factor_modp(const Zp &F, ZpPoly f) {
  // f monic squarefree mod p
  std::vector<ZpPoly> out;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull); // fixed seed, engine stays deterministic
  ZpPoly x{0, 1};
  ZpPoly h = x;
  int d = 0;
  while (zdeg(f) > 0) {
    ++d;
    if (2 * d > zdeg(f)) {
      out.push_back(f);
      break;
    }
    h = zpowmod(F, h, Int(static_cast<unsigned long>(F.p)), f);
    ZpPoly g = zgcd(F, zsub(F, h, x), f);
    if (zdeg(g) > 0) {
      equal_degree(F, g, d, rng, out);
      f = zdiv(F, f, g);
      h = zrem(F, h, f);
    }
  }
  return out;
}

// --------------------------------------------------- arithmetic mod p^k (Z)

IVec mvec(const IVec &f, const Int &m) {
  IVec r = f;
  for (auto &c : r)
    mpz_mod(c.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
  itrim(r);
  return r;
}

IVec msub(IVec a, const IVec &b, const Int &m) {
  if (a.size() < b.size())
    a.resize(b.size(), Int(0));
  for (size_t i = 0; i < b.size(); ++i) {
    a[i] -= b[i];
    mpz_mod(a[i].get_mpz_t(), a[i].get_mpz_t(), m.get_mpz_t());
  }
  itrim(a);
  return a;
}

IVec madd(IVec a, const IVec &b, const Int &m) {
  if (a.size() < b.size())
    a.resize(b.size(), Int(0));
  for (size_t i = 0; i < b.size(); ++i) {
    a[i] += b[i];
    mpz_mod(a[i].get_mpz_t(), a[i].get_mpz_t(), m.get_mpz_t());
  }
  itrim(a);
  return a;
}

IVec mmul(const IVec &a, const IVec &b, const Int &m) {
  if (a.empty() || b.empty())
    return {};
  IVec r(a.size() + b.size() - 1, Int(0));
  for (size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) == 0)
      continue;
    for (size_t j = 0; j < b.size(); ++j)
      r[i + j] += a[i] * b[j];
  }
  return mvec(r, m);
}

// divrem by monic g
std::pair<IVec, IVec> mdivrem(IVec a, const IVec &g, const Int &m) {
  assert(!g.empty() && g.back() == 1);
  IVec q(a.size() >= g.size() ? a.size() - g.size() + 1 : 0, Int(0));
  while (ideg(a) >= ideg(g)) {
    Int c = a.back();
    size_t off = a.size() - g.size();
    q[off] = c;
    for (size_t j = 0; j < g.size(); ++j) {
      a[off + j] -= c * g[j];
      mpz_mod(a[off + j].get_mpz_t(), a[off + j].get_mpz_t(), m.get_mpz_t());
    }
    itrim(a);
  }
  itrim(q);
  return {q, a};
}

IVec symmetric(IVec f, const Int &m) {
  Int half = m / 2;
  for (auto &c : f) {
    mpz_mod(c.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
    if (c > half)
      c -= m;
  }
  itrim(f);
  return f;
}

// One quadratic Hensel step: f = g*h (mod m), s*g + t*h = 1 (mod m), h monic.
// Lifts everything to mod m^2; h stays monic.
void hensel_step(const IVec &f, IVec &g, IVec &h, IVec &s, IVec &t, const Int &m) {
  Int m2 = m * m;
  IVec e = msub(mvec(f, m2), mmul(g, h, m2), m2);
  auto [q, r] = mdivrem(mmul(s, e, m2), h, m2);
  IVec g1 = madd(madd(g, mmul(t, e, m2), m2), mmul(q, g, m2), m2);
  IVec h1 = madd(h, r, m2);
  IVec b = msub(madd(mmul(s, g1, m2), mmul(t, h1, m2), m2), IVec{Int(1)}, m2);
  auto [c, d] = mdivrem(mmul(s, b, m2), h1, m2);
  IVec s1 = msub(s, d, m2);
  IVec t1 = msub(msub(t, mmul(t, b, m2), m2), mmul(c, g1, m2), m2);
  g = g1;
  h = h1;
  s = s1;
  t = t1;
}

// Extended Euclid mod p for s*a + t*b = 1.
void zp_bezout(const Zp &F, const ZpPoly &a, const ZpPoly &b, ZpPoly &s, ZpPoly &t) {
  ZpPoly r0 = a, r1 = b, s0{1}, s1{}, t0{}, t1{1};
  while (!r1.empty()) {
    // r0 = q*r1 + r2
    ZpPoly q = zdiv(F, zsub(F, r0, zrem(F, r0, r1)), r1);
    ZpPoly r2 = zrem(F, r0, r1);
    ZpPoly s2 = zsub(F, s0, zmul(F, q, s1));
    ZpPoly t2 = zsub(F, t0, zmul(F, q, t1));
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
    t0 = t1;
    t1 = t2;
  }
  assert(zdeg(r0) == 0 && !r0.empty());
  u64 c = F.inv(r0[0]);
  for (auto &x : s0)
    x = F.mul(x, c);
  for (auto &x : t0)
    x = F.mul(x, c);
  s = s0;
  t = t0;
}

IVec lift_ivec(const ZpPoly &f) {
  IVec r(f.size());
  for (size_t i = 0; i < f.size(); ++i)
    r[i] = Int(static_cast<unsigned long>(f[i]));
  return r;
}

ZpPoly to_zp(const IVec &f, const Zp &F) {
  ZpPoly r(f.size());
  Int p(static_cast<unsigned long>(F.p));
  for (size_t i = 0; i < f.size(); ++i) {
    Int c;
    mpz_mod(c.get_mpz_t(), f[i].get_mpz_t(), p.get_mpz_t());
    r[i] = c.get_ui();
  }
  ztrim(r);
  return r;
}

// Lift the monic factorization f = prod(parts) from mod p to mod target.
// Binary splitting; returns the lifted monic factors.
std::vector<IVec> hensel_lift_all(const IVec &f, const std::vector<ZpPoly> &parts, const Zp &F,
                                  const Int &target) {
  if (parts.size() == 1)
    return {mvec(f, target)};
  size_t half = parts.size() / 2;
  ZpPoly g0{1}, h0{1};
  for (size_t i = 0; i < half; ++i)
    g0 = zmul(F, g0, parts[i]);
  for (size_t i = half; i < parts.size(); ++i)
    h0 = zmul(F, h0, parts[i]);
  ZpPoly s0, t0;
  zp_bezout(F, g0, h0, s0, t0);
  IVec g = lift_ivec(g0), h = lift_ivec(h0), s = lift_ivec(s0), t = lift_ivec(t0);
  Int m(static_cast<unsigned long>(F.p));
  while (m < target) {
    hensel_step(f, g, h, s, t, m);
    m = m * m;
  }
  g = mvec(g, target);
  h = mvec(h, target);
  std::vector<IVec> left = hensel_lift_all(
      g, std::vector<ZpPoly>(parts.begin(), parts.begin() + static_cast<long>(half)), F, target);
  std::vector<IVec> right = hensel_lift_all(
      h, std::vector<ZpPoly>(parts.begin() + static_cast<long>(half), parts.end()), F, target);
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

bool is_prime_u64(u64 n) {
  if (n < 2)
    return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

// ------------------------------------------------------ univariate Zassenhaus

// f primitive squarefree over Z, deg >= 1. Returns primitive irreducible factors.
std::vector<IVec> zassenhaus(IVec f) {
  std::vector<IVec> out;
  if (ideg(f) == 1) {
    out.push_back(f);
    return out;
  }
  int n = ideg(f);
  Int l = f.back();
  // Monicize: f1(x) = l^(n-1) f(x/l), coefficient i scaled by l^(n-1-i).
  IVec f1(f.size());
  for (int i = 0; i < n; ++i)
    f1[static_cast<size_t>(i)] =
        f[static_cast<size_t>(i)] * int_pow(l, static_cast<unsigned long>(n - 1 - i));
  f1[static_cast<size_t>(n)] = 1;
  // pick a prime keeping f1 squarefree
  Zp F{0};
  ZpPoly fp;
  for (u64 p = 3;; p += 2) {
    if (!is_prime_u64(p))
      continue;
    F.p = p;
    fp = to_zp(f1, F);
    if (zdeg(fp) != ideg(f1))
      continue; // lc vanished (possible after iprimitive)
    ZpPoly d(fp.size() - 1);
    for (size_t i = 1; i < fp.size(); ++i)
      d[i - 1] = F.mul(fp[i], i % F.p);
    ztrim(d);
    ZpPoly g = zgcd(F, fp, d);
    if (zdeg(g) == 0)
      break;
  }
  std::vector<ZpPoly> parts = factor_modp(F, zmonic(F, fp));
  if (parts.size() == 1) {
    out.push_back(f);
    return out;
  }
  std::sort(parts.begin(), parts.end());
  // Mignotte bound for factors of f1.
  int n1 = ideg(f1);
  Int H(0);
  for (auto &c : f1) {
    Int a = abs(c);
    if (a > H)
      H = a;
  }
  Int M = (int_pow(Int(2), static_cast<unsigned long>(n1 + 1))) * Int(n1 + 1) * H;
  Int target(static_cast<unsigned long>(F.p));
  while (target < 2 * M + 1)
    target = target * target;
  std::vector<IVec> lifted = hensel_lift_all(mvec(f1, target), parts, F, target);

  // Recombination: subsets by size; candidates tested by exact division of f1.
  Int lc1 = f1.back();
  assert(lc1 == 1);
  IVec fcur = f1;
  std::vector<IVec> pool = lifted;
  std::vector<IVec> found1; // factors of the monicized polynomial
  size_t size = 1;
  while (!pool.empty() && size <= pool.size() / 2) {
    bool hit = false;
    std::vector<size_t> idx(size);
    for (size_t i = 0; i < size; ++i)
      idx[i] = i;
    for (;;) {
      IVec cand{Int(1)};
      for (size_t i : idx)
        cand = mmul(cand, pool[i], target);
      cand = symmetric(cand, target);
      auto q = idiv_exact(fcur, cand);
      if (q) {
        found1.push_back(cand);
        fcur = *q;
        std::vector<IVec> np;
        for (size_t i = 0, j = 0; i < pool.size(); ++i) {
          if (j < idx.size() && idx[j] == i) {
            ++j;
            continue;
          }
          np.push_back(pool[i]);
        }
        pool = np;
        hit = true;
        break;
      }
      // next combination
      size_t k = size;
      while (k > 0 && idx[k - 1] == pool.size() - size + (k - 1))
        --k;
      if (k == 0)
        break;
      ++idx[k - 1];
      for (size_t i = k; i < size; ++i)
        idx[i] = idx[i - 1] + 1;
    }
    if (!hit)
      ++size;
  }
  if (ideg(fcur) > 0)
    found1.push_back(fcur);
  // Map factors of f1(x) = l^(n-1) f(x/l) back: g(x) -> primitive(g(l x)).
  for (auto &g1 : found1) {
    IVec g(g1.size());
    Int pw(1);
    for (size_t i = 0; i < g1.size(); ++i) {
      g[i] = g1[i] * pw;
      pw *= l;
    }
    out.push_back(iprimitive(g));
  }
  return out;
}

} // namespace

// --------------------------------------------------------------- squarefree

std::vector<std::pair<Polynomial, int>> squarefree_decompose(const Polynomial &p0) {
  if (p0.is_zero())
    throw std::invalid_argument("squarefree_decompose: zero polynomial");
  std::vector<std::pair<Polynomial, int>> out;
  Polynomial p = p0.normalized();
  if (p.is_constant())
    return out;
  Var v = p.variables().back();
  Polynomial cont = Polynomial::constant(1);
  if (p.variables().size() > 1) {
    auto cs = p.coeffs_in(v);
    Polynomial g;
    for (auto &c : cs)
      if (!c.is_zero())
        g = poly_gcd(g, c);
    cont = g;
    p = *p.divide_exact(cont);
  }
  // Musser on the primitive part w.r.t. v.
  Polynomial g = poly_gcd(p, p.derivative(v));
  Polynomial prev = p.divide_exact(g)->normalized();
  Polynomial rem = g;
  int i = 1;
  while (!prev.is_constant()) {
    Polynomial next = poly_gcd(prev, rem);
    Polynomial part = prev.divide_exact(next)->normalized();
    if (!part.is_constant())
      out.emplace_back(part, i);
    rem = rem.divide_exact(next)->normalized();
    prev = next;
    ++i;
  }
  if (!cont.is_constant())
    for (auto &[f, m] : squarefree_decompose(cont))
      out.emplace_back(f, m);
  return out;
}

Polynomial squarefree_part(const Polynomial &p) {
  Polynomial r = Polynomial::constant(1);
  for (auto &[f, m] : squarefree_decompose(p))
    r = r * f;
  return r.normalized();
}

// ------------------------------------------------------------- factorization

namespace {

std::vector<Polynomial> factor_sf_primitive(const Polynomial &p);

// Kronecker: pack the highest variable into the lowest and recurse.
std::vector<Polynomial> factor_kronecker(const Polynomial &p) {
  auto vars = p.variables();
  Var vm = vars.front(), vp = vars.back();
  int D = p.degree(vm) + 1;
  Polynomial packed = p.substitute(vp, Polynomial::variable(vm).pow(D));
  Factorization inner = factor(packed);
  std::vector<Polynomial> flat;
  for (auto &[f, m] : inner.factors)
    for (int i = 0; i < m; ++i)
      flat.push_back(f);
  std::sort(flat.begin(), flat.end());

  auto unpack = [&](const Polynomial &c) -> Polynomial {
    Polynomial g;
    for (auto &[mono, coef] : c.terms()) {
      int e = mono.degree(vm);
      Monomial rest;
      for (auto &[w, k] : mono.exps())
        if (w != vm)
          rest = rest.times(Monomial::var(w, k));
      Monomial m2 = rest.times(Monomial::var(vm, e % D)).times(Monomial::var(vp, e / D));
      g = g + Polynomial::term(coef, m2);
    }
    return g;
  };

  std::vector<Polynomial> out;
  Polynomial rest = p;
  size_t size = 1;
  while (!flat.empty() && size <= flat.size() / 2) {
    bool hit = false;
    std::vector<size_t> idx(size);
    for (size_t i = 0; i < size; ++i)
      idx[i] = i;
    for (;;) {
      Polynomial cand = Polynomial::constant(1);
      for (size_t i : idx)
        cand = cand * flat[i];
      Polynomial g = unpack(cand.normalized()).normalized();
      auto q = rest.divide_exact(g);
      if (q && !g.is_constant()) {
        out.push_back(g);
        rest = q->normalized();
        std::vector<Polynomial> nf;
        for (size_t i = 0, j = 0; i < flat.size(); ++i) {
          if (j < idx.size() && idx[j] == i) {
            ++j;
            continue;
          }
          nf.push_back(flat[i]);
        }
        flat = nf;
        hit = true;
        break;
      }
      size_t k = size;
      while (k > 0 && idx[k - 1] == flat.size() - size + (k - 1))
        --k;
      if (k == 0)
        break;
      ++idx[k - 1];
      for (size_t i = k; i < size; ++i)
        idx[i] = idx[i - 1] + 1;
    }
    if (!hit)
      ++size;
  }
  if (!rest.is_constant())
    out.push_back(rest.normalized());
  return out;
}

// p primitive, squarefree, normalized, at least one variable.
std::vector<Polynomial> factor_sf_primitive(const Polynomial &p) {
  auto vars = p.variables();
  if (p.total_degree() == 1)
    return {p};
  if (vars.size() == 1) {
    Var v = vars[0];
    std::vector<Polynomial> out;
    for (auto &f : zassenhaus(from_poly(p, v)))
      out.push_back(to_poly(f, v).normalized());
    std::sort(out.begin(), out.end());
    return out;
  }
  auto out = factor_kronecker(p);
  std::sort(out.begin(), out.end());
  return out;
}

struct FactorCache {
  std::map<Polynomial, Factorization> memo;
  std::mutex mu;
};
FactorCache &fcache() {
  static FactorCache c;
  return c;
}

} // namespace

Factorization factor(const Polynomial &p) {
  if (p.is_zero())
    throw std::invalid_argument("factor: zero polynomial");
  {
    auto &c = fcache();
    std::lock_guard<std::mutex> lk(c.mu);
    auto it = c.memo.find(p);
    if (it != c.memo.end())
      return it->second;
  }
  Factorization out;
  auto [norm, unit] = p.normalize();
  out.unit = unit;
  if (!norm.is_constant()) {
    std::map<Polynomial, int> acc;
    for (auto &[part, mult] : squarefree_decompose(norm))
      for (auto &f : factor_sf_primitive(part))
        acc[f] += mult;
    for (auto &[f, m] : acc)
      out.factors.emplace_back(f, m);
    // Invariant check: the factorization multiplies back to the input.
    Polynomial prod = Polynomial::constant(1);
    for (auto &[f, m] : out.factors)
      prod = prod * f.pow(m);
    auto q = norm.divide_exact(prod);
    assert(q && q->is_constant());
    out.unit = out.unit * q->constant_value();
  } else {
    out.unit = out.unit * norm.constant_value();
  }
  auto &c = fcache();
  std::lock_guard<std::mutex> lk(c.mu);
  c.memo.emplace(p, out);
  return out;
}

std::vector<Polynomial> irreducible_factors(const Polynomial &p) {
  std::vector<Polynomial> out;
  if (p.is_zero())
    return out;
  for (auto &[f, m] : factor(p).factors)
    if (!f.is_constant())
      out.push_back(f);
  return out;
}

} // namespace qelim
