#include "poly.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace qelim {

// ---------------------------------------------------------------- variables

namespace {
struct VarPool {
  std::deque<std::string> names;
  std::map<std::string, int32_t> index;
  std::mutex mu;
};
VarPool &pool() {
  static VarPool p;
  return p;
}
} // namespace

Var Var::named(const std::string &name) {
  auto &p = pool();
  std::lock_guard<std::mutex> lk(p.mu);
  auto it = p.index.find(name);
  if (it != p.index.end())
    return Var(it->second);
  int32_t id = static_cast<int32_t>(p.names.size());
  p.names.push_back(name);
  p.index.emplace(name, id);
  return Var(id);
}

Var Var::fresh(const std::string &hint) {
  auto &p = pool();
  std::lock_guard<std::mutex> lk(p.mu);
  std::string cand = hint;
  for (int i = 1; p.index.count(cand); ++i)
    cand = hint + "!" + std::to_string(i);
  int32_t id = static_cast<int32_t>(p.names.size());
  p.names.push_back(cand);
  p.index.emplace(cand, id);
  return Var(id);
}

const std::string &Var::name() const {
  auto &p = pool();
  std::lock_guard<std::mutex> lk(p.mu);
  return p.names.at(static_cast<size_t>(id_));
}

// ---------------------------------------------------------------- monomials

Monomial Monomial::var(Var v, int e) {
  Monomial m;
  if (e > 0)
    m.exps_.emplace_back(v, e);
  return m;
}

int Monomial::degree(Var v) const {
  for (auto &[w, e] : exps_)
    if (w == v)
      return e;
  return 0;
}

int Monomial::total_degree() const {
  int d = 0;
  for (auto &[w, e] : exps_)
    d += e;
  return d;
}

Monomial Monomial::times(const Monomial &o) const {
  Monomial r;
  r.exps_.reserve(exps_.size() + o.exps_.size());
  size_t i = 0, j = 0;
  while (i < exps_.size() && j < o.exps_.size()) {
    if (exps_[i].first < o.exps_[j].first)
      r.exps_.push_back(exps_[i++]);
    else if (o.exps_[j].first < exps_[i].first)
      r.exps_.push_back(o.exps_[j++]);
    else {
      r.exps_.emplace_back(exps_[i].first, exps_[i].second + o.exps_[j].second);
      ++i, ++j;
    }
  }
  for (; i < exps_.size(); ++i)
    r.exps_.push_back(exps_[i]);
  for (; j < o.exps_.size(); ++j)
    r.exps_.push_back(o.exps_[j]);
  return r;
}

bool Monomial::divides(const Monomial &o) const {
  size_t j = 0;
  for (auto &[v, e] : exps_) {
    while (j < o.exps_.size() && o.exps_[j].first < v)
      ++j;
    if (j == o.exps_.size() || !(o.exps_[j].first == v) || o.exps_[j].second < e)
      return false;
  }
  return true;
}

Monomial Monomial::divide_into(const Monomial &o) const {
  Monomial r;
  size_t i = 0;
  for (auto &[v, e] : o.exps_) {
    int sub = 0;
    if (i < exps_.size() && exps_[i].first == v)
      sub = exps_[i++].second;
    if (e - sub > 0)
      r.exps_.emplace_back(v, e - sub);
    else
      assert(e == sub);
  }
  assert(i == exps_.size());
  return r;
}

bool Monomial::operator<(const Monomial &o) const {
  // Lex, lowest id most significant; absent variable counts as exponent 0.
  size_t i = 0, j = 0;
  while (i < exps_.size() && j < o.exps_.size()) {
    if (exps_[i].first < o.exps_[j].first)
      return false; // we have a positive power of an earlier var, o has 0
    if (o.exps_[j].first < exps_[i].first)
      return true;
    if (exps_[i].second != o.exps_[j].second)
      return exps_[i].second < o.exps_[j].second;
    ++i, ++j;
  }
  return i == exps_.size() && j < o.exps_.size();
}

// -------------------------------------------------------------- polynomials

Polynomial Polynomial::constant(const Rat &c) {
  Polynomial p;
  if (sgn(c) != 0)
    p.terms_.emplace_back(Monomial(), c);
  return p;
}

Polynomial Polynomial::variable(Var v) {
  Polynomial p;
  p.terms_.emplace_back(Monomial::var(v), Rat(1));
  return p;
}

Polynomial Polynomial::term(const Rat &c, const Monomial &m) {
  Polynomial p;
  if (sgn(c) != 0)
    p.terms_.emplace_back(m, c);
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one());
}

Rat Polynomial::constant_value() const {
  if (terms_.empty())
    return Rat(0);
  assert(is_constant());
  return terms_[0].second;
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto &[m, c] : r.terms_)
    c = -c;
  return r;
}

Polynomial add_impl(const Polynomial &a, const Polynomial &b, bool negate_b) {
  Polynomial r;
  r.terms_.reserve(a.terms_.size() + b.terms_.size());
  size_t i = 0, j = 0;
  auto bc = [&](size_t k) { return negate_b ? Rat(-b.terms_[k].second) : b.terms_[k].second; };
  while (i < a.terms_.size() && j < b.terms_.size()) {
    if (a.terms_[i].first < b.terms_[j].first)
      r.terms_.push_back(a.terms_[i++]);
    else if (b.terms_[j].first < a.terms_[i].first) {
      r.terms_.emplace_back(b.terms_[j].first, bc(j));
      ++j;
    } else {
      Rat c = a.terms_[i].second + bc(j);
      if (sgn(c) != 0)
        r.terms_.emplace_back(a.terms_[i].first, c);
      ++i, ++j;
    }
  }
  for (; i < a.terms_.size(); ++i)
    r.terms_.push_back(a.terms_[i]);
  for (; j < b.terms_.size(); ++j)
    r.terms_.emplace_back(b.terms_[j].first, bc(j));
  return r;
}

Polynomial Polynomial::operator+(const Polynomial &o) const { return add_impl(*this, o, false); }
Polynomial Polynomial::operator-(const Polynomial &o) const { return add_impl(*this, o, true); }

Polynomial Polynomial::operator*(const Polynomial &o) const {
  if (is_zero() || o.is_zero())
    return Polynomial();
  std::map<Monomial, Rat> acc;
  for (auto &[ma, ca] : terms_)
    for (auto &[mb, cb] : o.terms_) {
      Rat &slot = acc[ma.times(mb)];
      slot += ca * cb;
    }
  Polynomial r;
  r.terms_.reserve(acc.size());
  for (auto &[m, c] : acc)
    if (sgn(c) != 0)
      r.terms_.emplace_back(m, c);
  return r;
}

Polynomial Polynomial::operator*(const Rat &c) const {
  if (sgn(c) == 0)
    return Polynomial();
  Polynomial r = *this;
  for (auto &[m, k] : r.terms_)
    k *= c;
  return r;
}

Polynomial operator*(const Rat &c, const Polynomial &p) { return p * c; }

bool Polynomial::operator<(const Polynomial &o) const {
  size_t n = std::min(terms_.size(), o.terms_.size());
  for (size_t i = 0; i < n; ++i) {
    if (terms_[i].first < o.terms_[i].first)
      return true;
    if (o.terms_[i].first < terms_[i].first)
      return false;
    int c = cmp(terms_[i].second, o.terms_[i].second);
    if (c != 0)
      return c < 0;
  }
  return terms_.size() < o.terms_.size();
}

Polynomial Polynomial::pow(int e) const {
  assert(e >= 0);
  Polynomial r = Polynomial::constant(1);
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1)
      r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

int Polynomial::degree(Var v) const {
  int d = 0;
  for (auto &[m, c] : terms_)
    d = std::max(d, m.degree(v));
  return d;
}

int Polynomial::total_degree() const {
  int d = 0;
  for (auto &[m, c] : terms_)
    d = std::max(d, m.total_degree());
  return d;
}

std::vector<Var> Polynomial::variables() const {
  std::vector<Var> vs;
  for (auto &[m, c] : terms_)
    for (auto &[v, e] : m.exps())
      vs.push_back(v);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

std::vector<Polynomial> Polynomial::coeffs_in(Var v) const {
  std::vector<Polynomial> cs(static_cast<size_t>(degree(v)) + 1);
  for (auto &[m, c] : terms_) {
    int e = m.degree(v);
    Monomial rest;
    for (auto &[w, k] : m.exps())
      if (w != v)
        rest = rest.times(Monomial::var(w, k));
    cs[static_cast<size_t>(e)] = cs[static_cast<size_t>(e)] + Polynomial::term(c, rest);
  }
  return cs;
}

Polynomial Polynomial::from_coeffs(Var v, const std::vector<Polynomial> &cs) {
  Polynomial r;
  for (size_t i = 0; i < cs.size(); ++i) {
    assert(!cs[i].contains(v));
    Monomial vi = Monomial::var(v, static_cast<int>(i));
    for (auto &[m, c] : cs[i].terms())
      r = r + Polynomial::term(c, m.times(vi));
  }
  return r;
}

Polynomial Polynomial::coeff_of(Var v, int e) const {
  Polynomial r;
  for (auto &[m, c] : terms_) {
    if (m.degree(v) != e)
      continue;
    Monomial rest;
    for (auto &[w, k] : m.exps())
      if (w != v)
        rest = rest.times(Monomial::var(w, k));
    r = r + Polynomial::term(c, rest);
  }
  return r;
}

Polynomial Polynomial::leading_coeff(Var v) const { return coeff_of(v, degree(v)); }
Polynomial Polynomial::trailing_coeff(Var v) const { return coeff_of(v, 0); }

Polynomial Polynomial::derivative(Var v) const {
  Polynomial r;
  for (auto &[m, c] : terms_) {
    int e = m.degree(v);
    if (e == 0)
      continue;
    Monomial rest;
    for (auto &[w, k] : m.exps()) {
      if (w == v) {
        if (k > 1)
          rest = rest.times(Monomial::var(w, k - 1));
      } else
        rest = rest.times(Monomial::var(w, k));
    }
    r = r + Polynomial::term(c * e, rest);
  }
  return r;
}

Polynomial Polynomial::eval(Var v, const Rat &val) const {
  if (!contains(v))
    return *this;
  auto cs = coeffs_in(v);
  Polynomial r = cs.back();
  for (size_t i = cs.size() - 1; i-- > 0;)
    r = r * val + cs[i];
  return r;
}

Polynomial Polynomial::eval(const std::map<Var, Rat> &vals) const {
  Polynomial r = *this;
  for (auto &[v, q] : vals)
    r = r.eval(v, q);
  return r;
}

Rat Polynomial::eval_all(const std::map<Var, Rat> &vals) const {
  Polynomial r = eval(vals);
  if (!r.is_constant())
    throw std::invalid_argument("eval_all: unassigned variable " + r.variables().front().name());
  return r.constant_value();
}

Polynomial Polynomial::substitute(Var v, const Polynomial &p) const {
  if (!contains(v))
    return *this;
  auto cs = coeffs_in(v);
  Polynomial r = cs.back();
  for (size_t i = cs.size() - 1; i-- > 0;)
    r = r * p + cs[i];
  return r;
}

Polynomial Polynomial::rename(Var from, Var to) const {
  if (from == to || !contains(from))
    return *this;
  assert(!contains(to));
  return substitute(from, Polynomial::variable(to));
}

std::pair<Polynomial, Rat> Polynomial::normalize() const {
  if (is_zero())
    return {Polynomial(), Rat(1)};
  Int l(1), g(0);
  for (auto &[m, c] : terms_)
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  for (auto &[m, c] : terms_) {
    Int scaled = num(c) * (l / den(c));
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), scaled.get_mpz_t());
  }
  Rat unit(g, l);
  unit.canonicalize();
  if (sgn(terms_.back().second) < 0)
    unit = -unit;
  Polynomial r = *this * Rat(1 / unit);
  return {r, unit};
}

bool Polynomial::is_normalized() const {
  if (is_zero())
    return true;
  auto [p, u] = normalize();
  return u == 1;
}

std::optional<Polynomial> Polynomial::divide_exact(const Polynomial &d) const {
  if (d.is_zero())
    return std::nullopt;
  Polynomial r = *this, q;
  const auto &dl = d.terms().back();
  while (!r.is_zero()) {
    const auto &rl = r.terms().back();
    if (!dl.first.divides(rl.first))
      return std::nullopt;
    Polynomial t = Polynomial::term(rl.second / dl.second, dl.first.divide_into(rl.first));
    q = q + t;
    r = r - t * d;
  }
  return q;
}

// ------------------------------------------------------------------ strings

namespace {
std::string mono_to_string(const Monomial &m) {
  std::string s;
  for (auto &[v, e] : m.exps()) {
    if (!s.empty())
      s += "*";
    s += v.name();
    if (e > 1)
      s += "^" + std::to_string(e);
  }
  return s;
}
} // namespace

std::string Polynomial::to_string() const {
  if (terms_.empty())
    return "0";
  std::string s;
  // Highest term first reads naturally.
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto &[m, c] = *it;
    Rat a = rat_abs(c);
    bool neg = sgn(c) < 0;
    if (s.empty())
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    if (m.is_one())
      s += rat_to_string(a);
    else if (a == 1)
      s += mono_to_string(m);
    else
      s += rat_to_string(a) + "*" + mono_to_string(m);
  }
  return s;
}

std::string Polynomial::to_sexpr() const {
  if (terms_.empty())
    return "0";
  std::vector<std::string> parts;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto &[m, c] = *it;
    std::vector<std::string> fac;
    if (c != 1 || m.is_one())
      fac.push_back(rat_to_string(c));
    for (auto &[v, e] : m.exps()) {
      if (e == 1)
        fac.push_back(v.name());
      else
        fac.push_back("(^ " + v.name() + " " + std::to_string(e) + ")");
    }
    if (fac.size() == 1)
      parts.push_back(fac[0]);
    else {
      std::string t = "(*";
      for (auto &f : fac)
        t += " " + f;
      parts.push_back(t + ")");
    }
  }
  if (parts.size() == 1)
    return parts[0];
  std::string s = "(+";
  for (auto &p : parts)
    s += " " + p;
  return s + ")";
}

// ------------------------------------------------------- division, gcd, res

Polynomial pseudo_rem(const Polynomial &p, const Polynomial &q, Var v) {
  int dp = p.degree(v), dq = q.degree(v);
  assert(!q.is_zero() && dq >= 0);
  if (dp < dq)
    return p;
  std::vector<Polynomial> r = p.coeffs_in(v);
  std::vector<Polynomial> d = q.coeffs_in(v);
  Polynomial lq = d[static_cast<size_t>(dq)];
  for (int k = dp; k >= dq; --k) {
    Polynomial top = r[static_cast<size_t>(k)];
    for (auto &c : r)
      c = c * lq;
    if (!top.is_zero())
      for (int j = 0; j <= dq; ++j)
        r[static_cast<size_t>(k - dq + j)] =
            r[static_cast<size_t>(k - dq + j)] - top * d[static_cast<size_t>(j)];
  }
  r.resize(static_cast<size_t>(dq));
  if (r.empty())
    return Polynomial();
  return Polynomial::from_coeffs(v, r);
}

namespace {

// gcd of the coefficients of p as a polynomial in v.
Polynomial content_in(const Polynomial &p, Var v) {
  Polynomial g;
  for (auto &c : p.coeffs_in(v)) {
    if (c.is_zero())
      continue;
    g = poly_gcd(g, c);
    if (g.is_constant())
      return Polynomial::constant(1);
  }
  return g;
}

} // namespace

Polynomial poly_gcd(const Polynomial &a0, const Polynomial &b0) {
  if (a0.is_zero())
    return b0.normalized();
  if (b0.is_zero())
    return a0.normalized();
  Polynomial a = a0.normalized(), b = b0.normalized();
  if (a.is_constant() || b.is_constant())
    return Polynomial::constant(1);
  // Main variable: highest id occurring in either.
  Var v = a.variables().back();
  Var vb = b.variables().back();
  if (vb.id() > v.id())
    v = vb;
  if (!a.contains(v))
    return poly_gcd(a, content_in(b, v));
  if (!b.contains(v))
    return poly_gcd(content_in(a, v), b);
  Polynomial ca = content_in(a, v), cb = content_in(b, v);
  Polynomial pa = *a.divide_exact(ca), pb = *b.divide_exact(cb);
  Polynomial c = poly_gcd(ca, cb);
  if (pa.degree(v) < pb.degree(v))
    std::swap(pa, pb);
  // Primitive PRS.
  while (!pb.is_zero()) {
    Polynomial r = pseudo_rem(pa, pb, v);
    pa = pb;
    if (r.is_zero()) {
      pb = Polynomial();
    } else if (r.degree(v) == 0) {
      pa = Polynomial::constant(1); // coprime in v
      pb = Polynomial();
    } else {
      pb = r.divide_exact(content_in(r, v))->normalized();
    }
  }
  return (c * pa).normalized();
}

Polynomial det_bareiss(std::vector<std::vector<Polynomial>> m) {
  size_t k = m.size();
  if (k == 0)
    return Polynomial::constant(1);
  int sign = 1;
  Polynomial prev = Polynomial::constant(1);
  for (size_t col = 0; col < k; ++col) {
    size_t piv = col;
    while (piv < k && m[piv][col].is_zero())
      ++piv;
    if (piv == k)
      return Polynomial();
    if (piv != col) {
      std::swap(m[piv], m[col]);
      sign = -sign;
    }
    for (size_t i = col + 1; i < k; ++i) {
      for (size_t j = col + 1; j < k; ++j) {
        Polynomial t = m[col][col] * m[i][j] - m[i][col] * m[col][j];
        auto q = t.divide_exact(prev);
        assert(q.has_value());
        m[i][j] = *q;
      }
      m[i][col] = Polynomial();
    }
    prev = m[col][col];
  }
  Polynomial d = m[k - 1][k - 1];
  return sign < 0 ? -d : d;
}

Polynomial resultant(const Polynomial &p, const Polynomial &q, Var v) {
  if (p.is_zero() || q.is_zero())
    return Polynomial();
  int m = p.degree(v), n = q.degree(v);
  if (m == 0 && n == 0)
    return Polynomial::constant(1);
  if (m == 0)
    return p.pow(n);
  if (n == 0)
    return q.pow(m);
  auto pc = p.coeffs_in(v), qc = q.coeffs_in(v);
  size_t k = static_cast<size_t>(m + n);
  std::vector<std::vector<Polynomial>> syl(k, std::vector<Polynomial>(k));
  for (int row = 0; row < n; ++row)
    for (int j = 0; j <= m; ++j)
      syl[static_cast<size_t>(row)][static_cast<size_t>(row + j)] = pc[static_cast<size_t>(m - j)];
  for (int row = 0; row < m; ++row)
    for (int j = 0; j <= n; ++j)
      syl[static_cast<size_t>(n + row)][static_cast<size_t>(row + j)] =
          qc[static_cast<size_t>(n - j)];
  return det_bareiss(std::move(syl));
}

Polynomial discriminant(const Polynomial &p, Var v) {
  int n = p.degree(v);
  if (n < 1)
    throw std::invalid_argument("discriminant: degree must be at least 1");
  if (n == 1)
    return Polynomial::constant(1);
  Polynomial r = resultant(p, p.derivative(v), v);
  auto d = r.divide_exact(p.leading_coeff(v));
  assert(d.has_value());
  int e = (n * (n - 1) / 2) % 2;
  return e ? -*d : *d;
}

// ------------------------------------------------------------ rat utilities

std::string rat_to_string(const Rat &q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

std::optional<Rat> rat_parse(const std::string &s) {
  if (s.empty())
    return std::nullopt;
  size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size())
    return std::nullopt;
  bool slash = false;
  for (size_t j = i; j < s.size(); ++j) {
    if (s[j] == '/') {
      if (slash || j == i || j + 1 == s.size())
        return std::nullopt;
      slash = true;
    } else if (!isdigit(static_cast<unsigned char>(s[j])))
      return std::nullopt;
  }
  Rat q;
  if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
    return std::nullopt;
  if (sgn(den(q)) == 0)
    return std::nullopt;
  q.canonicalize();
  return q;
}

namespace {
// Closed-interval simplest rational, both bounds positive.
Rat simplest_pos(const Rat &lo, const Rat &hi) {
  Int c = ceil_int(lo);
  if (Rat(c) <= hi)
    return Rat(c);
  Int fl = floor_int(lo);
  Rat flo = lo - Rat(fl), fhi = hi - Rat(fl); // 0 < flo <= fhi < 1
  return Rat(fl) + Rat(1) / simplest_pos(Rat(1) / fhi, Rat(1) / flo);
}
} // namespace

Rat simplest_in(const Rat &lo, const Rat &hi) {
  assert(lo <= hi);
  if (sgn(lo) <= 0 && sgn(hi) >= 0)
    return Rat(0);
  if (sgn(lo) > 0)
    return simplest_pos(lo, hi);
  return -simplest_pos(-hi, -lo);
}

} // namespace qelim
