#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "poly.hpp"

#include <cstdlib>
#include <random>

using namespace qelim;

namespace {

unsigned seed_from_env() {
  const char *s = std::getenv("QE_SEED");
  return s ? static_cast<unsigned>(std::strtoul(s, nullptr, 10)) : 1u;
}

Rat mkrat(long n, long d = 1) {
  Rat r(n, d);
  r.canonicalize();
  return r;
}

Polynomial random_poly(std::mt19937 &rng, const std::vector<Var> &vars, int max_deg,
                       int terms) {
  std::uniform_int_distribution<int> coef(-6, 6);
  std::uniform_int_distribution<int> expd(0, max_deg);
  Polynomial p;
  for (int t = 0; t < terms; ++t) {
    int c = coef(rng);
    if (c == 0)
      continue;
    Monomial m;
    for (Var v : vars) {
      int e = expd(rng);
      if (e > 0)
        m = m.times(Monomial::var(v, e));
    }
    p = p + Polynomial::term(mkrat(c), m);
  }
  return p;
}

Rat random_rat(std::mt19937 &rng) {
  std::uniform_int_distribution<int> num(-12, 12);
  std::uniform_int_distribution<int> den(1, 5);
  return mkrat(num(rng), den(rng));
}

// Plain rational Gaussian elimination, no pivoting tricks: an independent
// check for the polynomial determinant path.
Rat det_numeric(std::vector<std::vector<Rat>> m) {
  size_t n = m.size();
  Rat det = mkrat(1);
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    while (piv < n && m[piv][c] == Rat(0))
      ++piv;
    if (piv == n)
      return mkrat(0);
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      Rat f = m[r][c] / m[c][c];
      for (size_t k = c; k < n; ++k)
        m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

// Sylvester matrix of p, q in v with every other variable evaluated first.
Rat resultant_numeric(const Polynomial &p, const Polynomial &q, Var v,
                      const std::map<Var, Rat> &pt) {
  auto pc = p.coeffs_in(v), qc = q.coeffs_in(v);
  auto num = [&](const Polynomial &c) { return c.eval_all(pt); };
  int dp = static_cast<int>(pc.size()) - 1, dq = static_cast<int>(qc.size()) - 1;
  int n = dp + dq;
  std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n, Rat(0)));
  for (int r = 0; r < dq; ++r)
    for (int i = 0; i <= dp; ++i)
      m[r][r + dp - i] = num(pc[i]);
  for (int r = 0; r < dp; ++r)
    for (int i = 0; i <= dq; ++i)
      m[dq + r][r + dq - i] = num(qc[i]);
  return det_numeric(std::move(m));
}

} // namespace

TEST_CASE("ring axioms on random polynomials") {
  std::mt19937 rng(seed_from_env());
  Var x = Var::named("x"), y = Var::named("y"), z = Var::named("z");
  for (int i = 0; i < 200; ++i) {
    Polynomial a = random_poly(rng, {x, y, z}, 3, 4);
    Polynomial b = random_poly(rng, {x, y, z}, 3, 4);
    Polynomial c = random_poly(rng, {x, y, z}, 3, 4);
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a - a == Polynomial::zero());
    CHECK(a + Polynomial::zero() == a);
    CHECK(a * Polynomial::constant(mkrat(1)) == a);
  }
}

TEST_CASE("evaluation is a homomorphism") {
  std::mt19937 rng(seed_from_env() + 1);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 200; ++i) {
    Polynomial a = random_poly(rng, {x, y}, 4, 4);
    Polynomial b = random_poly(rng, {x, y}, 4, 4);
    std::map<Var, Rat> pt{{x, random_rat(rng)}, {y, random_rat(rng)}};
    CHECK((a + b).eval_all(pt) == a.eval_all(pt) + b.eval_all(pt));
    CHECK((a * b).eval_all(pt) == a.eval_all(pt) * b.eval_all(pt));
  }
}

TEST_CASE("coefficient extraction round trip") {
  std::mt19937 rng(seed_from_env() + 2);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 100; ++i) {
    Polynomial p = random_poly(rng, {x, y}, 4, 5);
    CHECK(Polynomial::from_coeffs(x, p.coeffs_in(x)) == p);
    int d = p.degree(x);
    for (int e = 0; e <= d; ++e)
      CHECK(p.coeff_of(x, e) == p.coeffs_in(x)[static_cast<size_t>(e)]);
    if (!p.is_zero())
      CHECK(p.leading_coeff(x) == p.coeffs_in(x).back());
  }
}

TEST_CASE("substitution composes with evaluation") {
  std::mt19937 rng(seed_from_env() + 3);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 100; ++i) {
    Polynomial p = random_poly(rng, {x, y}, 3, 4);
    Polynomial g = random_poly(rng, {y}, 3, 3);
    Rat v = random_rat(rng);
    // p(x := g)(y := v) == p(x := g(v), y := v)
    Polynomial lhs = p.substitute(x, g).eval(y, v);
    Polynomial rhs = p.eval(y, v).substitute(x, g.eval(y, v));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("derivative rules") {
  std::mt19937 rng(seed_from_env() + 4);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 100; ++i) {
    Polynomial a = random_poly(rng, {x, y}, 3, 4);
    Polynomial b = random_poly(rng, {x, y}, 3, 4);
    CHECK((a + b).derivative(x) == a.derivative(x) + b.derivative(x));
    CHECK((a * b).derivative(x) == a.derivative(x) * b + a * b.derivative(x));
  }
}

TEST_CASE("normalize yields primitive integral representative") {
  std::mt19937 rng(seed_from_env() + 5);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 100; ++i) {
    Polynomial p = random_poly(rng, {x, y}, 3, 4);
    auto [n, unit] = p.normalize();
    CHECK(n.is_normalized());
    if (p.is_zero()) {
      CHECK(n.is_zero());
      continue;
    }
    CHECK(unit != Rat(0));
    CHECK(n * unit == p);
    // scaling by any nonzero rational lands on the same representative
    CHECK((p * mkrat(-7, 3)).normalized() == n);
  }
}

TEST_CASE("exact division inverts multiplication") {
  std::mt19937 rng(seed_from_env() + 6);
  Var x = Var::named("x"), y = Var::named("y");
  int divisible = 0;
  for (int i = 0; i < 150; ++i) {
    Polynomial a = random_poly(rng, {x, y}, 2, 3);
    Polynomial b = random_poly(rng, {x, y}, 2, 3);
    if (b.is_zero())
      continue;
    auto q = (a * b).divide_exact(b);
    REQUIRE(q.has_value());
    CHECK(*q == a);
    // a + 1 is rarely divisible by b; nullopt must not lie
    auto q2 = (a * b + Polynomial::constant(mkrat(1))).divide_exact(b);
    if (q2) {
      CHECK(*q2 * b == a * b + Polynomial::constant(mkrat(1)));
      ++divisible;
    }
  }
  CHECK(divisible < 20);
}

TEST_CASE("gcd divides both inputs and absorbs common factors") {
  std::mt19937 rng(seed_from_env() + 7);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 60; ++i) {
    Polynomial a = random_poly(rng, {x, y}, 2, 3);
    Polynomial b = random_poly(rng, {x, y}, 2, 3);
    Polynomial c = random_poly(rng, {x, y}, 2, 3);
    Polynomial g = poly_gcd(a * c, b * c);
    if ((a * c).is_zero() && (b * c).is_zero()) {
      CHECK(g.is_zero());
      continue;
    }
    CHECK((a * c).divide_exact(g).has_value());
    CHECK((b * c).divide_exact(g).has_value());
    if (!c.is_zero())
      CHECK(g.divide_exact(c.normalized()).has_value());
    CHECK(g.is_normalized());
  }
}

TEST_CASE("resultant matches the numeric Sylvester determinant") {
  std::mt19937 rng(seed_from_env() + 8);
  Var x = Var::named("x"), y = Var::named("y"), z = Var::named("z");
  int checked = 0;
  for (int i = 0; i < 120 || checked < 60; ++i) {
    REQUIRE(i < 600);
    Polynomial p = random_poly(rng, {x, y, z}, 3, 4);
    Polynomial q = random_poly(rng, {x, y, z}, 3, 4);
    if (p.degree(z) < 1 || q.degree(z) < 1)
      continue;
    Polynomial r = resultant(p, q, z);
    std::map<Var, Rat> pt{{x, random_rat(rng)}, {y, random_rat(rng)}};
    // degree drop under evaluation changes the determinant; skip those points
    if (p.leading_coeff(z).eval_all(pt) == Rat(0) ||
        q.leading_coeff(z).eval_all(pt) == Rat(0))
      continue;
    CHECK(r.eval_all(pt) == resultant_numeric(p, q, z, pt));
    ++checked;
  }
}

TEST_CASE("resultant vanishes exactly on common roots") {
  Var x = Var::named("x"), y = Var::named("y");
  Polynomial px = Polynomial::variable(x), py = Polynomial::variable(y);
  // p = (x - y), q = (x + y): common root only at y = 0
  Polynomial r = resultant(px - py, px + py, x);
  CHECK(r.degree(y) >= 1);
  CHECK(r.eval(y, mkrat(0)).is_zero());
  CHECK_FALSE(r.eval(y, mkrat(1)).is_zero());
}

TEST_CASE("discriminant detects double roots") {
  Var x = Var::named("x"), b = Var::named("b"), c = Var::named("c");
  Polynomial px = Polynomial::variable(x);
  // x^2 + bx + c: disc = b^2 - 4c
  Polynomial p = px * px + Polynomial::variable(b) * px + Polynomial::variable(c);
  Polynomial d = discriminant(p, x);
  Polynomial want = Polynomial::variable(b) * Polynomial::variable(b) -
                    Polynomial::constant(mkrat(4)) * Polynomial::variable(c);
  CHECK(d == want);
  // (x - 1)^2 has discriminant 0
  Polynomial dbl = (px - Polynomial::constant(mkrat(1))).pow(2);
  CHECK(discriminant(dbl, x).is_zero());
}

TEST_CASE("pseudo remainder identity") {
  std::mt19937 rng(seed_from_env() + 9);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 80; ++i) {
    Polynomial p = random_poly(rng, {x, y}, 3, 4);
    Polynomial q = random_poly(rng, {x, y}, 2, 3);
    int dp = p.degree(x), dq = q.degree(x);
    if (dq < 1 || dp < dq)
      continue;
    Polynomial rem = pseudo_rem(p, q, x);
    CHECK(rem.degree(x) < dq);
    // lc(q)^(dp-dq+1) p - rem is divisible by q
    Polynomial lhs = q.leading_coeff(x).pow(dp - dq + 1) * p - rem;
    CHECK(lhs.divide_exact(q).has_value());
  }
}

TEST_CASE("determinant agrees with numeric elimination") {
  std::mt19937 rng(seed_from_env() + 10);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 40; ++i) {
    size_t n = 1 + static_cast<size_t>(i % 4);
    std::vector<std::vector<Polynomial>> m(n, std::vector<Polynomial>(n));
    for (auto &row : m)
      for (auto &cell : row)
        cell = random_poly(rng, {x, y}, 1, 2);
    Polynomial d = det_bareiss(m);
    std::map<Var, Rat> pt{{x, random_rat(rng)}, {y, random_rat(rng)}};
    std::vector<std::vector<Rat>> nm(n, std::vector<Rat>(n));
    for (size_t r = 0; r < n; ++r)
      for (size_t c2 = 0; c2 < n; ++c2)
        nm[r][c2] = m[r][c2].eval_all(pt);
    CHECK(d.eval_all(pt) == det_numeric(std::move(nm)));
  }
}

TEST_CASE("text forms parse back through the grammar printer") {
  Var x = Var::named("x"), y = Var::named("y");
  Polynomial p = Polynomial::variable(x).pow(2) * Polynomial::constant(mkrat(2)) -
                 Polynomial::variable(y) * Polynomial::constant(mkrat(1, 3));
  CHECK(p.to_sexpr().find("(^ x 2)") != std::string::npos);
  CHECK(p.to_string().find("x^2") != std::string::npos);
}
