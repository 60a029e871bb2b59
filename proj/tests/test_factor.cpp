#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "factor.hpp"

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
  std::uniform_int_distribution<int> coef(-4, 4);
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

Polynomial rebuild(const Factorization &f) {
  Polynomial p = Polynomial::constant(f.unit);
  for (auto &[g, k] : f.factors)
    p = p * g.pow(k);
  return p;
}

} // namespace

TEST_CASE("factorization rebuilds the input") {
  std::mt19937 rng(seed_from_env());
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 80; ++i) {
    Polynomial p = random_poly(rng, {x, y}, 3, 4);
    if (p.is_zero())
      continue;
    Factorization f = factor(p);
    CHECK(rebuild(f) == p);
    for (auto &[g, k] : f.factors) {
      CHECK(k >= 1);
      CHECK(g.is_normalized());
      CHECK(g.total_degree() >= 1);
    }
  }
}

TEST_CASE("factors of a product cover the factors of both operands") {
  std::mt19937 rng(seed_from_env() + 1);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 50; ++i) {
    Polynomial a = random_poly(rng, {x, y}, 2, 3);
    Polynomial b = random_poly(rng, {x, y}, 2, 3);
    if (a.is_zero() || b.is_zero())
      continue;
    auto fa = irreducible_factors(a), fb = irreducible_factors(b);
    auto fab = irreducible_factors(a * b);
    for (auto &g : fa)
      CHECK(std::find(fab.begin(), fab.end(), g) != fab.end());
    for (auto &g : fb)
      CHECK(std::find(fab.begin(), fab.end(), g) != fab.end());
  }
}

TEST_CASE("irreducible factors do not split further") {
  // if g = u*v with both nonconstant then factor(g) would list two entries
  std::mt19937 rng(seed_from_env() + 2);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 40; ++i) {
    Polynomial p = random_poly(rng, {x, y}, 3, 4);
    if (p.is_zero() || p.is_constant())
      continue;
    for (auto &g : irreducible_factors(p)) {
      Factorization fg = factor(g);
      REQUIRE(fg.factors.size() == 1);
      CHECK(fg.factors[0].second == 1);
      CHECK(fg.factors[0].first == g);
    }
  }
}

TEST_CASE("known irreducibles stay whole") {
  Var x = Var::named("x"), y = Var::named("y");
  Polynomial px = Polynomial::variable(x), py = Polynomial::variable(y);
  Polynomial one = Polynomial::constant(mkrat(1));
  // x^2 + 1
  CHECK(irreducible_factors(px * px + one).size() == 1);
  // x^4 - 2 (Eisenstein at 2)
  CHECK(irreducible_factors(px.pow(4) - Polynomial::constant(mkrat(2))).size() == 1);
  // x^2 + y^2 + 1 has no real or rational splitting
  CHECK(irreducible_factors(px * px + py * py + one).size() == 1);
  // x^2 - y is irreducible as a bivariate
  CHECK(irreducible_factors(px * px - py).size() == 1);
}

TEST_CASE("known splits come apart") {
  Var x = Var::named("x"), y = Var::named("y");
  Polynomial px = Polynomial::variable(x), py = Polynomial::variable(y);
  Polynomial one = Polynomial::constant(mkrat(1));
  // x^4 - 1 = (x-1)(x+1)(x^2+1)
  auto f = irreducible_factors(px.pow(4) - one);
  CHECK(f.size() == 3);
  // x^2 - y^2 = (x-y)(x+y)
  auto g = irreducible_factors(px * px - py * py);
  CHECK(g.size() == 2);
  // 6x^2 - 5x + 1 = (2x-1)(3x-1), content must not block the split
  Polynomial h = Polynomial::constant(mkrat(6)) * px * px -
                 Polynomial::constant(mkrat(5)) * px + one;
  CHECK(irreducible_factors(h).size() == 2);
}

TEST_CASE("squarefree decomposition exposes multiplicities") {
  std::mt19937 rng(seed_from_env() + 3);
  Var x = Var::named("x"), y = Var::named("y");
  for (int i = 0; i < 40; ++i) {
    Polynomial a = random_poly(rng, {x, y}, 2, 2);
    Polynomial b = random_poly(rng, {x, y}, 2, 2);
    if (a.is_constant() || b.is_constant())
      continue;
    Polynomial p = a * b.pow(3);
    auto parts = squarefree_decompose(p);
    // rebuild check modulo the dropped unit
    Polynomial prod = Polynomial::constant(mkrat(1));
    for (auto &[g, k] : parts)
      prod = prod * g.pow(k);
    CHECK(p.normalized() == prod.normalized());
    // parts are squarefree: the gcd with a partial derivative may keep
    // factors free of that variable but none depending on it
    for (auto &[g, k] : parts) {
      (void)k;
      for (Var v : g.variables()) {
        if (g.derivative(v).is_zero())
          continue;
        CHECK(poly_gcd(g, g.derivative(v)).degree(v) == 0);
      }
    }
  }
}

TEST_CASE("squarefree part drops exponents only") {
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  Polynomial one = Polynomial::constant(mkrat(1));
  Polynomial p = (px - one).pow(2) * (px + one);
  Polynomial sf = squarefree_part(p);
  CHECK(sf == (px - one) * (px + one));
}

TEST_CASE("repeated calls hit the cache consistently") {
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  Polynomial p = px.pow(4) - Polynomial::constant(mkrat(2));
  auto f1 = factor(p), f2 = factor(p);
  CHECK(f1.factors == f2.factors);
  CHECK(f1.unit == f2.unit);
}
