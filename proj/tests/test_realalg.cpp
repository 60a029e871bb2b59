#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "realalg.hpp"

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

Polynomial random_upoly(std::mt19937 &rng, Var v, int max_deg, int terms) {
  std::uniform_int_distribution<int> coef(-6, 6);
  std::uniform_int_distribution<int> expd(0, max_deg);
  Polynomial p;
  for (int t = 0; t < terms; ++t) {
    int c = coef(rng);
    if (c == 0)
      continue;
    p = p + Polynomial::term(mkrat(c), Monomial::var(v, expd(rng)));
  }
  return p;
}

// Sturm chain built from plain polynomial arithmetic; counts distinct real
// roots in (a, b]. Independent of the isolation machinery under test.
int sturm_count(const Polynomial &p, Var v, const Rat &a, const Rat &b) {
  std::vector<Polynomial> chain{p, p.derivative(v)};
  while (!chain.back().is_zero()) {
    const Polynomial &s = chain[chain.size() - 2];
    const Polynomial &t = chain.back();
    // sign-correct remainder: pseudo_rem scales by lc^(k); make the scale even
    int dp = s.degree(v), dq = t.degree(v);
    Polynomial rem = pseudo_rem(s, t, v);
    Rat lc = t.leading_coeff(v).constant_value();
    if (lc < Rat(0) && (dp - dq + 1) % 2 == 1)
      rem = -rem;
    chain.push_back(-rem);
  }
  chain.pop_back();
  auto signs_at = [&](const Rat &x) {
    int changes = 0, last = 0;
    for (auto &q : chain) {
      Rat val = q.eval(v, x).constant_value();
      int s = val > Rat(0) ? 1 : val < Rat(0) ? -1 : 0;
      if (s != 0) {
        if (last != 0 && s != last)
          ++changes;
        last = s;
      }
    }
    return changes;
  };
  return signs_at(a) - signs_at(b);
}

} // namespace

TEST_CASE("root isolation matches a Sturm count") {
  std::mt19937 rng(seed_from_env());
  Var x = Var::named("x");
  int nontrivial = 0;
  for (int i = 0; i < 200 || nontrivial < 80; ++i) {
    REQUIRE(i < 1000);
    Polynomial p = random_upoly(rng, x, 4, 4);
    if (p.is_zero() || p.degree(x) < 1)
      continue;
    auto roots = RealAlg::roots_of(p, x);
    Rat bound = cauchy_bound(p, x);
    // count distinct roots via the squarefree part: Sturm needs simple signs
    Polynomial sf = p.divide_exact(poly_gcd(p, p.derivative(x))).value();
    int want = sturm_count(sf, x, -bound, bound);
    CHECK(static_cast<int>(roots.size()) == want);
    if (want > 0)
      ++nontrivial;
    // ascending, distinct, and each interval endpoint pair brackets a sign
    // change of the squarefree part
    for (size_t k = 0; k + 1 < roots.size(); ++k)
      CHECK(roots[k] < roots[k + 1]);
    for (auto &r : roots) {
      if (r.is_rational()) {
        CHECK(p.eval(x, r.rat()).constant_value() == Rat(0));
      } else {
        // endpoints may hit roots of other factors, but never of the
        // defining polynomial, which must change sign across the interval
        const Polynomial &d = r.defpoly();
        Rat flo = d.eval(r.defvar(), r.lo()).constant_value();
        Rat fhi = d.eval(r.defvar(), r.hi()).constant_value();
        CHECK(flo * fhi < Rat(0));
      }
    }
  }
}

TEST_CASE("roots respect the Cauchy bound") {
  std::mt19937 rng(seed_from_env() + 1);
  Var x = Var::named("x");
  for (int i = 0; i < 100; ++i) {
    Polynomial p = random_upoly(rng, x, 4, 4);
    if (p.is_zero() || p.degree(x) < 1)
      continue;
    Rat bound = cauchy_bound(p, x);
    for (auto &r : RealAlg::roots_of(p, x)) {
      CHECK(r.compare_rat(bound) < 0);
      CHECK(r.compare_rat(-bound) > 0);
    }
  }
}

TEST_CASE("known algebraic values") {
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  // x^2 - 2
  auto r2 = RealAlg::roots_of(px * px - Polynomial::constant(mkrat(2)), x);
  REQUIRE(r2.size() == 2);
  CHECK(r2[0].sign() < 0);
  CHECK(r2[1].sign() > 0);
  CHECK(r2[0] == r2[1].neg());
  // sqrt(2)^2 = 2
  CHECK(r2[1] * r2[1] == RealAlg(mkrat(2)));
  CHECK(RealAlg::sqrt_of(RealAlg(mkrat(2))) == r2[1]);
  // golden ratio: root of x^2 - x - 1, and 1/phi = phi - 1
  auto phi = RealAlg::roots_of(px * px - px - Polynomial::constant(mkrat(1)), x);
  REQUIRE(phi.size() == 2);
  CHECK(RealAlg(mkrat(1)) / phi[1] == phi[1] - RealAlg(mkrat(1)));
}

TEST_CASE("arithmetic agrees with rational arithmetic on rationals") {
  std::mt19937 rng(seed_from_env() + 2);
  std::uniform_int_distribution<int> num(-20, 20);
  std::uniform_int_distribution<int> den(1, 7);
  for (int i = 0; i < 100; ++i) {
    Rat a = mkrat(num(rng), den(rng)), b = mkrat(num(rng), den(rng));
    RealAlg ra(a), rb(b);
    CHECK((ra + rb).rat() == a + b);
    CHECK((ra - rb).rat() == a - b);
    CHECK((ra * rb).rat() == a * b);
    if (b != Rat(0))
      CHECK((ra / rb).rat() == a / b);
  }
}

TEST_CASE("mixed arithmetic keeps exactness") {
  std::mt19937 rng(seed_from_env() + 3);
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  RealAlg s2 = RealAlg::sqrt_of(RealAlg(mkrat(2)));
  RealAlg s3 = RealAlg::sqrt_of(RealAlg(mkrat(3)));
  // (sqrt2 + sqrt3)^2 = 5 + 2*sqrt6
  RealAlg sum = s2 + s3;
  RealAlg want = RealAlg(mkrat(5)) + RealAlg(mkrat(2)) * RealAlg::sqrt_of(RealAlg(mkrat(6)));
  CHECK(sum * sum == want);
  // sqrt2 * sqrt3 = sqrt6
  CHECK(s2 * s3 == RealAlg::sqrt_of(RealAlg(mkrat(6))));
  // difference of equal values is exactly rational zero
  RealAlg z = s2 - s2;
  CHECK(z.is_rational());
  CHECK(z.rat() == Rat(0));
  (void)rng;
  (void)px;
}

TEST_CASE("comparisons refine shared intervals coherently") {
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  // roots of (x^2-2)(x^2-3) interleave as -s3 < -s2 < s2 < s3
  Polynomial p = (px * px - Polynomial::constant(mkrat(2))) *
                 (px * px - Polynomial::constant(mkrat(3)));
  auto roots = RealAlg::roots_of(p, x);
  REQUIRE(roots.size() == 4);
  RealAlg s2 = RealAlg::sqrt_of(RealAlg(mkrat(2)));
  RealAlg s3 = RealAlg::sqrt_of(RealAlg(mkrat(3)));
  CHECK(roots[0] == s3.neg());
  CHECK(roots[1] == s2.neg());
  CHECK(roots[2] == s2);
  CHECK(roots[3] == s3);
  // refinement tightens the window without losing the root
  Rat w0 = s2.hi() - s2.lo();
  s2.refine_below(mkrat(1, 1000000));
  CHECK(s2.hi() - s2.lo() < w0);
  CHECK(s2 * s2 == RealAlg(mkrat(2)));
}

TEST_CASE("sign never sits on zero for irrational values") {
  std::mt19937 rng(seed_from_env() + 4);
  Var x = Var::named("x");
  for (int i = 0; i < 60; ++i) {
    Polynomial p = random_upoly(rng, x, 4, 4);
    if (p.is_zero() || p.degree(x) < 1)
      continue;
    for (auto &r : RealAlg::roots_of(p, x)) {
      if (r.is_rational())
        continue;
      CHECK(r.sign() != 0);
      // interval may touch 0 at an endpoint but never straddles it
      if (r.sign() > 0) {
        CHECK(r.lo() >= Rat(0));
        CHECK(r.hi() > Rat(0));
      } else {
        CHECK(r.lo() < Rat(0));
        CHECK(r.hi() <= Rat(0));
      }
    }
  }
}

TEST_CASE("polynomial sign evaluation at algebraic points") {
  Var x = Var::named("x"), y = Var::named("y");
  Polynomial px = Polynomial::variable(x), py = Polynomial::variable(y);
  RealAlg s2 = RealAlg::sqrt_of(RealAlg(mkrat(2)));
  std::map<Var, RealAlg> pt{{x, s2}, {y, RealAlg(mkrat(1))}};
  // x^2 - y - 1 = 0 at (sqrt2, 1)
  CHECK(sign_at(px * px - py - Polynomial::constant(mkrat(1)), pt) == 0);
  CHECK(sign_at(px - py, pt) > 0);
  CHECK(sign_at(px - Polynomial::constant(mkrat(2)), pt) < 0);
  // exact evaluation: (sqrt2)^2 + 1 = 3
  RealAlg v = eval_at(px * px + py, pt);
  CHECK(v.is_rational());
  CHECK(v.rat() == Rat(3));
}

TEST_CASE("strictly-between produces simple separators") {
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  auto roots = RealAlg::roots_of(px * px - Polynomial::constant(mkrat(2)), x);
  Rat mid = rat_strictly_between(roots[0], roots[1]);
  CHECK(roots[0].compare_rat(mid) < 0);
  CHECK(roots[1].compare_rat(mid) > 0);
  // tight rational gap
  Rat a = mkrat(1, 3), b = mkrat(2, 5);
  Rat m2 = rat_strictly_between(RealAlg(a), RealAlg(b));
  CHECK(a < m2);
  CHECK(m2 < b);
}

TEST_CASE("text forms") {
  Var x = Var::named("x");
  Polynomial px = Polynomial::variable(x);
  RealAlg s2 = RealAlg::sqrt_of(RealAlg(mkrat(2)));
  CHECK(s2.to_sexpr().rfind("(alg ", 0) == 0);
  CHECK(RealAlg(mkrat(-7, 2)).to_sexpr() == "-7/2");
  CHECK(s2.to_string().find('~') != std::string::npos);
}
