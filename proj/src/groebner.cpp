#include "groebner.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

namespace qelim {

namespace {

struct Lex {
  const std::vector<Var> &order;
  bool less(const Monomial &a, const Monomial &b) const {
    for (Var v : order) {
      int da = a.degree(v), db = b.degree(v);
      if (da != db)
        return da < db;
    }
    return false;
  }
};

std::pair<Monomial, Rat> leading(const Polynomial &p, const Lex &lex) {
  assert(!p.is_zero());
  const auto *best = &p.terms()[0];
  for (auto &t : p.terms())
    if (lex.less(best->first, t.first))
      best = &t;
  return *best;
}

Polynomial reduce_full(Polynomial p, const std::vector<Polynomial> &basis, const Lex &lex) {
  Polynomial r;
  while (!p.is_zero()) {
    auto [m, c] = leading(p, lex);
    bool hit = false;
    for (auto &g : basis) {
      if (g.is_zero())
        continue;
      auto [gm, gc] = leading(g, lex);
      if (gm.divides(m)) {
        p = p - Polynomial::term(c / gc, gm.divide_into(m)) * g;
        hit = true;
        break;
      }
    }
    if (!hit) {
      Polynomial t = Polynomial::term(c, m);
      r = r + t;
      p = p - t;
    }
  }
  return r;
}

Monomial mono_lcm(const Monomial &a, const Monomial &b) {
  Monomial r = a;
  for (auto &[v, e] : b.exps()) {
    int have = r.degree(v);
    if (e > have)
      r = r.times(Monomial::var(v, e - have));
  }
  return r;
}

bool coprime(const Monomial &a, const Monomial &b) {
  for (auto &[v, e] : a.exps())
    if (b.degree(v) > 0)
      return false;
  return true;
}

} // namespace

std::vector<Polynomial> groebner_basis(const std::vector<Polynomial> &gens,
                                       const std::vector<Var> &order) {
  Lex lex{order};
  std::vector<Polynomial> basis;
  for (auto &g : gens)
    if (!g.is_zero())
      basis.push_back(g.normalized());
  std::deque<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = i + 1; j < basis.size(); ++j)
      pairs.emplace_back(i, j);
  while (!pairs.empty()) {
    auto [i, j] = pairs.front();
    pairs.pop_front();
    auto [mi, ci] = leading(basis[i], lex);
    auto [mj, cj] = leading(basis[j], lex);
    if (coprime(mi, mj))
      continue; // Buchberger's first criterion
    Monomial l = mono_lcm(mi, mj);
    Polynomial s = Polynomial::term(Rat(1) / ci, mi.divide_into(l)) * basis[i] -
                   Polynomial::term(Rat(1) / cj, mj.divide_into(l)) * basis[j];
    Polynomial r = reduce_full(std::move(s), basis, lex);
    if (!r.is_zero()) {
      basis.push_back(r.normalized());
      for (size_t k = 0; k + 1 < basis.size(); ++k)
        pairs.emplace_back(k, basis.size() - 1);
    }
  }
  // Minimal: drop elements whose leading monomial another one divides.
  std::vector<Polynomial> minimal;
  for (size_t i = 0; i < basis.size(); ++i) {
    auto [mi, ci] = leading(basis[i], lex);
    bool redundant = false;
    for (size_t j = 0; j < basis.size() && !redundant; ++j) {
      if (i == j)
        continue;
      auto [mj, cj] = leading(basis[j], lex);
      if (mj.divides(mi) && !(mi == mj && j > i))
        redundant = true;
    }
    if (!redundant)
      minimal.push_back(basis[i]);
  }
  // Reduced: every element in normal form w.r.t. the others.
  std::vector<Polynomial> reduced = minimal;
  for (size_t i = 0; i < reduced.size(); ++i) {
    std::vector<Polynomial> others;
    for (size_t j = 0; j < reduced.size(); ++j)
      if (j != i)
        others.push_back(reduced[j]);
    reduced[i] = reduce_full(reduced[i], others, lex).normalized();
  }
  std::sort(reduced.begin(), reduced.end(), [&](const Polynomial &a, const Polynomial &b) {
    return lex.less(leading(a, lex).first, leading(b, lex).first);
  });
  return reduced;
}

Polynomial groebner_reduce(const Polynomial &p, const std::vector<Polynomial> &basis,
                           const std::vector<Var> &order) {
  Lex lex{order};
  return reduce_full(p, basis, lex);
}

} // namespace qelim
