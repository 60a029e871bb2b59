#include "ordering.hpp"

#include "cad.hpp"
#include "errors.hpp"
#include "realalg.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace qelim {

OrderStrategy order_strategy_from(const std::string &name) {
  if (name == "brown")
    return OrderStrategy::Brown;
  if (name == "sotd")
    return OrderStrategy::Sotd;
  if (name == "ndrr")
    return OrderStrategy::Ndrr;
  if (name == "greedy")
    return OrderStrategy::Greedy;
  if (name == "ec")
    return OrderStrategy::Ec;
  if (name == "user")
    return OrderStrategy::User;
  throw std::invalid_argument("unknown ordering strategy '" + name + "'");
}

std::string order_strategy_name(OrderStrategy s) {
  switch (s) {
  case OrderStrategy::Brown: return "brown";
  case OrderStrategy::Sotd: return "sotd";
  case OrderStrategy::Ndrr: return "ndrr";
  case OrderStrategy::Greedy: return "greedy";
  case OrderStrategy::Ec: return "ec";
  case OrderStrategy::User: return "user";
  }
  return "?";
}

namespace {

struct BrownKey {
  int max_deg = 0;
  int max_term_tdeg = 0;
  long terms = 0;
  bool operator<(const BrownKey &o) const {
    if (max_deg != o.max_deg)
      return max_deg < o.max_deg;
    if (max_term_tdeg != o.max_term_tdeg)
      return max_term_tdeg < o.max_term_tdeg;
    return terms < o.terms;
  }
};

BrownKey brown_key(Var v, const std::vector<Polynomial> &polys) {
  BrownKey k;
  for (auto &p : polys) {
    k.max_deg = std::max(k.max_deg, p.degree(v));
    for (auto &[m, c] : p.terms()) {
      (void)c;
      if (m.degree(v) > 0) {
        k.max_term_tdeg = std::max(k.max_term_tdeg, m.total_degree());
        ++k.terms;
      }
    }
  }
  return k;
}

// Lower Brown key lifts first (projected later).
std::vector<Var> brown_group(const std::vector<Var> &group,
                             const std::vector<Polynomial> &polys) {
  std::vector<Var> out = group;
  std::map<Var, BrownKey> keys;
  for (Var v : group)
    keys.emplace(v, brown_key(v, polys));
  std::stable_sort(out.begin(), out.end(),
                   [&](Var a, Var b) { return keys.at(a) < keys.at(b); });
  return out;
}

long sotd_of(const std::vector<std::vector<Polynomial>> &chain) {
  long s = 0;
  for (auto &lvl : chain)
    for (auto &p : lvl)
      s += p.total_degree();
  return s;
}

long ndrr_of(const std::vector<std::vector<Polynomial>> &chain,
             const std::vector<Var> &order) {
  if (chain.empty())
    return 0;
  long n = 0;
  for (auto &p : chain[0])
    n += static_cast<long>(RealAlg::roots_of(p, order[0]).size());
  return n;
}

long fact(size_t n) {
  long f = 1;
  for (size_t i = 2; i <= n; ++i)
    f *= static_cast<long>(i);
  return f;
}

std::vector<Var> flatten(const std::vector<std::vector<Var>> &groups) {
  std::vector<Var> out;
  for (auto &g : groups)
    out.insert(out.end(), g.begin(), g.end());
  return out;
}

// Greedy: repeatedly project the variable (from the topmost unfinished
// group) whose one-step projection has the smallest degree sum.
std::vector<Var> greedy_order(const std::vector<std::vector<Var>> &groups,
                              const std::vector<Polynomial> &polys) {
  std::vector<Var> out(flatten(groups).size(), Var());
  std::vector<Polynomial> basis = factor_basis(polys);
  size_t pos = out.size();
  for (size_t gi = groups.size(); gi-- > 0;) {
    std::vector<Var> rem = groups[gi];
    while (!rem.empty()) {
      size_t best = 0;
      long best_score = -1;
      for (size_t i = 0; i < rem.size(); ++i) {
        auto proj = projection_step(basis, rem[i]);
        long score = 0;
        for (auto &p : proj)
          score += p.total_degree();
        if (best_score < 0 || score < best_score) {
          best_score = score;
          best = i;
        }
      }
      Var v = rem[best];
      rem.erase(rem.begin() + static_cast<long>(best));
      out[--pos] = v;
      basis = projection_step(basis, v);
    }
  }
  return out;
}

// Exhaustive search within groups when the candidate count is small.
template <typename Metric>
std::vector<Var> best_order(const std::vector<std::vector<Var>> &groups,
                            const std::vector<Polynomial> &polys, Metric metric) {
  long count = 1;
  for (auto &g : groups) {
    count *= fact(g.size());
    if (count > 5040)
      return greedy_order(groups, polys);
  }
  std::vector<std::vector<Var>> perms = {{}};
  for (auto &g : groups) {
    std::vector<Var> sorted = g;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<Var>> next;
    do {
      for (auto &prefix : perms) {
        auto cand = prefix;
        cand.insert(cand.end(), sorted.begin(), sorted.end());
        next.push_back(std::move(cand));
      }
    } while (std::next_permutation(sorted.begin(), sorted.end()));
    perms = std::move(next);
  }
  std::vector<Var> best;
  long best_score = -1;
  for (auto &cand : perms) {
    auto chain = projection_chain(polys, cand);
    long score = metric(chain, cand);
    if (best_score < 0 || score < best_score) {
      best_score = score;
      best = cand;
    }
  }
  return best;
}

std::vector<Var> ec_order(const std::vector<std::vector<Var>> &groups,
                          const std::vector<Polynomial> &polys,
                          const std::vector<Polynomial> &ecs) {
  std::set<Var> ec_vars;
  std::map<Var, int> min_deg;
  for (auto &e : ecs)
    for (Var v : e.variables()) {
      ec_vars.insert(v);
      int d = e.degree(v);
      auto it = min_deg.find(v);
      if (it == min_deg.end() || d < it->second)
        min_deg[v] = d;
    }
  std::vector<Var> out;
  for (auto &g : groups) {
    std::vector<Var> plain, in_ec;
    for (Var v : brown_group(g, polys))
      (ec_vars.count(v) ? in_ec : plain).push_back(v);
    // constraint variables go topmost; cheaper ones project first
    std::stable_sort(in_ec.begin(), in_ec.end(),
                     [&](Var a, Var b) { return min_deg[a] > min_deg[b]; });
    out.insert(out.end(), plain.begin(), plain.end());
    out.insert(out.end(), in_ec.begin(), in_ec.end());
  }
  return out;
}

} // namespace

std::vector<Var> choose_order(OrderStrategy st, const OrderInput &in) {
  bool fixed = true;
  for (auto &g : in.groups)
    if (g.size() > 1)
      fixed = false;
  if (fixed && st != OrderStrategy::User)
    return flatten(in.groups);

  switch (st) {
  case OrderStrategy::Brown: {
    std::vector<Var> out;
    for (auto &g : in.groups) {
      auto o = brown_group(g, in.polys);
      out.insert(out.end(), o.begin(), o.end());
    }
    return out;
  }
  case OrderStrategy::Sotd:
    return best_order(in.groups, in.polys,
                      [](const auto &chain, const auto &) { return sotd_of(chain); });
  case OrderStrategy::Ndrr:
    return best_order(in.groups, in.polys, [](const auto &chain, const auto &ord) {
      return ndrr_of(chain, ord);
    });
  case OrderStrategy::Greedy:
    return greedy_order(in.groups, in.polys);
  case OrderStrategy::Ec:
    return ec_order(in.groups, in.polys, in.ecs);
  case OrderStrategy::User: {
    std::vector<Var> all = flatten(in.groups);
    if (in.user.size() != all.size())
      throw std::invalid_argument("user order must list every variable exactly once");
    size_t pos = 0;
    for (auto &g : in.groups) {
      std::set<Var> want(g.begin(), g.end());
      for (size_t i = 0; i < g.size(); ++i, ++pos) {
        if (!want.count(in.user[pos]))
          throw std::invalid_argument(
              "user order must keep quantifier blocks contiguous");
      }
    }
    return in.user;
  }
  }
  throw InternalError("choose_order: bad strategy");
}

} // namespace qelim
