#pragma once

#include "poly.hpp"

#include <string>
#include <vector>

namespace qelim {

enum class OrderStrategy { Brown, Sotd, Ndrr, Greedy, Ec, User };

// Throws std::invalid_argument for unknown names.
OrderStrategy order_strategy_from(const std::string &name);
std::string order_strategy_name(OrderStrategy s);

struct OrderInput {
  // Variable groups from base to top: free variables first, then quantifier
  // blocks outer to inner. The chosen order only permutes within a group.
  std::vector<std::vector<Var>> groups;
  std::vector<Polynomial> polys; // matrix atom polynomials
  std::vector<Polynomial> ecs;   // equational constraint candidates, may be empty
  std::vector<Var> user;         // full order for User, base first
};

// Lifting order, index 0 = base (projected last).
std::vector<Var> choose_order(OrderStrategy st, const OrderInput &in);

} // namespace qelim
