#pragma once

#include "poly.hpp"

namespace qelim {

// Reduced Groebner basis (Buchberger) for the lex order in which order[0] is
// the most significant variable. Generators must only use listed variables.
// Basis elements come back normalized and sorted by leading monomial.
std::vector<Polynomial> groebner_basis(const std::vector<Polynomial> &gens,
                                       const std::vector<Var> &order);

// Full normal form of p modulo basis under the same lex order.
Polynomial groebner_reduce(const Polynomial &p, const std::vector<Polynomial> &basis,
                           const std::vector<Var> &order);

} // namespace qelim
