#pragma once

#include "poly.hpp"

namespace qelim {

struct Factorization {
  Rat unit;                                       // p = unit * prod f_i^k_i
  std::vector<std::pair<Polynomial, int>> factors; // irreducible, normalized, distinct
};

// Full irreducible factorization over Q. Results are cached per polynomial.
// Throws std::invalid_argument on the zero polynomial.
Factorization factor(const Polynomial &p);

// Distinct irreducible factors that contain at least one variable.
std::vector<Polynomial> irreducible_factors(const Polynomial &p);

// p = unit * prod g_i^i with the g_i squarefree, pairwise coprime, normalized.
// Parts free of variables are dropped (the unit is not reported).
std::vector<std::pair<Polynomial, int>> squarefree_decompose(const Polynomial &p);

// Product of the distinct irreducible factors, normalized.
Polynomial squarefree_part(const Polynomial &p);

} // namespace qelim
