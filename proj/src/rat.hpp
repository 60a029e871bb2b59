#pragma once

#include <gmpxx.h>
#include <optional>
#include <string>

namespace qelim {

using Int = mpz_class;
using Rat = mpq_class;

inline int sgn(const Rat &q) { return sgn(q.get_num()); }
inline int sgn(const Int &z) { return mpz_sgn(z.get_mpz_t()); }

inline Int num(const Rat &q) { return q.get_num(); }
inline Int den(const Rat &q) { return q.get_den(); }

inline Int floor_int(const Rat &q) {
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Int ceil_int(const Rat &q) {
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Rat rat_abs(const Rat &q) { return q < 0 ? Rat(-q) : q; }

inline Rat rat_pow(const Rat &base, unsigned long e) {
  Rat r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), e);
  r.canonicalize();
  return r;
}

inline Int int_pow(const Int &base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

// Smallest-denominator rational in the closed interval [lo, hi].
// Ties among integers resolve toward zero.
Rat simplest_in(const Rat &lo, const Rat &hi);

std::string rat_to_string(const Rat &q);

// Accepts "n" or "n/d" with optional leading minus. Empty optional on junk.
std::optional<Rat> rat_parse(const std::string &s);

} // namespace qelim
