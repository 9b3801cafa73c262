#ifndef NARROWLOG_BIGINT_HPP
#define NARROWLOG_BIGINT_HPP

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace narrowlog {

using Int = mpz_class;
using Rat = mpq_class;

// 2-adic valuation of n != 0.
long v2(const Int& n);

// Valuation of n at an arbitrary prime p.
long valuation(const Int& n, const Int& p);

// Canonical representative of n modulo 2^e, in [0, 2^e).
Int mod_pow2(const Int& n, long e);

// Inverse of odd u modulo 2^e.
Int inv_mod_pow2(const Int& u, long e);

Int pow2(long e);

// Floor of the integer square root; requires n >= 0.
Int isqrt(const Int& n);

bool is_perfect_square(const Int& n);

// Kronecker symbol (a|n).
int kronecker(const Int& a, const Int& n);

bool is_probable_prime(const Int& n);

// Squarefree test by trial division + final square check; intended for the
// table-scale inputs (|n| up to ~10^7).
bool is_squarefree(const Int& n);

// Fundamental discriminant test: d = 1 is excluded.
bool is_fundamental_discriminant(const Int& d);

// A square root of a modulo odd prime p, if one exists (Tonelli-Shanks).
bool sqrt_mod_prime(const Int& a, const Int& p, Int& root);

std::string to_string(const Int& n);

}  // namespace narrowlog

#endif
