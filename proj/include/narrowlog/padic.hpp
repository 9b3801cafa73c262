#ifndef NARROWLOG_PADIC_HPP
#define NARROWLOG_PADIC_HPP

#include <iosfwd>

#include "narrowlog/bigint.hpp"

namespace narrowlog {

// A 2-adic number at finite precision, stored as 2^val * unit with the unit
// odd and canonical modulo 2^rel.  Absolute precision is val + rel, so
// division by a power of 2 is exact and precision loss happens only where it
// mathematically must (additive cancellation).
//
// A zero value means "zero to absolute precision abs_prec()".
class Padic {
  public:
    Padic() : zero_(true), val_(0), unit_(0), rel_(DEFAULT_REL) {}

    // Interpret n as an exact integer known to relative precision rel.
    static Padic from_int(const Int& n, long rel = DEFAULT_REL);
    // Value n / 2^denexp.
    static Padic from_ratio2(const Int& n, long denexp, long rel = DEFAULT_REL);
    // Zero to absolute precision abs.
    static Padic zero(long abs_prec);
    // 2^val * unit with unit odd, unit reduced mod 2^rel.
    static Padic make(long val, const Int& unit, long rel);

    bool is_zero() const { return zero_; }
    long val() const;           // throws ZeroInput when zero
    const Int& unit() const;    // throws ZeroInput when zero
    long rel_prec() const { return rel_; }
    long abs_prec() const { return zero_ ? val_ : val_ + rel_; }

    Padic operator-() const;
    Padic operator+(const Padic& o) const;
    Padic operator-(const Padic& o) const;
    Padic operator*(const Padic& o) const;
    Padic operator/(const Padic& o) const;

    Padic pow(const Int& k) const;
    // Multiply by 2^k (exact).
    Padic shift(long k) const;

    // Truncate/extend bookkeeping to relative precision r.
    Padic with_rel(long r) const;

    // Canonical residue mod 2^e.  Requires val >= 0 (2-adic integer) and
    // abs_prec >= e; throws PrecisionExhausted otherwise.
    Int residue(long e) const;

    // True when the value is known nonzero, i.e. not flagged zero.
    bool known_nonzero() const { return !zero_; }

    std::string str() const;

    static constexpr long DEFAULT_REL = 96;

  private:
    bool zero_;
    long val_;
    Int unit_;
    long rel_;
};

std::ostream& operator<<(std::ostream& os, const Padic& x);

// Iwasawa logarithm: Log(2) = 0, Log(-1) = 0, computed as (1/2) log(u^2) via
// the power series on 1 + 8 Z_2.  Input must be nonzero to precision.
Padic iwasawa_log(const Padic& x);

// Iwasawa log of a nonzero integer at relative precision rel.
Padic iwasawa_log_int(const Int& n, long rel = Padic::DEFAULT_REL);

// Iwasawa log of a nonzero rational.
Padic iwasawa_log_rat(const Int& num, const Int& den, long rel = Padic::DEFAULT_REL);

// Newton iteration for a root of f (integer coefficients, ascending) from
// approximation x0; requires v2(f(x0)) > 2 v2(f'(x0)).
Padic hensel_root(const std::vector<Int>& f, const Padic& x0, long rel = Padic::DEFAULT_REL);

// Square root of a 2-adic square (val even, unit = 1 mod 8), with the
// convention that the returned unit is = 1 mod 4.
Padic padic_sqrt(const Padic& x);

}  // namespace narrowlog

#endif
