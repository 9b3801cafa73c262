#include "narrowlog/bigint.hpp"

#include <cstdlib>

#include "narrowlog/errors.hpp"

namespace narrowlog {

long v2(const Int& n) {
    if (n == 0) throw ZeroInput("v2 of zero");
    return static_cast<long>(mpz_scan1(n.get_mpz_t(), 0));
}

long valuation(const Int& n, const Int& p) {
    if (n == 0) throw ZeroInput("valuation of zero");
    Int m = abs(n);
    long v = 0;
    while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
        mpz_divexact(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t());
        ++v;
    }
    return v;
}

Int mod_pow2(const Int& n, long e) {
    Int r;
    mpz_fdiv_r_2exp(r.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    return r;
}

Int inv_mod_pow2(const Int& u, long e) {
    if (mpz_even_p(u.get_mpz_t())) throw ZeroInput("inverse of even residue mod 2^e");
    Int m = pow2(e);
    Int r;
    if (mpz_invert(r.get_mpz_t(), u.get_mpz_t(), m.get_mpz_t()) == 0)
        throw ZeroInput("no inverse mod 2^e");
    return r;
}

Int pow2(long e) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, static_cast<unsigned long>(e));
    return r;
}

Int isqrt(const Int& n) {
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

bool is_perfect_square(const Int& n) {
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

int kronecker(const Int& a, const Int& n) {
    return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

bool is_probable_prime(const Int& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 32) != 0;
}

bool is_squarefree(const Int& n) {
    if (n == 0) return false;
    Int m = abs(n);
    if (m == 1) return true;
    for (Int p = 2; p * p * p <= m; ++p) {
        if (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
            mpz_divexact(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t());
            if (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) return false;
        }
    }
    // Remaining cofactor is 1, prime, p*q or a square.
    return !is_perfect_square(m);
}

bool is_fundamental_discriminant(const Int& d) {
    if (d == 1 || d == 0) return false;
    Int r = mod_pow2(d, 2);
    if (r == 1) return is_squarefree(d);
    if (r == 0) {
        Int m = d / 4;
        Int mr;
        mpz_fdiv_r_ui(mr.get_mpz_t(), m.get_mpz_t(), 4);
        if (mr != 2 && mr != 3) return false;
        return is_squarefree(m);
    }
    return false;
}

bool sqrt_mod_prime(const Int& a, const Int& p, Int& root) {
    Int r = a % p;
    if (r < 0) r += p;
    if (r == 0) {
        root = 0;
        return true;
    }
    if (p == 2) {
        root = 1;
        return true;
    }
    if (mpz_kronecker(r.get_mpz_t(), p.get_mpz_t()) != 1) return false;
    // Tonelli-Shanks.
    Int q = p - 1;
    long s = 0;
    while (mpz_even_p(q.get_mpz_t())) {
        q /= 2;
        ++s;
    }
    Int z = 2;
    while (mpz_kronecker(z.get_mpz_t(), p.get_mpz_t()) != -1) ++z;
    Int m = s, c, t, x, b, e2;
    mpz_powm(c.get_mpz_t(), z.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    mpz_powm(t.get_mpz_t(), r.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    Int qp1 = (q + 1) / 2;
    mpz_powm(x.get_mpz_t(), r.get_mpz_t(), qp1.get_mpz_t(), p.get_mpz_t());
    while (t != 1) {
        Int tt = t;
        long i = 0;
        while (tt != 1) {
            mpz_powm_ui(tt.get_mpz_t(), tt.get_mpz_t(), 2, p.get_mpz_t());
            ++i;
            if (Int(i) >= m) return false;
        }
        Int exp;
        mpz_ui_pow_ui(exp.get_mpz_t(), 2, mpz_get_ui(m.get_mpz_t()) - i - 1);
        mpz_powm(b.get_mpz_t(), c.get_mpz_t(), exp.get_mpz_t(), p.get_mpz_t());
        m = i;
        c = b * b % p;
        t = t * c % p;
        x = x * b % p;
    }
    root = x;
    return true;
}

std::string to_string(const Int& n) { return n.get_str(); }

}  // namespace narrowlog
