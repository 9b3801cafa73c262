#include <vector>

#include "doctest.h"
#include "narrowlog/errors.hpp"
#include "narrowlog/padic.hpp"

using namespace narrowlog;

namespace {

// Independent oracle for the 2-adic logarithm: exact rational partial sums of
// log(1+y), evaluated with mpq and reduced 2-adically at the end.
Int oracle_log_unit(const Int& u, long prec) {
    Rat y(u * u - 1);
    Rat acc(0);
    Rat yk(1);
    long terms = (prec + 16) / 3 + 8;
    for (long k = 1; k <= terms; ++k) {
        yk *= y;
        Rat term = yk / Rat(k);
        if (k % 2 == 0) term = -term;
        acc += term;
    }
    acc /= 2;  // Log u = (1/2) log(u^2)
    acc.canonicalize();
    Int num = acc.get_num(), den = acc.get_den();
    long dv = mpz_even_p(den.get_mpz_t()) ? v2(den) : 0;
    if (dv > 0) {
        // the sum is a 2-adic integer, so the numerator carries the 2s
        REQUIRE(v2(num) >= dv);
        num >>= static_cast<unsigned long>(dv);
        den >>= static_cast<unsigned long>(dv);
    }
    return mod_pow2(num * inv_mod_pow2(den, prec), prec);
}

}  // namespace

TEST_CASE("padic representation and arithmetic") {
    Padic a = Padic::from_int(12);  // 4 * 3
    CHECK(a.val() == 2);
    CHECK(a.unit() == 3);

    Padic b = Padic::from_int(20);
    Padic s = a + b;
    CHECK(s.residue(16) == 32);

    Padic q = b / a;  // 5/3
    Padic p = q * a;
    CHECK((p - b).is_zero());

    // cancellation loses precision: (1) + (-1 + 2^k u) has valuation k
    Padic one = Padic::from_int(1, 32);
    Padic c = Padic::from_int(pow2(20) * 7 - 1, 32);
    Padic sum = one + c;
    CHECK(sum.val() == 20);
    CHECK(sum.rel_prec() == 32 - 20);

    // division by a power of 2 is exact in (val, unit) form
    Padic h = Padic::from_int(6).shift(-5);
    CHECK(h.val() == -4);
    CHECK(h.unit() == 3);
}

TEST_CASE("iwasawa log conventions") {
    CHECK(iwasawa_log_int(1).is_zero());
    CHECK(iwasawa_log_int(-1).is_zero());
    CHECK(iwasawa_log_int(2).is_zero());
    CHECK(iwasawa_log_int(-8).is_zero());

    // Log(5) = 12 mod 16, Log(7) = 24 mod 32
    CHECK(iwasawa_log_int(5).residue(4) == 12);
    CHECK(iwasawa_log_int(7).residue(5) == 24);

    CHECK_THROWS_AS(iwasawa_log(Padic::zero(64)), ZeroInput);
}

TEST_CASE("iwasawa log agrees with exact-rational series oracle") {
    for (long u : {3L, 5L, 7L, 9L, 11L, 13L, 177L, 1023L}) {
        Padic l = iwasawa_log_int(u, 80);
        Int expect = oracle_log_unit(u, 40);
        CHECK(l.residue(40) == expect);
    }
}

TEST_CASE("log additivity and squares") {
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(42);
    for (int i = 0; i < 1000; ++i) {
        Int u = rng.get_z_bits(24) * 2 + 1;
        Int v = rng.get_z_bits(24) * 2 + 1;
        Padic lu = iwasawa_log_int(u, 64);
        Padic lv = iwasawa_log_int(v, 64);
        Padic luv = iwasawa_log_int(u * v, 64);
        Padic diff = luv - (lu + lv);
        CHECK(diff.abs_prec() >= 60);
        if (!diff.is_zero()) CHECK(diff.val() >= 60);

        Padic l2 = iwasawa_log_int(u * u, 64);
        Padic d2 = l2 - lu.shift(1);
        if (!d2.is_zero()) CHECK(d2.val() >= 60);
    }
}

TEST_CASE("precision monotonicity") {
    for (long u : {5L, 21L, 333L}) {
        Padic a = iwasawa_log_int(u, 64);
        Padic b = iwasawa_log_int(u, 80);
        CHECK(a.residue(48) == b.residue(48));
    }
}

TEST_CASE("hensel_root") {
    std::vector<Int> f = {Int(-17), Int(0), Int(1)};  // x^2 - 17
    Padic r = hensel_root(f, Padic::from_int(1, 64));
    Int m = r.residue(4);
    CHECK((m == 7 || m == 9));
    Int sq = mod_pow2(r.residue(50) * r.residue(50), 50);
    CHECK(sq == mod_pow2(Int(17), 50));

    std::vector<Int> g = {Int(-3), Int(1)};  // x - 3
    CHECK(hensel_root(g, Padic::from_int(3, 64)).residue(20) == 3);

    std::vector<Int> h = {Int(1), Int(0), Int(1)};  // x^2 + 1
    CHECK_THROWS_AS(hensel_root(h, Padic::from_int(1, 64)), NotLiftable);
}

TEST_CASE("padic_sqrt") {
    Padic r = padic_sqrt(Padic::from_int(17, 64));
    CHECK(mod_pow2(r.residue(40) * r.residue(40), 40) == 17);
    Padic four = Padic::from_int(4, 64);
    CHECK(padic_sqrt(four).residue(10) == 2);
    CHECK_THROWS_AS(padic_sqrt(Padic::from_int(-1, 64)), NotLiftable);
    CHECK_THROWS_AS(padic_sqrt(Padic::from_int(2, 64)), NotLiftable);
}
