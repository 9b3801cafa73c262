#include <set>
#include <utility>

#include "doctest.h"
#include "narrowlog/errors.hpp"
#include "narrowlog/localfield.hpp"

using namespace narrowlog;

namespace {
LocalField base_field() { return LocalField({Int(0), Int(1)}, Int(2)); }
}

TEST_CASE("base field structure") {
    LocalField K = base_field();
    CHECK(K.degree() == 1);
    CHECK(K.ram_index() == 1);
    CHECK(K.res_degree() == 1);
    CHECK(K.val(K.from_int(2)) == 1);
    CHECK(K.val(K.from_int(12)) == 2);
    CHECK(K.val(K.one()) == 0);
}

TEST_CASE("ramified and unramified quadratic structure") {
    // x^2 - 17: 17 = 1 mod 8, so theta = sqrt(17) lies in Q_2; the polynomial
    // is reducible and not a valid field input -- use genuine extensions.
    LocalField unram({Int(-5), Int(0), Int(1)}, Int(2));  // Q_2(sqrt 5)
    CHECK(unram.ram_index() == 1);
    CHECK(unram.res_degree() == 2);
    CHECK(unram.val(unram.from_int(2)) == 1);
    CHECK(unram.val(unram.theta()) == 0);

    LocalField ram({Int(-2), Int(0), Int(1)}, Int(2));  // Q_2(sqrt 2)
    CHECK(ram.ram_index() == 2);
    CHECK(ram.res_degree() == 1);
    CHECK(ram.val(ram.from_int(2)) == 2);
    CHECK(ram.val(ram.theta()) == 1);

    LocalField rami({Int(1), Int(0), Int(1)}, Int(2));  // Q_2(i)
    CHECK(rami.ram_index() == 2);
    CHECK(rami.val(rami.add(rami.theta(), rami.one())) == 1);  // 1+i uniformizer
}

TEST_CASE("maximal order is found for a non-reduced generator") {
    // x^2 + 4: theta = 2i generates a non-maximal order of Q_2(i)
    LocalField K({Int(4), Int(0), Int(1)}, Int(2));
    CHECK(K.ram_index() == 2);
    CHECK(K.res_degree() == 1);
    CHECK(K.val(K.theta()) == 2);           // 2i has valuation 2 in Q_2(i)
    CHECK(K.val(K.from_int(2)) == 2);
    // theta/2 = i is integral in the maximal order
    LFElem i_elem = K.from_poly({Int(0), Int(1)}, 1);
    CHECK(K.val(i_elem) == 0);
    LFElem sq = K.mul(i_elem, i_elem);
    CHECK(K.is_zero(K.add(sq, K.one())));  // i^2 = -1
}

TEST_CASE("norms via resultants") {
    LocalField K = base_field();
    long den;
    CHECK(K.norm_int(K.from_int(5), den) == 5);
    CHECK(den == 0);

    LocalField L({Int(17), Int(0), Int(1)}, Int(2));  // x^2 + 17
    Int n = L.norm_int(L.theta(), den);
    CHECK(n == 17);

    // quadratic norm form: N(a + b*theta) = a^2 - d b^2 for theta^2 = d;
    // the resultant is computed over canonical lifts, so compare mod 2^200
    LocalField M({Int(-3), Int(0), Int(1)}, Int(2));
    for (long a = 1; a <= 5; ++a)
        for (long b = 1; b <= 5; ++b) {
            LFElem x = M.add(M.from_int(a), M.mul_int(M.theta(), Int(b)));
            Int nx = M.norm_int(x, den);
            CHECK(mod_pow2(nx, 200) == mod_pow2(Int(a * a - 3 * b * b), 200));
        }
}

TEST_CASE("norm multiplicativity") {
    LocalField K({Int(-2), Int(0), Int(1)}, Int(2));
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(23);
    for (int i = 0; i < 500; ++i) {
        LFElem x = K.add(K.from_int(Int(rng.get_z_range(Int(200))) - 100),
                         K.mul_int(K.theta(), Int(rng.get_z_range(Int(200))) - 100));
        LFElem y = K.add(K.from_int(Int(rng.get_z_range(Int(200))) - 100),
                         K.mul_int(K.theta(), Int(rng.get_z_range(Int(200))) - 100));
        if (K.is_zero(x) || K.is_zero(y)) continue;
        Padic nx = K.norm2(x), ny = K.norm2(y), nxy = K.norm2(K.mul(x, y));
        Padic diff = nxy - nx * ny;
        if (!diff.is_zero()) CHECK(diff.val() >= 500);
    }
}

TEST_CASE("is_square on the base field") {
    LocalField K = base_field();
    LFElem root;
    CHECK(K.is_square(K.from_int(4), &root));
    LFElem sq = K.mul(root, root);
    CHECK(K.is_zero(K.sub(sq, K.from_int(4))));

    CHECK(K.is_square(K.from_int(17), &root));
    LFElem chk = K.sub(K.mul(root, root), K.from_int(17));
    CHECK((K.is_zero(chk) || K.val(chk) >= 64));

    CHECK_FALSE(K.is_square(K.from_int(-1)));
    CHECK_FALSE(K.is_square(K.from_int(2)));
    CHECK_FALSE(K.is_square(K.from_int(5)));
    CHECK_FALSE(K.is_square(K.from_int(3)));
    CHECK(K.is_square(K.from_int(9)));
    CHECK(K.is_square(K.from_int(-7)));
}

TEST_CASE("is_square agrees with exhaustive residue search") {
    // base field: u odd square iff u = 1 mod 8; check all residues mod 2^5
    LocalField K = base_field();
    for (long u = 1; u < 32; u += 2) {
        bool expect = (u % 8) == 1;
        CHECK(K.is_square(K.from_int(u)) == expect);
    }
    // ramified quadratic Q_2(sqrt 2): exhaustive x^2 residues mod pi^(2e+3)
    LocalField R({Int(-2), Int(0), Int(1)}, Int(2));
    // units a + b sqrt2, a odd: squares mod 2^4 coefficientwise
    auto canon = [&](const LFElem& x) {
        std::vector<Int> g;
        long den;
        R.to_poly(x, g, den);
        return std::make_pair(mod_pow2(g[0], 4), mod_pow2(g[1], 4));
    };
    std::set<std::pair<Int, Int>> squares;
    for (long a = 1; a < 16; a += 2)
        for (long b = 0; b < 16; ++b) {
            LFElem x = R.add(R.from_int(a), R.mul_int(R.theta(), Int(b)));
            squares.insert(canon(R.mul(x, x)));
        }
    for (long a = 1; a < 16; a += 2)
        for (long b = 0; b < 16; ++b) {
            LFElem u = R.add(R.from_int(a), R.mul_int(R.theta(), Int(b)));
            bool brute = squares.count(canon(u)) > 0;
            CHECK(R.is_square(u) == brute);
        }
}

TEST_CASE("local torsion orders") {
    LocalField K = base_field();
    CHECK(K.torsion_order() == 2);

    LocalField Ki({Int(1), Int(0), Int(1)}, Int(2));  // Q_2(i)
    CHECK(Ki.torsion_order() == 4);

    LocalField Km2({Int(2), Int(0), Int(1)}, Int(2));  // Q_2(sqrt -2)
    CHECK(Km2.torsion_order() == 2);

    LocalField K8({Int(-2), Int(0), Int(0), Int(0), Int(1)}, Int(2));  // x^4 - 2
    CHECK(K8.torsion_order() == 2);

    LocalField Kz8({Int(9), Int(0), Int(-2), Int(0), Int(1)}, Int(2));  // Q_2(zeta_8)
    CHECK(Kz8.torsion_order() == 8);

    LocalField Q3({Int(0), Int(1)}, Int(3));
    CHECK(Q3.torsion_order() == 1);

    LocalField Q3z({Int(3), Int(0), Int(1)}, Int(3));  // Q_3(sqrt -3) = Q_3(zeta_3)
    CHECK(Q3z.torsion_order() == 3);

    LocalField Q3r({Int(-3), Int(0), Int(1)}, Int(3));  // Q_3(sqrt 3): no zeta_3
    CHECK(Q3r.torsion_order() == 1);
}

TEST_CASE("first cyclotomic step") {
    LocalField K = base_field();
    LocalField E = first_cyclotomic_step(K);  // Q_2(sqrt 2)
    CHECK(E.degree() == 2);
    CHECK(E.ram_index() == 2);
    // sqrt 2 lives in E
    CHECK(E.is_square(E.from_int(2)));

    LocalField R({Int(-2), Int(0), Int(1)}, Int(2));  // Q_2(sqrt 2)
    LocalField E2 = first_cyclotomic_step(R);         // Q_2(sqrt(2+sqrt2)), degree 4
    CHECK(E2.degree() == 4);
    CHECK(E2.ram_index() == 4);

    LocalField Ki({Int(1), Int(0), Int(1)}, Int(2));  // Q_2(i)
    LocalField E3 = first_cyclotomic_step(Ki);        // Q_2(zeta_8) = Q_2(i, sqrt2)
    CHECK(E3.degree() == 4);
    CHECK(E3.is_square(E3.from_int(2)));
    CHECK(E3.is_square(E3.from_int(-1)));
}

TEST_CASE("exceptional dyadic places") {
    LocalField K = base_field();
    CHECK(is_exceptional_dyadic(K));  // i not in Q_2(sqrt 2)

    LocalField Ki({Int(1), Int(0), Int(1)}, Int(2));
    CHECK_FALSE(is_exceptional_dyadic(Ki));  // i already there

    LocalField Km2({Int(2), Int(0), Int(1)}, Int(2));  // Q_2(sqrt -2)
    CHECK_FALSE(is_exceptional_dyadic(Km2));  // i = sqrt(-2) sqrt(2) / 2 in E

    LocalField Kr2({Int(-2), Int(0), Int(1)}, Int(2));  // Q_2(sqrt 2)
    CHECK(is_exceptional_dyadic(Kr2));

    LocalField Ku({Int(-5), Int(0), Int(1)}, Int(2));  // unramified
    CHECK(is_exceptional_dyadic(Ku));

    LocalField Km5({Int(5), Int(0), Int(1)}, Int(2));  // Q_2(sqrt -5)
    CHECK(is_exceptional_dyadic(Km5));

    // Q_2(sqrt 7) = Q_2(sqrt -1): not exceptional
    LocalField K7({Int(-7), Int(0), Int(1)}, Int(2));
    CHECK_FALSE(is_exceptional_dyadic(K7));

    // agreement with the direct route through E_p on small cases
    for (long d : {-1L, -2L, 2L, -5L, 5L, -7L}) {
        LocalField Kd({Int(-d), Int(0), Int(1)}, Int(2));
        LocalField E = first_cyclotomic_step(Kd);
        bool direct = !E.is_square(E.from_int(-1));
        CHECK(is_exceptional_dyadic(Kd) == direct);
    }
}

TEST_CASE("cross-route: tower agreement on the base field") {
    LocalField K = base_field();
    LocalField E = first_cyclotomic_step(K);
    CHECK(is_exceptional_dyadic(K) == !E.is_square(E.from_int(-1)));
}
