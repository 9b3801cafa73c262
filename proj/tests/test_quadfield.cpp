#include <map>
#include <set>

#include "doctest.h"
#include "narrowlog/errors.hpp"
#include "narrowlog/quadfield.hpp"

using namespace narrowlog;

TEST_CASE("prime decomposition") {
    QuadField F68(-68);
    CHECK(F68.kind_of(2) == PrimeKind::Ramified);
    CHECK(F68.kind_of(3) == PrimeKind::Split);

    QuadField F7(-7);
    CHECK(F7.kind_of(2) == PrimeKind::Split);

    QuadField F5(5);
    CHECK(F5.kind_of(2) == PrimeKind::Inert);

    Decomposition D = decompose_prime(F68, 3);
    CHECK(ideal_norm(F68, D.first) == Rat(3));
    QuadIdeal prod = ideal_mul(F68, D.first, D.second);
    CHECK(ideal_norm(F68, prod) == Rat(9));
    QuadIdeal p3 = ideal_of(F68, AlgNum(3, 0, 1));
    CHECK(ideal_eq(prod, p3));
}

TEST_CASE("ideal arithmetic sanity") {
    QuadField F(-68);
    Decomposition D2 = decompose_prime(F, 2);
    QuadIdeal sq = ideal_mul(F, D2.first, D2.first);
    QuadIdeal two = ideal_of(F, AlgNum(2, 0, 1));
    CHECK(ideal_eq(sq, two));

    AlgNum a(3, 1, 1), b(5, -2, 1);
    QuadIdeal lhs = ideal_mul(F, ideal_of(F, a), ideal_of(F, b));
    QuadIdeal rhs = ideal_of(F, an_mul(F, a, b));
    CHECK(ideal_eq(lhs, rhs));

    QuadIdeal I = decompose_prime(F, 3).first;
    QuadIdeal Iinv = ideal_pow(F, I, -1);
    CHECK(ideal_eq(ideal_mul(F, I, Iinv), ideal_one(F)));
}

TEST_CASE("class groups of small fields") {
    {
        ClassGroupCtx cl((QuadField(5)));
        CHECK(cl.h() == 1);
        CHECK(cl.invariant_factors().empty());
    }
    {
        ClassGroupCtx cl((QuadField(-68)));
        CHECK(cl.h() == 4);
        CHECK(cl.invariant_factors() == std::vector<Int>{4});
    }
    {
        ClassGroupCtx cl((QuadField(-23)));
        CHECK(cl.h() == 3);
        CHECK(cl.invariant_factors() == std::vector<Int>{3});
    }
    {
        ClassGroupCtx cl((QuadField(-420)));
        CHECK(cl.invariant_factors() == std::vector<Int>{2, 2, 2});
    }
    {
        ClassGroupCtx cl((QuadField(28)));
        CHECK(cl.h() == 1);
        CHECK(cl.h_narrow() == 2);
        CHECK_FALSE(cl.unit_norm_is_minus_one());
    }
    {
        ClassGroupCtx cl((QuadField(476)));
        CHECK(cl.h() == 2);
        CHECK(cl.invariant_factors() == std::vector<Int>{2});
    }
}

TEST_CASE("fundamental units") {
    {
        ClassGroupCtx cl((QuadField(5)));
        CHECK(an_eq(cl.fundamental_unit(), AlgNum(1, 1, 2)));
        CHECK(an_norm(QuadField(5), cl.fundamental_unit()) == Rat(-1));
    }
    {
        ClassGroupCtx cl((QuadField(8)));
        CHECK(an_eq(cl.fundamental_unit(), AlgNum(2, 1, 2)));
        CHECK(an_norm(QuadField(8), cl.fundamental_unit()) == Rat(-1));
    }
    {
        ClassGroupCtx cl((QuadField(28)));
        CHECK(an_eq(cl.fundamental_unit(), AlgNum(16, 3, 2)));
        CHECK(an_norm(QuadField(28), cl.fundamental_unit()) == Rat(1));
    }
    for (long d : {12L, 13L, 17L, 21L, 24L, 33L, 40L, 56L, 60L, 92L, 124L}) {
        QuadField F{Int(d)};
        ClassGroupCtx cl(F);
        Rat n = an_norm(F, cl.fundamental_unit());
        CHECK((n == Rat(1) || n == Rat(-1)));
    }
}

TEST_CASE("unit minimality for small discriminants") {
    for (long d : {5L, 8L, 12L, 13L, 28L}) {
        QuadField F{Int(d)};
        ClassGroupCtx cl(F);
        AlgNum eps = cl.fundamental_unit();
        bool found_smaller = false;
        for (long y = 1; y < 2000 && !found_smaller; ++y) {
            Int dy2 = Int(d) * y * y;
            for (long s : {-4L, 4L}) {
                Int x2 = dy2 + s;
                if (x2 <= 0 || !is_perfect_square(x2)) continue;
                Int x = isqrt(x2);
                AlgNum u(x, y, 2);
                // a unit with 1 < u < eps would contradict minimality
                AlgNum above_one = an_add(u, AlgNum(-1, 0, 1));
                AlgNum below_eps = an_add(eps, an_neg(u));
                if (!above_one.is_zero() && !below_eps.is_zero() &&
                    real_signs(F, above_one)[0] == 0 && real_signs(F, below_eps)[0] == 0 &&
                    !an_eq(u, eps))
                    found_smaller = true;
            }
        }
        CHECK_FALSE(found_smaller);
    }
}

TEST_CASE("principal generators") {
    {
        QuadField F(-68);
        ClassGroupCtx cl(F);
        QuadIdeal p2 = decompose_prime(F, 2).first;
        auto g = cl.principal_generator(ideal_pow(F, p2, 2));
        REQUIRE(g.has_value());
        CHECK(abs(an_norm(F, *g)) == Rat(4));
        CHECK(ideal_eq(ideal_of(F, *g), ideal_of(F, AlgNum(2, 0, 1))));

        auto ng = cl.principal_generator(decompose_prime(F, 3).first);
        CHECK_FALSE(ng.has_value());
    }
    {
        QuadField F(-23);
        ClassGroupCtx cl(F);
        QuadIdeal q = decompose_prime(F, 2).first;
        CHECK_FALSE(cl.principal_generator(q).has_value());
        CHECK_FALSE(cl.principal_generator(ideal_pow(F, q, 2)).has_value());
        auto g = cl.principal_generator(ideal_pow(F, q, 3));
        REQUIRE(g.has_value());
        CHECK(abs(an_norm(F, *g)) == Rat(8));
    }
    {
        QuadField F(60);
        ClassGroupCtx cl(F);
        QuadIdeal q5 = decompose_prime(F, 5).first;
        auto g = cl.principal_generator(ideal_pow(F, q5, 2));
        REQUIRE(g.has_value());
        CHECK(ideal_eq(ideal_of(F, *g), ideal_pow(F, q5, 2)));
    }
}

TEST_CASE("real signs") {
    QuadField F(8);
    CHECK(real_signs(F, AlgNum(-1, 0, 1)) == std::vector<int>{1, 1});
    CHECK(real_signs(F, AlgNum(2, 1, 2)) == std::vector<int>{0, 1});
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(5);
    for (int i = 0; i < 200; ++i) {
        AlgNum a(Int(rng.get_z_range(Int(41))) - 20, Int(rng.get_z_range(Int(41))) - 20, 1);
        if (a.is_zero()) continue;
        Rat n = an_norm(F, a);
        auto sg = real_signs(F, a);
        bool differ = sg[0] != sg[1];
        CHECK(differ == (n < 0));
    }
}

TEST_CASE("two unit group ranks") {
    {
        QuadField F(-68);
        ClassGroupCtx cl(F);
        CHECK(two_unit_group(F, cl).gens.size() == 1);
    }
    {
        QuadField F(28);
        ClassGroupCtx cl(F);
        CHECK(two_unit_group(F, cl).gens.size() == 2);
    }
    {
        QuadField F(-7);
        ClassGroupCtx cl(F);
        CHECK(two_unit_group(F, cl).gens.size() == 2);
    }
    for (long d : {-68L, 28L, -7L, 60L, -24L, 105L}) {
        QuadField F{Int(d)};
        ClassGroupCtx cl(F);
        TwoUnitGroup tu = two_unit_group(F, cl);
        CHECK(static_cast<long>(tu.gens.size()) == F.r + F.c + F.dyadic_place_count() - 1);
        for (const auto& g : tu.gens) {
            Rat n = abs(an_norm(F, g.value));
            Int num = n.get_num(), den = n.get_den();
            Int t1 = num & (num - 1), t2 = den & (den - 1);
            CHECK(t1 == 0);
            CHECK(t2 == 0);
        }
    }
}

TEST_CASE("class relations supply principal certificates") {
    for (long d : {-68L, -164L, 476L, -23L, -420L, 924L}) {
        QuadField F{Int(d)};
        ClassGroupCtx cl(F);
        ClassRelationData cr = class_relations(F, cl);
        for (size_t j = 0; j < cr.relations.size(); ++j) {
            const auto& rel = cr.relations[j];
            for (size_t i = 0; i < cr.class_primes.size(); ++i) {
                long v = ideal_valuation(F, rel.value, cr.class_primes[i], cr.class_ideals[i],
                                         F.kind_of(cr.class_primes[i]));
                CHECK(v == rel.class_vals[i].get_si());
            }
            Rat n = abs(an_norm(F, rel.value));
            Int num = n.get_num() * n.get_den();
            for (size_t i = 0; i < cr.class_primes.size(); ++i) {
                while (mpz_divisible_p(num.get_mpz_t(), cr.class_primes[i].get_mpz_t()))
                    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), cr.class_primes[i].get_mpz_t());
            }
            while (mpz_even_p(num.get_mpz_t())) num /= 2;
            CHECK(num == 1);
        }
    }
}

TEST_CASE("imaginary class numbers spot checks") {
    std::map<long, long> known = {{-3, 1},   {-4, 1},   {-7, 1},  {-8, 1},  {-23, 3},
                                  {-47, 5},  {-68, 4},  {-71, 7}, {-84, 4}, {-95, 8},
                                  {-132, 4}, {-164, 8}, {-420, 8}};
    for (const auto& [d, h] : known) {
        ClassGroupCtx cl((QuadField(Int(d))));
        CHECK(cl.h() == h);
    }
}

TEST_CASE("narrow vs ordinary class number for real fields") {
    std::map<long, std::pair<long, long>> known = {
        {5, {1, 1}},  {8, {1, 1}},   {12, {1, 2}},  {28, {1, 2}},
        {60, {2, 4}}, {476, {2, 4}}, {924, {4, 8}},
    };
    for (const auto& [d, hh] : known) {
        ClassGroupCtx cl((QuadField(Int(d))));
        CHECK(cl.h() == hh.first);
        CHECK(cl.h_narrow() == hh.second);
    }
}
