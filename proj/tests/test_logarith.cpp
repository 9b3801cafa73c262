#include "doctest.h"
#include "narrowlog/errors.hpp"
#include "narrowlog/logarith.hpp"
#include "narrowlog/report.hpp"

using namespace narrowlog;

TEST_CASE("log valuation conventions (rational toy case)") {
    // with deg(2) := Log 5, the valuation of 5 at the dyadic place is -1
    Padic log5 = iwasawa_log_int(5, 80);
    Padic tv = log_valuation(log5, log5);
    CHECK(tv.val() == 0);
    CHECK(mod_pow2(tv.residue(10) + 1, 10) == 0);  // tv = -1

    // 2 has Log N = Log 2 = 0: logarithmic unit at the dyadic place
    Padic tv2 = log_valuation(Padic::zero(60), log5);
    CHECK(tv2.is_zero());

    // product formula for 5 in the rational toy case: v_5(5) Log 5 + tv * deg = 0
    Padic res = product_formula_residual({Int(1)}, {log5}, {tv}, {log5});
    CHECK((res.is_zero() || res.val() >= 70));
}

TEST_CASE("place degree selection") {
    std::vector<Padic> samples = {Padic::zero(50), iwasawa_log_int(7, 64), iwasawa_log_int(5, 64)};
    Padic deg = place_degree_from_samples(samples);
    CHECK(deg.val() == 2);  // Log 5 has valuation 2, Log 7 valuation 3
    CHECK_THROWS_AS(place_degree_from_samples({Padic::zero(10)}), PrecisionExhausted);
}

TEST_CASE("pipeline reproduces published logarithmic class groups") {
    struct Row {
        long d;
        std::vector<long> log_cl, res;
    };
    std::vector<Row> rows = {
        {-68, {2}, {2}},   {-164, {4}, {4}},  {-584, {8}, {8}},  {-420, {2, 2}, {2, 2}},
        {28, {}, {2}},     {476, {2}, {2, 2}}, {924, {2}, {2, 2}}, {60, {}, {2}},
    };
    for (const auto& row : rows) {
        FieldReport rep = analyze_quadratic(Int(row.d));
        std::vector<Int> want_log(row.log_cl.begin(), row.log_cl.end());
        std::vector<Int> want_res(row.res.begin(), row.res.end());
        CHECK(rep.log_cl == want_log);
        CHECK(rep.log_cl_res == want_res);
    }
}

TEST_CASE("precision stability e=32 vs e=64") {
    for (long d : {-68L, -164L, 28L, 476L, -23L, 105L}) {
        AnalyzeOptions o32;
        o32.precision = 32;
        AnalyzeOptions o64;
        o64.precision = 64;
        FieldReport a = analyze_quadratic(Int(d), o32);
        FieldReport b = analyze_quadratic(Int(d), o64);
        CHECK(a.log_cl == b.log_cl);
        CHECK(a.log_cl_res == b.log_cl_res);
    }
}

TEST_CASE("split fields run and short-circuit the rank") {
    FieldReport rep = analyze_quadratic(Int(-7));
    CHECK(rep.P_count == 2);
    CHECK(rep.PE_count == 2);
    CHECK_FALSE(rep.rk2.has_value());
    CHECK(rep.rank_case == "n/a");

    // split with nontrivial class group exercises the 2-column nullspace
    FieldReport rep2 = analyze_quadratic(Int(-23));
    CHECK(rep2.P_count == 2);
    CHECK(rep2.cl == std::vector<Int>{3});
    CHECK(rep2.log_cl.empty());
}

TEST_CASE("monotonicity of narrow over ordinary") {
    for (long d : {-68L, 28L, 60L, 476L, 924L, -132L, -164L}) {
        FieldReport rep = analyze_quadratic(Int(d));
        Int no = 1, oo = 1;
        for (const auto& f : rep.log_cl_res) no *= f;
        for (const auto& f : rep.log_cl) oo *= f;
        CHECK(mpz_divisible_p(no.get_mpz_t(), oo.get_mpz_t()));
        Int q = no / oo;
        CHECK(q <= pow2(rep.r));
    }
}
