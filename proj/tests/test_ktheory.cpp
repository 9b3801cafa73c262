#include "doctest.h"
#include "narrowlog/errors.hpp"
#include "narrowlog/ktheory.hpp"

using namespace narrowlog;

namespace {
std::vector<Int> grp(std::initializer_list<long> v) { return std::vector<Int>(v.begin(), v.end()); }
}

TEST_CASE("quadratic exceptionality closed form") {
    CHECK_FALSE(is_exceptional_quadratic(Int(-4)));
    CHECK_FALSE(is_exceptional_quadratic(Int(-8)));
    CHECK(is_exceptional_quadratic(Int(-68)));
    CHECK(is_exceptional_quadratic(Int(28)));
    CHECK(is_exceptional_quadratic(Int(5)));
}

TEST_CASE("index formula") {
    CHECK(k2_index_formula(0, Int(2), {Int(4)}) == 2);          // imaginary, mu1 = 4
    CHECK(k2_index_formula(2, Int(2), {Int(4)}) == 8);          // real, one dyadic place
    CHECK(k2_index_formula(0, Int(2), {Int(4), Int(3)}) == 6);  // with a triadic contribution
    CHECK(k2_index_formula(0, Int(6), {Int(2), Int(3)}) == 1);
    CHECK_THROWS_AS(k2_index_formula(0, Int(6), {Int(4)}), Error);
}

TEST_CASE("subgroup structures by partition dominance") {
    auto subs = subgroup_structures(grp({2, 8}), Int(2));
    CHECK(subs.size() == 2);  // [8] and [2,4]
    CHECK(std::find(subs.begin(), subs.end(), grp({8})) != subs.end());
    CHECK(std::find(subs.begin(), subs.end(), grp({2, 4})) != subs.end());

    auto s2 = subgroup_structures(grp({2, 16}), Int(2));
    CHECK(s2.size() == 2);  // [16], [2,8]

    auto s3 = subgroup_structures(grp({12}), Int(6));
    CHECK(s3 == std::vector<std::vector<Int>>{grp({2})});

    auto s4 = subgroup_structures(grp({3}), Int(2));
    CHECK(s4.empty());

    auto s5 = subgroup_structures(grp({4}), Int(1));
    CHECK(s5 == std::vector<std::vector<Int>>{grp({4})});
}

TEST_CASE("wild kernel structure deductions from the published rows") {
    {
        StructureDeduction d = deduce_wk2_structure(grp({8}), Int(2), 1, true);
        REQUIRE(d.wk_unique());
        CHECK(d.wk_candidates[0] == grp({4}));
        REQUIRE(d.k2inf_unique());
        CHECK(d.k2inf_candidates[0] == grp({2}));
    }
    {
        StructureDeduction d = deduce_wk2_structure(grp({2, 16}), Int(2), 2, true);
        REQUIRE(d.wk_unique());
        CHECK(d.wk_candidates[0] == grp({2, 8}));
        CHECK_FALSE(d.k2inf_unique());  // [8] and [2,4] both possible
        CHECK(d.k2inf_candidates.size() == 2);
    }
    {
        StructureDeduction d = deduce_wk2_structure(grp({36}), Int(6), 1, true);
        REQUIRE(d.wk_unique());
        CHECK(d.wk_candidates[0] == grp({6}));
        REQUIRE(d.k2inf_unique());
        CHECK(d.k2inf_candidates[0] == grp({3}));
    }
    {
        StructureDeduction d = deduce_wk2_structure(grp({2, 4}), Int(2), 2, true);
        REQUIRE(d.wk_unique());
        CHECK(d.wk_candidates[0] == grp({2, 2}));
        REQUIRE(d.k2inf_unique());
        CHECK(d.k2inf_candidates[0] == grp({2}));
    }
    {
        StructureDeduction d = deduce_wk2_structure(grp({2, 6}), Int(3), 2, true);
        REQUIRE(d.wk_unique());
        CHECK(d.wk_candidates[0] == grp({2, 2}));
        REQUIRE(d.k2inf_unique());
        CHECK(d.k2inf_candidates[0] == grp({2}));
    }
    {
        // case (i): K2inf equals the wild kernel
        StructureDeduction d = deduce_wk2_structure(grp({4}), Int(1), 1, false);
        REQUIRE(d.wk_unique());
        CHECK(d.wk_candidates[0] == grp({4}));
        CHECK(d.k2inf_candidates[0] == grp({4}));
    }
    CHECK_THROWS_AS(deduce_wk2_structure(grp({3}), Int(2), 1, true), Inconsistent);
}

TEST_CASE("rank case dispatch") {
    WildKernelRank r1 = wild_kernel_2rank(true, 0, grp({2, 2}));
    CHECK(r1.tag == RankCase::Exceptional);
    CHECK(*r1.rank == 2);

    WildKernelRank r2 = wild_kernel_2rank(true, 2, grp({2}));
    CHECK(r2.tag == RankCase::NotApplicable);
    CHECK_FALSE(r2.rank.has_value());

    WildKernelRank r3 = wild_kernel_2rank(false, 0, {});
    CHECK(r3.tag == RankCase::NotExceptional);
    CHECK(*r3.rank == 0);
}
