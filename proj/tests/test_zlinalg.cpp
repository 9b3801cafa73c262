#include <set>
#include <vector>

#include "doctest.h"
#include "narrowlog/zlinalg.hpp"

using namespace narrowlog;

namespace {

IntMatrix from_rows(const std::vector<std::vector<long>>& rows) {
    IntMatrix m(static_cast<long>(rows.size()), rows.empty() ? 0 : static_cast<long>(rows[0].size()));
    for (long i = 0; i < m.rows; ++i)
        for (long j = 0; j < m.cols; ++j) m.at(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return m;
}

// Membership of vector x in the column lattice of H (H in column-echelon
// form from hnf()).
bool in_lattice(const IntMatrix& H, std::vector<Int> x) {
    long col = 0;
    for (long r = 0; r < H.rows; ++r) {
        if (col < H.cols && H.at(r, col) != 0) {
            Int q, rem;
            mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), x[static_cast<size_t>(r)].get_mpz_t(),
                        H.at(r, col).get_mpz_t());
            if (rem != 0) return false;
            for (long rr = r; rr < H.rows; ++rr) x[static_cast<size_t>(rr)] -= q * H.at(rr, col);
            ++col;
        }
        if (x[static_cast<size_t>(r)] != 0) return false;
    }
    return true;
}

bool same_lattice(const IntMatrix& A, const IntMatrix& B) {
    IntMatrix HA = hnf(A), HB = hnf(B);
    for (long j = 0; j < B.cols; ++j) {
        std::vector<Int> col(static_cast<size_t>(B.rows));
        for (long r = 0; r < B.rows; ++r) col[static_cast<size_t>(r)] = B.at(r, j);
        if (!in_lattice(HA, col)) return false;
    }
    for (long j = 0; j < A.cols; ++j) {
        std::vector<Int> col(static_cast<size_t>(A.rows));
        for (long r = 0; r < A.rows; ++r) col[static_cast<size_t>(r)] = A.at(r, j);
        if (!in_lattice(HB, col)) return false;
    }
    return true;
}

// Brute-force order of Z^rows / (column span + 2^e Z^rows), for tiny inputs.
long brute_quotient_order(const IntMatrix& M, long box) {
    // classes of [0, box)^rows under difference-in-lattice, lattice spanned by
    // columns of M plus box*Z^rows (box a power of 2 covering 2^e)
    IntMatrix gens(M.rows, M.cols + M.rows);
    for (long i = 0; i < M.rows; ++i)
        for (long j = 0; j < M.cols; ++j) gens.at(i, j) = M.at(i, j);
    for (long i = 0; i < M.rows; ++i) gens.at(i, M.cols + i) = box;
    IntMatrix H = hnf(gens);
    std::vector<std::vector<Int>> reps;
    std::vector<long> idx(static_cast<size_t>(M.rows), 0);
    long count = 0;
    while (true) {
        std::vector<Int> v(static_cast<size_t>(M.rows));
        for (long i = 0; i < M.rows; ++i) v[static_cast<size_t>(i)] = idx[static_cast<size_t>(i)];
        bool fresh = true;
        for (const auto& r : reps) {
            std::vector<Int> d(static_cast<size_t>(M.rows));
            for (long i = 0; i < M.rows; ++i) d[static_cast<size_t>(i)] = v[static_cast<size_t>(i)] - r[static_cast<size_t>(i)];
            if (in_lattice(H, d)) {
                fresh = false;
                break;
            }
        }
        if (fresh) {
            reps.push_back(v);
            ++count;
        }
        long k = 0;
        while (k < M.rows && ++idx[static_cast<size_t>(k)] == box) {
            idx[static_cast<size_t>(k)] = 0;
            ++k;
        }
        if (k == M.rows) break;
    }
    return count;
}

}  // namespace

TEST_CASE("hnf basic examples") {
    IntMatrix a = from_rows({{2, 4}, {0, 0}});
    IntMatrix h = hnf(a);
    CHECK(h.at(0, 0) == 2);
    CHECK(h.at(0, 1) == 0);
    CHECK(h.at(1, 0) == 0);
    CHECK(h.at(1, 1) == 0);

    IntMatrix id = IntMatrix::identity(3);
    CHECK(hnf(id) == id);

    IntMatrix b = from_rows({{4, 2}, {2, 2}});
    IntMatrix hb = hnf(b);
    CHECK(same_lattice(b, hb));
}

TEST_CASE("hnf transform and span preservation on random matrices") {
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(7);
    for (int trial = 0; trial < 200; ++trial) {
        IntMatrix m(4, 5);
        for (auto& x : m.a) x = Int(rng.get_z_range(Int(41))) - 20;
        IntMatrix U;
        IntMatrix h = hnf(m, &U);
        CHECK(m.mul(U) == h);
        CHECK(same_lattice(m, h));
    }
}

TEST_CASE("snf_mod2e examples") {
    {
        IntMatrix m = from_rows({{4, 0}, {0, 2}});
        SnfResult s = snf_mod2e(m, 16);
        CHECK(s.diag == std::vector<Int>{2, 4});
    }
    {
        IntMatrix m = from_rows({{2, 0, 1}, {0, 2, 1}});
        SnfResult s = snf_mod2e(m, 8);
        CHECK(s.diag == std::vector<Int>{1, 2});
        CHECK(brute_quotient_order(m, 8) == 2);
    }
    {
        IntMatrix z(2, 2);
        SnfResult s = snf_mod2e(z, 8);
        CHECK(s.diag == std::vector<Int>{0, 0});
    }
}

TEST_CASE("snf_mod2e reconstruction on random matrices") {
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(11);
    const long e = 32;
    for (int trial = 0; trial < 300; ++trial) {
        IntMatrix m(6, 8);
        for (auto& x : m.a) x = Int(rng.get_z_range(Int(129))) - 64;
        SnfResult s = snf_mod2e(m, e);
        IntMatrix lhs = s.left.mul_mod2e(m, e).mul_mod2e(s.right, e);
        for (long i = 0; i < lhs.rows; ++i)
            for (long j = 0; j < lhs.cols; ++j) {
                Int expect = (i == j && i < static_cast<long>(s.diag.size()))
                                 ? s.diag[static_cast<size_t>(i)]
                                 : Int(0);
                CHECK(lhs.at(i, j) == expect);
            }
        // divisibility chain (0 = 2^e last)
        for (size_t i = 0; i + 1 < s.diag.size(); ++i) {
            Int a = s.diag[i] == 0 ? pow2(e) : s.diag[i];
            Int b = s.diag[i + 1] == 0 ? pow2(e) : s.diag[i + 1];
            CHECK(mpz_divisible_p(b.get_mpz_t(), a.get_mpz_t()));
        }
        // transforms invertible
        IntMatrix li = s.left.mul_mod2e(s.left_inv, e);
        CHECK(li == IntMatrix::identity(6));
    }
}

TEST_CASE("nullspace_mod2e examples and verification") {
    {
        const long e = 6;
        IntMatrix m(1, 1);
        m.at(0, 0) = pow2(e);
        IntMatrix ns = nullspace_mod2e(m, e);
        bool has_unit = false;
        for (long j = 0; j < ns.cols; ++j)
            if (ns.at(0, j) == 1 || ns.at(0, j) == -1) has_unit = true;
        CHECK(has_unit);
    }
    {
        const long e = 4;
        IntMatrix m = from_rows({{1, 1}});
        IntMatrix ns = nullspace_mod2e(m, e);
        // every generator is a solution
        for (long j = 0; j < ns.cols; ++j)
            CHECK(mod_pow2(ns.at(0, j) + ns.at(1, j), e) == 0);
        // and (1, -1) lies in the generated lattice
        std::vector<Int> t = {Int(1), Int(-1)};
        CHECK(in_lattice(hnf(ns), t));
    }
    {
        const long e = 4;
        IntMatrix m = IntMatrix::identity(2);
        IntMatrix ns = nullspace_mod2e(m, e);
        IntMatrix expect(2, 2);
        expect.at(0, 0) = 16;
        expect.at(1, 1) = 16;
        CHECK(same_lattice(ns, expect));
    }
}

TEST_CASE("nullspace_mod2e completeness vs exhaustive search") {
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(13);
    const long e = 6;
    for (int trial = 0; trial < 20; ++trial) {
        long rows = 1 + Int(rng.get_z_range(Int(3))).get_si();
        long cols = 1 + Int(rng.get_z_range(Int(3))).get_si();
        IntMatrix m(rows, cols);
        for (auto& x : m.a) x = Int(rng.get_z_range(Int(17))) - 8;
        IntMatrix ns = nullspace_mod2e(m, e);
        IntMatrix H = hnf(ns);
        // exhaustive solutions
        std::vector<long> idx(static_cast<size_t>(cols), 0);
        while (true) {
            std::vector<Int> x(static_cast<size_t>(cols));
            for (long i = 0; i < cols; ++i) x[static_cast<size_t>(i)] = idx[static_cast<size_t>(i)];
            bool sol = true;
            for (long r = 0; r < rows; ++r) {
                Int acc = 0;
                for (long c = 0; c < cols; ++c) acc += m.at(r, c) * x[static_cast<size_t>(c)];
                if (mod_pow2(acc, e) != 0) {
                    sol = false;
                    break;
                }
            }
            if (sol) CHECK(in_lattice(H, x));
            long k = 0;
            while (k < cols && ++idx[static_cast<size_t>(k)] == (1L << e)) {
                idx[static_cast<size_t>(k)] = 0;
                ++k;
            }
            if (k == cols) break;
        }
    }
}

TEST_CASE("quotient_structure") {
    {
        AbelianStructure s = quotient_structure(2, from_rows({{2, 0}, {0, 4}}), 16);
        CHECK(s.factors == std::vector<Int>{2, 4});
        CHECK(s.free_rank == 0);
    }
    {
        AbelianStructure s = quotient_structure(1, IntMatrix(1, 0), 16);
        CHECK(s.factors.empty());
        CHECK(s.free_rank == 1);
    }
    {
        AbelianStructure s = quotient_structure(2, from_rows({{2, 0, 1}, {0, 2, 1}}), 16);
        CHECK(s.factors == std::vector<Int>{2});
        CHECK(s.free_rank == 0);
    }
    {
        // diagonal matrices: factors = multiset of diagonal 2-parts > 1
        IntMatrix d = from_rows({{12, 0, 0}, {0, 1, 0}, {0, 0, 8}});
        AbelianStructure s = quotient_structure(3, d, 16);
        CHECK(s.factors == std::vector<Int>{4, 8});
    }
    {
        // hazard flag for diagonals close to the precision ceiling
        IntMatrix d(1, 1);
        d.at(0, 0) = pow2(14);
        AbelianStructure s = quotient_structure(1, d, 16);
        CHECK(s.precision_hazard);
    }
}

TEST_CASE("quotient_structure transcripts define valid generators and relations") {
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(17);
    const long e = 20;
    for (int trial = 0; trial < 50; ++trial) {
        IntMatrix m(4, 6);
        for (auto& x : m.a) x = Int(rng.get_z_range(Int(33))) - 16;
        AbelianStructure s = quotient_structure(4, m, e);
        // relation transcript j: m * rel_j = factor_j * gen_j (mod 2^e)
        for (long j = 0; j < static_cast<long>(s.factors.size()); ++j) {
            std::vector<Int> rel(static_cast<size_t>(m.cols));
            for (long r = 0; r < m.cols; ++r) rel[static_cast<size_t>(r)] = s.rel_transcripts.at(r, j);
            std::vector<Int> lhs = m.apply(rel);
            for (long r = 0; r < 4; ++r) {
                Int rhs = s.factors[static_cast<size_t>(j)] * s.gen_transcripts.at(r, j);
                CHECK(mod_pow2(lhs[static_cast<size_t>(r)] - rhs, e) == 0);
            }
        }
    }
}

TEST_CASE("snf_integer reconstruction") {
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(19);
    for (int trial = 0; trial < 100; ++trial) {
        IntMatrix m(3, 4);
        for (auto& x : m.a) x = Int(rng.get_z_range(Int(21))) - 10;
        SnfResult s = snf_integer(m);
        IntMatrix lhs = s.left.mul(m).mul(s.right);
        for (long i = 0; i < 3; ++i)
            for (long j = 0; j < 4; ++j) {
                Int expect = (i == j) ? s.diag[static_cast<size_t>(i)] : Int(0);
                CHECK(lhs.at(i, j) == expect);
            }
        for (size_t i = 0; i + 1 < s.diag.size(); ++i) {
            if (s.diag[i] == 0) CHECK(s.diag[i + 1] == 0);
            else if (s.diag[i + 1] != 0)
                CHECK(mpz_divisible_p(s.diag[i + 1].get_mpz_t(), s.diag[i].get_mpz_t()));
        }
        CHECK(s.left.mul(s.left_inv) == IntMatrix::identity(3));
    }
}
