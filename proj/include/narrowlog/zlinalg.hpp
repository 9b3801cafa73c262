#ifndef NARROWLOG_ZLINALG_HPP
#define NARROWLOG_ZLINALG_HPP

#include <vector>

#include "narrowlog/bigint.hpp"

namespace narrowlog {

// Dense matrix of arbitrary-precision integers, row-major.
struct IntMatrix {
    long rows = 0, cols = 0;
    std::vector<Int> a;

    IntMatrix() = default;
    IntMatrix(long r, long c) : rows(r), cols(c), a(static_cast<size_t>(r * c)) {}

    Int& at(long r, long c) { return a[static_cast<size_t>(r * cols + c)]; }
    const Int& at(long r, long c) const { return a[static_cast<size_t>(r * cols + c)]; }

    static IntMatrix identity(long n);
    IntMatrix mul(const IntMatrix& o) const;
    IntMatrix mul_mod2e(const IntMatrix& o, long e) const;
    IntMatrix transpose() const;
    IntMatrix reduced_mod2e(long e) const;
    std::vector<Int> apply(const std::vector<Int>& x) const;
    bool operator==(const IntMatrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

// Column-style Hermite normal form over Z.  Returns H with the same column
// span as M; transform (when requested) satisfies M * U = H with U
// unimodular.  Zero columns are moved to the right.
IntMatrix hnf(const IntMatrix& M, IntMatrix* transform = nullptr);

struct SnfResult {
    std::vector<Int> diag;   // nonneg; over Z/2^e: powers of 2, with 0 meaning valuation >= e
    IntMatrix left;          // left * M * right = diag(...)
    IntMatrix left_inv;
    IntMatrix right;
};

// Smith normal form over the residue ring Z/p^e by minimal-valuation
// pivoting.  Diagonal entries are powers of p (0 once the valuation reaches
// e) in nondecreasing order; transforms are invertible mod p^e.
SnfResult snf_mod_prime_power(const IntMatrix& M, const Int& p, long e);
SnfResult snf_mod2e(const IntMatrix& M, long e);

// Smith normal form over Z with unimodular transforms.
SnfResult snf_integer(const IntMatrix& M);

// Columns generating { x : M x = 0 mod 2^e } as an integer lattice
// (contains 2^e Z^cols).
IntMatrix nullspace_mod2e(const IntMatrix& M, long e);

// Solve M x = b mod 2^e; returns false if no solution.
bool solve_mod2e(const IntMatrix& M, const std::vector<Int>& b, long e, std::vector<Int>& x);

// Inverse of a matrix invertible mod 2^e.
IntMatrix invert_mod2e(const IntMatrix& M, long e);

// Invariant-factor data of a finitely generated Z/2^e-module presented by
// generators and relation columns.
struct AbelianStructure {
    std::vector<Int> factors;        // 2-power cyclic orders > 1, nondecreasing
    long free_rank = 0;              // count of diagonals that vanish mod 2^e
    IntMatrix gen_transcripts;       // gens x nu: column j expresses factor-j generator
    IntMatrix rel_transcripts;       // relcols x nu: column j combines input relations
                                     // into the defining relation factor_j * gen_j
    bool precision_hazard = false;   // some diagonal valuation fell in [e-slack, e)

    Int order() const {
        Int o = 1;
        for (const auto& f : factors) o *= f;
        return o;
    }
    long two_rank() const { return static_cast<long>(factors.size()); }
};

AbelianStructure quotient_structure(long generators, const IntMatrix& relations, long e,
                                    long slack = 4);

}  // namespace narrowlog

#endif
