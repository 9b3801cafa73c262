#include "narrowlog/zlinalg.hpp"

#include <algorithm>
#include <cassert>

#include "narrowlog/errors.hpp"

namespace narrowlog {

IntMatrix IntMatrix::identity(long n) {
    IntMatrix I(n, n);
    for (long i = 0; i < n; ++i) I.at(i, i) = 1;
    return I;
}

IntMatrix IntMatrix::mul(const IntMatrix& o) const {
    assert(cols == o.rows);
    IntMatrix r(rows, o.cols);
    for (long i = 0; i < rows; ++i)
        for (long k = 0; k < cols; ++k) {
            const Int& v = at(i, k);
            if (v == 0) continue;
            for (long j = 0; j < o.cols; ++j) r.at(i, j) += v * o.at(k, j);
        }
    return r;
}

IntMatrix IntMatrix::mul_mod2e(const IntMatrix& o, long e) const {
    IntMatrix r = mul(o);
    for (auto& x : r.a) x = mod_pow2(x, e);
    return r;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix r(cols, rows);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
}

IntMatrix IntMatrix::reduced_mod2e(long e) const {
    IntMatrix r = *this;
    for (auto& x : r.a) x = mod_pow2(x, e);
    return r;
}

std::vector<Int> IntMatrix::apply(const std::vector<Int>& x) const {
    assert(static_cast<long>(x.size()) == cols);
    std::vector<Int> y(static_cast<size_t>(rows));
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) y[static_cast<size_t>(i)] += at(i, j) * x[static_cast<size_t>(j)];
    return y;
}

namespace {

void col_swap(IntMatrix& M, long i, long j) {
    if (i == j) return;
    for (long r = 0; r < M.rows; ++r) std::swap(M.at(r, i), M.at(r, j));
}

void col_neg(IntMatrix& M, long j) {
    for (long r = 0; r < M.rows; ++r) M.at(r, j) = -M.at(r, j);
}

// col_j += q * col_i
void col_addmul(IntMatrix& M, long j, long i, const Int& q) {
    if (q == 0) return;
    for (long r = 0; r < M.rows; ++r) M.at(r, j) += q * M.at(r, i);
}

// Replace columns (i, j) by (u*ci + v*cj, a*ci + b*cj).
void col_combine(IntMatrix& M, long i, long j, const Int& u, const Int& v, const Int& a,
                 const Int& b) {
    for (long r = 0; r < M.rows; ++r) {
        Int x = M.at(r, i), y = M.at(r, j);
        M.at(r, i) = u * x + v * y;
        M.at(r, j) = a * x + b * y;
    }
}

}  // namespace

IntMatrix hnf(const IntMatrix& M, IntMatrix* transform) {
    IntMatrix H = M;
    IntMatrix U = IntMatrix::identity(M.cols);
    long pivot_col = 0;
    for (long r = 0; r < H.rows && pivot_col < H.cols; ++r) {
        // gcd-combine columns pivot_col.. so only pivot_col has a nonzero in row r
        long nz = -1;
        for (long j = pivot_col; j < H.cols; ++j)
            if (H.at(r, j) != 0) {
                nz = j;
                break;
            }
        if (nz == -1) continue;
        col_swap(H, pivot_col, nz);
        col_swap(U, pivot_col, nz);
        for (long j = pivot_col + 1; j < H.cols; ++j) {
            if (H.at(r, j) == 0) continue;
            Int g, s, t;
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), H.at(r, pivot_col).get_mpz_t(),
                       H.at(r, j).get_mpz_t());
            Int x = H.at(r, pivot_col) / g, y = H.at(r, j) / g;
            // (s*cp + t*cj, -y*cp + x*cj): new pivot entry g, other 0
            col_combine(H, pivot_col, j, s, t, -y, x);
            col_combine(U, pivot_col, j, s, t, -y, x);
        }
        if (H.at(r, pivot_col) < 0) {
            col_neg(H, pivot_col);
            col_neg(U, pivot_col);
        }
        // canonical: reduce earlier pivot columns' entries in this row
        for (long j = 0; j < pivot_col; ++j) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), H.at(r, j).get_mpz_t(), H.at(r, pivot_col).get_mpz_t());
            col_addmul(H, j, pivot_col, -q);
            col_addmul(U, j, pivot_col, -q);
        }
        ++pivot_col;
    }
    if (transform) *transform = U;
    return H;
}

SnfResult snf_mod_prime_power(const IntMatrix& M, const Int& p, long e) {
    const long n = M.rows, m = M.cols;
    Int pe;
    mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(e));
    auto red = [&](const Int& x) {
        Int r = x % pe;
        if (r < 0) r += pe;
        return r;
    };
    IntMatrix A = M;
    for (auto& x : A.a) x = red(x);
    IntMatrix L = IntMatrix::identity(n), Linv = IntMatrix::identity(n);
    IntMatrix R = IntMatrix::identity(m);

    auto val_of = [&](const Int& x) -> long {
        return x == 0 ? e : std::min<long>(e, valuation(x, p));
    };
    auto ppow = [&](long k) {
        Int r;
        mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(k));
        return r;
    };

    long k = std::min(n, m);
    for (long i = 0; i < k; ++i) {
        // minimal-valuation pivot, ties by lowest row then column
        long bv = e, br = -1, bc = -1;
        for (long r = i; r < n; ++r)
            for (long c = i; c < m; ++c) {
                long v = val_of(A.at(r, c));
                if (v < bv) {
                    bv = v;
                    br = r;
                    bc = c;
                }
            }
        if (br == -1) break;  // all zero mod p^e
        if (br != i) {
            for (long c = 0; c < m; ++c) std::swap(A.at(i, c), A.at(br, c));
            for (long c = 0; c < n; ++c) std::swap(L.at(i, c), L.at(br, c));
            for (long r = 0; r < n; ++r) std::swap(Linv.at(r, i), Linv.at(r, br));
        }
        if (bc != i) {
            col_swap(A, i, bc);
            col_swap(R, i, bc);
        }
        Int pk = ppow(bv);
        Int u = A.at(i, i) / pk;
        Int uinv;
        mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), pe.get_mpz_t());
        for (long c = 0; c < m; ++c) A.at(i, c) = red(A.at(i, c) * uinv);
        for (long c = 0; c < n; ++c) L.at(i, c) = red(L.at(i, c) * uinv);
        for (long r = 0; r < n; ++r) Linv.at(r, i) = red(Linv.at(r, i) * u);
        for (long r = 0; r < n; ++r) {
            if (r == i || A.at(r, i) == 0) continue;
            Int q = A.at(r, i) / pk;  // divisible: bv minimal
            for (long c = 0; c < m; ++c) A.at(r, c) = red(A.at(r, c) - q * A.at(i, c));
            for (long c = 0; c < n; ++c) L.at(r, c) = red(L.at(r, c) - q * L.at(i, c));
            for (long rr = 0; rr < n; ++rr)
                Linv.at(rr, i) = red(Linv.at(rr, i) + q * Linv.at(rr, r));
        }
        for (long c = 0; c < m; ++c) {
            if (c == i || A.at(i, c) == 0) continue;
            Int q = A.at(i, c) / pk;
            col_addmul(A, c, i, -q);
            for (long r = 0; r < n; ++r) A.at(r, c) = red(A.at(r, c));
            col_addmul(R, c, i, -q);
            for (long r = 0; r < m; ++r) R.at(r, c) = red(R.at(r, c));
        }
        A.at(i, i) = pk;
    }

    SnfResult res;
    res.diag.resize(static_cast<size_t>(k));
    for (long i = 0; i < k; ++i) res.diag[static_cast<size_t>(i)] = A.at(i, i);
    res.left = L;
    res.left_inv = Linv;
    res.right = R;
    return res;
}

SnfResult snf_mod2e(const IntMatrix& M, long e) { return snf_mod_prime_power(M, Int(2), e); }

SnfResult snf_integer(const IntMatrix& M) {
    const long n = M.rows, m = M.cols;
    IntMatrix A = M;
    IntMatrix L = IntMatrix::identity(n), Linv = IntMatrix::identity(n);
    IntMatrix R = IntMatrix::identity(m);

    auto row_addmul = [&](IntMatrix& X, long dst, long src, const Int& q) {
        for (long c = 0; c < X.cols; ++c) X.at(dst, c) += q * X.at(src, c);
    };

    long k = std::min(n, m);
    for (long i = 0; i < k; ++i) {
        // pivot: minimal nonzero absolute value in the remaining block
        long br = -1, bc = -1;
        Int best;
        for (long r = i; r < n; ++r)
            for (long c = i; c < m; ++c) {
                if (A.at(r, c) == 0) continue;
                Int v = abs(A.at(r, c));
                if (br == -1 || v < best) {
                    best = v;
                    br = r;
                    bc = c;
                }
            }
        if (br == -1) break;
        if (br != i) {
            for (long c = 0; c < m; ++c) std::swap(A.at(i, c), A.at(br, c));
            for (long c = 0; c < n; ++c) std::swap(L.at(i, c), L.at(br, c));
            for (long r = 0; r < n; ++r) std::swap(Linv.at(r, i), Linv.at(r, br));
        }
        if (bc != i) {
            col_swap(A, i, bc);
            col_swap(R, i, bc);
        }
        bool again = true;
        while (again) {
            again = false;
            for (long r = i + 1; r < n; ++r) {
                if (A.at(r, i) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), A.at(r, i).get_mpz_t(), A.at(i, i).get_mpz_t());
                row_addmul(A, r, i, -q);
                row_addmul(L, r, i, -q);
                for (long rr = 0; rr < n; ++rr) Linv.at(rr, i) += q * Linv.at(rr, r);
                if (A.at(r, i) != 0) {
                    // remainder smaller than pivot: swap up and restart
                    for (long c = 0; c < m; ++c) std::swap(A.at(i, c), A.at(r, c));
                    for (long c = 0; c < n; ++c) std::swap(L.at(i, c), L.at(r, c));
                    for (long rr = 0; rr < n; ++rr) std::swap(Linv.at(rr, i), Linv.at(rr, r));
                    again = true;
                }
            }
            for (long c = i + 1; c < m; ++c) {
                if (A.at(i, c) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), A.at(i, c).get_mpz_t(), A.at(i, i).get_mpz_t());
                col_addmul(A, c, i, -q);
                col_addmul(R, c, i, -q);
                if (A.at(i, c) != 0) {
                    col_swap(A, i, c);
                    col_swap(R, i, c);
                    again = true;
                }
            }
        }
        if (A.at(i, i) < 0) {
            col_neg(A, i);
            col_neg(R, i);
        }
    }
    // enforce divisibility chain
    for (long i = 0; i + 1 < k; ++i) {
        for (long j = i + 1; j < k; ++j) {
            if (A.at(i, i) == 0 && A.at(j, j) != 0) {
                // A is diagonal here; swapping rows i,j and columns i,j swaps
                // the two diagonal entries.
                for (long c = 0; c < m; ++c) std::swap(A.at(i, c), A.at(j, c));
                col_swap(A, i, j);
                col_swap(R, i, j);
                for (long c = 0; c < n; ++c) std::swap(L.at(i, c), L.at(j, c));
                for (long r = 0; r < n; ++r) std::swap(Linv.at(r, i), Linv.at(r, j));
            }
            if (A.at(i, i) == 0 || A.at(j, j) == 0) continue;
            if (mpz_divisible_p(A.at(j, j).get_mpz_t(), A.at(i, i).get_mpz_t())) continue;
            // classic 2x2 fix: diag(a, b) -> diag(gcd, lcm)
            Int a = A.at(i, i), b = A.at(j, j);
            Int g, s, t;
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            Int l = a / g * b;
            // row/col ops realizing it on the diagonal submatrix:
            // [a 0; 0 b] ~ [g 0; 0 l]
            // R ops: c_i += c_j ; then rows; implement via explicit transforms
            // left: [s t; -b/g a/g], right: [1 -t*b/g; 1 s*a/g]^adjust
            // Use the standard construction:
            // L2 = [s t; -b/g a/g], R2 = [1, -(t*b)/g; 1, (s*a)/g]
            IntMatrix L2(2, 2), R2(2, 2);
            L2.at(0, 0) = s;
            L2.at(0, 1) = t;
            L2.at(1, 0) = -(b / g);
            L2.at(1, 1) = a / g;
            R2.at(0, 0) = 1;
            R2.at(0, 1) = -(t * (b / g));
            R2.at(1, 0) = 1;
            R2.at(1, 1) = s * (a / g);
            // verify L2 * diag(a,b) * R2 = diag(g,l) by construction
            // apply on rows i,j and cols i,j of A, L, Linv, R
            auto apply2_rows = [&](IntMatrix& X, const IntMatrix& T) {
                for (long c = 0; c < X.cols; ++c) {
                    Int x = X.at(i, c), y = X.at(j, c);
                    X.at(i, c) = T.at(0, 0) * x + T.at(0, 1) * y;
                    X.at(j, c) = T.at(1, 0) * x + T.at(1, 1) * y;
                }
            };
            auto apply2_cols = [&](IntMatrix& X, const IntMatrix& T) {
                for (long r = 0; r < X.rows; ++r) {
                    Int x = X.at(r, i), y = X.at(r, j);
                    X.at(r, i) = x * T.at(0, 0) + y * T.at(1, 0);
                    X.at(r, j) = x * T.at(0, 1) + y * T.at(1, 1);
                }
            };
            apply2_rows(A, L2);
            apply2_cols(A, R2);
            apply2_rows(L, L2);
            // Linv gets right-multiplied by L2^{-1}: L2 has det 1, inverse = adj
            IntMatrix L2inv(2, 2);
            L2inv.at(0, 0) = L2.at(1, 1);
            L2inv.at(0, 1) = -L2.at(0, 1);
            L2inv.at(1, 0) = -L2.at(1, 0);
            L2inv.at(1, 1) = L2.at(0, 0);
            apply2_cols(Linv, L2inv);
            apply2_cols(R, R2);
        }
    }

    SnfResult res;
    res.diag.resize(static_cast<size_t>(k));
    for (long i = 0; i < k; ++i) res.diag[static_cast<size_t>(i)] = A.at(i, i);
    res.left = L;
    res.left_inv = Linv;
    res.right = R;
    return res;
}

IntMatrix nullspace_mod2e(const IntMatrix& M, long e) {
    SnfResult s = snf_mod2e(M, e);
    long n = M.cols;
    IntMatrix gens(n, n);
    for (long j = 0; j < n; ++j) {
        long v = e;  // diagonal beyond rank is 0 = 2^e
        if (j < static_cast<long>(s.diag.size()) && s.diag[static_cast<size_t>(j)] != 0)
            v = v2(s.diag[static_cast<size_t>(j)]);
        Int scale = pow2(e - v);
        for (long r = 0; r < n; ++r) gens.at(r, j) = s.right.at(r, j) * scale;
    }
    return gens;
}

bool solve_mod2e(const IntMatrix& M, const std::vector<Int>& b, long e, std::vector<Int>& x) {
    SnfResult s = snf_mod2e(M, e);
    std::vector<Int> c = s.left.apply(b);
    for (auto& v : c) v = mod_pow2(v, e);
    std::vector<Int> y(static_cast<size_t>(M.cols), Int(0));
    for (long i = 0; i < M.rows; ++i) {
        Int d = (i < static_cast<long>(s.diag.size())) ? s.diag[static_cast<size_t>(i)] : Int(0);
        const Int& ci = c[static_cast<size_t>(i)];
        if (d == 0) {
            if (ci != 0) return false;
            continue;
        }
        long dv = v2(d);
        if (ci == 0) {
            if (i < M.cols) y[static_cast<size_t>(i)] = 0;
            continue;
        }
        if (v2(ci) < dv) return false;
        if (i >= M.cols) return false;
        y[static_cast<size_t>(i)] = mod_pow2(ci >> static_cast<unsigned long>(dv), e - dv);
    }
    x = s.right.apply(y);
    for (auto& v : x) v = mod_pow2(v, e);
    return true;
}

IntMatrix invert_mod2e(const IntMatrix& M, long e) {
    if (M.rows != M.cols) throw Error("invert_mod2e: not square");
    SnfResult s = snf_mod2e(M, e);
    for (const auto& d : s.diag)
        if (d != 1) throw Error("invert_mod2e: matrix not invertible mod 2^e");
    // M = Linv * I * Rinv  =>  M^{-1} = R * L
    return s.right.mul_mod2e(s.left, e);
}

AbelianStructure quotient_structure(long generators, const IntMatrix& relations, long e,
                                    long slack) {
    IntMatrix rels = relations;
    if (rels.rows == 0) rels = IntMatrix(generators, 0);
    if (rels.rows != generators) throw Error("quotient_structure: row count mismatch");
    SnfResult s = snf_mod2e(rels, e);

    AbelianStructure out;
    std::vector<long> factor_pos;
    long rank_zero = 0;
    for (long i = 0; i < generators; ++i) {
        Int d = (i < static_cast<long>(s.diag.size())) ? s.diag[static_cast<size_t>(i)] : Int(0);
        if (d == 0) {
            ++rank_zero;
            continue;
        }
        long v = v2(d);
        if (v == 0) continue;  // unit: trivial factor
        if (v >= e - slack) out.precision_hazard = true;
        factor_pos.push_back(i);
    }
    out.free_rank = rank_zero;
    // factors ascending: positions are already in ascending valuation order
    out.factors.reserve(factor_pos.size());
    out.gen_transcripts = IntMatrix(generators, static_cast<long>(factor_pos.size()));
    out.rel_transcripts = IntMatrix(rels.cols, static_cast<long>(factor_pos.size()));
    for (size_t j = 0; j < factor_pos.size(); ++j) {
        long i = factor_pos[j];
        out.factors.push_back(s.diag[static_cast<size_t>(i)]);
        for (long r = 0; r < generators; ++r)
            out.gen_transcripts.at(r, static_cast<long>(j)) = s.left_inv.at(r, i);
        for (long r = 0; r < rels.cols; ++r)
            out.rel_transcripts.at(r, static_cast<long>(j)) = s.right.at(r, i);
    }
    return out;
}

}  // namespace narrowlog
