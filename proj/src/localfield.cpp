#include "narrowlog/localfield.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "narrowlog/errors.hpp"

namespace narrowlog {

namespace {

std::vector<Int> poly_mul(const std::vector<Int>& a, const std::vector<Int>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<Int> r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

std::vector<Int> poly_redmod(std::vector<Int> a, const std::vector<Int>& f, const Int& modn) {
    long n = static_cast<long>(f.size()) - 1;
    for (long i = static_cast<long>(a.size()) - 1; i >= n; --i) {
        Int c = a[static_cast<size_t>(i)];
        a[static_cast<size_t>(i)] = 0;
        if (c == 0) continue;
        for (long j = 0; j < n; ++j) a[static_cast<size_t>(i - n + j)] -= c * f[static_cast<size_t>(j)];
    }
    a.resize(static_cast<size_t>(std::max(n, 1L)));
    for (auto& c : a) {
        c %= modn;
        if (c < 0) c += modn;
    }
    return a;
}

Int mod_p(const Int& x, const Int& p) {
    Int r = x % p;
    if (r < 0) r += p;
    return r;
}

Int bareiss_det(IntMatrix C) {
    long n = C.rows;
    if (n == 0) return Int(1);
    Int denom = 1;
    int sign = 1;
    for (long k = 0; k < n - 1; ++k) {
        if (C.at(k, k) == 0) {
            long sel = -1;
            for (long r = k + 1; r < n; ++r)
                if (C.at(r, k) != 0) {
                    sel = r;
                    break;
                }
            if (sel == -1) return Int(0);
            for (long j = 0; j < n; ++j) std::swap(C.at(k, j), C.at(sel, j));
            sign = -sign;
        }
        for (long i = k + 1; i < n; ++i) {
            for (long j = k + 1; j < n; ++j) {
                Int v = C.at(i, j) * C.at(k, k) - C.at(i, k) * C.at(k, j);
                mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), denom.get_mpz_t());
                C.at(i, j) = v;
            }
            C.at(i, k) = 0;
        }
        denom = C.at(k, k);
    }
    return sign == 1 ? C.at(n - 1, n - 1) : -C.at(n - 1, n - 1);
}

IntMatrix adjugate(const IntMatrix& M) {
    long n = M.rows;
    IntMatrix A(n, n);
    if (n == 1) {
        A.at(0, 0) = 1;
        return A;
    }
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            IntMatrix Mij(n - 1, n - 1);
            for (long r = 0, rr = 0; r < n; ++r) {
                if (r == j) continue;
                for (long c = 0, cc = 0; c < n; ++c) {
                    if (c == i) continue;
                    Mij.at(rr, cc) = M.at(r, c);
                    ++cc;
                }
                ++rr;
            }
            Int d = bareiss_det(Mij);
            if ((i + j) % 2 == 1) d = -d;
            A.at(i, j) = d;
        }
    return A;
}

// kernel of M over F_p (basis columns)
IntMatrix kernel_mod_p(IntMatrix M, const Int& p) {
    long rows = M.rows, cols = M.cols;
    std::vector<long> pivot_row_of_col(static_cast<size_t>(cols), -1);
    std::vector<long> pivot_col_of_row(static_cast<size_t>(rows), -1);
    long pr = 0;
    for (long c = 0; c < cols && pr < rows; ++c) {
        long sel = -1;
        for (long r = pr; r < rows; ++r)
            if (mod_p(M.at(r, c), p) != 0) {
                sel = r;
                break;
            }
        if (sel == -1) continue;
        for (long j = 0; j < cols; ++j) std::swap(M.at(pr, j), M.at(sel, j));
        Int piv = mod_p(M.at(pr, c), p), inv;
        mpz_invert(inv.get_mpz_t(), piv.get_mpz_t(), p.get_mpz_t());
        for (long j = 0; j < cols; ++j) M.at(pr, j) = mod_p(M.at(pr, j) * inv, p);
        for (long r = 0; r < rows; ++r) {
            if (r == pr) continue;
            Int q = mod_p(M.at(r, c), p);
            if (q == 0) continue;
            for (long j = 0; j < cols; ++j) M.at(r, j) = mod_p(M.at(r, j) - q * M.at(pr, j), p);
        }
        pivot_row_of_col[static_cast<size_t>(c)] = pr;
        pivot_col_of_row[static_cast<size_t>(pr)] = c;
        ++pr;
    }
    std::vector<long> free_cols;
    for (long c = 0; c < cols; ++c)
        if (pivot_row_of_col[static_cast<size_t>(c)] == -1) free_cols.push_back(c);
    IntMatrix K(cols, static_cast<long>(free_cols.size()));
    for (size_t k = 0; k < free_cols.size(); ++k) {
        long fc = free_cols[k];
        K.at(fc, static_cast<long>(k)) = 1;
        for (long r = 0; r < rows; ++r) {
            long pc = pivot_col_of_row[static_cast<size_t>(r)];
            if (pc == -1) continue;
            K.at(pc, static_cast<long>(k)) = mod_p(-M.at(r, fc), p);
        }
    }
    return K;
}

Int int_pow(const Int& p, long k) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(k));
    return r;
}

}  // namespace

Int poly_resultant(const std::vector<Int>& f, const std::vector<Int>& g) {
    long n = static_cast<long>(f.size()) - 1;
    long m = static_cast<long>(g.size()) - 1;
    if (m < 0) return Int(0);
    if (m == 0) {
        Int r;
        mpz_pow_ui(r.get_mpz_t(), g[0].get_mpz_t(), static_cast<unsigned long>(n));
        return r;
    }
    long N = n + m;
    IntMatrix S(N, N);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j <= n; ++j) S.at(i, i + j) = f[static_cast<size_t>(n - j)];
    for (long i = 0; i < n; ++i)
        for (long j = 0; j <= m; ++j) S.at(m + i, i + j) = g[static_cast<size_t>(m - j)];
    return bareiss_det(S);
}

LocalField::LocalField(std::vector<Int> poly, const Int& p, long W) : p_(p) {
    if (poly.empty() || poly.back() != 1) throw Error("LocalField: polynomial must be monic");
    n_ = static_cast<long>(poly.size()) - 1;
    if (n_ < 1 || n_ > 16) throw UnsupportedDegree("LocalField degree " + std::to_string(n_));
    if (W == 0) W = (p == 2) ? 768 : 192;
    W_ = W;
    Int pW = int_pow(p_, W_);
    poly_ = std::move(poly);
    Int half = pW / 2;
    for (auto& c : poly_) {
        c = mod_p(c, pW);
        if (c > half) c -= pW;  // centered: small inputs stay exact
    }
    poly_.back() = 1;
    build_max_order();
    build_structure();
    build_residue_data();
}

void LocalField::build_max_order() {
    Int pW = int_pow(p_, W_);
    Int bigmod = pW * pW * pW;
    basis_ = IntMatrix::identity(n_);
    T_ = 0;

    for (int round = 0; round < 64; ++round) {
        Int detB = bareiss_det(basis_);
        if (detB == 0) throw Error("LocalField: degenerate order basis");
        IntMatrix adjB = adjugate(basis_);
        Int pT = int_pow(p_, T_);

        auto mul_coords = [&](const std::vector<Int>& x, const std::vector<Int>& y) {
            std::vector<Int> gx(static_cast<size_t>(n_), Int(0)), gy(static_cast<size_t>(n_), Int(0));
            for (long j = 0; j < n_; ++j)
                for (long i = 0; i < n_; ++i) {
                    gx[static_cast<size_t>(j)] += basis_.at(j, i) * x[static_cast<size_t>(i)];
                    gy[static_cast<size_t>(j)] += basis_.at(j, i) * y[static_cast<size_t>(i)];
                }
            std::vector<Int> prod = poly_redmod(poly_mul(gx, gy), poly_, bigmod);
            Int d = detB * pT;
            std::vector<Int> z(static_cast<size_t>(n_));
            for (long i = 0; i < n_; ++i) {
                Int acc = 0;
                for (long j = 0; j < n_; ++j) acc += adjB.at(i, j) * prod[static_cast<size_t>(j)];
                Int q, r;
                mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), acc.get_mpz_t(), d.get_mpz_t());
                if (r != 0) throw Error("LocalField: order product not integral");
                z[static_cast<size_t>(i)] = mod_p(q, pW);
            }
            return z;
        };

        long m = 0;
        {
            Int pm = 1;
            while (pm < n_) {
                pm *= p_;
                ++m;
            }
            if (m == 0) m = 1;
        }
        // coordinates of the ring identity in the current basis
        std::vector<Int> one_coords(static_cast<size_t>(n_));
        {
            Int d = detB;
            for (long i = 0; i < n_; ++i) {
                Int acc = adjB.at(i, 0) * pT;
                Int q, r;
                mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), acc.get_mpz_t(), d.get_mpz_t());
                if (r != 0) throw Error("LocalField: identity not in order");
                one_coords[static_cast<size_t>(i)] = q;
            }
        }
        IntMatrix F(n_, n_);
        for (long i = 0; i < n_; ++i) {
            std::vector<Int> acc(static_cast<size_t>(n_), Int(0));
            acc[static_cast<size_t>(i)] = 1;
            for (long s = 0; s < m; ++s) {
                std::vector<Int> r = one_coords;
                std::vector<Int> base = acc;
                Int k = p_;
                while (k > 0) {
                    if (mpz_odd_p(k.get_mpz_t())) r = mul_coords(r, base);
                    k /= 2;
                    if (k > 0) base = mul_coords(base, base);
                }
                acc = r;
            }
            for (long j = 0; j < n_; ++j) F.at(j, i) = mod_p(acc[static_cast<size_t>(j)], p_);
        }
        IntMatrix rad = kernel_mod_p(F, p_);
        if (rad.cols == 0) break;  // O/pO reduced: maximal

        // ideal I = radical lift + pO
        IntMatrix gens(n_, rad.cols + n_);
        for (long j = 0; j < rad.cols; ++j)
            for (long i = 0; i < n_; ++i) gens.at(i, j) = rad.at(i, j);
        for (long i = 0; i < n_; ++i) gens.at(i, rad.cols + i) = p_;
        IntMatrix J = hnf(gens);
        IntMatrix Jb(n_, n_);
        for (long j = 0; j < n_; ++j)
            for (long i = 0; i < n_; ++i) Jb.at(i, j) = J.at(i, j);
        Int detJ = bareiss_det(Jb);
        if (detJ == 0) throw Error("LocalField: radical ideal degenerate");
        IntMatrix adjJ = adjugate(Jb);

        // U = { x in O : x*I inside p*I } as kernel mod p
        IntMatrix cond(n_ * n_, n_);
        for (long bidx = 0; bidx < n_; ++bidx) {
            std::vector<Int> x(static_cast<size_t>(n_), Int(0));
            x[static_cast<size_t>(bidx)] = 1;
            for (long gcol = 0; gcol < n_; ++gcol) {
                std::vector<Int> g(static_cast<size_t>(n_));
                for (long i = 0; i < n_; ++i) g[static_cast<size_t>(i)] = Jb.at(i, gcol);
                std::vector<Int> prod = mul_coords(x, g);
                for (long i = 0; i < n_; ++i) {
                    Int acc = 0;
                    for (long j = 0; j < n_; ++j) acc += adjJ.at(i, j) * prod[static_cast<size_t>(j)];
                    Int q, r;
                    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), acc.get_mpz_t(), detJ.get_mpz_t());
                    if (r != 0) throw Error("LocalField: radical not an ideal");
                    cond.at(gcol * n_ + i, bidx) = mod_p(q, p_);
                }
            }
        }
        IntMatrix U = kernel_mod_p(cond, p_);
        if (U.cols == 0) break;

        IntMatrix span(n_, n_ + U.cols);
        for (long i = 0; i < n_; ++i) span.at(i, i) = p_;
        for (long j = 0; j < U.cols; ++j)
            for (long i = 0; i < n_; ++i) span.at(i, n_ + j) = mod_p(U.at(i, j), p_);
        IntMatrix H = hnf(span);
        IntMatrix Hb(n_, n_);
        bool changed = false;
        for (long j = 0; j < n_; ++j)
            for (long i = 0; i < n_; ++i) {
                Hb.at(i, j) = H.at(i, j);
                if (i == j && Hb.at(i, j) != p_) changed = true;
                if (i != j && Hb.at(i, j) != 0) changed = true;
            }
        if (!changed) break;
        basis_ = basis_.mul(Hb);
        T_ += 1;
        bool all_div = true;
        for (const auto& v : basis_.a)
            if (v != 0 && !mpz_divisible_p(v.get_mpz_t(), p_.get_mpz_t())) {
                all_div = false;
                break;
            }
        if (all_div && T_ > 0) {
            for (auto& v : basis_.a)
                if (v != 0) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t());
            T_ -= 1;
        }
    }
}

void LocalField::build_structure() {
    Int pW = int_pow(p_, W_);
    Int bigmod = pW * pW * pW;
    detB_ = bareiss_det(basis_);
    IntMatrix adjB = adjugate(basis_);
    basis_inv_scaled_ = adjB;  // basis^{-1} = adjB / detB
    Int pT = int_pow(p_, T_);

    mult_table_.assign(static_cast<size_t>(n_ * n_), {});
    std::vector<std::vector<Int>> btheta(static_cast<size_t>(n_));
    for (long i = 0; i < n_; ++i) {
        btheta[static_cast<size_t>(i)].resize(static_cast<size_t>(n_));
        for (long j = 0; j < n_; ++j) btheta[static_cast<size_t>(i)][static_cast<size_t>(j)] = basis_.at(j, i);
    }
    Int d = detB_ * pT;
    for (long i = 0; i < n_; ++i)
        for (long j = i; j < n_; ++j) {
            std::vector<Int> prod =
                poly_redmod(poly_mul(btheta[static_cast<size_t>(i)], btheta[static_cast<size_t>(j)]), poly_, bigmod);
            std::vector<Int> z(static_cast<size_t>(n_));
            for (long k = 0; k < n_; ++k) {
                Int acc = 0;
                for (long l = 0; l < n_; ++l) acc += adjB.at(k, l) * prod[static_cast<size_t>(l)];
                Int q, r;
                mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), acc.get_mpz_t(), d.get_mpz_t());
                if (r != 0) throw Error("LocalField: structure constants not integral");
                z[static_cast<size_t>(k)] = mod_p(q, pW);
            }
            mult_table_[static_cast<size_t>(i * n_ + j)] = z;
            mult_table_[static_cast<size_t>(j * n_ + i)] = z;
        }
}

void LocalField::build_residue_data() {
    Int pW = int_pow(p_, W_);
    // frobenius on O/pO over the maximal order
    long m = 0;
    {
        Int pm = 1;
        while (pm < n_) {
            pm *= p_;
            ++m;
        }
        if (m == 0) m = 1;
    }
    IntMatrix F(n_, n_);
    for (long i = 0; i < n_; ++i) {
        LFElem x = zero();
        x.c[static_cast<size_t>(i)] = 1;
        LFElem acc = x;
        for (long s = 0; s < m; ++s) acc = pow(acc, p_);
        for (long j = 0; j < n_; ++j) F.at(j, i) = mod_p(acc.c[static_cast<size_t>(j)], p_);
    }
    nil_mod_p_ = kernel_mod_p(F, p_);
    long nildim = nil_mod_p_.cols;
    if (n_ % (n_ - nildim) != 0)
        throw Error("LocalField: residue degree does not divide field degree");
    f_ = n_ - nildim;
    e_ = n_ / f_;

    // residue basis: coordinate vectors complementing the nilradical span
    {
        IntMatrix stack(n_, nildim);
        for (long j = 0; j < nildim; ++j)
            for (long i = 0; i < n_; ++i) stack.at(i, j) = nil_mod_p_.at(i, j);
        // row echelon of the transpose to find pivot coordinates
        IntMatrix Mt = stack.transpose();
        std::vector<bool> is_pivot(static_cast<size_t>(n_), false);
        long pr = 0;
        for (long c = 0; c < n_ && pr < Mt.rows; ++c) {
            long sel = -1;
            for (long r = pr; r < Mt.rows; ++r)
                if (mod_p(Mt.at(r, c), p_) != 0) {
                    sel = r;
                    break;
                }
            if (sel == -1) continue;
            for (long j = 0; j < n_; ++j) std::swap(Mt.at(pr, j), Mt.at(sel, j));
            Int piv = mod_p(Mt.at(pr, c), p_), inv;
            mpz_invert(inv.get_mpz_t(), piv.get_mpz_t(), p_.get_mpz_t());
            for (long j = 0; j < n_; ++j) Mt.at(pr, j) = mod_p(Mt.at(pr, j) * inv, p_);
            for (long r = 0; r < Mt.rows; ++r) {
                if (r == pr) continue;
                Int q = mod_p(Mt.at(r, c), p_);
                if (q == 0) continue;
                for (long j = 0; j < n_; ++j) Mt.at(r, j) = mod_p(Mt.at(r, j) - q * Mt.at(pr, j), p_);
            }
            is_pivot[static_cast<size_t>(c)] = true;
            ++pr;
        }
        res_basis_.clear();
        for (long i = 0; i < n_; ++i) {
            if (is_pivot[static_cast<size_t>(i)]) continue;
            LFElem b = zero();
            b.c[static_cast<size_t>(i)] = 1;
            res_basis_.push_back(b);
        }
        if (static_cast<long>(res_basis_.size()) != f_)
            throw Error("LocalField: residue basis extraction failed");
    }

    // uniformizer
    if (e_ == 1) {
        pi_ = mul_int(one(), p_);
    } else {
        bool found = false;
        std::vector<LFElem> cands;
        for (long j = 0; j < nil_mod_p_.cols; ++j) {
            LFElem c = zero();
            for (long i = 0; i < n_; ++i) c.c[static_cast<size_t>(i)] = mod_p(nil_mod_p_.at(i, j), p_);
            cands.push_back(c);
        }
        for (size_t a = 0; a < cands.size() && !found; ++a) {
            std::vector<Int> g;
            long den;
            to_poly(cands[a], g, den);
            Int res = poly_resultant(poly_, g);
            if (res == 0) continue;
            long v = valuation(res, p_) - n_ * den;
            if (v == f_) {
                pi_ = cands[a];
                found = true;
            }
        }
        if (!found) {
            // pairwise sums as fallback
            for (size_t a = 0; a < cands.size() && !found; ++a)
                for (size_t b = a + 1; b < cands.size() && !found; ++b) {
                    LFElem s = add(cands[a], cands[b]);
                    std::vector<Int> g;
                    long den;
                    to_poly(s, g, den);
                    Int res = poly_resultant(poly_, g);
                    if (res == 0) continue;
                    long v = valuation(res, p_) - n_ * den;
                    if (v == f_) {
                        pi_ = s;
                        found = true;
                    }
                }
        }
        if (!found) throw Error("LocalField: no uniformizer found");
    }

    // residue transversal
    Int count = 1;
    for (long i = 0; i < f_; ++i) {
        count *= p_;
        if (count > 4096) throw UnsupportedDegree("residue field too large");
    }
    long cnt = static_cast<long>(count.get_si());
    transversal_.clear();
    transversal_.reserve(static_cast<size_t>(cnt));
    std::vector<long> digits(static_cast<size_t>(f_), 0);
    long pl = static_cast<long>(p_.get_si());
    for (long idx = 0; idx < cnt; ++idx) {
        LFElem t = zero();
        for (long i = 0; i < f_; ++i)
            t = add(t, mul_int(res_basis_[static_cast<size_t>(i)], Int(digits[static_cast<size_t>(i)])));
        transversal_.push_back(t);
        long k = 0;
        while (k < f_ && ++digits[static_cast<size_t>(k)] == pl) {
            digits[static_cast<size_t>(k)] = 0;
            ++k;
        }
    }
}

// --- element ops ---

LFElem LocalField::zero() const { return LFElem{std::vector<Int>(static_cast<size_t>(n_), Int(0)), W_}; }

LFElem LocalField::one() const {
    LFElem r = zero();
    // coordinate vector of 1: solve basis * x = e_... the order contains 1;
    // 1 in theta coords is (1, 0, ...) * p^T / p^T
    std::vector<Int> g(static_cast<size_t>(n_), Int(0));
    g[0] = 1;
    return from_poly(g, 0);
}

LFElem LocalField::from_int(const Int& k) const { return mul_int(one(), k); }

LFElem LocalField::from_poly(const std::vector<Int>& g, long den) const {
    // value = g(theta)/p^den ; coords x solve basis*x/p^T = g/p^den
    // => basis*x = g * p^{T-den}
    Int pW = int_pow(p_, W_);
    std::vector<Int> gr = poly_redmod(g, poly_, pW * pW);
    std::vector<Int> x(static_cast<size_t>(n_));
    Int num_scale, den_scale;
    if (T_ >= den) {
        num_scale = int_pow(p_, T_ - den);
        den_scale = 1;
    } else {
        num_scale = 1;
        den_scale = int_pow(p_, den - T_);
    }
    for (long i = 0; i < n_; ++i) {
        Int acc = 0;
        for (long j = 0; j < n_; ++j) acc += basis_inv_scaled_.at(i, j) * gr[static_cast<size_t>(j)];
        acc *= num_scale;
        Int d = detB_ * den_scale;
        Int q, r;
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), acc.get_mpz_t(), d.get_mpz_t());
        if (r != 0) throw Error("LocalField::from_poly: element not integral");
        x[static_cast<size_t>(i)] = mod_p(q, pW);
    }
    return LFElem{x, W_};
}

void LocalField::to_poly(const LFElem& a, std::vector<Int>& g, long& den) const {
    g.assign(static_cast<size_t>(n_), Int(0));
    for (long j = 0; j < n_; ++j)
        for (long i = 0; i < n_; ++i) g[static_cast<size_t>(j)] += basis_.at(j, i) * a.c[static_cast<size_t>(i)];
    den = T_;
    while (den > 0) {
        bool all = true;
        for (const auto& c : g)
            if (c != 0 && !mpz_divisible_p(c.get_mpz_t(), p_.get_mpz_t())) {
                all = false;
                break;
            }
        if (!all) break;
        for (auto& c : g)
            if (c != 0) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), p_.get_mpz_t());
        --den;
    }
}

LFElem LocalField::add(const LFElem& a, const LFElem& b) const {
    long prec = std::min(a.prec, b.prec);
    Int m = int_pow(p_, prec);
    LFElem r;
    r.prec = prec;
    r.c.resize(static_cast<size_t>(n_));
    for (long i = 0; i < n_; ++i) r.c[static_cast<size_t>(i)] = mod_p(a.c[static_cast<size_t>(i)] + b.c[static_cast<size_t>(i)], m);
    return r;
}

LFElem LocalField::sub(const LFElem& a, const LFElem& b) const { return add(a, neg(b)); }

LFElem LocalField::neg(const LFElem& a) const {
    Int m = int_pow(p_, a.prec);
    LFElem r = a;
    for (auto& c : r.c) c = mod_p(-c, m);
    return r;
}

LFElem LocalField::mul(const LFElem& a, const LFElem& b) const {
    long prec = std::min(a.prec, b.prec);
    Int m = int_pow(p_, prec);
    LFElem r;
    r.prec = prec;
    r.c.assign(static_cast<size_t>(n_), Int(0));
    for (long i = 0; i < n_; ++i) {
        if (a.c[static_cast<size_t>(i)] == 0) continue;
        for (long j = 0; j < n_; ++j) {
            if (b.c[static_cast<size_t>(j)] == 0) continue;
            Int coef = a.c[static_cast<size_t>(i)] * b.c[static_cast<size_t>(j)];
            const auto& z = mult_table_[static_cast<size_t>(i * n_ + j)];
            for (long k = 0; k < n_; ++k) r.c[static_cast<size_t>(k)] += coef * z[static_cast<size_t>(k)];
        }
    }
    for (auto& c : r.c) c = mod_p(c, m);
    return r;
}

LFElem LocalField::mul_int(const LFElem& a, const Int& k) const {
    Int m = int_pow(p_, a.prec);
    LFElem r = a;
    for (auto& c : r.c) c = mod_p(c * k, m);
    return r;
}

LFElem LocalField::pow(const LFElem& a, const Int& k) const {
    if (k < 0) throw Error("LocalField::pow: negative exponent");
    LFElem acc = one();
    acc.prec = a.prec;
    if (k == 0) return acc;
    LFElem base = a;
    Int kk = k;
    while (kk > 0) {
        if (mpz_odd_p(kk.get_mpz_t())) acc = mul(acc, base);
        kk /= 2;
        if (kk > 0) base = mul(base, base);
    }
    return acc;
}

bool LocalField::is_zero(const LFElem& a) const {
    Int m = int_pow(p_, std::min(a.prec, W_));
    for (const auto& c : a.c)
        if (mod_p(c, m) != 0) return false;
    return true;
}

bool LocalField::in_maximal_ideal(const LFElem& a) const {
    // membership of (a mod p) in the nilradical span
    std::vector<Int> v(static_cast<size_t>(n_));
    for (long i = 0; i < n_; ++i) v[static_cast<size_t>(i)] = mod_p(a.c[static_cast<size_t>(i)], p_);
    // eliminate with nil columns (gaussian, tiny sizes)
    IntMatrix M(n_, nil_mod_p_.cols + 1);
    for (long j = 0; j < nil_mod_p_.cols; ++j)
        for (long i = 0; i < n_; ++i) M.at(i, j) = nil_mod_p_.at(i, j);
    for (long i = 0; i < n_; ++i) M.at(i, nil_mod_p_.cols) = v[static_cast<size_t>(i)];
    // v in span iff rank unchanged when adding v
    auto rank_mod_p = [&](IntMatrix X, long cols) {
        long pr = 0;
        for (long c = 0; c < cols && pr < X.rows; ++c) {
            long sel = -1;
            for (long r = pr; r < X.rows; ++r)
                if (mod_p(X.at(r, c), p_) != 0) {
                    sel = r;
                    break;
                }
            if (sel == -1) continue;
            for (long j = 0; j < cols; ++j) std::swap(X.at(pr, j), X.at(sel, j));
            Int piv = mod_p(X.at(pr, c), p_), inv;
            mpz_invert(inv.get_mpz_t(), piv.get_mpz_t(), p_.get_mpz_t());
            for (long j = 0; j < cols; ++j) X.at(pr, j) = mod_p(X.at(pr, j) * inv, p_);
            for (long r = 0; r < X.rows; ++r) {
                if (r == pr) continue;
                Int q = mod_p(X.at(r, c), p_);
                if (q == 0) continue;
                for (long j = 0; j < cols; ++j) X.at(r, j) = mod_p(X.at(r, j) - q * X.at(pr, j), p_);
            }
            ++pr;
        }
        return pr;
    };
    long r1 = rank_mod_p(M, nil_mod_p_.cols);
    long r2 = rank_mod_p(M, nil_mod_p_.cols + 1);
    return r1 == r2;
}

long LocalField::val(const LFElem& a) const {
    if (is_zero(a)) throw PrecisionExhausted("val of zero-to-precision element");
    std::vector<Int> g;
    long den;
    to_poly(a, g, den);
    Int res = poly_resultant(poly_, g);
    if (res == 0) throw PrecisionExhausted("val: resultant vanished");
    long v = valuation(res, p_);
    if (v >= a.prec - 16) throw PrecisionExhausted("val: beyond working precision");
    long num = v - n_ * den;
    if (num % f_ != 0) throw Error("LocalField::val: valuation not integral");
    return num / f_;
}

Int LocalField::norm_int(const LFElem& a, long& den_out) const {
    std::vector<Int> g;
    long den;
    to_poly(a, g, den);
    Int res = poly_resultant(poly_, g);
    den_out = n_ * den;
    return res;
}

Padic LocalField::norm2(const LFElem& a) const {
    if (p_ != 2) throw Error("norm2 requires p = 2");
    long den_out;
    Int res = norm_int(a, den_out);
    long valid = a.prec - T_ * n_;  // conservative validity of the resultant
    if (res == 0) return Padic::zero(valid - den_out);
    Int r = mod_pow2(res, valid);
    if (r == 0) return Padic::zero(valid - den_out);
    long v = v2(r);
    return Padic::make(v - den_out, r >> static_cast<unsigned long>(v), valid - v);
}

std::vector<Int> LocalField::solve_local(const IntMatrix& M, const std::vector<Int>& b, long prec,
                                         long* loss) const {
    SnfResult s = snf_mod_prime_power(M, p_, prec);
    Int pe = int_pow(p_, prec);
    std::vector<Int> c = s.left.apply(b);
    for (auto& v : c) v = mod_p(v, pe);
    long n = M.rows;
    std::vector<Int> y(static_cast<size_t>(n), Int(0));
    long total_loss = 0;
    for (long i = 0; i < n; ++i) {
        Int d = (i < static_cast<long>(s.diag.size())) ? s.diag[static_cast<size_t>(i)] : Int(0);
        const Int& ci = c[static_cast<size_t>(i)];
        if (d == 0) {
            if (ci != 0) throw PrecisionExhausted("solve_local: inconsistent system");
            continue;
        }
        long dv = valuation(d, p_);
        total_loss = std::max(total_loss, dv);
        if (ci == 0) continue;
        if (valuation(ci, p_) < dv) throw PrecisionExhausted("solve_local: no integral solution");
        Int pk = int_pow(p_, dv);
        y[static_cast<size_t>(i)] = ci / pk;
    }
    std::vector<Int> x = s.right.apply(y);
    for (auto& v : x) v = mod_p(v, pe);
    if (loss) *loss = total_loss;
    return x;
}

LFElem LocalField::inv_unit(const LFElem& a) const {
    // multiplication matrix of a
    IntMatrix M(n_, n_);
    for (long j = 0; j < n_; ++j) {
        LFElem ej = zero();
        ej.c[static_cast<size_t>(j)] = 1;
        LFElem col = mul(a, ej);
        for (long i = 0; i < n_; ++i) M.at(i, j) = col.c[static_cast<size_t>(i)];
    }
    long loss = 0;
    std::vector<Int> x = solve_local(M, one().c, std::min(a.prec, W_), &loss);
    if (loss > 0) throw Error("inv_unit: element is not a unit");
    return LFElem{x, std::min(a.prec, W_)};
}

LFElem LocalField::div_pi(const LFElem& a, long k) const {
    if (k == 0) return a;
    LFElem pk = pow(pi_, Int(k));
    IntMatrix M(n_, n_);
    for (long j = 0; j < n_; ++j) {
        LFElem ej = zero();
        ej.c[static_cast<size_t>(j)] = 1;
        LFElem col = mul(pk, ej);
        for (long i = 0; i < n_; ++i) M.at(i, j) = col.c[static_cast<size_t>(i)];
    }
    long prec = std::min(a.prec, W_);
    long loss = 0;
    std::vector<Int> x = solve_local(M, a.c, prec, &loss);
    long nprec = prec - loss - 1;
    if (nprec < 8) throw PrecisionExhausted("div_pi: precision exhausted");
    Int m = int_pow(p_, nprec);
    for (auto& c : x) c = mod_p(c, m);
    return LFElem{x, nprec};
}

LFElem LocalField::residue_rep(const LFElem& a) const {
    // write (a mod p) = rho + nu with rho in residue span, nu nilpotent
    // residue basis = coordinate vectors at non-pivot coords; nil echelon has
    // pivots exactly at complement coords, so eliminate a with nil columns.
    std::vector<Int> v(static_cast<size_t>(n_));
    for (long i = 0; i < n_; ++i) v[static_cast<size_t>(i)] = mod_p(a.c[static_cast<size_t>(i)], p_);
    // gaussian elimination: subtract nil columns to zero their pivot coords
    IntMatrix N = nil_mod_p_;
    // echelonize columns of N, remembering pivot rows
    long cols = N.cols;
    std::vector<long> pivot_row(static_cast<size_t>(cols), -1);
    long pc = 0;
    for (long r = 0; r < n_ && pc < cols; ++r) {
        long sel = -1;
        for (long c = pc; c < cols; ++c)
            if (mod_p(N.at(r, c), p_) != 0) {
                sel = c;
                break;
            }
        if (sel == -1) continue;
        for (long i = 0; i < n_; ++i) std::swap(N.at(i, pc), N.at(i, sel));
        Int piv = mod_p(N.at(r, pc), p_), inv;
        mpz_invert(inv.get_mpz_t(), piv.get_mpz_t(), p_.get_mpz_t());
        for (long i = 0; i < n_; ++i) N.at(i, pc) = mod_p(N.at(i, pc) * inv, p_);
        for (long c = 0; c < cols; ++c) {
            if (c == pc) continue;
            Int q = mod_p(N.at(r, c), p_);
            if (q == 0) continue;
            for (long i = 0; i < n_; ++i) N.at(i, c) = mod_p(N.at(i, c) - q * N.at(i, pc), p_);
        }
        pivot_row[static_cast<size_t>(pc)] = r;
        ++pc;
    }
    for (long c = 0; c < pc; ++c) {
        long r = pivot_row[static_cast<size_t>(c)];
        Int q = v[static_cast<size_t>(r)];
        if (q == 0) continue;
        for (long i = 0; i < n_; ++i) v[static_cast<size_t>(i)] = mod_p(v[static_cast<size_t>(i)] - q * N.at(i, c), p_);
    }
    LFElem r = zero();
    for (long i = 0; i < n_; ++i) r.c[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
    return r;
}

LFElem LocalField::residue_sqrt(const LFElem& t) const {
    // Frobenius preimage: s = t^{p^f / 2}... for p=2: s = t^{2^{f-1}}
    LFElem s = t;
    for (long i = 0; i < f_ - 1; ++i) s = mul(s, s);
    s = residue_rep(s);
    return s;
}

bool LocalField::artin_schreier_solve(const LFElem& a, const LFElem& t, LFElem& s) const {
    for (const auto& cand : transversal_) {
        LFElem lhs = add(mul(cand, cand), mul(a, cand));
        LFElem diff = sub(lhs, t);
        if (in_maximal_ideal(diff)) {
            s = cand;
            return true;
        }
    }
    return false;
}

bool LocalField::is_square(const LFElem& a, LFElem* root) const {
    if (p_ != 2) throw Error("is_square implemented for p = 2 only");
    if (is_zero(a)) throw ZeroInput("is_square of zero element");
    long v = val(a);
    if (v % 2 != 0) return false;
    LFElem u = div_pi(a, v);
    LFElem w = one();
    LFElem cur = u;
    long guard = 4 * e_ + 40;
    long last_k = -1;
    while (guard-- > 0) {
        // normalize residue to 1
        LFElem r = residue_rep(cur);
        LFElem rdiff = sub(r, one());
        if (!in_maximal_ideal(rdiff)) {
            LFElem s = residue_sqrt(r);
            // s^2 = r mod m; cur <- cur / s^2
            LFElem sinv = inv_unit(s);
            cur = mul(cur, mul(sinv, sinv));
            w = mul(w, s);
        }
        LFElem d = sub(cur, one());
        long k;
        if (is_zero(d)) {
            k = 2 * e_ + 1;  // vanishes to working precision
        } else {
            k = val(d);
        }
        if (k >= 2 * e_ + 1) break;
        if (k == last_k) throw PrecisionExhausted("is_square: no progress");
        last_k = k;
        if (k % 2 != 0) return false;
        LFElem t = residue_rep(div_pi(d, k));
        if (k < 2 * e_) {
            LFElem s = residue_sqrt(t);
            LFElem corr = add(one(), mul(pow(pi_, Int(k / 2)), s));
            LFElem cinv = inv_unit(corr);
            cur = mul(cur, mul(cinv, cinv));
            w = mul(w, corr);
        } else {  // k == 2e: Artin-Schreier level
            LFElem c = residue_rep(div_pi(from_int(2), e_));
            LFElem s;
            if (!artin_schreier_solve(c, t, s)) return false;
            LFElem corr = add(one(), mul(pow(pi_, Int(e_)), s));
            LFElem cinv = inv_unit(corr);
            cur = mul(cur, mul(cinv, cinv));
            w = mul(w, corr);
        }
    }
    if (guard <= 0) throw PrecisionExhausted("is_square: level climb did not terminate");
    if (!root) return true;

    // Newton square root of cur (= 1 mod pi^{2e+1})
    LFElem x = one();
    long target_piv = std::min(e_ * (cur.prec / 2), 12 * e_ + 96);
    for (int it = 0; it < 200; ++it) {
        LFElem fx = sub(mul(x, x), cur);
        if (is_zero(fx) || val(fx) >= target_piv) break;
        // x <- (x + cur/x)/2
        LFElem t = add(x, mul(cur, inv_unit(x)));
        long prec = t.prec;
        Int m = int_pow(p_, prec);
        for (auto& c : t.c) {
            if (mpz_odd_p(c.get_mpz_t())) c += m;
            if (mpz_odd_p(c.get_mpz_t())) throw PrecisionExhausted("sqrt: halving failed");
            c >>= 1;
        }
        t.prec = prec - 1;
        x = t;
    }
    LFElem result = mul(mul(pow(pi_, Int(v / 2)), w), x);
    // verify
    LFElem check = sub(mul(result, result), a);
    if (!is_zero(check)) {
        long cv = val(check);
        if (cv < 2 * e_ + v) throw PrecisionExhausted("is_square: witness verification failed");
    }
    *root = result;
    return true;
}

Int LocalField::torsion_order() const {
    if (p_ == 2) {
        Int order = 2;
        LFElem zeta = neg(one());
        long guard = 8;
        while (guard-- > 0) {
            LFElem root;
            if (!is_square(zeta, &root)) break;
            zeta = root;
            order *= 2;
            if (order > 2 * n_ * 2) break;  // [Q_2(zeta_{2^t}) : Q_2] = 2^{t-2} <= n
        }
        return order;
    }
    // odd residue characteristic: mu_{p^t}
    long pl = static_cast<long>(p_.get_si());
    if ((pl - 1) > n_) return Int(1);
    // zeta_p: root of cyclotomic polynomial 1 + x + ... + x^{p-1}
    std::vector<LFElem> phi;
    for (long i = 0; i < pl; ++i) phi.push_back(one());
    auto r = find_root(phi);
    if (!r) return Int(1);
    Int order = p_;
    long t = 1;
    LFElem zeta = *r;
    while (true) {
        // [Q_p(zeta_{p^{t+1}}) : Q_p] = (p-1) p^t
        long next_deg = pl - 1;
        for (long i = 0; i < t; ++i) next_deg *= pl;
        if (next_deg > n_) break;
        // root of x^p - zeta
        std::vector<LFElem> g;
        g.push_back(neg(zeta));
        for (long i = 1; i < pl; ++i) g.push_back(zero());
        g.push_back(one());
        auto rr = find_root(g);
        if (!rr) break;
        zeta = *rr;
        order *= p_;
        ++t;
    }
    return order;
}

std::optional<LFElem> LocalField::find_root(const std::vector<LFElem>& g) const {
    auto eval = [&](const LFElem& x) {
        LFElem acc = zero();
        for (auto it = g.rbegin(); it != g.rend(); ++it) acc = add(mul(acc, x), *it);
        return acc;
    };
    std::vector<LFElem> dg;
    for (size_t i = 1; i < g.size(); ++i) dg.push_back(mul_int(g[i], Int(static_cast<long>(i))));
    auto deval = [&](const LFElem& x) {
        LFElem acc = zero();
        for (auto it = dg.rbegin(); it != dg.rend(); ++it) acc = add(mul(acc, x), *it);
        return acc;
    };

    long cap = 4 * e_ * std::max(1L, static_cast<long>(p_.get_si())) + 8;
    std::vector<LFElem> level = {zero()};
    std::vector<LFElem> pis = {one()};
    for (long k = 1; k <= cap; ++k) pis.push_back(mul(pis.back(), pi_));

    for (long k = 0; k < cap; ++k) {
        std::vector<LFElem> next;
        for (const auto& y : level) {
            for (const auto& t : transversal_) {
                LFElem cand = add(y, mul(pis[static_cast<size_t>(k)], t));
                LFElem fv = eval(cand);
                long fval = is_zero(fv) ? cap + 10 : val(fv);
                if (fval >= k + 1) {
                    // Newton attempt when decisive
                    LFElem dv = deval(cand);
                    if (!is_zero(dv)) {
                        long dval = val(dv);
                        long verify_piv = 8 * e_ + 16;
                        if (fval > 2 * dval) {
                            LFElem x = cand;
                            for (int it = 0; it < 64; ++it) {
                                LFElem fx = eval(x);
                                if (is_zero(fx) || val(fx) >= verify_piv) break;
                                LFElem dfx = deval(x);
                                long vd = val(dfx);
                                LFElem q = mul(div_pi(fx, vd), inv_unit(div_pi(dfx, vd)));
                                x = sub(x, q);
                            }
                            LFElem fx = eval(x);
                            if (is_zero(fx) || val(fx) >= verify_piv) return x;
                        }
                    }
                    next.push_back(cand);
                    if (next.size() > 256) throw PrecisionExhausted("find_root: branch explosion");
                }
            }
        }
        if (next.empty()) return std::nullopt;
        level = std::move(next);
    }
    return std::nullopt;  // no certified root within cap; treat as absent
}

std::string LocalField::describe(const LFElem& a) const {
    std::vector<Int> g;
    long den;
    to_poly(a, g, den);
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < g.size(); ++i) {
        if (i) os << ", ";
        Int c = g[i];
        Int half = int_pow(p_, W_) / 2;
        if (c > half) c -= int_pow(p_, W_);
        os << c.get_str();
    }
    os << ")/" << p_.get_str() << "^" << den;
    return os.str();
}

// --- tower step and exceptionality ---

namespace {

// Berkowitz division-free characteristic polynomial of M, coefficients
// ascending, reduced mod `modn`.
std::vector<Int> charpoly_mod(const IntMatrix& M, const Int& modn) {
    long n = M.rows;
    // iterative Samuelson-Berkowitz
    std::vector<Int> c = {Int(1)};  // charpoly of empty matrix
    for (long k = 1; k <= n; ++k) {
        // principal k x k submatrix
        // vectors: R = M[k-1, 0..k-2], C = M[0..k-2, k-1], A = M[0..k-2][0..k-2]
        long km = k - 1;
        std::vector<Int> toep(static_cast<size_t>(k + 1));
        toep[0] = 1;
        toep[1] = -M.at(km, km);
        if (km > 0) {
            // powers of A applied to C
            std::vector<Int> vec(static_cast<size_t>(km));
            for (long i = 0; i < km; ++i) vec[static_cast<size_t>(i)] = M.at(i, km);
            for (long t = 2; t <= k; ++t) {
                // toep[t] = -R . A^{t-2} C
                Int acc = 0;
                for (long i = 0; i < km; ++i) acc += M.at(km, i) * vec[static_cast<size_t>(i)];
                toep[static_cast<size_t>(t)] = mod_p(-acc, modn);
                if (t < k) {
                    std::vector<Int> nv(static_cast<size_t>(km), Int(0));
                    for (long i = 0; i < km; ++i) {
                        Int a = 0;
                        for (long j = 0; j < km; ++j) a += M.at(i, j) * vec[static_cast<size_t>(j)];
                        nv[static_cast<size_t>(i)] = mod_p(a, modn);
                    }
                    vec = nv;
                }
            }
        }
        // nc = T * c with T the lower-triangular Toeplitz matrix of toep:
        // nc[i] = sum_j toep[i-j] c[j]
        std::vector<Int> nc(static_cast<size_t>(k + 1), Int(0));
        for (long i = 0; i <= k; ++i) {
            Int acc = 0;
            for (long j = 0; j <= std::min<long>(i, static_cast<long>(c.size()) - 1); ++j)
                acc += toep[static_cast<size_t>(i - j)] * c[static_cast<size_t>(j)];
            nc[static_cast<size_t>(i)] = mod_p(acc, modn);
        }
        c = nc;
    }
    // c holds coefficients with leading first; convert to ascending x^n..x^0?
    // Berkowitz yields charpoly coefficients from leading to constant.
    std::vector<Int> asc(c.rbegin(), c.rend());
    return asc;
}

}  // namespace

LocalField first_cyclotomic_step(const LocalField& K) {
    if (K.prime() != 2) throw Error("first_cyclotomic_step requires p = 2");
    long n = K.degree();
    if (2 * n > 16) throw UnsupportedDegree("tower step would exceed degree 16");
    LFElem alpha = K.zero();
    long guard = 64;
    while (guard-- > 0) {
        LFElem g = K.add(K.from_int(2), alpha);
        LFElem root;
        if (K.is_square(g, &root)) {
            alpha = root;
            continue;
        }
        // E = K(sqrt(g)); find primitive eta = theta + c*sqrt(g)
        Int pW = pow2(K.work_prec());
        std::vector<LFElem> cands = {K.one()};
        cands.push_back(K.add(K.theta(), K.one()));
        cands.push_back(K.from_int(3));
        cands.push_back(K.theta());
        for (const auto& c : cands) {
            // 2n x 2n matrix of eta = theta + c*sqrt(g) on basis (b_i, b_i sqrt g)
            IntMatrix M(2 * n, 2 * n);
            for (long j = 0; j < n; ++j) {
                LFElem ej = K.zero();
                ej.c[static_cast<size_t>(j)] = 1;
                LFElem top = K.mul(K.theta(), ej);       // theta * b_j
                LFElem bot = K.mul(c, ej);               // c * b_j  (sqrt-g component)
                for (long i = 0; i < n; ++i) {
                    M.at(i, j) = top.c[static_cast<size_t>(i)];
                    M.at(n + i, j) = bot.c[static_cast<size_t>(i)];
                }
                LFElem top2 = K.mul(K.mul(c, g), ej);    // c*g*b_j
                LFElem bot2 = K.mul(K.theta(), ej);      // theta * b_j sqrt g
                for (long i = 0; i < n; ++i) {
                    M.at(i, n + j) = top2.c[static_cast<size_t>(i)];
                    M.at(n + i, n + j) = bot2.c[static_cast<size_t>(i)];
                }
            }
            std::vector<Int> P = charpoly_mod(M, pW);
            // make monic-normalized (Berkowitz may give sign-flipped poly)
            if (P.back() != 1) {
                Int lead = P.back();
                if (lead == pW - 1) {
                    for (auto& x : P) x = mod_p(-x, pW);
                } else if (lead != 1) {
                    continue;
                }
            }
            // squarefree check via resultant with derivative
            std::vector<Int> Pc = P;
            for (auto& x : Pc) {
                Int half = pW / 2;
                if (x > half) x -= pW;
            }
            std::vector<Int> dP;
            for (size_t i = 1; i < Pc.size(); ++i) dP.push_back(Pc[i] * static_cast<long>(i));
            Int res = poly_resultant(Pc, dP);
            if (res == 0 || v2(res) > K.work_prec() / 2) continue;
            LocalField E(Pc, Int(2), K.work_prec());
            if (E.ram_index() * E.res_degree() != 2 * n) continue;
            return E;
        }
        throw Error("first_cyclotomic_step: no primitive element found");
    }
    throw PrecisionExhausted("first_cyclotomic_step: tower did not terminate");
}

bool is_exceptional_dyadic(const LocalField& K) {
    if (K.prime() != 2) throw Error("is_exceptional_dyadic requires p = 2");
    // i in E = K(alpha_k)  <=>  -1 square in K  or  -(2 + alpha_{k-1}) square in K
    if (K.is_square(K.neg(K.one()))) return false;
    LFElem alpha = K.zero();
    long guard = 64;
    while (guard-- > 0) {
        LFElem g = K.add(K.from_int(2), alpha);
        LFElem root;
        if (K.is_square(g, &root)) {
            alpha = root;
            continue;
        }
        return !K.is_square(K.neg(g));
    }
    throw PrecisionExhausted("is_exceptional_dyadic: tower did not terminate");
}

}  // namespace narrowlog
