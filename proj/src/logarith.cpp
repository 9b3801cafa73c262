#include "narrowlog/logarith.hpp"

#include <algorithm>

#include "narrowlog/errors.hpp"

namespace narrowlog {

Padic place_degree_from_samples(const std::vector<Padic>& samples) {
    const Padic* best = nullptr;
    for (const auto& s : samples) {
        if (s.is_zero()) continue;
        if (!best || s.val() < best->val()) best = &s;
    }
    if (!best) throw PrecisionExhausted("place degree: all Log-norm samples vanished");
    return *best;
}

Padic log_valuation(const Padic& local_norm_log, const Padic& degree) {
    if (local_norm_log.is_zero()) {
        // exactly a power of two times a sign: logarithmic valuation 0
        return Padic::zero(local_norm_log.abs_prec() - degree.val());
    }
    if (local_norm_log.val() < degree.val())
        throw Error("log_valuation: Log N outside the module generated by deg");
    Padic tv = -(local_norm_log / degree);
    return tv;
}

Padic product_formula_residual(const std::vector<Int>& odd_vals,
                               const std::vector<Padic>& odd_log_norms,
                               const std::vector<Padic>& tv,
                               const std::vector<Padic>& degrees) {
    Padic acc = Padic::zero(1 << 20);
    for (size_t i = 0; i < odd_vals.size(); ++i)
        acc = acc + Padic::from_int(odd_vals[i], 256) * odd_log_norms[i];
    for (size_t j = 0; j < tv.size(); ++j) acc = acc + tv[j] * degrees[j];
    return acc;
}

namespace {

struct Prepared {
    std::vector<Padic> degrees;
    std::vector<std::vector<Padic>> unit_tv;  // [unit][place]
    std::vector<std::vector<Padic>> rel_tv;   // [rel][place]
    std::vector<Padic> residuals;
};

Prepared prepare(const LogInput& in, long e) {
    Prepared P;
    long rel = e + 48;
    for (long j = 0; j < in.dyadic_count; ++j) {
        std::vector<Padic> samples = in.deg_samples(static_cast<size_t>(j), rel);
        Padic deg = place_degree_from_samples(samples);
        if (deg.val() > e / 2) throw PrecisionExhausted("place degree valuation too large");
        P.degrees.push_back(deg);
    }
    std::vector<Padic> odd_logs;
    for (const auto& nq : in.class_prime_norms) odd_logs.push_back(iwasawa_log_int(nq, rel));

    auto compute_tv = [&](bool is_rel, size_t idx) {
        std::vector<Padic> tv;
        for (long j = 0; j < in.dyadic_count; ++j) {
            Padic nrm = in.local_norm(is_rel, idx, static_cast<size_t>(j), rel);
            Padic lg = nrm.is_zero() ? Padic::zero(rel) : iwasawa_log(nrm);
            tv.push_back(log_valuation(lg, P.degrees[static_cast<size_t>(j)]));
        }
        return tv;
    };
    for (size_t k = 0; k < in.two_units.size(); ++k) {
        P.unit_tv.push_back(compute_tv(false, k));
        Padic res = product_formula_residual({}, {}, P.unit_tv.back(), P.degrees);
        P.residuals.push_back(res);
    }
    for (size_t k = 0; k < in.class_rels.size(); ++k) {
        P.rel_tv.push_back(compute_tv(true, k));
        Padic res = product_formula_residual(in.class_rels[k].class_vals, odd_logs,
                                             P.rel_tv.back(), P.degrees);
        P.residuals.push_back(res);
    }
    long slack = 4;
    for (const auto& res : P.residuals) {
        if (res.is_zero()) {
            if (res.abs_prec() < e - slack)
                throw PrecisionExhausted("product formula residual known too coarsely");
        } else if (res.val() < e - slack) {
            throw GrossCheckFailed("product formula violated: residual valuation " +
                                   std::to_string(res.val()) + " at e=" + std::to_string(e));
        }
    }
    return P;
}

Int residue_of(const Padic& x, long e) { return x.is_zero() ? Int(0) : x.residue(e); }

std::vector<int> combine_signs(const std::vector<const LogElement*>& elems,
                               const std::vector<Int>& exps, int r) {
    std::vector<int> s(static_cast<size_t>(r), 0);
    for (size_t i = 0; i < elems.size(); ++i) {
        if (mpz_even_p(exps[i].get_mpz_t())) continue;
        for (int j = 0; j < r; ++j) s[static_cast<size_t>(j)] ^= elems[i]->signs[static_cast<size_t>(j)];
    }
    return s;
}

}  // namespace

LogGroups compute_log_groups_at(const LogInput& in, long e) {
    const long dd = in.dyadic_count;
    const long s = static_cast<long>(in.class_rels.size());
    const long nu_units = static_cast<long>(in.two_units.size());
    const int r = in.r;
    if (nu_units != in.r + in.c + dd - 1)
        throw Error("two_units count does not match r+c+d-1");

    Prepared P = prepare(in, e);
    LogGroups out;
    out.degrees = P.degrees;
    out.product_formula_residuals = P.residuals;
    out.e_used = e;

    // ---- logarithmic units: nullspace of the d x (r+c+d-1) matrix of tv ----
    IntMatrix V(dd, nu_units);
    for (long j = 0; j < dd; ++j)
        for (long k = 0; k < nu_units; ++k)
            V.at(j, k) = residue_of(P.unit_tv[static_cast<size_t>(k)][static_cast<size_t>(j)], e);
    IntMatrix lattice = nullspace_mod2e(V, e);
    SnfResult lsnf = snf_integer(lattice);
    long kcand = 0;
    std::vector<std::vector<Int>> unit_vecs;
    for (long i = 0; i < static_cast<long>(lsnf.diag.size()); ++i) {
        const Int& di = lsnf.diag[static_cast<size_t>(i)];
        if (di == 0) continue;
        long v = mpz_even_p(di.get_mpz_t()) ? v2(di) : 0;
        if (v <= e / 2) {
            ++kcand;
            std::vector<Int> vec(static_cast<size_t>(nu_units));
            for (long t = 0; t < nu_units; ++t) vec[static_cast<size_t>(t)] = di * lsnf.left_inv.at(t, i);
            unit_vecs.push_back(std::move(vec));
        }
    }
    out.units.candidate_count = kcand;
    if (kcand != in.r + in.c)
        throw GrossCheckFailed("logarithmic unit rank " + std::to_string(kcand) + " != r+c=" +
                               std::to_string(in.r + in.c) + " at e=" + std::to_string(e));
    out.units.exponents = IntMatrix(nu_units, kcand);
    for (long j = 0; j < kcand; ++j)
        for (long i = 0; i < nu_units; ++i)
            out.units.exponents.at(i, j) = unit_vecs[static_cast<size_t>(j)][static_cast<size_t>(i)];
    for (long j = 0; j < kcand; ++j) {
        std::vector<const LogElement*> elems;
        std::vector<Int> exps;
        for (long i = 0; i < nu_units; ++i) {
            elems.push_back(&in.two_units[static_cast<size_t>(i)]);
            exps.push_back(out.units.exponents.at(i, j));
        }
        out.units.signs.push_back(combine_signs(elems, exps, r));
    }

    // ---- ordinary logarithmic class group ----
    const long gens = dd + s;
    const long elem_cols = nu_units + s;
    IntMatrix relmat(gens, elem_cols + gens);
    for (long k = 0; k < nu_units; ++k)
        for (long j = 0; j < dd; ++j)
            relmat.at(j, k) = residue_of(P.unit_tv[static_cast<size_t>(k)][static_cast<size_t>(j)], e);
    for (long k = 0; k < s; ++k) {
        for (long j = 0; j < dd; ++j)
            relmat.at(j, nu_units + k) =
                residue_of(P.rel_tv[static_cast<size_t>(k)][static_cast<size_t>(j)], e);
        for (long i = 0; i < s; ++i)
            relmat.at(dd + i, nu_units + k) = in.class_rels[static_cast<size_t>(k)].class_vals[static_cast<size_t>(i)];
    }
    for (long i = 0; i < gens; ++i) relmat.at(i, elem_cols + i) = pow2(e);
    AbelianStructure ord = quotient_structure(gens, relmat, e);
    if (ord.precision_hazard) throw PrecisionExhausted("ordinary group: diagonal near 2^e");
    if (ord.free_rank != 1)
        throw GrossCheckFailed("degree line rank " + std::to_string(ord.free_rank) +
                               " != 1 at e=" + std::to_string(e));
    out.ordinary = ord;

    // sign vectors of the alpha_j (relation transcripts over element columns)
    std::vector<const LogElement*> all_elems;
    for (const auto& u : in.two_units) all_elems.push_back(&u);
    for (const auto& rl : in.class_rels) all_elems.push_back(&rl);
    long nu = static_cast<long>(ord.factors.size());
    for (long j = 0; j < nu; ++j) {
        std::vector<Int> exps;
        for (long i = 0; i < elem_cols; ++i) exps.push_back(ord.rel_transcripts.at(i, j));
        out.alpha_signs.push_back(r > 0 ? combine_signs(all_elems, exps, r)
                                        : std::vector<int>{});
    }

    // ---- narrow group ----
    if (r == 0) {
        out.narrow = out.ordinary;
    } else {
        long rows = nu + r;
        long cols = nu + r + (in.r + in.c) + 1;
        IntMatrix R(rows, cols);
        for (long j = 0; j < nu; ++j) {
            R.at(j, j) = ord.factors[static_cast<size_t>(j)];
            for (int i = 0; i < r; ++i)
                R.at(nu + i, j) = out.alpha_signs[static_cast<size_t>(j)][static_cast<size_t>(i)];
        }
        for (int i = 0; i < r; ++i) R.at(nu + i, nu + i) = 2;
        for (long u = 0; u < in.r + in.c; ++u)
            for (int i = 0; i < r; ++i)
                R.at(nu + i, nu + r + u) = out.units.signs[static_cast<size_t>(u)][static_cast<size_t>(i)];
        for (int i = 0; i < r; ++i) R.at(nu + i, cols - 1) = 1;
        AbelianStructure nar = quotient_structure(rows, R, e);
        if (nar.precision_hazard) throw PrecisionExhausted("narrow group: diagonal near 2^e");
        if (nar.free_rank != 0) throw GrossCheckFailed("narrow relation matrix rank deficient");
        out.narrow = nar;
    }

    // monotonicity: |narrow| / |ordinary| is a 2-power at most 2^r
    {
        Int no = out.narrow.order(), oo = out.ordinary.order();
        if (!mpz_divisible_p(no.get_mpz_t(), oo.get_mpz_t()))
            throw GrossCheckFailed("narrow order not divisible by ordinary order");
        Int q = no / oo;
        if (q > pow2(r)) throw GrossCheckFailed("narrow/ordinary ratio exceeds 2^r");
        Int qq = q & (q - 1);
        if (qq != 0) throw GrossCheckFailed("narrow/ordinary ratio not a 2-power");
    }

    // ---- dual-route oracle: direct signed-lattice presentation ----
    {
        long gens2 = dd + s + r;
        long cols2 = elem_cols + 1 + r + gens - 0;  // elements, -1 column, diag(2), 2^e block
        IntMatrix M2(gens2, cols2 + 0);
        // element columns
        for (long k = 0; k < nu_units; ++k) {
            for (long j = 0; j < dd; ++j)
                M2.at(j, k) = residue_of(P.unit_tv[static_cast<size_t>(k)][static_cast<size_t>(j)], e);
            for (int i = 0; i < r; ++i)
                M2.at(dd + s + i, k) = in.two_units[static_cast<size_t>(k)].signs[static_cast<size_t>(i)];
        }
        for (long k = 0; k < s; ++k) {
            for (long j = 0; j < dd; ++j)
                M2.at(j, nu_units + k) =
                    residue_of(P.rel_tv[static_cast<size_t>(k)][static_cast<size_t>(j)], e);
            for (long i = 0; i < s; ++i)
                M2.at(dd + i, nu_units + k) =
                    in.class_rels[static_cast<size_t>(k)].class_vals[static_cast<size_t>(i)];
            for (int i = 0; i < r; ++i)
                M2.at(dd + s + i, nu_units + k) =
                    in.class_rels[static_cast<size_t>(k)].signs[static_cast<size_t>(i)];
        }
        // -1 column
        for (int i = 0; i < r; ++i) M2.at(dd + s + i, elem_cols) = 1;
        // diag(2) on sign rows
        for (int i = 0; i < r; ++i) M2.at(dd + s + i, elem_cols + 1 + i) = 2;
        // 2^e on place rows
        IntMatrix M3(gens2, elem_cols + 1 + r + gens);
        for (long i = 0; i < gens2; ++i)
            for (long j = 0; j < elem_cols + 1 + r; ++j) M3.at(i, j) = M2.at(i, j);
        for (long i = 0; i < gens; ++i) M3.at(i, elem_cols + 1 + r + i) = pow2(e);
        AbelianStructure direct = quotient_structure(gens2, M3, e);
        if (direct.precision_hazard) throw PrecisionExhausted("direct route: diagonal near 2^e");
        if (direct.free_rank != 1)
            throw GrossCheckFailed("direct signed route: degree line rank != 1");
        if (direct.factors != out.narrow.factors)
            throw GrossCheckFailed("dual-route mismatch: signed lattice disagrees with A/R route");
    }

    return out;
}

LogGroups compute_log_groups(const LogInput& in, long e, long emax) {
    long cur = e;
    std::string last;
    while (cur <= emax) {
        try {
            return compute_log_groups_at(in, cur);
        } catch (const PrecisionExhausted& ex) {
            last = ex.what();
        } catch (const GrossCheckFailed& ex) {
            last = ex.what();
        }
        cur *= 2;
    }
    throw GrossCheckFailed("logarithmic pipeline failed up to e=" + std::to_string(emax) +
                           ": " + last);
}

}  // namespace narrowlog
