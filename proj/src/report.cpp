#include "narrowlog/report.hpp"

#include <sstream>

#include "narrowlog/errors.hpp"
#include "narrowlog/localfield.hpp"
#include "narrowlog/quadfield.hpp"

namespace narrowlog {

std::string render_group(const std::vector<Int>& factors) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < factors.size(); ++i) {
        if (i) os << ",";
        os << factors[i].get_str();
    }
    os << "]";
    return os.str();
}

namespace {

// Log-norm samples over a generating set of K^x: the uniformizer and the
// principal units 1 + pi^a w over the residue basis, a <= 2 e_K + 1.
std::vector<Padic> lognorm_samples(const LocalField& K) {
    std::vector<Padic> out;
    auto push = [&](const LFElem& x) {
        Padic n = K.norm2(x);
        if (n.is_zero()) return;
        out.push_back(iwasawa_log(n));
    };
    push(K.uniformizer());
    LFElem pia = K.one();
    for (long a = 1; a <= 2 * K.ram_index() + 1; ++a) {
        pia = K.mul(pia, K.uniformizer());
        for (long b = 0; b < K.res_degree(); ++b) {
            // residue basis elements are the coordinate vectors kept by K
            LFElem w = K.residue_transversal()[static_cast<size_t>(1) << b];
            push(K.add(K.one(), K.mul(pia, w)));
        }
    }
    return out;
}

struct QuadPlaces {
    std::vector<std::shared_ptr<LocalField>> fields;  // one per dyadic place
    PrimeKind kind;
    std::vector<QuadIdeal> ideals;
};

QuadPlaces build_places(const QuadField& F) {
    QuadPlaces P;
    Decomposition D = decompose_prime(F, 2);
    P.kind = D.kind;
    P.ideals.push_back(D.first);
    auto K = std::make_shared<LocalField>(F.dyadic_poly(), Int(2));
    P.fields.push_back(K);
    if (D.kind == PrimeKind::Split) {
        P.ideals.push_back(D.second);
        P.fields.push_back(K);  // both completions are the 2-adic base field
    }
    return P;
}

// 2-adic embedding value of alpha at a split place, at >= rel bits.
Padic split_embedding(const QuadField& F, const QuadIdeal& place, const AlgNum& alpha, long rel) {
    long bound = rel + 32;
    while (bound <= (1L << 16)) {
        Padic rt = hensel_root({-F.d, Int(0), Int(1)}, Padic::from_int(1, bound + 8), bound + 8);
        Int r = rt.residue(bound);
        if (mod_pow2(place.b + r, 2) != 0) r = mod_pow2(pow2(bound) - r, bound);
        Int t = mod_pow2(alpha.x + alpha.y * r, bound);
        if (t == 0) {
            bound *= 2;
            continue;
        }
        long v = v2(t);
        if (v >= bound - rel) {
            bound *= 2;
            continue;
        }
        Padic num = Padic::make(v, t >> static_cast<unsigned long>(v), bound - v);
        return num / Padic::from_int(alpha.z, bound);
    }
    throw PrecisionExhausted("split embedding: precision bound exceeded");
}

}  // namespace

FieldReport analyze_quadratic(const Int& d, const AnalyzeOptions& opt) {
    QuadField F(d);
    ClassGroupCtx cl(F);
    TwoUnitGroup tu = two_unit_group(F, cl);
    ClassRelationData cr = class_relations(F, cl);
    QuadPlaces places = build_places(F);

    auto unit_values = std::make_shared<std::vector<AlgNum>>();
    for (const auto& g : tu.gens) unit_values->push_back(g.value);
    auto rel_values = std::make_shared<std::vector<AlgNum>>();
    for (const auto& g : cr.relations) rel_values->push_back(g.value);

    LogInput in;
    in.r = F.r;
    in.c = F.c;
    in.dyadic_count = static_cast<long>(places.fields.size());
    for (const auto& g : tu.gens) in.two_units.push_back({g.label, g.signs, {}});
    for (const auto& g : cr.relations) in.class_rels.push_back({g.label, g.signs, g.class_vals});
    for (const auto& p : cr.class_primes) in.class_prime_norms.push_back(p);

    QuadField Fcopy = F;
    PrimeKind kind = places.kind;
    auto place_ideals = std::make_shared<std::vector<QuadIdeal>>(places.ideals);
    auto place_fields = places.fields;

    in.local_norm = [Fcopy, kind, place_ideals, unit_values, rel_values](
                        bool is_rel, size_t idx, size_t place, long rel) -> Padic {
        const AlgNum& a = is_rel ? (*rel_values)[idx] : (*unit_values)[idx];
        if (kind == PrimeKind::Split)
            return split_embedding(Fcopy, (*place_ideals)[place], a, rel);
        // single place: local norm = rational global norm
        Int num = a.x * a.x - Fcopy.d * a.y * a.y;
        Int den = a.z * a.z;
        return Padic::from_int(num, rel + 8) / Padic::from_int(den, rel + 8);
    };

    auto sample_cache = std::make_shared<std::vector<std::vector<Padic>>>();
    for (const auto& K : place_fields) sample_cache->push_back(lognorm_samples(*K));
    in.deg_samples = [sample_cache](size_t place, long rel) {
        if (rel > 640)
            throw PrecisionExhausted("degree samples beyond local working precision");
        return (*sample_cache)[place];
    };

    LogGroups groups = compute_log_groups(in, opt.precision, opt.max_precision);

    FieldReport rep;
    rep.name = d.get_str();
    rep.d = d;
    rep.r = F.r;
    rep.c = F.c;
    rep.P_count = in.dyadic_count;
    rep.cl = cl.invariant_factors();
    rep.cl_known = true;
    rep.cl_prime = cl.two_part_mod_dyadic();
    rep.log_cl = groups.ordinary.factors;
    rep.log_cl_res = groups.narrow.factors;
    rep.e_used = groups.e_used;

    long pe = 0;
    for (const auto& K : place_fields)
        if (is_exceptional_dyadic(*K)) ++pe;
    rep.PE_count = pe;
    rep.exceptional_field = is_exceptional_quadratic(d);
    if (!rep.exceptional_field && rep.log_cl != rep.log_cl_res)
        throw GrossCheckFailed("non-exceptional field with narrow != ordinary");

    WildKernelRank rk = wild_kernel_2rank(rep.exceptional_field, pe, groups.narrow.factors);
    if (rk.tag == RankCase::NotApplicable) {
        rep.rank_case = "n/a";
    } else {
        rep.rank_case = rk.tag == RankCase::Exceptional ? "ii" : "i";
        rep.rk2 = rk.rank;
    }

    rep.global_torsion = 2;
    if (d == -4) rep.global_torsion = 4;
    if (d == -3) rep.global_torsion = 6;
    for (const auto& K : place_fields) rep.local_torsions.push_back(K->torsion_order());
    if (F.kind_of(3) == PrimeKind::Ramified) {
        Int core = mpz_odd_p(d.get_mpz_t()) ? d : d / 4;
        LocalField K3({-core, Int(0), Int(1)}, Int(3));
        Int t3 = K3.torsion_order();
        if (t3 > 1) rep.local_torsions.push_back(t3);
    }
    rep.k2_index = k2_index_formula(F.r, rep.global_torsion, rep.local_torsions);
    return rep;
}

void apply_k2_structure(FieldReport& rep, const std::vector<Int>& k2) {
    rep.k2_structure = k2;
    if (!rep.rk2) return;  // rank unavailable: no deduction
    StructureDeduction ded =
        deduce_wk2_structure(k2, rep.k2_index, *rep.rk2, rep.exceptional_field);
    rep.wk_candidates = ded.wk_candidates;
    rep.k2inf_candidates = ded.k2inf_candidates;
}

}  // namespace narrowlog
