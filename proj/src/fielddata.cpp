#include "narrowlog/fielddata.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "narrowlog/errors.hpp"
#include "narrowlog/localfield.hpp"
#include "narrowlog/quadfield.hpp"

namespace narrowlog {

using nlohmann::json;

Padic NfdPadic::to_padic() const {
    if (zero) return Padic::zero(prec);
    return Padic::make(val, unit, prec - val > 0 ? prec - val : 1);
}

NfdPadic NfdPadic::from_padic(const Padic& x) {
    NfdPadic out;
    if (x.is_zero()) {
        out.zero = true;
        out.prec = x.abs_prec();
        return out;
    }
    out.zero = false;
    out.val = x.val();
    out.unit = x.unit();
    out.prec = x.abs_prec();
    return out;
}

namespace {

Int parse_int(const json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": integers must be decimal strings");
    try {
        return Int(j.get<std::string>());
    } catch (const std::invalid_argument&) {
        throw ParseError(where + ": bad integer literal");
    }
}

std::vector<Int> parse_int_vec(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected array");
    std::vector<Int> out;
    for (const auto& x : j) out.push_back(parse_int(x, where));
    return out;
}

json int_vec_json(const std::vector<Int>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(x.get_str());
    return a;
}

NfdPadic parse_triple(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected [val, unit, prec]");
    NfdPadic out;
    out.val = j[0].get<long>();
    out.unit = parse_int(j[1], where);
    out.prec = j[2].get<long>();
    out.zero = (out.unit == 0);
    return out;
}

json triple_json(const NfdPadic& x) {
    return json::array({x.zero ? 0 : x.val, x.zero ? "0" : x.unit.get_str(), x.prec});
}

Rat parse_rat(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [num, den]");
    Rat r(parse_int(j[0], where), parse_int(j[1], where));
    r.canonicalize();
    return r;
}

}  // namespace

FieldData parse_field_data(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("nfd: ") + e.what());
    }
    FieldData fd;
    for (const char* key : {"poly", "signature", "precision", "dyadic_factors", "class_gens",
                            "two_units", "real_roots"})
        if (!j.contains(key)) throw ParseError(std::string("nfd: missing key '") + key + "'");

    fd.poly = parse_int_vec(j["poly"], "poly");
    if (fd.poly.size() < 3 || fd.poly.back() != 1)
        throw ParseError("poly: must be monic of degree >= 2");
    fd.r = j["signature"]["r"].get<int>();
    fd.c = j["signature"]["c"].get<int>();
    if (fd.r + 2 * fd.c != static_cast<int>(fd.poly.size()) - 1)
        throw ParseError("signature: r + 2c must equal the degree");
    fd.precision = j["precision"].get<long>();
    if (fd.precision < 16) throw ParseError("precision: must be at least 16");

    for (const auto& f : j["dyadic_factors"]) {
        std::vector<NfdPadic> coeffs;
        for (const auto& cc : f) coeffs.push_back(parse_triple(cc, "dyadic_factors"));
        if (coeffs.size() < 2) throw ParseError("dyadic_factors: factor of degree < 1");
        fd.dyadic_factors.push_back(std::move(coeffs));
    }
    if (fd.dyadic_factors.empty()) throw ParseError("dyadic_factors: none given");

    for (const auto& g : j["class_gens"]) {
        NfdClassGen cg;
        cg.p = parse_int(g["prime"]["p"], "class_gens.prime");
        cg.prime_poly = parse_int_vec(g["prime"]["poly"], "class_gens.prime");
        cg.order = parse_int(g["order"], "class_gens.order");
        cg.alpha_num = parse_int_vec(g["alpha"]["num"], "class_gens.alpha");
        cg.alpha_den = parse_int(g["alpha"]["den"], "class_gens.alpha");
        cg.dyadic_correction = parse_int_vec(g["dyadic_correction"], "class_gens");
        fd.class_gens.push_back(std::move(cg));
    }
    for (const auto& u : j["two_units"]) {
        NfdElement e;
        e.num = parse_int_vec(u["num"], "two_units");
        e.den = parse_int(u["den"], "two_units");
        fd.two_units.push_back(std::move(e));
    }
    if (fd.r > 0 && (!j["real_roots"].is_array() || j["real_roots"].empty()))
        throw ParseError("real_roots: required when r > 0");
    for (const auto& iv : j["real_roots"]) {
        fd.real_roots.push_back({parse_rat(iv["lo"], "real_roots"), parse_rat(iv["hi"], "real_roots")});
    }
    if (static_cast<int>(fd.real_roots.size()) != fd.r)
        throw ParseError("real_roots: count must equal r");
    if (j.contains("exceptional") && !j["exceptional"].is_null())
        fd.exceptional = j["exceptional"].get<bool>();
    return fd;
}

FieldData parse_field_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_field_data(ss.str());
}

std::string serialize_field_data(const FieldData& fd) {
    json j;
    j["poly"] = int_vec_json(fd.poly);
    j["signature"] = {{"r", fd.r}, {"c", fd.c}};
    j["precision"] = fd.precision;
    j["dyadic_factors"] = json::array();
    for (const auto& f : fd.dyadic_factors) {
        json fac = json::array();
        for (const auto& cc : f) fac.push_back(triple_json(cc));
        j["dyadic_factors"].push_back(fac);
    }
    j["class_gens"] = json::array();
    for (const auto& g : fd.class_gens) {
        json e;
        e["prime"] = {{"p", g.p.get_str()}, {"poly", int_vec_json(g.prime_poly)}};
        e["order"] = g.order.get_str();
        e["alpha"] = {{"num", int_vec_json(g.alpha_num)}, {"den", g.alpha_den.get_str()}};
        e["dyadic_correction"] = int_vec_json(g.dyadic_correction);
        j["class_gens"].push_back(e);
    }
    j["two_units"] = json::array();
    for (const auto& u : fd.two_units)
        j["two_units"].push_back({{"num", int_vec_json(u.num)}, {"den", u.den.get_str()}});
    j["real_roots"] = json::array();
    for (const auto& iv : fd.real_roots) {
        json e;
        e["lo"] = json::array({iv[0].get_num().get_str(), iv[0].get_den().get_str()});
        e["hi"] = json::array({iv[1].get_num().get_str(), iv[1].get_den().get_str()});
        j["real_roots"].push_back(e);
    }
    if (fd.exceptional) j["exceptional"] = *fd.exceptional;
    else j["exceptional"] = nullptr;
    return j.dump(1);
}

// --- helpers shared by validation and the pipeline ---

namespace {

// exact rational norm of g(theta)/den via resultants
Rat global_norm(const std::vector<Int>& poly, const std::vector<Int>& num, const Int& den) {
    long n = static_cast<long>(poly.size()) - 1;
    std::vector<Int> g = num;
    while (g.size() > 1 && g.back() == 0) g.pop_back();
    Int res = poly_resultant(poly, g);
    Int dn;
    mpz_pow_ui(dn.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(n));
    Rat out(res, dn);
    out.canonicalize();
    return out;
}

// interval evaluation of an integer polynomial over [lo, hi]
std::array<Rat, 2> eval_interval(const std::vector<Int>& g, const Rat& lo, const Rat& hi) {
    Rat a(0), b(0);
    for (auto it = g.rbegin(); it != g.rend(); ++it) {
        // [a,b] * [lo,hi] + coeff
        Rat c1 = a * lo, c2 = a * hi, c3 = b * lo, c4 = b * hi;
        Rat mn = std::min(std::min(c1, c2), std::min(c3, c4));
        Rat mx = std::max(std::max(c1, c2), std::max(c3, c4));
        a = mn + Rat(*it);
        b = mx + Rat(*it);
        a.canonicalize();
        b.canonicalize();
    }
    return {a, b};
}

Rat eval_rat(const std::vector<Int>& g, const Rat& x) {
    Rat acc(0);
    for (auto it = g.rbegin(); it != g.rend(); ++it) acc = acc * x + Rat(*it);
    acc.canonicalize();
    return acc;
}

// sign of g(theta) at the real root isolated by [lo, hi]; refines the root
// interval by bisection of poly when needed
int sign_at_root(const std::vector<Int>& poly, std::vector<Int> g, Rat lo, Rat hi) {
    while (g.size() > 1 && g.back() == 0) g.pop_back();
    Rat flo = eval_rat(poly, lo);
    if (flo == 0) throw Error("real root interval endpoint is a root");
    int slo = flo > 0 ? 1 : -1;
    for (int iter = 0; iter < 512; ++iter) {
        auto iv = eval_interval(g, lo, hi);
        if (iv[0] > 0) return 0;   // positive: sign bit 0
        if (iv[1] < 0) return 1;   // negative
        Rat mid = (lo + hi) / 2;
        mid.canonicalize();
        Rat fm = eval_rat(poly, mid);
        if (fm == 0) {
            // the root is exactly mid (cannot happen for irreducible poly of
            // degree >= 2); perturb
            throw Error("bisection hit the root exactly");
        }
        int sm = fm > 0 ? 1 : -1;
        if (sm == slo) lo = mid;
        else hi = mid;
    }
    throw PrecisionExhausted("sign_at_root: interval refinement failed");
}

std::vector<Int> lift_coeffs(const std::vector<NfdPadic>& f, long prec) {
    std::vector<Int> out;
    for (const auto& cc : f) {
        if (cc.zero) {
            out.push_back(0);
        } else {
            Int v = mod_pow2(cc.unit, std::max(1L, prec - cc.val));
            out.push_back(v << static_cast<unsigned long>(cc.val));
        }
    }
    return out;
}

// polynomial product modulo 2^prec
std::vector<Int> poly_mul_mod(const std::vector<Int>& a, const std::vector<Int>& b, long prec) {
    std::vector<Int> r(a.size() + b.size() - 1, Int(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = mod_pow2(r[i + j] + a[i] * b[j], prec);
    return r;
}

}  // namespace

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (const auto& f : failures) os << f << "\n";
    return os.str();
}

ValidationReport validate_field_data(const FieldData& fd) {
    ValidationReport rep;
    auto fail = [&](const std::string& msg) { rep.failures.push_back(msg); };
    long n = static_cast<long>(fd.poly.size()) - 1;
    long slack = 8;

    long degsum = 0;
    for (const auto& f : fd.dyadic_factors) degsum += static_cast<long>(f.size()) - 1;
    if (degsum != n) fail("dyadic factor degrees sum to " + std::to_string(degsum) +
                          ", expected " + std::to_string(n));
    for (const auto& f : fd.dyadic_factors)
        if (f.back().zero || f.back().val != 0 || f.back().unit != 1)
            fail("dyadic factor not monic");

    long prec = fd.precision;
    // pairwise coprime + product identity
    std::vector<std::vector<Int>> lifts;
    for (const auto& f : fd.dyadic_factors) lifts.push_back(lift_coeffs(f, prec));
    for (size_t i = 0; i < lifts.size(); ++i)
        for (size_t j = i + 1; j < lifts.size(); ++j) {
            Int res = poly_resultant(lifts[i], lifts[j]);
            Int rm = mod_pow2(res, prec);
            if (rm == 0 || v2(rm) >= prec - slack)
                fail("dyadic factors " + std::to_string(i) + "," + std::to_string(j) +
                     " not coprime at precision");
        }
    {
        std::vector<Int> prod = {Int(1)};
        for (const auto& lf : lifts) prod = poly_mul_mod(prod, lf, prec);
        bool okprod = prod.size() == fd.poly.size();
        if (okprod)
            for (size_t i = 0; i < prod.size(); ++i)
                if (mod_pow2(prod[i] - fd.poly[i], prec - slack) != 0) okprod = false;
        if (!okprod) fail("product of dyadic factors does not match the polynomial");
    }

    long dcount = static_cast<long>(fd.dyadic_factors.size());
    if (static_cast<long>(fd.two_units.size()) != fd.r + fd.c + dcount - 1)
        fail("two_units count " + std::to_string(fd.two_units.size()) + " does not equal r+c+d-1 = " +
             std::to_string(fd.r + fd.c + dcount - 1));

    for (size_t i = 0; i < fd.two_units.size(); ++i) {
        Rat nr = abs(global_norm(fd.poly, fd.two_units[i].num, fd.two_units[i].den));
        Int num = nr.get_num() * nr.get_den();
        if (num == 0) {
            fail("two_unit " + std::to_string(i) + " has zero norm");
            continue;
        }
        while (mpz_even_p(num.get_mpz_t())) num /= 2;
        if (num != 1) fail("two_unit " + std::to_string(i) + " norm is not a power of two");
    }

    for (size_t i = 0; i < fd.class_gens.size(); ++i) {
        const auto& g = fd.class_gens[i];
        Int o = g.order;
        Int t = o & (o - 1);
        if (o < 1 || t != 0) fail("class gen " + std::to_string(i) + " order is not a 2-power");
        if (static_cast<long>(g.dyadic_correction.size()) != dcount)
            fail("class gen " + std::to_string(i) + " correction length mismatch");
        // N(alpha) = +- p^{f * order} * 2-power
        Rat nr = abs(global_norm(fd.poly, g.alpha_num, g.alpha_den));
        Int num = nr.get_num() * nr.get_den();
        if (num == 0) {
            fail("class gen " + std::to_string(i) + " has zero alpha");
            continue;
        }
        while (mpz_even_p(num.get_mpz_t())) num /= 2;
        long vp = 0;
        while (mpz_divisible_p(num.get_mpz_t(), g.p.get_mpz_t())) {
            num /= g.p;
            ++vp;
        }
        if (num != 1)
            fail("class gen " + std::to_string(i) + " alpha supported outside q and dyadic places");
        if (vp == 0 || !mpz_divisible_p(Int(vp).get_mpz_t(), g.order.get_mpz_t()))
            fail("class gen " + std::to_string(i) + " alpha valuation " + std::to_string(vp) +
                 " incompatible with order " + g.order.get_str());
    }

    // real roots isolate sign changes and are disjoint
    for (size_t i = 0; i < fd.real_roots.size(); ++i) {
        const auto& iv = fd.real_roots[i];
        if (!(iv[0] < iv[1])) fail("real root interval " + std::to_string(i) + " empty");
        Rat flo = eval_rat(fd.poly, iv[0]), fhi = eval_rat(fd.poly, iv[1]);
        if (flo == 0 || fhi == 0 || (flo > 0) == (fhi > 0))
            fail("real root interval " + std::to_string(i) + " has no sign change");
        if (i > 0 && !(fd.real_roots[i - 1][1] < iv[0]))
            fail("real root intervals not disjoint/ascending");
    }
    return rep;
}

// --- pipeline on ingested data ---

FieldReport analyze_field_data(const FieldData& fd, const AnalyzeOptions& opt) {
    ValidationReport v = validate_field_data(fd);
    if (!v.ok()) throw ValidationError(v.str());
    long n = static_cast<long>(fd.poly.size()) - 1;
    long dd = static_cast<long>(fd.dyadic_factors.size());
    long s = static_cast<long>(fd.class_gens.size());

    long W = std::min(fd.precision, 768L);
    auto fields = std::make_shared<std::vector<std::shared_ptr<LocalField>>>();
    for (const auto& f : fd.dyadic_factors) {
        std::vector<Int> lift = lift_coeffs(f, W);
        lift.back() = 1;
        fields->push_back(std::make_shared<LocalField>(lift, Int(2), W));
    }

    LogInput in;
    in.r = fd.r;
    in.c = fd.c;
    in.dyadic_count = dd;

    auto elem_signs = [&](const std::vector<Int>& num, const Int& den) {
        std::vector<int> sg;
        for (int i = 0; i < fd.r; ++i) {
            int bit = sign_at_root(fd.poly, num, fd.real_roots[static_cast<size_t>(i)][0],
                                   fd.real_roots[static_cast<size_t>(i)][1]);
            // denominator is positive unless negative den sneaks in
            if (den < 0) bit ^= 1;
            sg.push_back(bit);
        }
        return sg;
    };

    for (size_t i = 0; i < fd.two_units.size(); ++i)
        in.two_units.push_back(
            {"u" + std::to_string(i), elem_signs(fd.two_units[i].num, fd.two_units[i].den), {}});
    for (long k = 0; k < s; ++k) {
        const auto& g = fd.class_gens[static_cast<size_t>(k)];
        std::vector<Int> cv(static_cast<size_t>(s), Int(0));
        cv[static_cast<size_t>(k)] = g.order;
        in.class_rels.push_back(
            {"q" + std::to_string(k), elem_signs(g.alpha_num, g.alpha_den), cv});
        // N(q_k) = p^f with f = v_p(N(alpha)) / order
        Rat nr = abs(global_norm(fd.poly, g.alpha_num, g.alpha_den));
        Int num = nr.get_num() * nr.get_den();
        long vp = 0;
        while (mpz_divisible_p(num.get_mpz_t(), g.p.get_mpz_t())) {
            num /= g.p;
            ++vp;
        }
        long f = vp / static_cast<long>(g.order.get_si());
        Int nq;
        mpz_pow_ui(nq.get_mpz_t(), g.p.get_mpz_t(), static_cast<unsigned long>(f));
        in.class_prime_norms.push_back(nq);
    }

    auto fdp = std::make_shared<FieldData>(fd);
    in.local_norm = [fdp, fields](bool is_rel, size_t idx, size_t place, long rel) -> Padic {
        const LocalField& K = *(*fields)[place];
        if (rel > K.work_prec() - 64)
            throw PrecisionExhausted("ingested local field precision exceeded");
        const std::vector<Int>& num =
            is_rel ? fdp->class_gens[idx].alpha_num : fdp->two_units[idx].num;
        const Int& den = is_rel ? fdp->class_gens[idx].alpha_den : fdp->two_units[idx].den;
        long dv = mpz_even_p(den.get_mpz_t()) ? v2(den) : 0;
        Int odd = den >> static_cast<unsigned long>(dv);
        if (odd < 0) odd = -odd;
        std::vector<Int> g = num;
        if (odd != 1) {
            Int inv = inv_mod_pow2(odd, K.work_prec());
            for (auto& cc : g) cc = mod_pow2(cc * inv, K.work_prec());
        }
        LFElem x = K.from_poly(g, dv);
        Padic nrm = K.norm2(x);
        if (den < 0 && (K.degree() % 2)) nrm = -nrm;
        return nrm;
    };

    auto samples = std::make_shared<std::vector<std::vector<Padic>>>();
    for (const auto& K : *fields) {
        std::vector<Padic> out;
        auto push = [&](const LFElem& x) {
            Padic nn = K->norm2(x);
            if (!nn.is_zero()) out.push_back(iwasawa_log(nn));
        };
        push(K->uniformizer());
        LFElem pia = K->one();
        for (long a = 1; a <= 2 * K->ram_index() + 1; ++a) {
            pia = K->mul(pia, K->uniformizer());
            for (long b = 0; b < K->res_degree(); ++b) {
                LFElem w = K->residue_transversal()[static_cast<size_t>(1) << b];
                push(K->add(K->one(), K->mul(pia, w)));
            }
        }
        samples->push_back(out);
    }
    in.deg_samples = [samples, W](size_t place, long rel) {
        if (rel > W - 64) throw PrecisionExhausted("degree samples beyond ingested precision");
        return (*samples)[place];
    };

    LogGroups groups = compute_log_groups(in, opt.precision, opt.max_precision);

    FieldReport rep;
    rep.name = "nfd";
    rep.r = fd.r;
    rep.c = fd.c;
    rep.P_count = dd;
    rep.cl_known = false;
    for (const auto& g : fd.class_gens) rep.cl_prime.push_back(g.order);
    std::sort(rep.cl_prime.begin(), rep.cl_prime.end());
    rep.log_cl = groups.ordinary.factors;
    rep.log_cl_res = groups.narrow.factors;
    rep.e_used = groups.e_used;

    long pe = 0;
    for (const auto& K : *fields)
        if (is_exceptional_dyadic(*K)) ++pe;
    rep.PE_count = pe;
    if (fd.exceptional) rep.exceptional_field = *fd.exceptional;
    else if (fd.r > 0) rep.exceptional_field = true;  // a real place forces it
    else throw NeedsFlag("exceptional flag required for totally imaginary ingested fields");
    if (!rep.exceptional_field && rep.log_cl != rep.log_cl_res)
        throw GrossCheckFailed("non-exceptional field with narrow != ordinary");

    WildKernelRank rk = wild_kernel_2rank(rep.exceptional_field, pe, groups.narrow.factors);
    if (rk.tag == RankCase::NotApplicable) rep.rank_case = "n/a";
    else {
        rep.rank_case = rk.tag == RankCase::Exceptional ? "ii" : "i";
        rep.rk2 = rk.rank;
    }

    // index formula: dyadic torsions always; odd primes from the polynomial
    rep.global_torsion = fd.r > 0 ? Int(2) : Int(2);  // ingested fallback = 2
    bool index_known = true;
    for (const auto& K : *fields) rep.local_torsions.push_back(K->torsion_order());
    for (Int p = 3; (p - 1) <= n; mpz_nextprime(p.get_mpz_t(), p.get_mpz_t())) {
        auto contrib = odd_mu1_product(fd.poly, p);
        if (!contrib) {
            index_known = false;
            break;
        }
        if (*contrib > 1) rep.local_torsions.push_back(*contrib);
    }
    if (index_known)
        rep.k2_index = k2_index_formula(fd.r, rep.global_torsion, rep.local_torsions);
    else
        rep.k2_index = 0;  // unknown
    return rep;
}

// --- odd mu^1 analysis ---

namespace {

// Hensel lift of a factorization f = g*h mod p^k (g, h coprime mod p) to
// higher precision; returns the lifted g (monic-normalized leading block).
struct BlockLift {
    std::vector<Int> g, h;
};

std::vector<Int> polmod_trim(std::vector<Int> a) {
    while (a.size() > 1 && a.back() == 0) a.pop_back();
    return a;
}

std::vector<Int> pol_mul_modp(const std::vector<Int>& a, const std::vector<Int>& b, const Int& m) {
    std::vector<Int> r(a.size() + b.size() - 1, Int(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) {
            r[i + j] += a[i] * b[j];
        }
    for (auto& x : r) {
        x %= m;
        if (x < 0) x += m;
    }
    return polmod_trim(r);
}

std::vector<Int> pol_sub_modp(std::vector<Int> a, const std::vector<Int>& b, const Int& m) {
    if (a.size() < b.size()) a.resize(b.size(), Int(0));
    for (size_t i = 0; i < b.size(); ++i) {
        a[i] -= b[i];
        a[i] %= m;
        if (a[i] < 0) a[i] += m;
    }
    for (auto& x : a) {
        x %= m;
        if (x < 0) x += m;
    }
    return polmod_trim(a);
}

// division with remainder by a monic polynomial, coefficients mod m
void pol_divmod_monic(const std::vector<Int>& a, const std::vector<Int>& b, const Int& m,
                      std::vector<Int>& q, std::vector<Int>& r) {
    r = a;
    long db = static_cast<long>(b.size()) - 1;
    q.assign(std::max<size_t>(1, a.size() > b.size() ? a.size() - b.size() + 1 : 1), Int(0));
    for (long i = static_cast<long>(r.size()) - 1; i >= db; --i) {
        Int cc = r[static_cast<size_t>(i)] % m;
        if (cc < 0) cc += m;
        if (cc == 0) {
            r[static_cast<size_t>(i)] = 0;
            continue;
        }
        q[static_cast<size_t>(i - db)] = cc;
        for (long jj = 0; jj <= db; ++jj) {
            Int& t = r[static_cast<size_t>(i - db + jj)];
            t = (t - cc * b[static_cast<size_t>(jj)]) % m;
            if (t < 0) t += m;
        }
    }
    r.resize(static_cast<size_t>(std::max(1L, db)));
    for (auto& x : r) {
        x %= m;
        if (x < 0) x += m;
    }
    q = polmod_trim(q);
    r = polmod_trim(r);
}

// extended gcd over F_p for polynomials:  u*a + v*b = g
void pol_xgcd_modp(std::vector<Int> a, std::vector<Int> b, const Int& p, std::vector<Int>& g,
                   std::vector<Int>& u, std::vector<Int>& v) {
    auto norm = [&](std::vector<Int> x) {
        for (auto& cc : x) {
            cc %= p;
            if (cc < 0) cc += p;
        }
        return polmod_trim(x);
    };
    a = norm(a);
    b = norm(b);
    std::vector<Int> u0 = {Int(1)}, v0 = {Int(0)}, u1 = {Int(0)}, v1 = {Int(1)};
    while (!(b.size() == 1 && b[0] == 0)) {
        // make b monic for division
        Int lead = b.back(), inv;
        mpz_invert(inv.get_mpz_t(), lead.get_mpz_t(), p.get_mpz_t());
        std::vector<Int> bm = b;
        for (auto& cc : bm) cc = (cc * inv) % p;
        std::vector<Int> q, r;
        pol_divmod_monic(a, bm, p, q, r);
        for (auto& cc : q) cc = (cc * inv) % p;
        // a = q*b + r
        std::vector<Int> nu = pol_sub_modp(u0, pol_mul_modp(q, u1, p), p);
        std::vector<Int> nv = pol_sub_modp(v0, pol_mul_modp(q, v1, p), p);
        a = b;
        b = norm(r);
        u0 = u1;
        v0 = v1;
        u1 = nu;
        v1 = nv;
    }
    g = a;
    u = u0;
    v = v0;
}

// lift f = g*h (coprime mod p) from mod p to mod p^K; f, g, h monic
bool hensel_pair_lift(const std::vector<Int>& f, std::vector<Int>& g, std::vector<Int>& h,
                      const Int& p, long K) {
    std::vector<Int> gg, u, v;
    pol_xgcd_modp(g, h, p, gg, u, v);
    if (gg.size() != 1 || gg[0] == 0) return false;
    Int ginv;
    mpz_invert(ginv.get_mpz_t(), gg[0].get_mpz_t(), p.get_mpz_t());
    for (auto& cc : u) cc = (cc * ginv) % p;
    for (auto& cc : v) cc = (cc * ginv) % p;
    Int m = p;
    Int pk;
    mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(K));
    long dg = static_cast<long>(g.size()) - 1;
    long dh = static_cast<long>(h.size()) - 1;
    while (m < pk) {
        Int m2 = m * m;
        if (m2 > pk * pk) m2 = pk * pk;
        // e = f - g h
        std::vector<Int> e = pol_sub_modp(f, pol_mul_modp(g, h, m2), m2);
        // v e = q g + r ; g += r ; h += u e + q h
        std::vector<Int> ve = pol_mul_modp(v, e, m2);
        std::vector<Int> q, r;
        pol_divmod_monic(ve, g, m2, q, r);
        std::vector<Int> gn = g;
        if (gn.size() < r.size()) gn.resize(r.size(), Int(0));
        for (size_t i = 0; i < r.size(); ++i) gn[i] = (gn[i] + r[i]) % m2;
        std::vector<Int> hn = pol_sub_modp(
            pol_mul_modp({Int(0)}, h, m2),
            pol_sub_modp(pol_mul_modp({Int(0)}, h, m2),
                         pol_sub_modp(pol_mul_modp(u, e, m2),
                                      pol_sub_modp({Int(0)}, pol_mul_modp(q, h, m2), m2), m2),
                         m2),
            m2);
        // hn = u e + q h; add to h
        std::vector<Int> delta = pol_sub_modp(pol_mul_modp(u, e, m2),
                                              pol_sub_modp({Int(0)}, pol_mul_modp(q, h, m2), m2),
                                              m2);
        (void)hn;
        std::vector<Int> hnn = h;
        if (hnn.size() < delta.size()) hnn.resize(delta.size(), Int(0));
        for (size_t i = 0; i < delta.size(); ++i) hnn[i] = (hnn[i] + delta[i]) % m2;
        hnn = polmod_trim(hnn);
        gn = polmod_trim(gn);
        // the factors stay monic of fixed degree: drop vanished high coeffs
        if (static_cast<long>(gn.size()) - 1 != dg || gn.back() % m2 != 1) {
            if (static_cast<long>(gn.size()) - 1 > dg) {
                bool okhigh = true;
                for (size_t i = static_cast<size_t>(dg) + 1; i < gn.size(); ++i)
                    if (gn[i] % m2 != 0) okhigh = false;
                if (!okhigh) return false;
                gn.resize(static_cast<size_t>(dg) + 1);
            }
            if (gn.back() % m2 != 1) return false;
        }
        if (static_cast<long>(hnn.size()) - 1 != dh || hnn.back() % m2 != 1) {
            if (static_cast<long>(hnn.size()) - 1 > dh) {
                bool okhigh = true;
                for (size_t i = static_cast<size_t>(dh) + 1; i < hnn.size(); ++i)
                    if (hnn[i] % m2 != 0) okhigh = false;
                if (!okhigh) return false;
                hnn.resize(static_cast<size_t>(dh) + 1);
            }
            if (hnn.back() % m2 != 1) return false;
        }
        g = gn;
        h = hnn;
        // refresh the Bezout pair:  b = u g + v h - 1
        std::vector<Int> b = pol_sub_modp(
            pol_sub_modp(pol_mul_modp(u, g, m2),
                         pol_sub_modp({Int(0)}, pol_mul_modp(v, h, m2), m2), m2),
            {Int(1)}, m2);
        std::vector<Int> ub = pol_mul_modp(u, b, m2);
        std::vector<Int> c, dr;
        pol_divmod_monic(ub, g, m2, c, dr);
        std::vector<Int> un = pol_sub_modp(u, dr, m2);
        std::vector<Int> vb = pol_mul_modp(v, b, m2);
        std::vector<Int> ch = pol_mul_modp(c, h, m2);
        std::vector<Int> vn = pol_sub_modp(pol_sub_modp(v, vb, m2), ch, m2);
        u = un;
        v = vn;
        m = m2;
    }
    // final verification mod p^K
    std::vector<Int> prod = pol_mul_modp(g, h, pk);
    std::vector<Int> diff = pol_sub_modp(f, prod, pk);
    for (const auto& cc : diff)
        if (cc % pk != 0) return false;
    for (auto& cc : g) cc %= pk;
    for (auto& cc : h) cc %= pk;
    return true;
}

}  // namespace

std::optional<Int> odd_mu1_product(const std::vector<Int>& poly, const Int& p) {
    // quick exclusion: zeta_p needs ramification index >= p-1, which forces
    // v_p(disc) >= p-2
    std::vector<Int> dpoly;
    for (size_t i = 1; i < poly.size(); ++i) dpoly.push_back(poly[i] * static_cast<long>(i));
    Int disc = poly_resultant(poly, dpoly);
    if (disc == 0) throw Error("defining polynomial not squarefree");
    long vdisc = valuation(disc, p);
    long pl = static_cast<long>(p.get_si());
    if (vdisc < pl - 2 || vdisc == 0) return Int(1);

    // factor mod p into squarefree blocks g_i^{e_i}, lift coprime blocks
    // (g^e treated as one block)
    std::vector<Int> f = poly;
    // mod-p squarefree decomposition via gcds
    auto modp = [&](std::vector<Int> a) {
        for (auto& cc : a) {
            cc %= p;
            if (cc < 0) cc += p;
        }
        return polmod_trim(a);
    };
    std::vector<Int> fp = modp(f);
    std::vector<Int> fpd;
    for (size_t i = 1; i < fp.size(); ++i) fpd.push_back((fp[i] * static_cast<long>(i)) % p);
    std::vector<Int> g0, u0, v0;
    pol_xgcd_modp(fp, polmod_trim(fpd), p, g0, u0, v0);
    // g0 = gcd(f, f') mod p; squarefree part = f / g0
    Int lead = g0.back(), linv;
    mpz_invert(linv.get_mpz_t(), lead.get_mpz_t(), p.get_mpz_t());
    for (auto& cc : g0) cc = (cc * linv) % p;
    std::vector<Int> sqfree, rem;
    pol_divmod_monic(fp, g0, p, sqfree, rem);

    // blocks: for each irreducible factor of the squarefree part we want the
    // full g^e block.  We avoid full factorization: only blocks of degree
    // <= 2 are analyzable, so find linear/quadratic factors of the
    // squarefree part by root search / quadratic sieve over F_p.
    std::vector<std::vector<Int>> block_mods;  // irreducible g mod p per block
    {
        std::vector<Int> w = sqfree;
        // linear factors
        for (Int x0 = 0; x0 < p; ++x0) {
            // evaluate w at x0
            Int acc = 0;
            for (auto it = w.rbegin(); it != w.rend(); ++it) acc = (acc * x0 + *it) % p;
            if (acc % p == 0) {
                std::vector<Int> lin = {(p - x0) % p, Int(1)};
                std::vector<Int> q, r;
                pol_divmod_monic(w, lin, p, q, r);
                w = q;
                block_mods.push_back(lin);
                x0 -= 1;  // same root may repeat in squarefree part? no, but recheck quotient
            }
        }
        // quadratic factors: try all monic irreducible quadratics when the
        // remaining degree is small; otherwise give up
        long remaining = static_cast<long>(w.size()) - 1;
        if (remaining > 0) {
            if (remaining % 2 != 0) return std::nullopt;
            for (Int b = 0; b < p && static_cast<long>(w.size()) - 1 > 0; ++b)
                for (Int c = 0; c < p && static_cast<long>(w.size()) - 1 > 0; ++c) {
                    // x^2 + b x + c irreducible iff b^2 - 4c is a nonresidue
                    Int dq = (b * b - 4 * c) % p;
                    if (dq < 0) dq += p;
                    if (dq != 0 && mpz_kronecker(dq.get_mpz_t(), p.get_mpz_t()) != -1) continue;
                    if (dq == 0) continue;
                    std::vector<Int> quad = {c, b, Int(1)};
                    std::vector<Int> q, r;
                    pol_divmod_monic(w, quad, p, q, r);
                    if (polmod_trim(r).size() == 1 && polmod_trim(r)[0] == 0) {
                        w = q;
                        block_mods.push_back(quad);
                    }
                }
            if (static_cast<long>(w.size()) - 1 > 0) return std::nullopt;
        }
    }

    // build full blocks g^e dividing f mod p, then lift pairwise
    long K = vdisc + 16;
    Int pk;
    mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(K));
    std::vector<std::vector<Int>> blocks;
    {
        std::vector<Int> w = fp;
        for (const auto& g : block_mods) {
            std::vector<Int> block = {Int(1)};
            while (true) {
                std::vector<Int> q, r;
                pol_divmod_monic(w, g, p, q, r);
                if (!(polmod_trim(r).size() == 1 && polmod_trim(r)[0] == 0)) break;
                w = q;
                block = pol_mul_modp(block, g, pk);
            }
            blocks.push_back(block);
        }
    }
    // lift blocks successively: f = B1 * rest
    std::vector<std::vector<Int>> lifted;
    std::vector<Int> rest = f;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (i + 1 == blocks.size()) {
            lifted.push_back(rest);
            break;
        }
        std::vector<Int> g = blocks[i];
        // h = product of remaining blocks mod p
        std::vector<Int> h = {Int(1)};
        for (size_t j = i + 1; j < blocks.size(); ++j) h = pol_mul_modp(h, blocks[j], pk);
        h = modp(h);
        std::vector<Int> gmod = modp(g);
        if (!hensel_pair_lift(rest, gmod, h, p, K)) return std::nullopt;
        lifted.push_back(gmod);
        rest = h;
    }
    // analyze blocks: degree 1 -> Q_p (no zeta_p; p odd); degree 2 ->
    // quadratic completion; else unreachable here
    Int total = 1;
    for (const auto& bl : lifted) {
        long deg = static_cast<long>(bl.size()) - 1;
        if (deg == 1) continue;
        if (deg != 2) return std::nullopt;
        // completion defined by x^2 + Bx + C over Z_p: disc = B^2 - 4C
        Int B = bl[1], C = bl[0];
        Int dq = (B * B - 4 * C) % pk;
        if (dq < 0) dq += pk;
        if (dq == 0) return std::nullopt;
        long vq = valuation(dq, p);
        if (vq >= K - 4) return std::nullopt;
        if (vq % 2 == 0) {
            // unramified or split: no zeta_p (p odd needs ramification)
            continue;
        }
        // ramified quadratic Q_p(sqrt(dq)); zeta_p inside iff same class as
        // Q_p(sqrt(-p))... compare dq / (-p * p^{vq-1}) being a square unit
        Int unitpart = dq;
        for (long t = 0; t < vq; ++t) unitpart /= p;
        // dq ~ p^{vq} * unitpart with vq odd; class of sqrt(dq) = sqrt(p * u)
        // zeta_p in Q_p(sqrt(p*u)) iff p*u ~ -p * square, i.e. -u is a
        // square mod p ... careful: Q_p(zeta_p) = Q_p(sqrt((-1)^{(p-1)/2} p))
        Int want = ((pl - 1) / 2) % 2 == 1 ? Int(p - 1) : Int(1);  // (-1)^{(p-1)/2} mod p
        Int ratio = (unitpart % p) * want % p;
        // zeta_p present iff unitpart = (-1)^{(p-1)/2} * square mod p
        if (mpz_kronecker(ratio.get_mpz_t(), p.get_mpz_t()) == 1) {
            // t >= 2 requires degree (p-1)p > 2: impossible in a quadratic block
            total *= p;
        }
    }
    return total;
}

// --- quadratic exporter ---

FieldData export_quadratic_nfd(const Int& d, long precision) {
    QuadField F(d);
    ClassGroupCtx cl(F);
    TwoUnitGroup tu = two_unit_group(F, cl);
    FieldData fd;
    fd.precision = precision;
    fd.r = F.r;
    fd.c = F.c;
    fd.poly = F.dyadic_poly();  // globally defines the field in both cases
    bool theta_is_half = mpz_odd_p(d.get_mpz_t());  // theta = (1+sqrt d)/2 vs sqrt m

    // coordinates of (x + y sqrt d)/z over theta
    auto to_theta = [&](const AlgNum& a) -> NfdElement {
        NfdElement e;
        if (theta_is_half) {
            // sqrt d = 2 theta - 1
            e.num = {a.x - a.y, 2 * a.y};
        } else {
            // sqrt d = 2 theta
            e.num = {a.x, 2 * a.y};
        }
        e.den = a.z;
        return e;
    };

    // dyadic factors of poly over Z_2
    PrimeKind k2 = F.kind_of(2);
    if (k2 == PrimeKind::Split) {
        // poly = x^2 - x + (1-d)/4 = (x - a)(x - (1 - a))
        Padic rt = hensel_root({-F.d, Int(0), Int(1)}, Padic::from_int(1, precision + 16),
                                precision + 16);
        Int r = rt.residue(precision + 8);
        // a = (1 + r)/2
        Int a = mod_pow2((1 + r) * inv_mod_pow2(Int(2), precision + 8), precision);
        Int b = mod_pow2(1 - a, precision);
        auto lin = [&](const Int& root) {
            std::vector<NfdPadic> f(2);
            Int mr = mod_pow2(-root, precision);
            if (mr == 0) {
                f[0].zero = true;
                f[0].prec = precision;
            } else {
                f[0].zero = false;
                f[0].val = v2(mr);
                f[0].unit = mr >> static_cast<unsigned long>(f[0].val);
                f[0].prec = precision;
            }
            f[1] = NfdPadic{false, 0, Int(1), precision};
            return f;
        };
        // match factor order to the ideal order [2,(1+sqrt d)/2], conjugate:
        // place 1 wants v(theta - a) > 0 with theta = (1+sqrt d)/2 mapped to
        // the root with (1 + r)/2 even... the ideals [2,1],[2,-1] pair with
        // the two linear factors; order is fixed by the embedding convention
        fd.dyadic_factors.push_back(lin(a));
        fd.dyadic_factors.push_back(lin(b));
    } else {
        std::vector<NfdPadic> f(3);
        for (int i = 0; i < 3; ++i) {
            Int cc = mod_pow2(fd.poly[static_cast<size_t>(i)], precision);
            if (cc == 0) {
                f[static_cast<size_t>(i)] = NfdPadic{true, 0, Int(0), precision};
            } else {
                long v = v2(cc);
                f[static_cast<size_t>(i)] =
                    NfdPadic{false, v, cc >> static_cast<unsigned long>(v), precision};
            }
        }
        fd.dyadic_factors.push_back(f);
    }
    long dd = static_cast<long>(fd.dyadic_factors.size());

    for (const auto& u : tu.gens) fd.two_units.push_back(to_theta(u.value));

    // class generators: primes with 2-power order forming a basis of the
    // 2-part of Cl/<P>
    {
        Decomposition D2 = decompose_prime(F, 2);
        std::vector<QuadIdeal> dyadic = {D2.first};
        if (D2.kind == PrimeKind::Split) dyadic.push_back(D2.second);
        std::vector<Int> dy_orders;
        for (const auto& P : dyadic) {
            Int o = 1;
            QuadIdeal acc = P;
            while (!(cl.class_key(acc) == cl.identity_key())) {
                acc = ideal_mul(F, acc, P);
                o += 1;
                if (o > cl.h()) throw Error("dyadic class order overflow");
            }
            dy_orders.push_back(o);
        }
        std::vector<Int> target = cl.two_part_mod_dyadic();
        Int target_order = 1;
        for (const auto& t : target) target_order *= t;

        std::vector<QuadIdeal> chosen_ideals = dyadic;
        std::vector<Int> chosen_orders;
        Int got = 1;
        Int p = 3;
        long guard = 5000;
        auto subgroup_order = [&](const std::vector<QuadIdeal>& gens) {
            std::vector<QuadIdeal> reps = {ideal_one(F)};
            std::vector<Form> keys = {cl.identity_key()};
            for (size_t i = 0; i < reps.size(); ++i)
                for (const auto& g : gens) {
                    QuadIdeal nx = cl.reduce_ideal(ideal_mul(F, reps[i], g), nullptr);
                    nx.content = 1;
                    Form kk = cl.class_key(nx);
                    bool seen = false;
                    for (const auto& e : keys)
                        if (e == kk) seen = true;
                    if (!seen) {
                        keys.push_back(kk);
                        reps.push_back(nx);
                    }
                }
            return Int(static_cast<long>(keys.size()));
        };
        Int base_order = subgroup_order(dyadic);
        while (got < target_order && guard-- > 0) {
            if (F.kind_of(p) != PrimeKind::Inert) {
                QuadIdeal P = decompose_prime(F, p).first;
                // order of the class modulo <dyadic>: smallest k with P^k in <dyadic>
                Int ordmod = 0;
                {
                    QuadIdeal acc = P;
                    for (Int k = 1; k <= cl.h(); ++k) {
                        std::vector<QuadIdeal> test = dyadic;
                        test.push_back(acc);
                        if (subgroup_order(test) == base_order) {
                            ordmod = k;
                            break;
                        }
                        acc = ideal_mul(F, acc, P);
                        acc = cl.reduce_ideal(acc, nullptr);
                        acc.content = 1;
                    }
                }
                Int t = ordmod & (ordmod - 1);
                if (ordmod > 1 && t == 0) {
                    std::vector<QuadIdeal> trial = chosen_ideals;
                    trial.push_back(P);
                    Int with = subgroup_order(trial);
                    Int withOld = subgroup_order(chosen_ideals);
                    if (with == withOld * ordmod) {
                        chosen_ideals.push_back(P);
                        chosen_orders.push_back(ordmod);
                        got *= ordmod;
                        NfdClassGen cg;
                        cg.p = p;
                        // two-element rep: second generator (b + sqrt d)/2
                        QuadIdeal Q = decompose_prime(F, p).first;
                        AlgNum sg = theta_is_half ? AlgNum(Q.b + 1, 1, 2) : AlgNum(Q.b, 1, 2);
                        // as polynomial in theta: (b + sqrt d)/2 = ...
                        if (theta_is_half) {
                            // (b + 2 theta - 1)/2
                            cg.prime_poly = {(Q.b - 1) / 2 * 0 + (Q.b - 1), Int(2)};
                            // store numerator with den 2
                        } else {
                            cg.prime_poly = {Q.b, Int(2)};
                        }
                        (void)sg;
                        cg.order = ordmod;
                        // correction exponents: find c with q^{ord} * prod p^{-c} principal
                        bool done = false;
                        std::vector<Int> best_c;
                        AlgNum alpha;
                        std::vector<long> lim;
                        for (const auto& o : dy_orders) lim.push_back(static_cast<long>(o.get_si()));
                        std::vector<long> cvec(static_cast<size_t>(dd), 0);
                        while (!done) {
                            QuadIdeal I = ideal_pow(F, Q, ordmod);
                            for (long j = 0; j < dd; ++j)
                                if (cvec[static_cast<size_t>(j)])
                                    I = ideal_mul(F, I,
                                                  ideal_pow(F, dyadic[static_cast<size_t>(j)],
                                                            Int(cvec[static_cast<size_t>(j)])));
                            auto gg = cl.principal_generator(I);
                            if (gg) {
                                alpha = *gg;
                                best_c.assign(cvec.begin(), cvec.end());
                                done = true;
                                break;
                            }
                            long jj = 0;
                            while (jj < dd && ++cvec[static_cast<size_t>(jj)] >= lim[static_cast<size_t>(jj)]) {
                                cvec[static_cast<size_t>(jj)] = 0;
                                ++jj;
                            }
                            if (jj == dd) break;
                        }
                        if (!done) throw Error("export: no dyadic correction found");
                        NfdElement ae = to_theta(alpha);
                        cg.alpha_num = ae.num;
                        cg.alpha_den = ae.den;
                        cg.dyadic_correction = best_c;
                        fd.class_gens.push_back(cg);
                    }
                }
            }
            mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
        }
        if (got != target_order) throw Error("export: could not realize a 2-part basis by primes");
    }

    // real roots of poly (quadratic): exact isolating intervals
    if (F.r > 0) {
        // roots: theta = sqrt m or (1 +- sqrt d)/2
        auto interval_for = [&](bool positive_root) -> std::array<Rat, 2> {
            if (!theta_is_half) {
                Int m = d / 4;
                Int s = isqrt(m);
                if (positive_root) return {Rat(s), Rat(s + 1)};
                return {Rat(-(s + 1)), Rat(-s)};
            }
            Int s = isqrt(d);
            // (1 + sqrt d)/2 in ((1+s)/2-ish): use denominator 2
            if (positive_root) return {Rat(1 + s, 2), Rat(2 + s, 2)};
            return {Rat(Int(1) - s - 1, 2), Rat(Int(1) - s, 2)};
        };
        auto i1 = interval_for(false), i2 = interval_for(true);
        i1[0].canonicalize();
        i1[1].canonicalize();
        i2[0].canonicalize();
        i2[1].canonicalize();
        fd.real_roots.push_back(i1);
        fd.real_roots.push_back(i2);
    }
    fd.exceptional = is_exceptional_quadratic(d);
    return fd;
}

}  // namespace narrowlog
