#include "narrowlog/ktheory.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "narrowlog/errors.hpp"

namespace narrowlog {

bool is_exceptional_quadratic(const Int& d) {
    if (d > 0) return true;  // a real place forces i outside F^c
    return !(d == -4 || d == -8);
}

WildKernelRank wild_kernel_2rank(bool exceptional_field, long exceptional_dyadic_count,
                                 const std::vector<Int>& narrow_factors) {
    WildKernelRank out;
    if (exceptional_dyadic_count > 0) {
        out.tag = RankCase::NotApplicable;
        return out;
    }
    out.tag = exceptional_field ? RankCase::Exceptional : RankCase::NotExceptional;
    out.rank = static_cast<long>(narrow_factors.size());
    if (exceptional_field && *out.rank < 1)
        throw Error("exceptional field must have narrow 2-rank >= 1");
    return out;
}

Int k2_index_formula(int r, const Int& global_torsion, const std::vector<Int>& local_torsions) {
    Int num = pow2(r);
    for (const auto& t : local_torsions) num *= t;
    if (!mpz_divisible_p(num.get_mpz_t(), global_torsion.get_mpz_t()))
        throw Error("index formula not integral");
    return num / global_torsion;
}

namespace {

// prime factorization for the small cyclic orders appearing in tame kernels
std::map<Int, long> factorize(Int n) {
    std::map<Int, long> out;
    for (Int p = 2; p * p <= n; p == 2 ? p = 3 : p += 2) {
        while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
            out[p] += 1;
            n /= p;
        }
    }
    if (n > 1) out[n] += 1;
    return out;
}

// all partitions mu of total with at most `slots` parts satisfying the
// dominance-containment mu_i <= lambda_i (lambda sorted descending)
void enum_partitions(const std::vector<long>& lambda, long total, size_t pos, long prev,
                     std::vector<long>& cur, std::vector<std::vector<long>>& out) {
    if (total == 0) {
        out.push_back(cur);
        return;
    }
    if (pos >= lambda.size()) return;
    long cap = std::min(prev, lambda[pos]);
    for (long part = std::min(cap, total); part >= 1; --part) {
        cur.push_back(part);
        enum_partitions(lambda, total - part, pos + 1, part, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<std::vector<Int>> subgroup_structures(const std::vector<Int>& factors,
                                                  const Int& index) {
    // per-prime exponent partitions of the group
    std::map<Int, std::vector<long>> lambda;
    for (const auto& f : factors)
        for (const auto& [p, e] : factorize(f)) lambda[p].push_back(e);
    for (auto& [p, v] : lambda) std::sort(v.begin(), v.end(), std::greater<long>());

    std::map<Int, long> idx = factorize(index);
    for (const auto& [p, e] : idx)
        if (!lambda.count(p)) return {};  // index cannot divide the order

    // per-prime candidate partitions
    std::vector<Int> primes;
    std::vector<std::vector<std::vector<long>>> choices;
    for (const auto& [p, lam] : lambda) {
        long drop = idx.count(p) ? idx.at(p) : 0;
        long total = 0;
        for (long e : lam) total += e;
        long target = total - drop;
        if (target < 0) return {};
        std::vector<std::vector<long>> cands;
        if (target == 0) {
            cands.push_back({});
        } else {
            std::vector<long> cur;
            enum_partitions(lam, target, 0, 1L << 30, cur, cands);
        }
        if (cands.empty()) return {};
        primes.push_back(p);
        choices.push_back(std::move(cands));
    }

    // combine across primes into invariant factors (descending merge)
    std::vector<std::vector<Int>> results;
    std::vector<size_t> pick(primes.size(), 0);
    while (true) {
        size_t maxlen = 0;
        for (size_t i = 0; i < primes.size(); ++i)
            maxlen = std::max(maxlen, choices[i][pick[i]].size());
        std::vector<Int> inv;
        for (size_t k = 0; k < maxlen; ++k) {
            Int f = 1;
            for (size_t i = 0; i < primes.size(); ++i) {
                const auto& part = choices[i][pick[i]];
                if (k < part.size()) {
                    Int pe;
                    mpz_pow_ui(pe.get_mpz_t(), primes[i].get_mpz_t(),
                               static_cast<unsigned long>(part[k]));
                    f *= pe;
                }
            }
            inv.push_back(f);
        }
        std::sort(inv.begin(), inv.end());
        results.push_back(inv);
        // advance
        size_t i = 0;
        while (i < primes.size() && ++pick[i] == choices[i].size()) {
            pick[i] = 0;
            ++i;
        }
        if (i == primes.size()) break;
        if (primes.empty()) break;
    }
    if (primes.empty()) results.push_back({});
    // dedupe
    std::sort(results.begin(), results.end());
    results.erase(std::unique(results.begin(), results.end()), results.end());
    return results;
}

namespace {
long two_rank_of(const std::vector<Int>& factors) {
    long r = 0;
    for (const auto& f : factors)
        if (mpz_even_p(f.get_mpz_t())) ++r;
    return r;
}
}  // namespace

StructureDeduction deduce_wk2_structure(const std::vector<Int>& k2_structure, const Int& index,
                                        long rk2, bool exceptional) {
    StructureDeduction out;
    std::vector<std::vector<Int>> subs = subgroup_structures(k2_structure, index);
    for (const auto& s : subs)
        if (two_rank_of(s) == rk2) out.wk_candidates.push_back(s);
    if (out.wk_candidates.empty())
        throw Inconsistent("no subgroup of the tame kernel matches the index and 2-rank");

    std::set<std::vector<Int>> k2inf;
    for (const auto& wk : out.wk_candidates) {
        if (!exceptional) {
            k2inf.insert(wk);  // case (i): WK2 = K2^infty
            continue;
        }
        // case (ii): K2^infty has index 2; rank drops by one in case (ii,b)
        for (const auto& s : subgroup_structures(wk, 2)) {
            long tr = two_rank_of(s);
            if (tr == rk2 || tr == rk2 - 1) k2inf.insert(s);
        }
    }
    out.k2inf_candidates.assign(k2inf.begin(), k2inf.end());
    return out;
}

}  // namespace narrowlog
