#ifndef NARROWLOG_KTHEORY_HPP
#define NARROWLOG_KTHEORY_HPP

#include <optional>
#include <string>
#include <vector>

#include "narrowlog/bigint.hpp"
#include "narrowlog/localfield.hpp"
#include "narrowlog/zlinalg.hpp"

namespace narrowlog {

// Global exceptionality (i not in the cyclotomic Z_2-extension).  Any field
// with a real place is exceptional; among imaginary quadratic fields exactly
// d = -4 and d = -8 are not.
bool is_exceptional_quadratic(const Int& d);

enum class RankCase { NotExceptional, Exceptional, NotApplicable };

struct WildKernelRank {
    std::optional<long> rank;  // empty when exceptional dyadic places exist
    RankCase tag;
};

WildKernelRank wild_kernel_2rank(bool exceptional_field, long exceptional_dyadic_count,
                                 const std::vector<Int>& narrow_factors);

// Index formula  (K_2(O_F) : WK_2(F)) = 2^r / |mu(F)| * prod |mu^1(F_p)|.
Int k2_index_formula(int r, const Int& global_torsion, const std::vector<Int>& local_torsions);

// Isomorphism classes of subgroups of the abelian group with the given
// invariant factors and index; each result is an ascending invariant-factor
// list.  Decided by per-prime partition dominance.
std::vector<std::vector<Int>> subgroup_structures(const std::vector<Int>& factors,
                                                  const Int& index);

struct StructureDeduction {
    std::vector<std::vector<Int>> wk_candidates;      // filtered by 2-rank
    std::vector<std::vector<Int>> k2inf_candidates;   // via the exceptional case split
    bool wk_unique() const { return wk_candidates.size() == 1; }
    bool k2inf_unique() const { return k2inf_candidates.size() == 1; }
};

// k2_structure: invariant factors of the tame kernel (ingested data);
// index: (K2(O):WK2); rk2: 2-rank of the wild kernel; exceptional: case (ii).
StructureDeduction deduce_wk2_structure(const std::vector<Int>& k2_structure, const Int& index,
                                        long rk2, bool exceptional);

}  // namespace narrowlog

#endif
