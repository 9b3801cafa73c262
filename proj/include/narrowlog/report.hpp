#ifndef NARROWLOG_REPORT_HPP
#define NARROWLOG_REPORT_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "narrowlog/bigint.hpp"
#include "narrowlog/ktheory.hpp"
#include "narrowlog/logarith.hpp"

namespace narrowlog {

struct FieldReport {
    std::string name;            // discriminant or polynomial label
    Int d = 0;                   // discriminant when known
    int r = 0, c = 0;
    long P_count = 0;            // dyadic places
    long PE_count = 0;           // exceptional dyadic places
    std::vector<Int> cl;         // class group invariant factors (full)
    bool cl_known = false;
    std::vector<Int> cl_prime;   // 2-part of Cl / <P>
    std::vector<Int> log_cl;     // ordinary logarithmic 2-class group
    std::vector<Int> log_cl_res; // narrow logarithmic 2-class group
    bool exceptional_field = false;
    std::optional<long> rk2;
    std::string rank_case;       // "i", "ii", or "n/a"
    Int k2_index = 0;
    Int global_torsion = 2;
    std::vector<Int> local_torsions;
    long e_used = 0;

    // filled when a tame kernel structure is supplied
    std::vector<Int> k2_structure;
    std::vector<std::vector<Int>> wk_candidates;
    std::vector<std::vector<Int>> k2inf_candidates;
};

struct AnalyzeOptions {
    long precision = 64;
    long max_precision = 512;
    bool with_dual_check = true;
};

FieldReport analyze_quadratic(const Int& d, const AnalyzeOptions& opt = {});

// Applies the tame-kernel deduction to an existing report.
void apply_k2_structure(FieldReport& rep, const std::vector<Int>& k2);

// Rendering helpers shared by the CLI and tests.
std::string render_group(const std::vector<Int>& factors);

}  // namespace narrowlog

#endif
