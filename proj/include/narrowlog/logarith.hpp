#ifndef NARROWLOG_LOGARITH_HPP
#define NARROWLOG_LOGARITH_HPP

#include <functional>
#include <string>
#include <vector>

#include "narrowlog/padic.hpp"
#include "narrowlog/zlinalg.hpp"

namespace narrowlog {

// One multiplicative generator entering the S-unit presentation: either a
// 2-unit (class_vals empty) or a class relation with exact valuations at the
// chosen class primes.
struct LogElement {
    std::string label;
    std::vector<int> signs;       // r sign bits under the real embeddings
    std::vector<Int> class_vals;  // valuations at the class primes (relations only)
};

// Frontend-independent input to the logarithmic pipeline.  The callbacks let
// the pipeline recompute 2-adic data when the precision escalates.
struct LogInput {
    int r = 0, c = 0;
    long dyadic_count = 0;
    std::vector<LogElement> two_units;   // r + c + dyadic_count - 1 entries
    std::vector<LogElement> class_rels;  // one per class prime
    std::vector<Int> class_prime_norms;  // absolute norms N(q_i)

    // local norm of an element at dyadic place j (is_rel selects class_rels)
    std::function<Padic(bool is_rel, size_t idx, size_t place, long rel)> local_norm;
    // values of Log N over a generating sample of the local multiplicative
    // group at place j; their minimal-valuation member generates the image
    std::function<std::vector<Padic>(size_t place, long rel)> deg_samples;
};

struct LogUnitBasis {
    IntMatrix exponents;                  // two_units-count x (r+c) columns
    std::vector<std::vector<int>> signs;  // r-bit sign vector per basis unit
    long candidate_count = 0;             // k before reduction
};

struct LogGroups {
    AbelianStructure ordinary;  // torsion of the degree-0 logarithmic classes
    AbelianStructure narrow;    // with real sign conditions adjoined
    LogUnitBasis units;
    std::vector<Padic> degrees;              // deg of each dyadic place
    std::vector<std::vector<int>> alpha_signs;  // per ordinary factor
    std::vector<Padic> product_formula_residuals;
    long e_used = 0;
};

// Runs the full pipeline at precision 2^e, doubling up to emax when a
// finiteness or precision check fails.  Throws GrossCheckFailed if the
// degree-line rank is wrong at every precision.
LogGroups compute_log_groups(const LogInput& in, long e, long emax = 512);

// Single-precision core, exposed for the precision-stability tests.
LogGroups compute_log_groups_at(const LogInput& in, long e);

// Logarithmic valuation of one element at one dyadic place:
// - Log(N)/deg, integral by choice of deg.
Padic log_valuation(const Padic& local_norm_value, const Padic& degree);

// Minimal-valuation generator among Log-norm samples.
Padic place_degree_from_samples(const std::vector<Padic>& samples);

// Product formula residual  sum_q v_q Log N(q) + sum_p tv_p deg_p.
Padic product_formula_residual(const std::vector<Int>& odd_vals,
                               const std::vector<Padic>& odd_log_norms,
                               const std::vector<Padic>& tv,
                               const std::vector<Padic>& degrees);

}  // namespace narrowlog

#endif
