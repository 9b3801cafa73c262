#ifndef NARROWLOG_FIELDDATA_HPP
#define NARROWLOG_FIELDDATA_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "narrowlog/bigint.hpp"
#include "narrowlog/padic.hpp"
#include "narrowlog/report.hpp"

namespace narrowlog {

// 2-adic datum as stored on disk: (valuation, odd unit, precision).
struct NfdPadic {
    bool zero = true;
    long val = 0;
    Int unit = 0;
    long prec = 0;

    Padic to_padic() const;
    static NfdPadic from_padic(const Padic& x);
};

struct NfdClassGen {
    Int p;                        // rational prime under the ideal
    std::vector<Int> prime_poly;  // second generator as a polynomial in theta
    Int order;                    // 2-power order 2^m modulo dyadic classes
    std::vector<Int> alpha_num;   // principalization element, theta coordinates
    Int alpha_den = 1;
    std::vector<Int> dyadic_correction;  // exponents, one per dyadic place
};

struct NfdElement {
    std::vector<Int> num;
    Int den = 1;
};

struct FieldData {
    std::vector<Int> poly;  // monic integer polynomial, ascending
    int r = 0, c = 0;
    long precision = 0;
    std::vector<std::vector<NfdPadic>> dyadic_factors;  // monic, ascending coeffs
    std::vector<NfdClassGen> class_gens;
    std::vector<NfdElement> two_units;
    std::vector<std::array<Rat, 2>> real_roots;  // isolating intervals, ascending
    std::optional<bool> exceptional;
};

FieldData parse_field_data(const std::string& text);
FieldData parse_field_data_file(const std::string& path);
std::string serialize_field_data(const FieldData& fd);

struct ValidationReport {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
    std::string str() const;
};

ValidationReport validate_field_data(const FieldData& fd);

// Full pipeline on ingested data.
FieldReport analyze_field_data(const FieldData& fd, const AnalyzeOptions& opt = {});

// Export a built-in quadratic field as ingestion data (golden equivalence).
FieldData export_quadratic_nfd(const Int& d, long precision = 640);

// mu^1 contribution of places above an odd prime p, decided from the
// defining polynomial:  product over places of the p-part of the local
// torsion.  Returns nullopt when the analysis is out of reach (residual
// block of degree > 2).
std::optional<Int> odd_mu1_product(const std::vector<Int>& poly, const Int& p);

}  // namespace narrowlog

#endif
