#ifndef NARROWLOG_QUADFIELD_HPP
#define NARROWLOG_QUADFIELD_HPP

#include <map>
#include <optional>
#include <vector>

#include "narrowlog/bigint.hpp"
#include "narrowlog/zlinalg.hpp"

namespace narrowlog {

enum class PrimeKind { Split, Inert, Ramified };

// Quadratic field given by a fundamental discriminant.
struct QuadField {
    Int d;
    int r, c;  // signature, r + 2c = 2

    explicit QuadField(const Int& disc);

    PrimeKind kind_of(const Int& p) const;
    long dyadic_place_count() const { return kind_of(2) == PrimeKind::Split ? 2 : 1; }
    bool real() const { return d > 0; }
    // defining polynomial of the dyadic completion (x for split places)
    std::vector<Int> dyadic_poly() const;
};

// (x + y sqrt(d)) / z in lowest terms, z > 0.
struct AlgNum {
    Int x, y, z;

    AlgNum() : x(0), y(0), z(1) {}
    AlgNum(Int px, Int py, Int pz);

    bool is_zero() const { return x == 0 && y == 0; }
    bool is_rational() const { return y == 0; }
};

AlgNum an_add(const AlgNum& a, const AlgNum& b);
AlgNum an_mul(const QuadField& F, const AlgNum& a, const AlgNum& b);
AlgNum an_conj(const AlgNum& a);
AlgNum an_inv(const QuadField& F, const AlgNum& a);
AlgNum an_neg(const AlgNum& a);
AlgNum an_pow(const QuadField& F, const AlgNum& a, const Int& k);  // k may be negative
Rat an_norm(const QuadField& F, const AlgNum& a);
bool an_eq(const AlgNum& a, const AlgNum& b);
bool an_integral(const QuadField& F, const AlgNum& a);

// content * (a Z + (b + sqrt d)/2 Z), content a positive rational
struct QuadIdeal {
    Int a;
    Int b;  // canonical in (-a, a]
    Rat content;

    QuadIdeal() : a(1), b(0), content(1) {}
};

QuadIdeal ideal_one(const QuadField& F);
QuadIdeal make_ideal(const QuadField& F, const Int& a, const Int& b, const Rat& content = Rat(1));
QuadIdeal ideal_mul(const QuadField& F, const QuadIdeal& I, const QuadIdeal& J);
QuadIdeal ideal_pow(const QuadField& F, const QuadIdeal& I, const Int& k);  // k may be negative
QuadIdeal ideal_of(const QuadField& F, const AlgNum& alpha);
bool ideal_eq(const QuadIdeal& I, const QuadIdeal& J);
Rat ideal_norm(const QuadField& F, const QuadIdeal& I);

struct Decomposition {
    PrimeKind kind;
    QuadIdeal first;   // a prime above p  (for Inert: the ideal (p))
    QuadIdeal second;  // conjugate (Split only)
};
Decomposition decompose_prime(const QuadField& F, const Int& p);

// exact ordinary valuation of alpha at the prime above p described by I
long ideal_valuation(const QuadField& F, const AlgNum& alpha, const Int& p, const QuadIdeal& I,
                     PrimeKind kind);

// signs under the two real embeddings (positive sqrt first); bit 1 = negative
std::vector<int> real_signs(const QuadField& F, const AlgNum& alpha);

struct Form {
    Int a, b, c;
    bool operator<(const Form& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return c < o.c;
    }
    bool operator==(const Form& o) const { return a == o.a && b == o.b && c == o.c; }
};

// Class-group context: reduced forms, cycle structure (real), composition,
// discrete logs over chosen prime generators, and principalization with
// exact generators.
class ClassGroupCtx {
  public:
    explicit ClassGroupCtx(const QuadField& F);

    const QuadField& field() const { return F_; }
    const Int& h() const { return h_; }           // ordinary class number
    const Int& h_narrow() const { return hp_; }   // equals h for imaginary
    bool unit_norm_is_minus_one() const { return unit_norm_minus1_; }
    const AlgNum& fundamental_unit() const;       // real only

    // canonical key of the ordinary ideal class
    Form class_key(const QuadIdeal& I) const;
    Form identity_key() const;

    // reduce an ideal, returning lambda with  reduced = lambda * I
    QuadIdeal reduce_ideal(const QuadIdeal& I, AlgNum* lambda) const;

    // alpha with (alpha) = I, or nullopt when I is not principal
    std::optional<AlgNum> principal_generator(const QuadIdeal& I) const;

    // full class group as invariant factors with representative ideals
    const std::vector<Int>& invariant_factors() const { return inv_factors_; }
    const std::vector<QuadIdeal>& factor_reps() const { return factor_reps_; }

    // 2-part of Cl / <dyadic classes>
    std::vector<Int> two_part_mod_dyadic() const;

    // discrete log of a class over the generator primes (throws if BFS table
    // does not contain it, which cannot happen once generation succeeded)
    std::vector<Int> dlog(const QuadIdeal& I) const;
    const std::vector<Int>& generator_primes() const { return gen_primes_; }
    const IntMatrix& relation_lattice() const { return rel_hnf_; }  // over gen primes

  private:
    QuadField F_;
    Int h_, hp_;
    bool unit_norm_minus1_ = false;
    AlgNum eps_;
    bool have_eps_ = false;
    std::vector<Form> reduced_forms_;
    std::map<Form, long> cycle_of_;    // real: form -> cycle id
    std::vector<Form> cycle_min_;      // real: cycle id -> lex-min form
    std::map<Form, std::vector<Int>> dlog_;
    std::vector<Int> gen_primes_;
    IntMatrix rel_hnf_;
    std::vector<Int> inv_factors_;
    std::vector<QuadIdeal> factor_reps_;
    Form kappa_key_;  // real with N(eps) = +1: cycle key of (sqrt d)

    void enumerate_forms();
    void compute_unit();
    void build_group();
    Form narrow_key(const QuadIdeal& I) const;
    Form narrow_key_of_form(const Form& f) const;
};

// S-unit style data consumed by the logarithmic pipeline.
struct SUnitElement {
    std::string label;
    AlgNum value;
    std::vector<Int> class_vals;  // valuations at the chosen class primes q_i
    std::vector<int> signs;       // real embedding signs (empty when r = 0)
};

struct TwoUnitGroup {
    Int torsion_order;                 // 2, 4 (d=-4), or 6 (d=-3)
    std::vector<SUnitElement> gens;    // r + c + dyadic_count - 1 elements
};

TwoUnitGroup two_unit_group(const QuadField& F, const ClassGroupCtx& cl);

// Class-prime relation data: primes q_i generating the 2-part of Cl modulo
// dyadic classes, with relation elements expressing the mixed part of the
// S-unit lattice for S = dyadic places + {q_i}.
struct ClassRelationData {
    std::vector<Int> class_primes;          // the q_i
    std::vector<QuadIdeal> class_ideals;
    std::vector<SUnitElement> relations;    // s elements with q-support
};

ClassRelationData class_relations(const QuadField& F, const ClassGroupCtx& cl);

}  // namespace narrowlog

#endif
