#ifndef NARROWLOG_LOCALFIELD_HPP
#define NARROWLOG_LOCALFIELD_HPP

#include <memory>
#include <optional>
#include <vector>

#include "narrowlog/bigint.hpp"
#include "narrowlog/padic.hpp"
#include "narrowlog/zlinalg.hpp"

namespace narrowlog {

// Element of a local field, in coordinates over the maximal-order basis.
struct LFElem {
    std::vector<Int> c;
    long prec;  // coordinates canonical mod p^prec
};

// A finite extension K of Q_p presented as Q_p[x]/(poly) with poly monic and
// irreducible.  The constructor computes the maximal order (round-2), the
// ramification index e, residue degree f, a uniformizer and an F_p-basis of
// the residue field, all at working precision p^W.
class LocalField {
  public:
    LocalField(std::vector<Int> poly, const Int& p, long W = 0);

    long degree() const { return n_; }
    long ram_index() const { return e_; }
    long res_degree() const { return f_; }
    const Int& prime() const { return p_; }
    long work_prec() const { return W_; }
    const std::vector<Int>& poly() const { return poly_; }

    // --- element constructors ---
    LFElem zero() const;
    LFElem one() const;
    LFElem from_int(const Int& k) const;
    // (sum g_i theta^i) / p^den for theta the root of poly; must be integral.
    LFElem from_poly(const std::vector<Int>& g, long den = 0) const;
    LFElem theta() const { return from_poly({Int(0), Int(1)}); }
    const LFElem& uniformizer() const { return pi_; }

    // --- raw ring operations (O-basis coordinates) ---
    LFElem add(const LFElem& a, const LFElem& b) const;
    LFElem sub(const LFElem& a, const LFElem& b) const;
    LFElem neg(const LFElem& a) const;
    LFElem mul(const LFElem& a, const LFElem& b) const;
    LFElem mul_int(const LFElem& a, const Int& k) const;
    LFElem pow(const LFElem& a, const Int& k) const;  // k >= 0

    bool is_zero(const LFElem& a) const;

    // theta-power representation (poly coefficients, denominator exponent).
    void to_poly(const LFElem& a, std::vector<Int>& g, long& den) const;

    // Exact valuation with value group Z (v(uniformizer) = 1).  Throws
    // PrecisionExhausted when the element vanishes to working precision.
    long val(const LFElem& a) const;

    // Norm down to Q_p as a resultant; exact numerator over the canonical
    // lifts, so the residue is valid modulo p^(prec - n*den_adjust).
    // For p = 2 the result is returned as a Padic.
    Int norm_int(const LFElem& a, long& den_out) const;
    Padic norm2(const LFElem& a) const;  // requires p = 2

    // Inverse of a unit (val 0).
    LFElem inv_unit(const LFElem& a) const;
    // Exact division by uniformizer^k; requires val(a) >= k.
    LFElem div_pi(const LFElem& a, long k) const;

    // Square test with Hensel witness; p = 2 only.
    bool is_square(const LFElem& a, LFElem* root = nullptr) const;

    // Largest power p^t of the residue characteristic with a primitive
    // p^t-th root of unity in K.
    Int torsion_order() const;

    // All residue-field representatives (size p^f).
    const std::vector<LFElem>& residue_transversal() const { return transversal_; }

    // Reduce an integral element to its residue representative.
    LFElem residue_rep(const LFElem& a) const;

    // Find a root of g (coefficients in K) by branch-and-lift; returns
    // nullopt when g has no root in K.
    std::optional<LFElem> find_root(const std::vector<LFElem>& g) const;

    std::string describe(const LFElem& a) const;

  private:
    Int p_;
    long W_;
    long n_, e_, f_;
    std::vector<Int> poly_;            // monic defining polynomial, lifts mod p^W
    IntMatrix basis_;                  // columns: O-basis in theta coords, scaled by p^T
    long T_;                           // basis denominator exponent
    IntMatrix basis_inv_scaled_;       // adjugate of basis_ (for from_poly)
    Int detB_;                         // det of basis_
    std::vector<std::vector<Int>> mult_table_;  // b_i*b_j in O-coords
    LFElem pi_;
    std::vector<long> res_basis_idx_;  // indices (into O basis) of residue field basis? no: elements
    std::vector<LFElem> res_basis_;
    std::vector<LFElem> transversal_;
    IntMatrix nil_mod_p_;              // F_p basis of the nilradical of O/pO (coords)

    void build_max_order();
    void build_structure();
    void build_residue_data();
    bool in_maximal_ideal(const LFElem& a) const;
    LFElem from_theta_scaled(const std::vector<Int>& g, long den) const;
    std::vector<Int> solve_local(const IntMatrix& M, const std::vector<Int>& b, long prec,
                                 long* loss = nullptr) const;
    LFElem residue_sqrt(const LFElem& t) const;
    bool artin_schreier_solve(const LFElem& a, const LFElem& t, LFElem& s) const;
};

// Resultant of monic f with g (declared degree = size-1), exact over Z.
Int poly_resultant(const std::vector<Int>& f, const std::vector<Int>& g);

// The first quadratic step E of the cyclotomic Z_2-tower over K, built as
// K(alpha_k) with alpha_0 = 0, alpha_{k+1} = sqrt(2 + alpha_k); p = 2 only.
LocalField first_cyclotomic_step(const LocalField& K);

// True when i is not contained in the local cyclotomic Z_2-extension of K.
bool is_exceptional_dyadic(const LocalField& K);

}  // namespace narrowlog

#endif
