#include "narrowlog/quadfield.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "narrowlog/errors.hpp"
#include "narrowlog/padic.hpp"

namespace narrowlog {

QuadField::QuadField(const Int& disc) : d(disc) {
    if (!is_fundamental_discriminant(d))
        throw Error("not a fundamental discriminant: " + d.get_str());
    if (d > 0) {
        r = 2;
        c = 0;
    } else {
        r = 0;
        c = 1;
    }
}

PrimeKind QuadField::kind_of(const Int& p) const {
    int k = kronecker(d, p);
    if (k == 0) return PrimeKind::Ramified;
    return k == 1 ? PrimeKind::Split : PrimeKind::Inert;
}

std::vector<Int> QuadField::dyadic_poly() const {
    PrimeKind k = kind_of(2);
    if (k == PrimeKind::Split) return {Int(0), Int(1)};  // completion = Q_2
    if (k == PrimeKind::Inert) return {(1 - d) / 4, Int(-1), Int(1)};  // x^2 - x + (1-d)/4
    return {-(d / 4), Int(0), Int(1)};                                // x^2 - m
}

// --- AlgNum ---

AlgNum::AlgNum(Int px, Int py, Int pz) : x(std::move(px)), y(std::move(py)), z(std::move(pz)) {
    if (z == 0) throw Error("AlgNum: zero denominator");
    if (z < 0) {
        x = -x;
        y = -y;
        z = -z;
    }
    Int g = gcd(gcd(x, y), z);
    if (g > 1) {
        x /= g;
        y /= g;
        z /= g;
    }
}

AlgNum an_add(const AlgNum& a, const AlgNum& b) {
    return AlgNum(a.x * b.z + b.x * a.z, a.y * b.z + b.y * a.z, a.z * b.z);
}

AlgNum an_mul(const QuadField& F, const AlgNum& a, const AlgNum& b) {
    return AlgNum(a.x * b.x + a.y * b.y * F.d, a.x * b.y + a.y * b.x, a.z * b.z);
}

AlgNum an_conj(const AlgNum& a) { return AlgNum(a.x, -a.y, a.z); }

AlgNum an_neg(const AlgNum& a) { return AlgNum(-a.x, -a.y, a.z); }

Rat an_norm(const QuadField& F, const AlgNum& a) {
    Rat n(a.x * a.x - F.d * a.y * a.y, a.z * a.z);
    n.canonicalize();
    return n;
}

AlgNum an_inv(const QuadField& F, const AlgNum& a) {
    if (a.is_zero()) throw ZeroInput("inverse of zero AlgNum");
    Int num = a.x * a.x - F.d * a.y * a.y;  // N(a) * z^2
    return AlgNum(a.x * a.z, -a.y * a.z, num);
}

AlgNum an_pow(const QuadField& F, const AlgNum& a, const Int& k) {
    if (k == 0) return AlgNum(1, 0, 1);
    AlgNum base = k > 0 ? a : an_inv(F, a);
    Int kk = abs(k);
    AlgNum acc(1, 0, 1);
    for (long i = static_cast<long>(mpz_sizeinbase(kk.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        acc = an_mul(F, acc, acc);
        if (mpz_tstbit(kk.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = an_mul(F, acc, base);
    }
    return acc;
}

bool an_eq(const AlgNum& a, const AlgNum& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

bool an_integral(const QuadField& F, const AlgNum& a) {
    if (a.z == 1) return true;
    if (a.z != 2) return false;
    Int t = a.x - a.y * F.d;
    return mpz_even_p(t.get_mpz_t());
}

// --- ideals ---

QuadIdeal make_ideal(const QuadField& F, const Int& a, const Int& b, const Rat& content) {
    if (a <= 0) throw Error("make_ideal: a must be positive");
    // canonical b window: imaginary (-a, a]; real (sqrt d - 2a, sqrt d], so
    // that reduced ideals carry their reduced form directly
    Int bc;
    if (F.d > 0) {
        Int s = isqrt(F.d);
        Int t = (s - b) % (2 * a);
        if (t < 0) t += 2 * a;
        bc = s - t;
    } else {
        bc = b % (2 * a);
        if (bc > a) bc -= 2 * a;
        if (bc <= -a) bc += 2 * a;
    }
    Int t = bc * bc - F.d;
    Int foura = 4 * a;
    if (!mpz_divisible_p(t.get_mpz_t(), foura.get_mpz_t()))
        throw Error("make_ideal: b^2 != d mod 4a");
    QuadIdeal I;
    I.a = a;
    I.b = bc;
    I.content = content;
    return I;
}

QuadIdeal ideal_one(const QuadField& F) {
    return make_ideal(F, 1, mpz_even_p(F.d.get_mpz_t()) ? Int(0) : Int(1));
}

Rat ideal_norm(const QuadField& F, const QuadIdeal& I) {
    (void)F;
    Rat n = I.content * I.content * Rat(I.a);
    n.canonicalize();
    return n;
}

bool ideal_eq(const QuadIdeal& I, const QuadIdeal& J) {
    return I.a == J.a && I.b == J.b && I.content == J.content;
}

// Product via 2x4 HNF in half-coordinates: (p, q) stands for (p + q sqrt d)/2.
QuadIdeal ideal_mul(const QuadField& F, const QuadIdeal& I, const QuadIdeal& J) {
    auto halfmul = [&](const Int& u0, const Int& u1, const Int& v0, const Int& v1, Int* out) {
        Int pp = u0 * v0 + u1 * v1 * F.d;
        Int qq = u0 * v1 + u1 * v0;
        if (mpz_odd_p(pp.get_mpz_t()) || mpz_odd_p(qq.get_mpz_t()))
            throw Error("ideal_mul: non-integral product");
        out[0] = pp / 2;
        out[1] = qq / 2;
    };
    Int gens[4][2];
    halfmul(2 * I.a, Int(0), 2 * J.a, Int(0), gens[0]);
    halfmul(2 * I.a, Int(0), J.b, Int(1), gens[1]);
    halfmul(I.b, Int(1), 2 * J.a, Int(0), gens[2]);
    halfmul(I.b, Int(1), J.b, Int(1), gens[3]);
    // echelonize with the sqrt-coordinate row first so the second basis
    // vector is purely rational
    IntMatrix M(2, 4);
    for (int j = 0; j < 4; ++j) {
        M.at(0, j) = gens[j][1];
        M.at(1, j) = gens[j][0];
    }
    IntMatrix H = hnf(M);
    Int G = H.at(0, 0), B = H.at(1, 0), X = abs(H.at(1, 1));
    if (X == 0 || G == 0) throw Error("ideal_mul: degenerate product");
    if (X % (2 * G) != 0 || B % G != 0) throw Error("ideal_mul: module is not an ideal");
    Rat content = I.content * J.content * Rat(G);
    content.canonicalize();
    return make_ideal(F, X / (2 * G), B / G, content);
}

QuadIdeal ideal_of(const QuadField& F, const AlgNum& alpha) {
    if (alpha.is_zero()) throw ZeroInput("ideal of zero");
    // module generated by beta and beta*omega, beta = x + y sqrt d,
    // omega = (d + sqrt d)/2; half-coordinates
    Int u0 = 2 * alpha.x, u1 = 2 * alpha.y;
    Int w0 = (u0 * F.d + u1 * F.d) / 2;
    Int w1 = (u0 + u1 * F.d) / 2;
    {
        Int t0 = u0 * F.d + u1 * F.d, t1 = u0 + u1 * F.d;
        if (mpz_odd_p(t0.get_mpz_t()) || mpz_odd_p(t1.get_mpz_t()))
            throw Error("ideal_of: non-integral product");
    }
    IntMatrix M(2, 2);
    M.at(0, 0) = u1;
    M.at(1, 0) = u0;
    M.at(0, 1) = w1;
    M.at(1, 1) = w0;
    IntMatrix H = hnf(M);
    Int G = H.at(0, 0), B = H.at(1, 0), X = abs(H.at(1, 1));
    if (X == 0 || G == 0) throw Error("ideal_of: degenerate module");
    if (X % (2 * G) != 0 || B % G != 0) throw Error("ideal_of: module not an ideal");
    Rat content = Rat(G, alpha.z);
    content.canonicalize();
    return make_ideal(F, X / (2 * G), B / G, content);
}

QuadIdeal ideal_pow(const QuadField& F, const QuadIdeal& I, const Int& k) {
    if (k == 0) return ideal_one(F);
    QuadIdeal base = I;
    if (k < 0) {
        QuadIdeal conj = make_ideal(F, I.a, -I.b, Rat(1));
        Rat cn = Rat(1) / (I.content * Rat(I.a));
        cn.canonicalize();
        conj.content = cn;
        base = conj;
    }
    Int kk = abs(k);
    QuadIdeal acc = ideal_one(F);
    for (long i = static_cast<long>(mpz_sizeinbase(kk.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        acc = ideal_mul(F, acc, acc);
        if (mpz_tstbit(kk.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = ideal_mul(F, acc, base);
    }
    return acc;
}

Decomposition decompose_prime(const QuadField& F, const Int& p) {
    Decomposition D;
    D.kind = F.kind_of(p);
    if (D.kind == PrimeKind::Inert) {
        D.first = ideal_one(F);
        D.first.content = Rat(p);
        return D;
    }
    if (p == 2) {
        if (D.kind == PrimeKind::Split) {
            D.first = make_ideal(F, 2, 1);
            D.second = make_ideal(F, 2, -1);
        } else {
            Int m = F.d / 4;
            D.first = make_ideal(F, 2, mpz_even_p(m.get_mpz_t()) ? Int(0) : Int(2));
        }
        return D;
    }
    if (D.kind == PrimeKind::Ramified) {
        Int b = mpz_odd_p(F.d.get_mpz_t()) ? p : Int(0);
        D.first = make_ideal(F, p, b);
        return D;
    }
    Int root;
    if (!sqrt_mod_prime(F.d, p, root)) throw Error("decompose_prime: kronecker lied");
    Int dpar = mod_pow2(F.d, 1), rpar = mod_pow2(root, 1);
    if (dpar != rpar) root = p - root;  // match parity of d so b^2 = d mod 4p
    D.first = make_ideal(F, p, root);
    D.second = make_ideal(F, p, -root);
    return D;
}

long ideal_valuation(const QuadField& F, const AlgNum& alpha, const Int& p, const QuadIdeal& I,
                     PrimeKind kind) {
    if (alpha.is_zero()) throw ZeroInput("valuation of zero");
    long vz = valuation(alpha.z, p);
    const long INF = 1L << 30;
    if (kind == PrimeKind::Inert) {
        long vx = alpha.x == 0 ? INF : valuation(alpha.x, p);
        long vy = alpha.y == 0 ? INF : valuation(alpha.y, p);
        return std::min(vx, vy) - vz;
    }
    if (kind == PrimeKind::Ramified) {
        long vx = alpha.x == 0 ? INF : 2 * valuation(alpha.x, p);
        long vy = alpha.y == 0 ? INF : 2 * valuation(alpha.y, p) + 1;
        return std::min(vx, vy) - 2 * vz;
    }
    // split: evaluate x + y r against the root r attached to this prime
    if (alpha.y == 0) return valuation(alpha.x, p) - vz;
    long bound = 64;
    while (bound <= (1L << 16)) {
        Int pk;
        mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(bound));
        Int r;
        if (p == 2) {
            Padic rt = hensel_root({-F.d, Int(0), Int(1)}, Padic::from_int(1, bound + 8), bound + 8);
            r = rt.residue(bound);
        } else {
            Int r0;
            sqrt_mod_prime(F.d, p, r0);
            r = r0;
            Int mod = p;
            while (mod < pk) {
                mod = mod * mod;
                if (mod > pk) mod = pk;
                Int f = (r * r - F.d) % mod;
                Int dfinv;
                Int df = 2 * r;
                mpz_invert(dfinv.get_mpz_t(), df.get_mpz_t(), mod.get_mpz_t());
                r = (r - f * dfinv) % mod;
                if (r < 0) r += mod;
            }
        }
        // choose the root with (b + r)/1 = 0 mod p (so (b+sqrt d)/2 lands in I)
        if ((I.b + r) % p != 0) r = pk - r;
        Int t = (alpha.x + alpha.y * r) % pk;
        if (t != 0) {
            long v = valuation(t, p);
            if (v < bound - 2) return v - vz;
        }
        bound *= 2;
    }
    throw PrecisionExhausted("ideal_valuation: lift bound exceeded");
}

std::vector<int> real_signs(const QuadField& F, const AlgNum& alpha) {
    if (!F.real()) return {};
    if (alpha.is_zero()) throw ZeroInput("sign of zero");
    auto sgn = [&](const Int& x, const Int& y) {
        if (y == 0) return mpz_sgn(x.get_mpz_t());
        if (x == 0) return mpz_sgn(y.get_mpz_t());
        if (mpz_sgn(x.get_mpz_t()) == mpz_sgn(y.get_mpz_t())) return mpz_sgn(x.get_mpz_t());
        Int lhs = x * x, rhs = F.d * y * y;
        if (lhs > rhs) return mpz_sgn(x.get_mpz_t());
        if (lhs < rhs) return mpz_sgn(y.get_mpz_t());
        throw Error("real_signs: discriminant is a square?");
    };
    int s1 = sgn(alpha.x, alpha.y);
    int s2 = sgn(alpha.x, -alpha.y);
    return {s1 < 0 ? 1 : 0, s2 < 0 ? 1 : 0};
}

// --- class group ---

namespace {

Form form_of_ideal(const QuadField& F, const QuadIdeal& I) {
    Int c = (I.b * I.b - F.d) / (4 * I.a);
    return Form{I.a, I.b, c};
}

bool is_reduced_imag(const Form& f) {
    if (f.a <= 0 || f.c < f.a) return false;
    if (!(-f.a < f.b && f.b <= f.a)) return false;
    if (f.a == f.c && f.b < 0) return false;
    return true;
}

bool is_reduced_real(const Int& d, const Form& f) {
    if (f.b <= 0) return false;
    if (f.b * f.b >= d) return false;
    Int t = 2 * abs(f.a);
    Int l = t + f.b;
    if (d >= l * l) return false;  // need sqrt d < 2|a| + b
    Int m = t - f.b;
    if (m > 0 && m * m >= d) return false;  // need 2|a| - b < sqrt d
    return true;
}

}  // namespace

ClassGroupCtx::ClassGroupCtx(const QuadField& F) : F_(F) {
    enumerate_forms();
    if (F_.real()) compute_unit();
    else h_ = hp_;
    build_group();
}

void ClassGroupCtx::enumerate_forms() {
    const Int& d = F_.d;
    if (d < 0) {
        Int bmax = isqrt(abs(d) / 3);
        for (Int b = mpz_odd_p(d.get_mpz_t()) ? 1 : 0; b <= bmax; b += 2) {
            Int ac4 = b * b - d;
            if (ac4 % 4 != 0) continue;
            Int ac = ac4 / 4;
            for (Int a = std::max(b, Int(1)); a * a <= ac; ++a) {
                if (ac % a != 0) continue;
                Int c = ac / a;
                Form f{a, b, c};
                if (!is_reduced_imag(f)) continue;
                if (gcd(gcd(a, b), c) != 1) continue;
                reduced_forms_.push_back(f);
                if (b != 0 && a != b && a != c) reduced_forms_.push_back(Form{a, -b, c});
            }
        }
        std::sort(reduced_forms_.begin(), reduced_forms_.end());
        hp_ = static_cast<long>(reduced_forms_.size());
        return;
    }
    Int s = isqrt(d);
    for (Int b = mpz_odd_p(d.get_mpz_t()) ? 1 : 2; b <= s; b += 2) {
        Int m4 = d - b * b;
        if (m4 % 4 != 0) continue;
        Int m = m4 / 4;
        for (Int a = 1; a * a <= m; ++a) {
            if (m % a != 0) continue;
            Int c = m / a;
            Form cands[4] = {Form{a, b, -c}, Form{-a, b, c}, Form{c, b, -a}, Form{-c, b, a}};
            for (const auto& f : cands) {
                if (!is_reduced_real(d, f)) continue;
                if (gcd(gcd(f.a, f.b), f.c) != 1) continue;
                reduced_forms_.push_back(f);
            }
        }
    }
    std::sort(reduced_forms_.begin(), reduced_forms_.end());
    reduced_forms_.erase(std::unique(reduced_forms_.begin(), reduced_forms_.end()),
                         reduced_forms_.end());
    auto rho = [&](const Form& f) {
        Int cc = f.c;
        Int ac = abs(cc);
        Int t = (s + f.b) % (2 * ac);
        if (t < 0) t += 2 * ac;
        Int bp = s - t;
        Int cp = (bp * bp - d) / (4 * cc);
        return Form{cc, bp, cp};
    };
    std::map<Form, long> seen;
    for (const auto& f : reduced_forms_) {
        if (seen.count(f)) continue;
        long id = static_cast<long>(cycle_min_.size());
        Form cur = f, mn = f;
        while (!seen.count(cur)) {
            seen[cur] = id;
            if (cur < mn) mn = cur;
            cur = rho(cur);
            if (!is_reduced_real(d, cur)) throw Error("rho left the reduced set");
        }
        if (seen[cur] != id) throw Error("rho merged distinct cycles");
        cycle_min_.push_back(mn);
    }
    cycle_of_ = std::move(seen);
    hp_ = static_cast<long>(cycle_min_.size());
}

QuadIdeal ClassGroupCtx::reduce_ideal(const QuadIdeal& I, AlgNum* lambda) const {
    const Int& d = F_.d;
    Int s = F_.real() ? isqrt(d) : Int(0);
    QuadIdeal J = I;
    Rat content = J.content;
    J.content = 1;
    AlgNum lam(1, 0, 1);
    long guard = 100000;
    while (guard-- > 0) {
        Form f = form_of_ideal(F_, J);
        bool red = F_.real() ? is_reduced_real(d, f) : is_reduced_imag(f);
        if (red) break;
        Int a = J.a, b = J.b;
        Int c = (b * b - d) / (4 * a);
        Int ac = abs(c);
        Int bp;
        if (F_.real()) {
            Int t = (s + b) % (2 * ac);
            if (t < 0) t += 2 * ac;
            bp = s - t;
        } else {
            bp = (-b) % (2 * ac);
            if (bp > ac) bp -= 2 * ac;
            if (bp <= -ac) bp += 2 * ac;
        }
        AlgNum mu(b, Int(-1), 2 * a);  // conj(gamma)/a
        lam = an_mul(F_, lam, mu);
        J = make_ideal(F_, ac, bp, Rat(1));
    }
    if (guard <= 0) throw Error("reduce_ideal did not terminate");
    J.content = content;
    if (lambda) *lambda = lam;
    return J;
}

void ClassGroupCtx::compute_unit() {
    QuadIdeal O = ideal_one(F_);
    AlgNum tau;
    QuadIdeal J0 = reduce_ideal(O, &tau);
    Form start = form_of_ideal(F_, J0);
    const Int& d = F_.d;
    Int s = isqrt(d);
    AlgNum acc(1, 0, 1);
    QuadIdeal J = J0;
    long guard = 1000000;
    while (guard-- > 0) {
        Int a = J.a, b = J.b;
        Int c = (b * b - d) / (4 * a);
        Int ac = abs(c);
        Int t = (s + b) % (2 * ac);
        if (t < 0) t += 2 * ac;
        Int bp = s - t;
        AlgNum mu(b, Int(-1), 2 * a);
        acc = an_mul(F_, acc, mu);
        J = make_ideal(F_, ac, bp, Rat(1));
        Form f = form_of_ideal(F_, J);
        if (f.a == start.a && f.b == start.b) break;
    }
    if (guard <= 0) throw Error("principal cycle walk did not terminate");
    AlgNum u = acc;
    Rat n = an_norm(F_, u);
    if (!(n == Rat(1) || n == Rat(-1))) throw Error("cycle multiplier is not a unit");
    auto bigger_than_one = [&](const AlgNum& v) {
        if (real_signs(F_, v)[0] == 1) return false;
        AlgNum w = an_add(v, AlgNum(-1, 0, 1));
        if (w.is_zero()) return false;
        return real_signs(F_, w)[0] == 0;
    };
    AlgNum cands[4] = {u, an_neg(u), an_inv(F_, u), an_neg(an_inv(F_, u))};
    bool found = false;
    for (const auto& v : cands)
        if (bigger_than_one(v)) {
            eps_ = v;
            found = true;
            break;
        }
    if (!found) throw Error("unit normalization failed");
    have_eps_ = true;
    unit_norm_minus1_ = (an_norm(F_, eps_) == Rat(-1));
}

const AlgNum& ClassGroupCtx::fundamental_unit() const {
    if (!have_eps_) throw Error("fundamental unit only for real fields");
    return eps_;
}

Form ClassGroupCtx::narrow_key_of_form(const Form& f) const {
    auto it = cycle_of_.find(f);
    if (it == cycle_of_.end()) throw Error("form not in reduced set");
    return cycle_min_[static_cast<size_t>(it->second)];
}

Form ClassGroupCtx::narrow_key(const QuadIdeal& I) const {
    // Reduction multiplies by lambda; a norm-negative lambda flips the
    // orientation, which acts on forms as (a,b,c) -> (-a,b,-c).
    AlgNum lam;
    QuadIdeal J = reduce_ideal(I, &lam);
    Form f = form_of_ideal(F_, J);
    if (!F_.real()) return f;
    if (an_norm(F_, lam) < 0) f = Form{-f.a, f.b, -f.c};
    return narrow_key_of_form(f);
}

Form ClassGroupCtx::class_key(const QuadIdeal& I) const {
    QuadIdeal J = reduce_ideal(I, nullptr);
    Form f = form_of_ideal(F_, J);
    if (!F_.real()) return f;
    Form g{-f.a, f.b, -f.c};
    return std::min(narrow_key_of_form(f), narrow_key_of_form(g));
}

Form ClassGroupCtx::identity_key() const { return class_key(ideal_one(F_)); }

void ClassGroupCtx::build_group() {
    if (F_.real()) {
        kappa_key_ = narrow_key(ideal_of(F_, AlgNum(0, 1, 1)));
        Form idn = narrow_key(ideal_one(F_));
        bool kappa_trivial = (kappa_key_ == idn);
        if (unit_norm_minus1_ != kappa_trivial)
            throw Error("unit norm inconsistent with kappa class");
        h_ = kappa_trivial ? hp_ : hp_ / 2;
    }

    Form id = identity_key();
    dlog_.clear();
    dlog_[id] = {};
    if (h_ == 1) {
        rel_hnf_ = IntMatrix(0, 0);
        return;
    }

    std::vector<QuadIdeal> gen_ideals;
    std::map<Form, QuadIdeal> rep;

    auto rebuild_closure = [&]() {
        dlog_.clear();
        rep.clear();
        dlog_[id] = std::vector<Int>(gen_ideals.size(), Int(0));
        rep[id] = ideal_one(F_);
        std::vector<Form> queue = {id};
        while (!queue.empty()) {
            Form cur = queue.back();
            queue.pop_back();
            QuadIdeal curI = rep[cur];
            std::vector<Int> curv = dlog_[cur];
            for (size_t g = 0; g < gen_ideals.size(); ++g) {
                QuadIdeal nxt = ideal_mul(F_, curI, gen_ideals[g]);
                nxt = reduce_ideal(nxt, nullptr);
                nxt.content = 1;
                Form nk = class_key(nxt);
                if (!dlog_.count(nk)) {
                    std::vector<Int> nv = curv;
                    nv[g] += 1;
                    dlog_[nk] = nv;
                    rep[nk] = nxt;
                    queue.push_back(nk);
                }
            }
        }
    };

    Int p = 2;
    long guard = 3000;
    while (static_cast<long>(dlog_.size()) < h_ && guard-- > 0) {
        PrimeKind k = F_.kind_of(p);
        if (k != PrimeKind::Inert) {
            QuadIdeal P = decompose_prime(F_, p).first;
            Form kf = class_key(P);
            if (!dlog_.count(kf)) {
                gen_primes_.push_back(p);
                gen_ideals.push_back(P);
                rebuild_closure();
            }
        }
        mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    }
    if (static_cast<long>(dlog_.size()) != h_)
        throw Error("class group generation failed for d=" + F_.d.get_str());

    long s = static_cast<long>(gen_primes_.size());
    std::vector<std::vector<Int>> rels;
    for (const auto& [fk, vec] : dlog_) {
        const QuadIdeal& I = rep.at(fk);
        for (long g = 0; g < s; ++g) {
            QuadIdeal IP = ideal_mul(F_, I, gen_ideals[static_cast<size_t>(g)]);
            Form nk = class_key(IP);
            const std::vector<Int>& w = dlog_.at(nk);
            std::vector<Int> rel(static_cast<size_t>(s));
            for (long j = 0; j < s; ++j)
                rel[static_cast<size_t>(j)] =
                    vec[static_cast<size_t>(j)] - w[static_cast<size_t>(j)];
            rel[static_cast<size_t>(g)] += 1;
            rels.push_back(std::move(rel));
        }
    }
    IntMatrix R(s, static_cast<long>(rels.size()));
    for (long j = 0; j < R.cols; ++j)
        for (long i = 0; i < s; ++i)
            R.at(i, j) = rels[static_cast<size_t>(j)][static_cast<size_t>(i)];
    IntMatrix H = hnf(R);
    long nz = 0;
    for (long j = 0; j < H.cols; ++j) {
        bool z = true;
        for (long i = 0; i < s; ++i)
            if (H.at(i, j) != 0) z = false;
        if (!z) nz = j + 1;
    }
    rel_hnf_ = IntMatrix(s, nz);
    for (long j = 0; j < nz; ++j)
        for (long i = 0; i < s; ++i) rel_hnf_.at(i, j) = H.at(i, j);
    if (rel_hnf_.cols < s) throw Error("relation lattice rank deficient");
    Int det = 1;
    for (long i = 0; i < s; ++i) det *= rel_hnf_.at(i, i);
    if (abs(det) != h_) throw Error("relation lattice determinant mismatch");

    SnfResult snf = snf_integer(rel_hnf_);
    inv_factors_.clear();
    factor_reps_.clear();
    for (long i = 0; i < static_cast<long>(snf.diag.size()); ++i) {
        Int di = snf.diag[static_cast<size_t>(i)];
        if (di == 0) throw Error("class group cannot have free part");
        if (di == 1) continue;
        inv_factors_.push_back(di);
        QuadIdeal I = ideal_one(F_);
        for (long j = 0; j < s; ++j) {
            Int e = snf.left_inv.at(j, i);
            if (e != 0) {
                I = ideal_mul(F_, I, ideal_pow(F_, gen_ideals[static_cast<size_t>(j)], e));
                I = reduce_ideal(I, nullptr);
                I.content = 1;
            }
        }
        factor_reps_.push_back(I);
    }
    std::sort(inv_factors_.begin(), inv_factors_.end());
}

std::vector<Int> ClassGroupCtx::dlog(const QuadIdeal& I) const {
    Form k = class_key(I);
    auto it = dlog_.find(k);
    if (it == dlog_.end()) throw Error("class not in BFS table");
    std::vector<Int> v = it->second;
    v.resize(gen_primes_.size());
    return v;
}

std::optional<AlgNum> ClassGroupCtx::principal_generator(const QuadIdeal& I) const {
    Rat content = I.content;
    QuadIdeal Iprim = I;
    Iprim.content = 1;
    AlgNum tau;
    QuadIdeal J = reduce_ideal(Iprim, &tau);
    Rat extra = J.content;
    J.content = 1;

    struct Anchor {
        AlgNum gen;     // primitive-part generator of the anchor ideal
        QuadIdeal red;  // reduced anchor (content stripped)
        AlgNum mu0;
    };
    std::vector<Anchor> anchors;
    {
        AlgNum tau0;
        QuadIdeal Ored = reduce_ideal(ideal_one(F_), &tau0);
        Rat c0 = Ored.content;
        Ored.content = 1;
        if (!(c0 == Rat(1))) throw Error("unit ideal reduced with content");
        anchors.push_back({AlgNum(1, 0, 1), Ored, tau0});
        if (F_.real() && !unit_norm_minus1_) {
            AlgNum sd(0, 1, 1);
            QuadIdeal D = ideal_of(F_, sd);
            Rat cd = D.content;
            D.content = 1;
            AlgNum td;
            QuadIdeal Dred = reduce_ideal(D, &td);
            Rat cd2 = Dred.content;
            Dred.content = 1;
            Rat cc = cd * cd2;
            cc.canonicalize();
            // primitive part of (sqrt d) is (sqrt d)/cd; fold reduction content
            AlgNum g = an_mul(F_, sd, AlgNum(cc.get_den(), 0, cc.get_num()));
            anchors.push_back({g, Dred, td});
        }
    }

    const Int& d = F_.d;
    Int s = F_.real() ? isqrt(d) : Int(0);
    for (const auto& A : anchors) {
        QuadIdeal cur = A.red;
        AlgNum mu(1, 0, 1);
        long guard = 2000000;
        while (guard-- > 0) {
            if (cur.a == J.a && cur.b == J.b) {
                // J = mu * A.red,  A.red = A.mu0 * (A.gen),  J = tau/extra-ish * I
                AlgNum gen = an_mul(F_, mu, an_mul(F_, A.mu0, A.gen));
                gen = an_mul(F_, gen, an_inv(F_, tau));
                Rat cc = content * extra;
                cc.canonicalize();
                gen = an_mul(F_, gen, AlgNum(cc.get_num(), 0, cc.get_den()));
                QuadIdeal chk = ideal_of(F_, gen);
                if (ideal_eq(chk, I)) return gen;
                throw Error("principal generator verification failed");
            }
            if (!F_.real()) break;
            Int a = cur.a, b = cur.b;
            Int c = (b * b - d) / (4 * a);
            Int ac = abs(c);
            Int t = (s + b) % (2 * ac);
            if (t < 0) t += 2 * ac;
            Int bp = s - t;
            AlgNum m2(b, Int(-1), 2 * a);
            mu = an_mul(F_, mu, m2);
            cur = make_ideal(F_, ac, bp, Rat(1));
            if (cur.a == A.red.a && cur.b == A.red.b) break;
        }
    }
    return std::nullopt;
}

std::vector<Int> ClassGroupCtx::two_part_mod_dyadic() const {
    long s = static_cast<long>(gen_primes_.size());
    if (s == 0) return {};
    std::vector<std::vector<Int>> cols;
    for (long j = 0; j < rel_hnf_.cols; ++j) {
        std::vector<Int> col(static_cast<size_t>(s));
        for (long i = 0; i < s; ++i) col[static_cast<size_t>(i)] = rel_hnf_.at(i, j);
        cols.push_back(col);
    }
    Decomposition D = decompose_prime(F_, 2);
    std::vector<QuadIdeal> dy = {D.first};
    if (D.kind == PrimeKind::Split) dy.push_back(D.second);
    for (const auto& P : dy) cols.push_back(dlog(P));
    IntMatrix M(s, static_cast<long>(cols.size()));
    for (long j = 0; j < M.cols; ++j)
        for (long i = 0; i < s; ++i)
            M.at(i, j) = cols[static_cast<size_t>(j)][static_cast<size_t>(i)];
    SnfResult snf = snf_integer(M);
    std::vector<Int> out;
    for (const auto& di : snf.diag) {
        if (di == 0) throw Error("Cl/<P> acquired a free part");
        if (di == 1) continue;
        if (mpz_even_p(di.get_mpz_t())) out.push_back(pow2(v2(di)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

TwoUnitGroup two_unit_group(const QuadField& F, const ClassGroupCtx& cl) {
    TwoUnitGroup out;
    out.torsion_order = 2;
    if (F.d == -4) out.torsion_order = 4;
    if (F.d == -3) out.torsion_order = 6;

    auto push = [&](const std::string& label, const AlgNum& v) {
        SUnitElement e;
        e.label = label;
        e.value = v;
        e.signs = F.real() ? real_signs(F, v) : std::vector<int>{};
        out.gens.push_back(std::move(e));
    };

    if (F.real()) push("eps", cl.fundamental_unit());

    Decomposition D = decompose_prime(F, 2);
    if (D.kind == PrimeKind::Inert) {
        push("two", AlgNum(2, 0, 1));
    } else if (D.kind == PrimeKind::Ramified) {
        auto g = cl.principal_generator(D.first);
        if (g) push("dyadic1", *g);
        else push("two", AlgNum(2, 0, 1));
    } else {
        push("two", AlgNum(2, 0, 1));
        Int h = cl.h();
        Int ord = h;
        for (Int k = 1; k <= h; ++k) {
            if (!mpz_divisible_p(h.get_mpz_t(), k.get_mpz_t())) continue;
            if (cl.class_key(ideal_pow(F, D.first, k)) == cl.identity_key()) {
                ord = k;
                break;
            }
        }
        auto g = cl.principal_generator(ideal_pow(F, D.first, ord));
        if (!g) throw Error("split dyadic power should be principal");
        push("dyadic1", *g);
    }
    return out;
}

ClassRelationData class_relations(const QuadField& F, const ClassGroupCtx& cl) {
    ClassRelationData out;
    Decomposition D2 = decompose_prime(F, 2);
    std::vector<QuadIdeal> dyadic = {D2.first};
    if (D2.kind == PrimeKind::Split) dyadic.push_back(D2.second);
    long dd = static_cast<long>(dyadic.size());

    auto subgroup_size = [&](const std::vector<QuadIdeal>& gens) {
        std::set<Form> seen = {cl.identity_key()};
        std::vector<QuadIdeal> reps = {ideal_one(F)};
        for (size_t i = 0; i < reps.size(); ++i) {
            for (const auto& g : gens) {
                QuadIdeal n = ideal_mul(F, reps[i], g);
                n = cl.reduce_ideal(n, nullptr);
                n.content = 1;
                Form k = cl.class_key(n);
                if (!seen.count(k)) {
                    seen.insert(k);
                    reps.push_back(n);
                }
            }
        }
        return Int(static_cast<long>(seen.size()));
    };
    auto v2_of = [&](Int n) {
        long v = 0;
        while (mpz_even_p(n.get_mpz_t())) {
            n /= 2;
            ++v;
        }
        return v;
    };

    long target = v2_of(cl.h());
    std::vector<QuadIdeal> chosen = dyadic;
    long cur_v2 = v2_of(subgroup_size(chosen));
    Int p = 3;
    long guard = 1000;
    while (cur_v2 < target && guard-- > 0) {
        PrimeKind k = F.kind_of(p);
        if (k != PrimeKind::Inert) {
            QuadIdeal P = decompose_prime(F, p).first;
            std::vector<QuadIdeal> trial = chosen;
            trial.push_back(P);
            long v_after = v2_of(subgroup_size(trial));
            if (v_after > cur_v2) {
                chosen.push_back(P);
                out.class_primes.push_back(p);
                out.class_ideals.push_back(P);
                cur_v2 = v_after;
            }
        }
        mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    }
    if (cur_v2 != target) throw Error("class prime search failed");

    long s = static_cast<long>(out.class_primes.size());
    if (s == 0) return out;

    long gcount = static_cast<long>(cl.generator_primes().size());
    const IntMatrix& L = cl.relation_lattice();
    IntMatrix A(gcount, s + dd + L.cols);
    for (long j = 0; j < s; ++j) {
        std::vector<Int> v = cl.dlog(out.class_ideals[static_cast<size_t>(j)]);
        for (long i = 0; i < gcount; ++i) A.at(i, j) = v[static_cast<size_t>(i)];
    }
    for (long j = 0; j < dd; ++j) {
        std::vector<Int> v = cl.dlog(dyadic[static_cast<size_t>(j)]);
        for (long i = 0; i < gcount; ++i) A.at(i, s + j) = v[static_cast<size_t>(i)];
    }
    for (long j = 0; j < L.cols; ++j)
        for (long i = 0; i < gcount; ++i) A.at(i, s + dd + j) = -L.at(i, j);

    SnfResult snf = snf_integer(A);
    long rank = 0;
    for (const auto& di : snf.diag)
        if (di != 0) ++rank;
    std::vector<std::vector<Int>> ker;
    for (long j = rank; j < A.cols; ++j) {
        std::vector<Int> w(static_cast<size_t>(s + dd));
        bool nzcol = false;
        for (long i = 0; i < s + dd; ++i) {
            w[static_cast<size_t>(i)] = snf.right.at(i, j);
            if (w[static_cast<size_t>(i)] != 0) nzcol = true;
        }
        if (nzcol) ker.push_back(w);
    }
    IntMatrix K(s + dd, static_cast<long>(ker.size()));
    for (long j = 0; j < K.cols; ++j)
        for (long i = 0; i < s + dd; ++i)
            K.at(i, j) = ker[static_cast<size_t>(j)][static_cast<size_t>(i)];
    IntMatrix KH = hnf(K);
    for (long j = 0; j < KH.cols; ++j) {
        bool qsupport = false;
        for (long i = 0; i < s; ++i)
            if (KH.at(i, j) != 0) qsupport = true;
        if (!qsupport) continue;
        QuadIdeal I = ideal_one(F);
        for (long i = 0; i < s; ++i)
            if (KH.at(i, j) != 0)
                I = ideal_mul(F, I,
                              ideal_pow(F, out.class_ideals[static_cast<size_t>(i)], KH.at(i, j)));
        for (long i = 0; i < dd; ++i)
            if (KH.at(s + i, j) != 0)
                I = ideal_mul(F, I, ideal_pow(F, dyadic[static_cast<size_t>(i)], KH.at(s + i, j)));
        auto g = cl.principal_generator(I);
        if (!g) throw Error("relation ideal not principal");
        SUnitElement e;
        e.label = "rel" + std::to_string(static_cast<long>(out.relations.size()) + 1);
        e.value = *g;
        e.class_vals.resize(static_cast<size_t>(s));
        for (long i = 0; i < s; ++i) e.class_vals[static_cast<size_t>(i)] = KH.at(i, j);
        e.signs = F.real() ? real_signs(F, *g) : std::vector<int>{};
        out.relations.push_back(std::move(e));
    }
    if (static_cast<long>(out.relations.size()) != s)
        throw Error("expected one mixed relation per class prime");
    return out;
}

}  // namespace narrowlog
