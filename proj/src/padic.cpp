#include "narrowlog/padic.hpp"

#include <ostream>
#include <sstream>

#include "narrowlog/errors.hpp"

namespace narrowlog {

Padic Padic::from_int(const Int& n, long rel) {
    if (n == 0) return zero(rel);
    long v = v2(n);
    Int u = n >> static_cast<unsigned long>(v);
    return make(v, u, rel);
}

Padic Padic::from_ratio2(const Int& n, long denexp, long rel) {
    Padic r = from_int(n, rel);
    return r.shift(-denexp);
}

Padic Padic::zero(long abs_prec) {
    Padic z;
    z.zero_ = true;
    z.val_ = abs_prec;
    z.rel_ = 0;
    return z;
}

Padic Padic::make(long val, const Int& unit, long rel) {
    if (rel <= 0) return zero(val);
    Int u = mod_pow2(unit, rel);
    if (u == 0) throw ZeroInput("Padic::make with even-to-precision unit");
    if (mpz_even_p(u.get_mpz_t())) {
        // Not normalized: renormalize, losing relative precision.
        long s = v2(u);
        if (s >= rel) return zero(val + rel);
        return make(val + s, u >> static_cast<unsigned long>(s), rel - s);
    }
    Padic p;
    p.zero_ = false;
    p.val_ = val;
    p.unit_ = u;
    p.rel_ = rel;
    return p;
}

long Padic::val() const {
    if (zero_) throw ZeroInput("val() of zero Padic");
    return val_;
}

const Int& Padic::unit() const {
    if (zero_) throw ZeroInput("unit() of zero Padic");
    return unit_;
}

Padic Padic::operator-() const {
    if (zero_) return *this;
    return make(val_, pow2(rel_) - unit_, rel_);
}

Padic Padic::operator+(const Padic& o) const {
    if (zero_ && o.zero_) return zero(std::min(val_, o.val_));
    if (zero_) {
        // Known term plus zero-to-precision: result known to abs prec min.
        if (val_ >= o.abs_prec()) return o;
        if (val_ <= o.val_) return zero(val_);
        return make(o.val_, o.unit_, val_ - o.val_);
    }
    if (o.zero_) return o + *this;
    long abs = std::min(abs_prec(), o.abs_prec());
    long v = std::min(val_, o.val_);
    if (abs <= v) return zero(abs);
    Int s = (unit_ << static_cast<unsigned long>(val_ - v)) +
            (o.unit_ << static_cast<unsigned long>(o.val_ - v));
    s = mod_pow2(s, abs - v);
    if (s == 0) return zero(abs);
    long t = v2(s);
    if (v + t >= abs) return zero(abs);
    return make(v + t, s >> static_cast<unsigned long>(t), abs - v - t);
}

Padic Padic::operator-(const Padic& o) const { return *this + (-o); }

Padic Padic::operator*(const Padic& o) const {
    if (zero_ || o.zero_) {
        // val of zero flag = abs precision; product vanishes to the sum of
        // the zero's abs prec and the other's valuation (conservative).
        if (zero_ && o.zero_) return zero(val_ + o.val_);
        const Padic& z = zero_ ? *this : o;
        const Padic& y = zero_ ? o : *this;
        return zero(z.val_ + y.val_);
    }
    long rel = std::min(rel_, o.rel_);
    return make(val_ + o.val_, mod_pow2(unit_ * o.unit_, rel), rel);
}

Padic Padic::operator/(const Padic& o) const {
    if (o.zero_) throw ZeroInput("division by zero-to-precision Padic");
    if (zero_) return zero(val_ - o.val_);
    long rel = std::min(rel_, o.rel_);
    Int inv = inv_mod_pow2(o.unit_, rel);
    return make(val_ - o.val_, mod_pow2(unit_ * inv, rel), rel);
}

Padic Padic::pow(const Int& k) const {
    if (k == 0) return from_int(1, rel_);
    if (zero_) {
        if (k < 0) throw ZeroInput("negative power of zero Padic");
        return zero(val_);  // conservative
    }
    Int ka = abs(k);
    Padic base = *this;
    Padic acc = from_int(1, rel_);
    for (long i = static_cast<long>(mpz_sizeinbase(ka.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        acc = acc * acc;
        if (mpz_tstbit(ka.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = acc * base;
    }
    if (k < 0) return from_int(1, rel_) / acc;
    return acc;
}

Padic Padic::shift(long k) const {
    if (zero_) return zero(val_ + k);
    return make(val_ + k, unit_, rel_);
}

Padic Padic::with_rel(long r) const {
    if (zero_) return *this;
    if (r >= rel_) return *this;
    return make(val_, mod_pow2(unit_, r), r);
}

Int Padic::residue(long e) const {
    if (zero_) {
        if (val_ < e) throw PrecisionExhausted("residue: zero known only mod 2^" +
                                               std::to_string(val_));
        return 0;
    }
    if (val_ < 0) throw PrecisionExhausted("residue of non-integral 2-adic");
    if (abs_prec() < e) throw PrecisionExhausted("residue: abs precision too small");
    if (val_ >= e) return 0;
    return mod_pow2(unit_ << static_cast<unsigned long>(val_), e);
}

std::string Padic::str() const {
    std::ostringstream os;
    if (zero_) {
        os << "O(2^" << val_ << ")";
    } else {
        os << unit_.get_str() << "*2^" << val_ << " + O(2^" << abs_prec() << ")";
    }
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Padic& x) { return os << x.str(); }

namespace {

// log(1+y) for v2(y) >= 3, result mod 2^prec (absolute), returned as Int
// residue together with its interpretation as Padic.
Padic log_one_plus(const Int& y0, long prec) {
    long guard = 8;
    long w = prec + guard;
    Int y = mod_pow2(y0, w);
    if (y == 0) return Padic::zero(prec);
    Int term = 1;  // y^k accumulator
    Int acc = 0;
    Int yk = 1;
    for (long k = 1;; ++k) {
        // v(y^k/k) >= 3k - log2(k); stop once the bound clears w.
        long lg = 0;
        while ((1L << lg) < k) ++lg;
        if (3 * k - lg >= w) break;
        yk = mod_pow2(yk * y, w + lg);
        Int t = yk;
        long kv = v2(Int(k));
        Int kodd = Int(k) >> static_cast<unsigned long>(kv);
        if (t != 0) {
            // divide by 2^kv exactly: t is divisible since v(y^k) >= 3k > kv
            t >>= static_cast<unsigned long>(kv);
            t = t * inv_mod_pow2(kodd, w);
            if (k % 2 == 0) t = -t;
            acc += t;
            acc = mod_pow2(acc, w);
        }
    }
    acc = mod_pow2(acc, prec);
    if (acc == 0) return Padic::zero(prec);
    long v = v2(acc);
    return Padic::make(v, acc >> static_cast<unsigned long>(v), prec - v);
}

}  // namespace

Padic iwasawa_log(const Padic& x) {
    if (x.is_zero()) throw ZeroInput("iwasawa_log of zero");
    // Log(2^v u) = Log u = (1/2) log(u^2), u^2 in 1 + 8 Z_2.
    long rel = x.rel_prec();
    if (rel < 8) throw PrecisionExhausted("iwasawa_log needs relative precision >= 8");
    Int u = x.unit();
    Int usq = mod_pow2(u * u, rel);
    Padic l = log_one_plus(usq - 1, rel);
    return l.shift(-1);
}

Padic iwasawa_log_int(const Int& n, long rel) {
    if (n == 0) throw ZeroInput("iwasawa_log_int of zero");
    return iwasawa_log(Padic::from_int(abs(n), rel));
}

Padic iwasawa_log_rat(const Int& num, const Int& den, long rel) {
    return iwasawa_log_int(num, rel) - iwasawa_log_int(den, rel);
}

namespace {
Padic eval_poly(const std::vector<Int>& f, const Padic& x) {
    Padic acc = Padic::zero(x.abs_prec() + 64);
    for (auto it = f.rbegin(); it != f.rend(); ++it)
        acc = acc * x + Padic::from_int(*it, x.rel_prec());
    return acc;
}
}  // namespace

Padic hensel_root(const std::vector<Int>& f, const Padic& x0, long rel) {
    std::vector<Int> df;
    for (size_t i = 1; i < f.size(); ++i) df.push_back(f[i] * static_cast<long>(i));
    Padic x = x0.with_rel(rel);
    if (x.is_zero()) x = Padic::zero(rel);
    Padic fx = eval_poly(f, x);
    Padic dfx = eval_poly(df, x);
    if (dfx.is_zero()) throw NotLiftable("f'(x0) zero to precision");
    long vf = fx.is_zero() ? fx.abs_prec() : fx.val();
    if (vf <= 2 * dfx.val()) throw NotLiftable("v(f(x0)) <= 2 v(f'(x0))");
    for (int iter = 0; iter < 200; ++iter) {
        fx = eval_poly(f, x);
        if (fx.is_zero() && fx.abs_prec() >= x.abs_prec()) break;
        dfx = eval_poly(df, x);
        Padic nx = x - fx / dfx;
        if (!nx.is_zero() && !x.is_zero() && nx.val() == x.val() &&
            (nx - x).is_zero() && (nx - x).abs_prec() >= x.abs_prec())
            break;
        x = nx;
    }
    return x;
}

Padic padic_sqrt(const Padic& x) {
    if (x.is_zero()) throw ZeroInput("padic_sqrt of zero");
    if (x.val() % 2 != 0) throw NotLiftable("sqrt: odd valuation");
    Int u = x.unit();
    if (mod_pow2(u, 3) != 1) throw NotLiftable("sqrt: unit not 1 mod 8");
    long rel = x.rel_prec();
    // Newton on r^2 = u: r_{k+1} = (r + u/r)/2, starting at 1.
    Int r = 1;
    long known = 2;  // r correct mod 2^{known+1}-ish; iterate to full precision
    while (known < rel + 2) {
        long nk = std::min(2 * known, rel + 2);
        Int m = pow2(nk + 1);
        Int rinv;
        mpz_invert(rinv.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
        Int nr = (r + mod_pow2(u, nk + 1) * rinv) % m;
        if (mpz_odd_p(nr.get_mpz_t())) nr += m;  // make even before halving
        nr >>= 1;
        r = mod_pow2(nr, nk);
        known = nk;
    }
    r = mod_pow2(r, rel);
    if (mod_pow2(r, 2) == 3) r = mod_pow2(pow2(rel) - r, rel);
    Padic root = Padic::make(x.val() / 2, r, rel - 1);
    return root;
}

}  // namespace narrowlog
