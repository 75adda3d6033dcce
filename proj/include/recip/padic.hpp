#pragma once

// Exact arithmetic in W(F_{p^f}) modulo p^N, realized as (Z/p^N)[t]/(m(t))
// with m(t) lifting an irreducible polynomial of degree f over F_p.
// The Frobenius lift is precomputed by Hensel iteration at context build.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "recip/errors.hpp"

namespace recip {

using i64 = std::int64_t;

inline i64 mulmod(i64 a, i64 b, i64 m) {
    return static_cast<i64>((static_cast<__int128>(a) * b) % m);
}

inline i64 addmod(i64 a, i64 b, i64 m) {
    i64 s = a + b;
    if (s >= m) s -= m;
    return s;
}

inline i64 submod(i64 a, i64 b, i64 m) {
    i64 s = a - b;
    if (s < 0) s += m;
    return s;
}

inline i64 powmod(i64 a, i64 e, i64 m) {
    i64 r = 1 % m;
    a %= m;
    while (e > 0) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

inline i64 ipow(i64 b, int e) {
    i64 r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Inverse of a unit mod p^N by Newton lifting from the mod-p inverse.
inline i64 unit_inverse_mod(i64 a, i64 p, i64 pN) {
    a %= pN;
    if (a % p == 0) throw non_invertible("unit_inverse_mod: not a unit");
    i64 x = powmod(a % p, p - 2, p); // Fermat
    // x -> x(2 - ax) doubles precision per step
    for (i64 m = p; m < pN;) {
        m = (m > pN / m) ? pN : m * m;
        x = mulmod(x, submod(2 % m, mulmod(a % m, x % m, m), m), m);
    }
    return ((x % pN) + pN) % pN;
}

inline int val_p(i64 x, i64 p) {
    if (x == 0) return std::numeric_limits<int>::max() / 4;
    int v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

// v_p(n!) by Legendre's formula.
inline i64 factorial_valuation(i64 n, i64 p) {
    i64 v = 0;
    for (i64 q = p; q <= n; q *= p) {
        v += n / q;
        if (q > n / p) break;
    }
    return v;
}

class PadicContext;
using CtxPtr = std::shared_ptr<const PadicContext>;

class PadicContext : public std::enable_shared_from_this<PadicContext> {
  public:
    i64 p;
    int f;
    int N;
    i64 pN;
    std::vector<i64> modulus;    // degree f monic, coefficients mod pN
    std::vector<i64> frob_image; // Frobenius image of t, degree < f, mod pN

    static CtxPtr make(i64 p, int f, int N, std::vector<i64> modulus_lift = {});

    bool same(const PadicContext& o) const { return p == o.p && f == o.f && N == o.N && modulus == o.modulus; }

  private:
    PadicContext() = default;
};

class WittElement {
  public:
    CtxPtr ctx;
    std::vector<i64> c; // f coordinates mod p^N in the basis 1, t, ..., t^{f-1}

    WittElement() = default;
    WittElement(CtxPtr context, std::vector<i64> coords) : ctx(std::move(context)), c(std::move(coords)) {
        reduce();
    }
    static WittElement zero(CtxPtr context) { return WittElement(context, std::vector<i64>(context->f, 0)); }
    static WittElement one(CtxPtr context) {
        std::vector<i64> v(context->f, 0);
        v[0] = 1;
        return WittElement(context, v);
    }
    static WittElement from_int(CtxPtr context, i64 x) {
        std::vector<i64> v(context->f, 0);
        v[0] = ((x % context->pN) + context->pN) % context->pN;
        return WittElement(context, v);
    }

    bool is_zero() const {
        return std::all_of(c.begin(), c.end(), [](i64 x) { return x == 0; });
    }
    bool is_unit() const {
        return std::any_of(c.begin(), c.end(), [&](i64 x) { return x % ctx->p != 0; });
    }

    // p-valuation (min over coordinates); f is unramified so this is exact.
    int valuation() const {
        int v = ctx->N;
        for (i64 x : c) v = std::min(v, val_p(x, ctx->p));
        return v;
    }

    friend WittElement operator+(const WittElement& a, const WittElement& b) {
        check(a, b);
        std::vector<i64> r(a.c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = addmod(a.c[i], b.c[i], a.ctx->pN);
        return WittElement(a.ctx, std::move(r));
    }
    friend WittElement operator-(const WittElement& a, const WittElement& b) {
        check(a, b);
        std::vector<i64> r(a.c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = submod(a.c[i], b.c[i], a.ctx->pN);
        return WittElement(a.ctx, std::move(r));
    }
    WittElement operator-() const {
        std::vector<i64> r(c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = submod(0, c[i], ctx->pN);
        return WittElement(ctx, std::move(r));
    }
    friend WittElement operator*(const WittElement& a, const WittElement& b) {
        check(a, b);
        return a.poly_mul(b);
    }
    WittElement operator*(i64 s) const {
        s = ((s % ctx->pN) + ctx->pN) % ctx->pN;
        std::vector<i64> r(c.size());
        for (size_t i = 0; i < r.size(); ++i) r[i] = mulmod(c[i], s, ctx->pN);
        return WittElement(ctx, std::move(r));
    }
    bool operator==(const WittElement& o) const { return c == o.c; }

    WittElement pow(i64 e) const {
        WittElement r = one(ctx), b = *this;
        while (e > 0) {
            if (e & 1) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

    // Division by p^k: exact only if valuation >= k; result known mod p^{N-k}
    // but stored in the full-N context (upper digits are garbage beyond N-k).
    WittElement divide_by_p_pow_unchecked(int k) const {
        i64 q = ipow(ctx->p, k);
        std::vector<i64> r(c.size());
        for (size_t i = 0; i < r.size(); ++i) {
            if (c[i] % q != 0) throw integrality_failure("divide_by_p_pow: coordinate not divisible");
            r[i] = c[i] / q;
        }
        return WittElement(ctx, std::move(r));
    }

    WittElement inverse() const {
        if (!is_unit()) throw non_invertible("WittElement::inverse: not a unit");
        WittElement x = inverse_mod_p();
        // Newton: x <- x(2 - a x), precision doubles
        int prec = 1;
        while (prec < ctx->N) {
            x = x * (from_int(ctx, 2) - (*this) * x);
            prec *= 2;
        }
        return x;
    }

    WittElement frobenius() const {
        if (ctx->f == 1) return *this;
        return evaluate_poly_at(ctx->frob_image);
    }
    WittElement frobenius_iter(int k) const {
        WittElement r = *this;
        k = ((k % ctx->f) + ctx->f) % ctx->f;
        for (int i = 0; i < k; ++i) r = r.frobenius();
        return r;
    }

    // Sum of the f Frobenius conjugates; lands in Z/p^N.
    i64 trace_to_zp() const {
        WittElement s = *this, x = *this;
        for (int i = 1; i < ctx->f; ++i) {
            x = x.frobenius();
            s = s + x;
        }
        for (size_t i = 1; i < s.c.size(); ++i)
            if (s.c[i] != 0) throw error("trace_to_zp: trace not in prime subring");
        return s.c[0];
    }

    // Evaluate the polynomial with our coordinates at a ring element.
    WittElement evaluate_poly_at(const std::vector<i64>& img) const {
        WittElement x(ctx, img);
        WittElement r = from_int(ctx, c.empty() ? 0 : 0);
        // Horner
        for (int i = ctx->f - 1; i >= 0; --i) r = r * x + from_int(ctx, c[i]);
        return r;
    }

  private:
    static void check(const WittElement& a, const WittElement& b) {
        if (!a.ctx || !b.ctx || !a.ctx->same(*b.ctx)) throw spec_mismatch("WittElement: context mismatch");
    }
    void reduce() {
        for (i64& x : c) x = ((x % ctx->pN) + ctx->pN) % ctx->pN;
    }
    WittElement poly_mul(const WittElement& b) const;
    WittElement inverse_mod_p() const;
};

namespace detail {

// Multiply two coordinate vectors mod (p^N, modulus).
inline std::vector<i64> polymulmod(const std::vector<i64>& a, const std::vector<i64>& b,
                                   const std::vector<i64>& modulus, i64 pN) {
    int f = static_cast<int>(modulus.size()) - 1;
    std::vector<i64> prod(2 * f - 1, 0);
    for (int i = 0; i < f; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < f; ++j)
            prod[i + j] = addmod(prod[i + j], mulmod(a[i], b[j], pN), pN);
    }
    // reduce by monic modulus
    for (int d = 2 * f - 2; d >= f; --d) {
        i64 lead = prod[d];
        if (lead == 0) continue;
        prod[d] = 0;
        for (int j = 0; j < f; ++j)
            prod[d - f + j] = submod(prod[d - f + j], mulmod(lead, modulus[j], pN), pN);
    }
    prod.resize(f);
    return prod;
}

// Extended Euclid inverse in F_p[t]/(modulus mod p).
inline std::vector<i64> poly_inverse_mod_p(const std::vector<i64>& a, const std::vector<i64>& modulus, i64 p) {
    auto deg = [](const std::vector<i64>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i)
            if (v[i] != 0) return i;
        return -1;
    };
    auto trim = [&](std::vector<i64> v) {
        while (!v.empty() && v.back() == 0) v.pop_back();
        return v;
    };
    std::vector<i64> r0 = trim(modulus), r1 = trim(a);
    for (i64& x : r0) x = ((x % p) + p) % p;
    for (i64& x : r1) x = ((x % p) + p) % p;
    r1 = trim(r1);
    std::vector<i64> s0 = {}, s1 = {1};
    while (deg(r1) > 0 || (deg(r1) == 0 && deg(r0) >= 0)) {
        if (deg(r1) < 0) throw non_invertible("poly_inverse_mod_p: gcd not constant");
        if (deg(r1) == 0) break;
        // divide r0 by r1
        std::vector<i64> q(std::max<int>(0, deg(r0) - deg(r1) + 1), 0);
        std::vector<i64> rem = r0;
        i64 linv = powmod(r1[deg(r1)], p - 2, p);
        for (int d = deg(rem); d >= deg(r1); --d) {
            if (d >= static_cast<int>(rem.size()) || rem[d] == 0) continue;
            i64 coef = mulmod(rem[d], linv, p);
            q[d - deg(r1)] = coef;
            for (int j = 0; j <= deg(r1); ++j)
                rem[d - deg(r1) + j] = submod(rem[d - deg(r1) + j], mulmod(coef, r1[j], p), p);
        }
        rem = trim(rem);
        // s_new = s0 - q*s1
        std::vector<i64> snew(std::max(s0.size(), q.size() + s1.size()), 0);
        for (size_t i = 0; i < s0.size(); ++i) snew[i] = s0[i];
        for (size_t i = 0; i < q.size(); ++i)
            for (size_t j = 0; j < s1.size(); ++j)
                snew[i + j] = submod(snew[i + j], mulmod(q[i], s1[j], p), p);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = trim(snew);
    }
    if (deg(r1) != 0) throw non_invertible("poly_inverse_mod_p: not invertible");
    i64 cinv = powmod(r1[0], p - 2, p);
    for (i64& x : s1) x = mulmod(x, cinv, p);
    return s1;
}

} // namespace detail

inline WittElement WittElement::poly_mul(const WittElement& b) const {
    if (ctx->f == 1) {
        return WittElement(ctx, {mulmod(c[0], b.c[0], ctx->pN)});
    }
    return WittElement(ctx, detail::polymulmod(c, b.c, ctx->modulus, ctx->pN));
}

inline WittElement WittElement::inverse_mod_p() const {
    if (ctx->f == 1) return from_int(ctx, powmod(c[0] % ctx->p, ctx->p - 2, ctx->p));
    auto s = detail::poly_inverse_mod_p(c, ctx->modulus, ctx->p);
    s.resize(ctx->f, 0);
    return WittElement(ctx, std::move(s));
}

inline CtxPtr PadicContext::make(i64 p, int f, int N, std::vector<i64> modulus_lift) {
    if (p < 3) throw spec_mismatch("PadicContext: p must be an odd prime >= 3");
    for (i64 d = 2; d * d <= p; ++d)
        if (p % d == 0) throw spec_mismatch("PadicContext: p not prime");
    if (f < 1 || N < 1) throw spec_mismatch("PadicContext: need f >= 1 and N >= 1");
    auto ctx = std::shared_ptr<PadicContext>(new PadicContext());
    ctx->p = p;
    ctx->f = f;
    ctx->N = N;
    i64 pN = 1;
    for (int i = 0; i < N; ++i) {
        if (pN > (std::numeric_limits<i64>::max() / p) / 4) throw spec_mismatch("PadicContext: p^N too large");
        pN *= p;
    }
    ctx->pN = pN;

    if (modulus_lift.empty()) {
        if (f == 1) {
            modulus_lift = {0, 1}; // t
        } else {
            // search a monic irreducible of degree f over F_p:
            // irreducible iff t^{p^f} = t mod (m, p) and gcd conditions; for the
            // small f used here, test by checking t^{p^d} != t for proper d | f.
            std::vector<i64> m(f + 1, 0);
            m[f] = 1;
            bool found = false;
            for (i64 tail = 0; tail < ipow(p, f) && !found; ++tail) {
                i64 v = tail;
                for (int i = 0; i < f; ++i) {
                    m[i] = v % p;
                    v /= p;
                }
                auto frob_pow = [&](int iters) {
                    // compute t^{p^iters} mod (m, p)
                    std::vector<i64> x(f, 0);
                    if (f > 1)
                        x[1] = 1;
                    else
                        x[0] = 0;
                    for (int it = 0; it < iters; ++it) {
                        // x <- x^p mod (m, p)
                        std::vector<i64> r(f, 0);
                        r[0] = 1;
                        std::vector<i64> b = x;
                        i64 e = p;
                        while (e > 0) {
                            if (e & 1) r = detail::polymulmod(r, b, m, p);
                            b = detail::polymulmod(b, b, m, p);
                            e >>= 1;
                        }
                        x = r;
                    }
                    return x;
                };
                std::vector<i64> t_poly(f, 0);
                t_poly[1] = 1;
                if (frob_pow(f) != t_poly) continue;
                bool proper_fixed = false;
                for (int d = 1; d < f; ++d) {
                    if (f % d != 0) continue;
                    if (frob_pow(d) == t_poly) {
                        proper_fixed = true;
                        break;
                    }
                }
                if (!proper_fixed) found = true;
            }
            if (!found) throw error("PadicContext: no irreducible polynomial found");
            modulus_lift = m;
        }
    }
    if (static_cast<int>(modulus_lift.size()) != f + 1) throw spec_mismatch("PadicContext: modulus degree != f");
    for (i64& x : modulus_lift) x = ((x % pN) + pN) % pN;
    if (modulus_lift[f] != 1) throw spec_mismatch("PadicContext: modulus must be monic");
    if (f > 1) {
        // the reduction mod p must be irreducible: t^{p^f} = t and
        // t^{p^d} != t for every proper divisor d of f
        auto frob_pow = [&](int iters) {
            std::vector<i64> x(f, 0);
            x[1] = 1;
            for (int it = 0; it < iters; ++it) {
                std::vector<i64> r(f, 0);
                r[0] = 1;
                std::vector<i64> b = x;
                i64 e = p;
                while (e > 0) {
                    if (e & 1) r = detail::polymulmod(r, b, modulus_lift, p);
                    b = detail::polymulmod(b, b, modulus_lift, p);
                    e >>= 1;
                }
                x = r;
            }
            return x;
        };
        std::vector<i64> t_poly(f, 0);
        t_poly[1] = 1;
        if (frob_pow(f) != t_poly) throw spec_mismatch("PadicContext: modulus not irreducible mod p");
        for (int d = 1; d < f; ++d)
            if (f % d == 0 && frob_pow(d) == t_poly)
                throw spec_mismatch("PadicContext: modulus not irreducible mod p");
    }
    ctx->modulus = modulus_lift;

    // Frobenius image of t: the root of modulus congruent to t^p mod p,
    // Hensel-lifted to mod p^N.
    if (f == 1) {
        ctx->frob_image = {0};
    } else {
        // start: r = t^p in F_p[t]/(m)
        std::vector<i64> r(f, 0);
        r[1] = 1;
        {
            std::vector<i64> acc(f, 0);
            acc[0] = 1;
            std::vector<i64> b = r;
            i64 e = p;
            while (e > 0) {
                if (e & 1) acc = detail::polymulmod(acc, b, ctx->modulus, p);
                b = detail::polymulmod(b, b, ctx->modulus, p);
                e >>= 1;
            }
            r = acc;
        }
        // Newton-lift r to a root of modulus mod p^N using full-ring arithmetic
        auto eval = [&](const std::vector<i64>& poly, const std::vector<i64>& at) {
            // Horner over coordinate vectors
            std::vector<i64> acc(f, 0);
            for (int i = static_cast<int>(poly.size()) - 1; i >= 0; --i) {
                acc = detail::polymulmod(acc, at, ctx->modulus, pN);
                acc[0] = addmod(acc[0], poly[i] % pN, pN);
            }
            return acc;
        };
        std::vector<i64> deriv(f, 0);
        for (int i = 1; i <= f; ++i) deriv[i - 1] = mulmod(ctx->modulus[i] % pN, i % pN, pN);
        WittElement rx(ctx, r);
        for (int prec = 1; prec < N; prec *= 2) {
            WittElement fx(ctx, eval(ctx->modulus, rx.c));
            WittElement dx(ctx, eval(std::vector<i64>(deriv.begin(), deriv.end()), rx.c));
            rx = rx - fx * dx.inverse();
        }
        ctx->frob_image = rx.c;
    }
    return ctx;
}

// Teichmuller lift: the unique x with x^{p^f} = x lifting the residue.
inline WittElement teichmuller(CtxPtr ctx, const WittElement& residue_lift) {
    WittElement x = residue_lift;
    i64 q = ipow(ctx->p, ctx->f);
    for (int i = 0; i <= ctx->N + 1; ++i) x = x.pow(q);
    return x;
}
inline WittElement teichmuller(CtxPtr ctx, i64 residue) {
    return teichmuller(ctx, WittElement::from_int(ctx, residue));
}

// -------- rational coefficients: p^val * unit with a tracked precision floor ----------

constexpr int APREC_INF = 1 << 20;

class RationalCoefficient {
  public:
    CtxPtr ctx;
    WittElement u; // unit part (unit or the tagged zero)
    int val = APREC_INF;
    int aprec = APREC_INF; // value known modulo p^{aprec}

    RationalCoefficient() = default;

    static RationalCoefficient zero(CtxPtr ctx, int aprec = APREC_INF) {
        RationalCoefficient r;
        r.ctx = ctx;
        r.u = WittElement::zero(ctx);
        r.val = APREC_INF;
        r.aprec = aprec;
        return r;
    }

    static RationalCoefficient from_witt(const WittElement& x, int aprec_in = -1) {
        RationalCoefficient r;
        r.ctx = x.ctx;
        int A = (aprec_in < 0) ? x.ctx->N : aprec_in;
        int v = x.valuation();
        if (v >= A) return zero(x.ctx, A);
        r.u = x.divide_by_p_pow_unchecked(v);
        r.val = v;
        r.aprec = A;
        return r;
    }
    static RationalCoefficient from_int(CtxPtr ctx, i64 x) { return from_witt(WittElement::from_int(ctx, x)); }

    // exact rational a/b with b a p-unit
    static RationalCoefficient from_fraction(CtxPtr ctx, i64 a, i64 b) {
        if (b % ctx->p == 0) {
            int k = val_p(b, ctx->p);
            i64 q = ipow(ctx->p, k);
            return from_fraction(ctx, a, b / q).divided_by_p_pow(k);
        }
        WittElement num = WittElement::from_int(ctx, a);
        WittElement den = WittElement::from_int(ctx, b);
        return from_witt(num * den.inverse());
    }

    bool is_zero() const { return val >= aprec || val >= APREC_INF / 2; }
    bool is_integral() const { return is_zero() || val >= 0; }

    RationalCoefficient divided_by_p_pow(int k) const {
        RationalCoefficient r = *this;
        if (!r.is_zero()) r.val -= k;
        r.aprec -= k;
        return r;
    }
    RationalCoefficient times_p_pow(int k) const { return divided_by_p_pow(-k); }

    friend RationalCoefficient operator*(const RationalCoefficient& a, const RationalCoefficient& b) {
        if (a.is_zero() || b.is_zero()) {
            int ap = std::min(a.is_zero() ? a.aprec + b.min_val() : a.aprec + b.val,
                              b.is_zero() ? b.aprec + a.min_val() : b.aprec + a.val);
            return zero(a.ctx, std::min(ap, APREC_INF));
        }
        RationalCoefficient r;
        r.ctx = a.ctx;
        r.u = a.u * b.u;
        r.val = a.val + b.val;
        r.aprec = std::min(a.aprec + b.val, b.aprec + a.val);
        r.renormalize_unit();
        return r;
    }

    friend RationalCoefficient operator+(const RationalCoefficient& a, const RationalCoefficient& b) {
        int A = std::min(a.aprec, b.aprec);
        if (a.is_zero() && b.is_zero()) return zero(a.ctx, A);
        if (a.is_zero()) return b.with_aprec(A);
        if (b.is_zero()) return a.with_aprec(A);
        CtxPtr ctx = a.ctx;
        int vmin = std::min(a.val, b.val);
        // digits representable: both known mod p^A; sum = p^vmin * (...)
        int digits = A - vmin;
        if (digits <= 0) return zero(ctx, A);
        if (digits > ctx->N) digits = ctx->N; // storage limit; aprec shrinks accordingly
        i64 pd = ipow(ctx->p, digits);
        std::vector<i64> coords(ctx->f, 0);
        for (int i = 0; i < ctx->f; ++i) {
            i64 xa = (a.val - vmin < digits) ? mulmod(a.u.c[i] % pd, ipow(ctx->p, a.val - vmin) % pd, pd) : 0;
            i64 xb = (b.val - vmin < digits) ? mulmod(b.u.c[i] % pd, ipow(ctx->p, b.val - vmin) % pd, pd) : 0;
            coords[i] = addmod(xa, xb, pd);
        }
        int v2 = digits;
        for (i64 x : coords) v2 = std::min(v2, val_p(x, ctx->p));
        int newA = std::min(A, vmin + digits);
        if (v2 >= digits) return zero(ctx, newA);
        i64 q = ipow(ctx->p, v2);
        for (i64& x : coords) x = (x / q) % ctx->pN;
        RationalCoefficient r;
        r.ctx = ctx;
        r.u = WittElement(ctx, coords);
        r.val = vmin + v2;
        r.aprec = newA;
        return r;
    }
    friend RationalCoefficient operator-(const RationalCoefficient& a, const RationalCoefficient& b) {
        return a + b.negated();
    }
    RationalCoefficient negated() const {
        RationalCoefficient r = *this;
        if (!r.is_zero()) r.u = -r.u;
        return r;
    }
    RationalCoefficient operator-() const { return negated(); }
    RationalCoefficient inverse() const {
        if (is_zero()) throw non_invertible("RationalCoefficient::inverse of zero");
        RationalCoefficient r;
        r.ctx = ctx;
        r.u = u.inverse();
        r.val = -val;
        r.aprec = aprec - 2 * val;
        return r;
    }
    RationalCoefficient frobenius() const {
        RationalCoefficient r = *this;
        if (!r.is_zero()) r.u = r.u.frobenius();
        return r;
    }

    // reduce to a WittElement mod p^N; requires integrality
    WittElement to_witt() const {
        if (is_zero()) return WittElement::zero(ctx);
        if (val < 0) throw integrality_failure("RationalCoefficient::to_witt: negative valuation");
        i64 q = ipow(ctx->p, std::min(val, ctx->N));
        std::vector<i64> coords(ctx->f);
        for (int i = 0; i < ctx->f; ++i) coords[i] = mulmod(u.c[i], q % ctx->pN, ctx->pN);
        return WittElement(ctx, coords);
    }

    RationalCoefficient with_aprec(int A) const {
        RationalCoefficient r = *this;
        r.aprec = std::min(r.aprec, A);
        if (r.val >= r.aprec) return zero(ctx, r.aprec);
        return r;
    }

    // true if a and b agree modulo p^k
    static bool equal_mod(const RationalCoefficient& a, const RationalCoefficient& b, int k) {
        RationalCoefficient d = a - b;
        return d.is_zero() || d.val >= k;
    }

  private:
    int min_val() const { return is_zero() ? aprec : val; }
    void renormalize_unit() {
        int v = u.valuation();
        if (v > 0) {
            // can happen when the stored digits of the factors cancel
            if (v >= ctx->N) {
                *this = zero(ctx, aprec);
                return;
            }
            u = u.divide_by_p_pow_unchecked(v);
            val += v;
            if (val >= aprec) *this = zero(ctx, aprec);
        }
    }
};

// binom(u, n) for an exact integer u, reported modulo p^{N' - v_p(n!)}.
struct BinomialResult {
    i64 value; // representative mod p^{precision}
    int precision;
};

inline BinomialResult padic_binomial(i64 u, i64 n, i64 p, int Nprime) {
    i64 vfac = factorial_valuation(n, p);
    if (Nprime <= vfac) throw precision_exhausted("padic_binomial: N' <= v_p(n!)");
    int outprec = static_cast<int>(Nprime - vfac);
    // work modulo p^{outprec + vfac} = p^{N'}
    i64 mod = 1;
    for (int i = 0; i < Nprime; ++i) {
        if (mod > std::numeric_limits<i64>::max() / p / 2) throw precision_exhausted("padic_binomial: modulus too large");
        mod *= p;
    }
    i64 num = 1 % mod;
    i64 vnum = 0;
    i64 uu = ((u % mod) + mod) % mod;
    for (i64 i = 0; i < n; ++i) {
        i64 factor = submod(uu, i % mod, mod);
        int v = val_p(factor == 0 ? 0 : factor, p);
        if (factor == 0) {
            // factor divisible by p^{N'}; valuation at least N'
            vnum += Nprime;
            continue;
        }
        vnum += v;
        num = mulmod(num, factor / ipow(p, v), mod);
    }
    // denominator n! = p^{vfac} * unit
    i64 den_unit = 1 % mod;
    for (i64 i = 1; i <= n; ++i) {
        i64 x = i;
        while (x % p == 0) x /= p;
        den_unit = mulmod(den_unit, x % mod, mod);
    }
    if (vnum < vfac) throw integrality_failure("padic_binomial: numerator valuation below v_p(n!)");
    i64 shift = vnum - vfac;
    i64 outmod = ipow(p, outprec);
    i64 r = mulmod(num % outmod, unit_inverse_mod(den_unit % outmod, p, outmod), outmod);
    if (shift >= outprec)
        r = 0;
    else
        r = mulmod(r, ipow(p, static_cast<int>(shift)) % outmod, outmod);
    return {r, outprec};
}

} // namespace recip
