#pragma once

// Operators on truncated series: the Frobenius and group actions, logarithms,
// the Coleman functional, Laurent inversion (p-adic and belt-graded),
// reversion, and the valuation-belt membership check.

#include "recip/series.hpp"

namespace recip {

// binom(n, k) as an exact integer mod p^N, n any integer (possibly negative).
inline WittElement integer_binomial(CtxPtr ctx, i64 n, int k) {
    if (k == 0) return WittElement::one(ctx);
    int extra = static_cast<int>(factorial_valuation(k, ctx->p));
    auto b = padic_binomial(n, k, ctx->p, ctx->N + extra);
    i64 v = b.value % ctx->pN;
    return WittElement::from_int(ctx, v);
}

// (1 + var)^n truncated to the ring caps; n may be negative.
template <class C>
SeriesT<C> one_plus_var_pow(RingPtr ring, char name, i64 n) {
    int i = ring->index_of(name);
    SeriesT<C> s(ring);
    for (int k = 0; k < ring->var[i].cap; ++k) {
        WittElement b = integer_binomial(ring->ctx, n, k);
        if (b.is_zero()) {
            if (n >= 0 && k > n) break;
            continue;
        }
        Exp e;
        e.set(i, k);
        if constexpr (std::is_same_v<C, WittElement>)
            s.add_term(e, b);
        else
            s.add_term(e, RationalCoefficient::from_witt(b));
    }
    if (n < 0 || n >= ring->var[i].cap) s.unc.cap[i] = std::min(s.unc.cap[i], ring->var[i].cap);
    return s;
}

namespace detail_ops {

inline WittElement unit_coeff_inverse(const WittElement& c) { return c.inverse(); }
inline RationalCoefficient unit_coeff_inverse(const RationalCoefficient& c) { return c.inverse(); }

template <class C>
SeriesT<C> invert_laurent_impl(const SeriesT<C>& s);

// map coefficients and raise X-part to powers of a fixed image, Y to monomial p-th powers
template <class C>
SeriesT<C> frobenius_substitute(const SeriesT<C>& s) {
    RingPtr ring = s.ring;
    i64 p = ring->ctx->p;
    SeriesT<C> out(ring);
    out.unc = s.unc;

    // per-variable handling
    bool hasX = false, hasY = false;
    for (int i = 0; i < ring->nvars; ++i) {
        if (ring->var[i].name == 'X') hasX = true;
        if (ring->var[i].name == 'Y') hasY = true;
    }
    SeriesT<C> ximg(ring), ximg_inv(ring);
    bool need_xinv = false;
    if (hasX) {
        ximg = one_plus_var_pow<C>(ring, 'X', p) - SeriesT<C>::constant(ring, 1);
        int xi = ring->index_of('X');
        for (const auto& [e, c] : s.terms)
            if (e.get(xi) < 0) need_xinv = true;
        if (need_xinv) ximg_inv = invert_laurent_impl(ximg);
    }
    std::map<int, SeriesT<C>> xpow;
    xpow[0] = SeriesT<C>::constant(ring, 1);
    std::function<const SeriesT<C>&(int)> get_xpow = [&](int n) -> const SeriesT<C>& {
        auto it = xpow.find(n);
        if (it != xpow.end()) return it->second;
        if (n > 0) {
            const SeriesT<C>& prev = get_xpow(n - 1);
            return xpow.emplace(n, prev * ximg).first->second;
        }
        const SeriesT<C>& prev = get_xpow(n + 1);
        return xpow.emplace(n, prev * ximg_inv).first->second;
    };

    for (const auto& [e, c] : s.terms) {
        C fc = coeff::frob(c);
        if (!hasX) {
            Exp e2 = e;
            for (int i = 0; i < ring->nvars; ++i) e2.set(i, e.get(i) * static_cast<int>(p));
            bool drop = false;
            for (int i = 0; i < ring->nvars; ++i) {
                if (e2.get(i) >= ring->var[i].cap) {
                    out.unc.cap[i] = std::min(out.unc.cap[i], ring->var[i].cap);
                    drop = true;
                } else if (e2.get(i) < ring->var[i].window_low) {
                    out.unc.win[i] = std::max(out.unc.win[i], ring->var[i].window_low);
                    drop = true;
                }
            }
            if (!drop) out.add_term(e2, fc);
            continue;
        }
        int xi = ring->index_of('X');
        SeriesT<C> term = get_xpow(e.get(xi)).scaled(fc);
        if (ring->nvars == 2) {
            int yi = 1 - xi;
            long long ny = static_cast<long long>(e.get(yi)) * p;
            if (ny >= ring->var[yi].cap) {
                out.unc.cap[yi] = std::min(out.unc.cap[yi], ring->var[yi].cap);
                continue;
            }
            if (ny < ring->var[yi].window_low) {
                out.unc.win[yi] = std::max(out.unc.win[yi], ring->var[yi].window_low);
                continue;
            }
            term = term.shifted(ring->var[yi].name, static_cast<int>(ny - 0));
        }
        out = out + term;
    }
    return out;
}

} // namespace detail_ops

// phi: coefficient Frobenius, X -> (1+X)^p - 1, Y -> Y^p.
template <class C>
SeriesT<C> phi_series(const SeriesT<C>& s) {
    return detail_ops::frobenius_substitute(s);
}

// Dieudonne-module Frobenius F -> F^phi(X^p): coefficient Frobenius and every
// formal coordinate raised to the p-th power.
template <class C>
SeriesT<C> phi_power_series(const SeriesT<C>& s) {
    RingPtr ring = s.ring;
    i64 p = ring->ctx->p;
    SeriesT<C> out(ring);
    out.unc = s.unc;
    for (const auto& [e, c] : s.terms) {
        Exp e2;
        bool drop = false;
        for (int i = 0; i < ring->nvars; ++i) {
            long long n = static_cast<long long>(e.get(i)) * p;
            if (n >= ring->var[i].cap) {
                out.unc.cap[i] = std::min(out.unc.cap[i], ring->var[i].cap);
                drop = true;
                break;
            }
            if (n < ring->var[i].window_low) throw window_overflow("phi_power: exponent escapes the window");
            e2.set(i, static_cast<int>(n));
        }
        if (!drop) out.add_term(e2, coeff::frob(c));
    }
    return out;
}

// gamma: X -> (1+X)^{chi} - 1, Y and coefficients fixed. chi must be a p-unit.
template <class C>
SeriesT<C> gamma_series(const SeriesT<C>& s, i64 chi) {
    RingPtr ring = s.ring;
    if (chi % ring->ctx->p == 0) throw spec_mismatch("gamma_series: chi must be a unit");
    bool hasX = false;
    for (int i = 0; i < ring->nvars; ++i) hasX = hasX || ring->var[i].name == 'X';
    if (!hasX) return s;
    int xi = ring->index_of('X');
    SeriesT<C> ximg = one_plus_var_pow<C>(ring, 'X', chi) - SeriesT<C>::constant(ring, 1);
    bool need_inv = false;
    for (const auto& [e, c] : s.terms)
        if (e.get(xi) < 0) need_inv = true;
    SeriesT<C> ximg_inv(ring);
    if (need_inv) ximg_inv = detail_ops::invert_laurent_impl(ximg);

    SeriesT<C> out(ring);
    out.unc = s.unc;
    std::map<int, SeriesT<C>> xpow;
    xpow[0] = SeriesT<C>::constant(ring, 1);
    std::function<const SeriesT<C>&(int)> get_xpow = [&](int n) -> const SeriesT<C>& {
        auto it = xpow.find(n);
        if (it != xpow.end()) return it->second;
        if (n > 0) return xpow.emplace(n, get_xpow(n - 1) * ximg).first->second;
        return xpow.emplace(n, get_xpow(n + 1) * ximg_inv).first->second;
    };
    for (const auto& [e, c] : s.terms) {
        SeriesT<C> term = get_xpow(e.get(xi)).scaled(c);
        if (ring->nvars == 2) term = term.shifted(ring->var[1 - xi].name, e.get(1 - xi));
        out = out + term;
    }
    return out;
}

// tau: Y -> Y(1+X), X and coefficients fixed. Requires both variables.
template <class C>
SeriesT<C> tau_series(const SeriesT<C>& s) {
    RingPtr ring = s.ring;
    if (ring->nvars != 2) throw spec_mismatch("tau_series: ring must contain X and Y");
    int yi = ring->index_of('Y');
    SeriesT<C> out(ring);
    out.unc = s.unc;
    std::map<int, SeriesT<C>> pw; // (1+X)^b per Y-exponent b
    for (const auto& [e, c] : s.terms) {
        int b = e.get(yi);
        auto it = pw.find(b);
        if (it == pw.end()) it = pw.emplace(b, one_plus_var_pow<C>(ring, 'X', b)).first;
        SeriesT<C> term = it->second.scaled(c);
        term = term.shifted('Y', b);
        term = term.shifted('X', e.get(1 - yi));
        out = out + term;
    }
    return out;
}

// p-adic Laurent inversion: s = v^m * u * (1 - p h) with u a one-unit of W[[v]];
// returns v^{-m} u^{-1} sum (p h)^k within the ring caps/window.
namespace detail_ops {
template <class C>
SeriesT<C> invert_laurent_impl(const SeriesT<C>& s) {
    RingPtr ring = s.ring;
    CtxPtr ctx = ring->ctx;
    if (s.is_zero()) throw non_invertible("invert_laurent: zero series");
    if (ring->nvars != 1) {
        // single-variable inversion embedded in a bivariate ring: only pure
        // series in one variable are invertible here
        int used = -1;
        for (const auto& [e, c] : s.terms) {
            for (int i = 0; i < 2; ++i)
                if (e.get(i) != 0) {
                    if (used < 0) used = i;
                    if (used != i) throw non_invertible("invert_laurent: genuinely bivariate input");
                }
        }
        if (used < 0) used = 0;
    }

    // locate the lowest exponent carrying a unit coefficient
    int m = EXP_INF;
    int var_index = 0;
    for (int i = 0; i < ring->nvars; ++i) {
        bool nontrivial = false;
        for (const auto& [e, c] : s.terms)
            if (e.get(i) != 0) nontrivial = true;
        if (nontrivial) var_index = i;
    }
    for (const auto& [e, c] : s.terms) {
        if (coeff::valuation(c) == 0 && e.get(var_index) < m) m = e.get(var_index);
    }
    if (m == EXP_INF) throw non_invertible("invert_laurent: no unit coefficient (zero mod p)");

    char vn = ring->var[var_index].name;
    // window soundness: coefficients dropped below the window must be = 0 mod p^N;
    // the descent costs one power of p per `width` exponents
    int low = s.order(vn);
    int width = m - low;
    if (width > 0) {
        long long need = static_cast<long long>(m) + static_cast<long long>(width) * (ctx->N - 1);
        if (-(long long)ring->var[var_index].window_low < need)
            throw window_overflow("invert_laurent: Laurent window too narrow for the requested precision");
    }
    SeriesT<C> t = s.shifted(vn, -m);
    C c0 = t.get(Exp{0, 0});
    if (coeff::is_zero(c0) || coeff::valuation(c0) != 0)
        throw non_invertible("invert_laurent: constant term not a unit after shift");
    C c0inv = unit_coeff_inverse(c0);
    t = t.scaled(c0inv);
    SeriesT<C> w = t - SeriesT<C>::constant(ring, 1);

    SeriesT<C> acc = SeriesT<C>::constant(ring, 1);
    SeriesT<C> pw = SeriesT<C>::constant(ring, 1);
    int guard = (ctx->N + 2) * (ring->var[var_index].cap - ring->var[var_index].window_low + 2);
    for (int k = 1; k <= guard; ++k) {
        pw = pw * w;
        if (pw.is_zero()) break;
        if (k % 2 == 1)
            acc = acc - pw;
        else
            acc = acc + pw;
        bool negligible = true;
        for (const auto& [e, c] : pw.terms)
            if (coeff::valuation(c) < ctx->N) negligible = false;
        if (negligible) break;
        if (k == guard) throw non_invertible("invert_laurent: geometric series did not terminate");
    }
    return acc.scaled(c0inv).shifted(vn, -m);
}

} // namespace detail_ops

template <class C>
SeriesT<C> invert_laurent(const SeriesT<C>& s) {
    return detail_ops::invert_laurent_impl(s);
}

// logarithmic derivative d(s)/s in the Laurent ring
template <class C>
SeriesT<C> dlog(const SeriesT<C>& s, char name) {
    return s.derivative(name) * invert_laurent(s);
}

// log of a one-unit: s = 1 mod (p, variables); rational output.
inline QSeries log_one_unit(const ZSeries& s) {
    RingPtr ring = s.ring;
    ZSeries u = s - ZSeries::constant(ring, 1);
    for (const auto& [e, c] : u.terms) {
        bool positive = false, negative = false;
        for (int i = 0; i < ring->nvars; ++i) {
            if (e.get(i) > 0) positive = true;
            if (e.get(i) < 0) negative = true;
        }
        if (negative) throw not_a_one_unit("log_one_unit: negative exponent present");
        if (!positive && coeff::valuation(c) < 1) throw not_a_one_unit("log_one_unit: not congruent to 1");
    }
    QSeries uq = to_rational(u);
    QSeries acc(ring);
    acc.unc = uq.unc;
    QSeries pw = QSeries::constant(ring, 1);
    int maxcap = 1;
    for (int i = 0; i < ring->nvars; ++i) maxcap = std::max(maxcap, ring->var[i].cap);
    int guard = (ring->ctx->N + 2) * (maxcap + 2);
    for (int n = 1; n <= guard; ++n) {
        pw = pw * uq;
        if (pw.is_zero()) break;
        RationalCoefficient inv_n = RationalCoefficient::from_fraction(ring->ctx, (n % 2) ? 1 : -1, n);
        acc = acc + pw.scaled(inv_n);
        // remaining terms u^{n'}/n' have valuation >= val(pw) - v_p(n') and
        // v_p(n') <= log_p(guard) for the n' still to come
        int vbound = 1;
        while (ipow(ring->ctx->p, vbound) <= guard) ++vbound;
        bool negligible = true;
        for (const auto& [e, c] : pw.terms)
            if (c.val - vbound < ring->ctx->N) negligible = false;
        if (negligible) break;
        if (n == guard) throw not_a_one_unit("log_one_unit: series did not terminate");
    }
    return acc;
}

// Coleman functional L(F) = (1/p) log(F^p / phi(F)) for a one-unit F;
// integrality is asserted, not assumed.
inline ZSeries coleman_functional(const ZSeries& F) {
    RingPtr ring = F.ring;
    QSeries lf = log_one_unit(F);
    QSeries lpf = log_one_unit(phi_series(F));
    RationalCoefficient invp = RationalCoefficient::from_fraction(ring->ctx, 1, 1).divided_by_p_pow(1);
    QSeries r = lf - lpf.scaled(invp);
    return to_integral(r, "coleman_functional");
}

// split F in W[[Y]][1/Y]^x as Y^d * [teichmuller root of unity] * one-unit
struct UnitSplit {
    int d = 0;
    WittElement root_of_unity; // Teichmuller part of the leading coefficient
    ZSeries one_unit;
};

inline UnitSplit split_admissible_unit(const ZSeries& F, char name = 'Y') {
    RingPtr ring = F.ring;
    int d = F.order(name);
    if (d == EXP_INF) throw non_invertible("split_admissible_unit: zero series");
    ZSeries G = F.shifted(name, -d);
    WittElement lead = G.get(Exp{0, 0});
    if (!lead.is_unit()) throw non_invertible("split_admissible_unit: leading coefficient not a unit");
    WittElement zeta = teichmuller(ring->ctx, lead);
    ZSeries unit = G.scaled(zeta.inverse());
    // sanity: unit must now be a one-unit (checked again inside log)
    UnitSplit out;
    out.d = d;
    out.root_of_unity = zeta;
    out.one_unit = unit;
    return out;
}

// Coleman functional extended by L(Y^d) = 0 and L(zeta) = 0.
inline ZSeries coleman_functional_extended(const ZSeries& F, char name = 'Y') {
    auto sp = split_admissible_unit(F, name);
    return coleman_functional(sp.one_unit);
}

// (1 - phi)^{-1} on series with zero constant term: sum of phi iterates.
inline ZSeries one_minus_phi_inverse_on_YW(const ZSeries& s) {
    RingPtr ring = s.ring;
    for (const auto& [e, c] : s.terms) {
        bool positive = false;
        for (int i = 0; i < ring->nvars; ++i) {
            if (e.get(i) < 0) throw nonzero_constant_term("one_minus_phi_inverse: negative exponent");
            if (e.get(i) > 0) positive = true;
        }
        if (!positive) throw nonzero_constant_term("one_minus_phi_inverse: constant term present");
    }
    ZSeries acc(ring);
    acc.unc = s.unc;
    ZSeries t = s;
    int guard = 64;
    while (!t.is_zero() && guard-- > 0) {
        acc = acc + t;
        t = phi_series(t);
    }
    return acc;
}

// Belt-graded Laurent inversion for rational-coefficient series: factor the
// term minimizing kappa*v_p(c_n) + n (largest n on ties) and run the geometric
// series; this realizes the expansion with bounded negative-side valuations.
inline QSeries belt_inverse(const QSeries& L, i64 kappa) {
    RingPtr ring = L.ring;
    CtxPtr ctx = ring->ctx;
    if (L.is_zero()) throw non_invertible("belt_inverse: zero series");
    if (ring->nvars != 1) throw spec_mismatch("belt_inverse: univariate rings only");
    char vn = ring->var[0].name;

    long long best_key = std::numeric_limits<long long>::max();
    int n0 = 0;
    for (const auto& [e, c] : L.terms) {
        if (c.is_zero()) continue;
        long long key = kappa * static_cast<long long>(c.val) + e.e0;
        if (key < best_key || (key == best_key && e.e0 > n0)) {
            best_key = key;
            n0 = e.e0;
        }
    }
    RationalCoefficient c0 = L.get(Exp{n0, 0});
    RationalCoefficient c0inv = c0.inverse();
    if (L.order(vn) < n0) {
        long long need = static_cast<long long>(n0) + kappa * (ctx->N - 1);
        if (-(long long)ring->var[0].window_low < need)
            throw window_overflow("belt_inverse: Laurent window too narrow for the requested precision");
    }
    QSeries t = L.shifted(vn, -n0).scaled(c0inv);
    QSeries eps = t - QSeries::constant(ring, 1);

    QSeries acc = QSeries::constant(ring, 1);
    QSeries pw = QSeries::constant(ring, 1);
    // any future multiplier has valuation >= -(cap')/kappa since its belt key
    // is nonnegative; stop when no descendant can re-enter valuations < N
    long long capp = std::max(0, ring->var[0].cap - 1);
    int dip = static_cast<int>((capp + kappa - 1) / kappa);
    int floor_target = ctx->N + dip;
    int guard = (ctx->N + 3) * (ring->var[0].cap - ring->var[0].window_low + 4);
    for (int k = 1; k <= guard; ++k) {
        pw = pw * eps;
        if (pw.is_zero()) break;
        if (k % 2 == 1)
            acc = acc - pw;
        else
            acc = acc + pw;
        bool negligible = true;
        for (const auto& [e, c] : pw.terms)
            if (c.val < floor_target) negligible = false;
        if (negligible) break;
        if (k == guard) throw non_invertible("belt_inverse: geometric series did not terminate");
    }
    return acc.scaled(c0inv).shifted(vn, -n0);
}

// Naive Laurent inversion over the fraction field: factor the lowest-degree
// term; diagnostic expansion with finitely many negative exponents.
inline QSeries naive_laurent_inverse(const QSeries& L) {
    RingPtr ring = L.ring;
    if (L.is_zero()) throw non_invertible("naive_laurent_inverse: zero series");
    char vn = ring->var[0].name;
    int m = L.order(vn);
    RationalCoefficient c0 = L.get(Exp{m, 0});
    QSeries t = L.shifted(vn, -m).scaled(c0.inverse());
    QSeries w = t - QSeries::constant(ring, 1); // strictly positive order
    QSeries acc = QSeries::constant(ring, 1);
    QSeries pw = QSeries::constant(ring, 1);
    for (int k = 1; k <= ring->var[0].cap + 2; ++k) {
        pw = pw * w;
        if (pw.is_zero()) break;
        if (k % 2 == 1)
            acc = acc - pw;
        else
            acc = acc + pw;
    }
    return acc.scaled(c0.inverse()).shifted(vn, -m);
}

// degree-by-degree reversion of a strict series (l = T + higher order)
inline QSeries reversion(const QSeries& l, char name) {
    RingPtr ring = l.ring;
    if (ring->nvars != 1) throw spec_mismatch("reversion: univariate only");
    if (!l.get(Exp{0, 0}).is_zero()) throw not_strict("reversion: nonzero constant term");
    RationalCoefficient lin = l.get(Exp{1, 0});
    RationalCoefficient one = RationalCoefficient::from_int(ring->ctx, 1);
    if (!RationalCoefficient::equal_mod(lin, one, std::min(lin.aprec, ring->ctx->N)))
        throw not_strict("reversion: linear coefficient must be 1");
    QSeries T = QSeries::variable(ring, name);
    QSeries g = T;
    for (int iter = 0; iter < ring->var[0].cap + 2; ++iter) {
        QSeries err = l.substituted(name, g) - T;
        if (err.is_zero()) break;
        int o = err.order(name);
        g = g - err;
        if (o >= ring->var[0].cap) break;
    }
    return g;
}

inline QSeries compose(const QSeries& s, char name, const QSeries& t) { return s.substituted(name, t); }

// evaluate s at the given images (one per variable of s's ring), all living in
// a common target ring; source exponents must be nonnegative.
template <class C>
SeriesT<C> eval_series(const SeriesT<C>& s, const std::vector<SeriesT<C>>& images) {
    if (static_cast<int>(images.size()) != s.ring->nvars)
        throw spec_mismatch("eval_series: one image per variable required");
    RingPtr target = images[0].ring;
    std::vector<std::map<int, SeriesT<C>>> pows(images.size());
    std::function<const SeriesT<C>&(int, int)> power = [&](int v, int n) -> const SeriesT<C>& {
        auto it = pows[v].find(n);
        if (it != pows[v].end()) return it->second;
        if (n == 0) return pows[v].emplace(0, SeriesT<C>::constant(target, 1)).first->second;
        if (n < 0) throw spec_mismatch("eval_series: negative exponent");
        return pows[v].emplace(n, power(v, n - 1) * images[v]).first->second;
    };
    SeriesT<C> out(target);
    out.unc = Uncertainty::join(out.unc, s.unc);
    for (const auto& img : images) out.unc = Uncertainty::join(out.unc, img.unc);
    for (const auto& [e, c] : s.terms) {
        SeriesT<C> term = SeriesT<C>::constant(target, 1).scaled(c);
        for (int v = 0; v < s.ring->nvars; ++v)
            if (e.get(v) != 0) term = term * power(v, e.get(v));
        out = out + term;
    }
    return out;
}

// valuation-belt membership report per the two slope conditions
struct GBeltReport {
    bool outer_pass = true;
    bool inner_pass = true;
    // minima reported as exact fractions (num/den), den > 0
    long long outer_min_num = 0, outer_min_den = 1;
    long long inner_min_num = 0, inner_min_den = 1;
    bool outer_seen = false, inner_seen = false;
};

inline GBeltReport gbelt_check(const QSeries& s, long long a_num, long long a_den, long long b_num,
                               long long b_den, long long e) {
    GBeltReport rep;
    auto upd = [](bool& seen, long long& mn, long long& md, long long num, long long den) {
        if (!seen || static_cast<__int128>(num) * md < static_cast<__int128>(mn) * den) {
            mn = num;
            md = den;
        }
        seen = true;
    };
    for (const auto& [ex, c] : s.terms) {
        if (c.is_zero()) continue;
        long long n = ex.e0;
        long long v = c.val;
        if (n >= 0) {
            // a*e*v + n  as fraction over a_den
            long long num = a_num * e * v + n * a_den;
            upd(rep.outer_seen, rep.outer_min_num, rep.outer_min_den, num, a_den);
        }
        if (n <= 0) {
            long long num = b_num * e * v + n * b_den;
            upd(rep.inner_seen, rep.inner_min_num, rep.inner_min_den, num, b_den);
        }
    }
    rep.outer_pass = !rep.outer_seen || rep.outer_min_num >= 0;
    rep.inner_pass = !rep.inner_seen || rep.inner_min_num >= 0;
    return rep;
}

} // namespace recip
