#pragma once

// The four-term complex on truncated (phi, G_infty)-modules: the maps alpha,
// beta, eta and the delta operator, cup products, Kummer triples, cocycle
// realization, and homology through the Z/p^N linear algebra.

#include "recip/formal_group.hpp"
#include "recip/zmod.hpp"

namespace recip {

// ----- ideal shadows used by congruence certificates -----

struct ShadowPolicy {
    i64 p = 3;
    i64 e = 2;          // absolute ramification index of K
    int p_exponent = 1; // p^M (or p^N) part of the ideal

    // weight of X^a Y^n in the residue valuation grading, over denominator p-1
    long long weight_num(int a, int n) const {
        return static_cast<long long>(a) * e * p + static_cast<long long>(n) * (p - 1);
    }
    bool in_maxim(int a, int n) const { return a >= 0 && weight_num(a, n) > 0; }
    bool in_x_maxim(int a, int n) const { return a >= 1 && weight_num(a - 1, n) > 0; }
    bool in_x_entire(int a, int n) const { return a >= 1 && weight_num(a - 1, n) >= 0; }
    bool in_xy_integral(int a, int n) const { return a >= 1 && n >= 1; }
    // slope-1 belt membership with the p-valuation credited at weight e: the
    // decay certificate satisfied by the period-matrix transport residuals
    bool in_belt_residual(int a, int n, int v) const {
        return a >= 1 && v >= 1 &&
               static_cast<long long>(e) * v * (p - 1) + weight_num(a, n) >= 0;
    }
};

struct CertificateReport {
    bool pass = true;
    std::vector<std::string> residuals;

    void fail(const Exp& e, int val, const char* where) {
        std::ostringstream os;
        os << where << ": X^" << e.e0 << " Y^" << e.e1 << " (val " << val << ")";
        residuals.push_back(os.str());
        pass = false;
    }
};

// check s = 0 modulo p^{policy.p_exponent} + the selected monomial ideal;
// residuals below the value's own precision floor are not meaningful
enum class ShadowIdeal { XYIntegral, Maxim, XMaxim, XEntire };

inline void classify_into(CertificateReport& rep, const ZSeries& s, const ShadowPolicy& pol, ShadowIdeal which,
                          const char* where) {
    int xi = s.ring->index_of('X');
    int cutoff = std::min(pol.p_exponent, s.unc.p_floor);
    for (const auto& [e, c] : s.terms) {
        if (c.is_zero()) continue;
        if (s.unc.hides(e, s.ring->nvars)) continue;
        int v = c.valuation();
        if (v >= cutoff) continue;
        int a = e.get(xi), n = e.get(1 - xi);
        bool ok = false;
        switch (which) {
            case ShadowIdeal::XYIntegral: ok = pol.in_xy_integral(a, n); break;
            case ShadowIdeal::Maxim: ok = pol.in_maxim(a, n); break;
            case ShadowIdeal::XMaxim: ok = pol.in_x_maxim(a, n); break;
            case ShadowIdeal::XEntire:
                ok = pol.in_x_entire(a, n) || pol.in_maxim(a, n) || pol.in_belt_residual(a, n, v);
                break;
        }
        if (!ok) rep.fail(e, v, where);
    }
}

// ----- the module and its operators -----

class HerrModule {
  public:
    RingPtr ring; // bivariate X, Y (power series, optionally Laurent)
    i64 chi = 4;  // chi(gamma), an exact integer unit mod p
    int twist = 0;

    HerrModule(RingPtr r, i64 chi_gamma, int tate_twist = 0) : ring(std::move(r)), chi(chi_gamma), twist(tate_twist) {
        if (chi % ring->ctx->p == 0) throw spec_mismatch("HerrModule: chi(gamma) must be a unit");
    }

    CtxPtr ctx() const { return ring->ctx; }

    ZSeries phi(const ZSeries& m) const { return phi_series(m); }
    ZSeries tau(const ZSeries& m) const { return tau_series(m); }
    ZSeries gamma(const ZSeries& m) const {
        ZSeries g = gamma_series(m, chi);
        if (twist == 0) return g;
        i64 scale = powmod(((chi % ctx()->pN) + ctx()->pN) % ctx()->pN, twist, ctx()->pN);
        return g.scaled_int(scale);
    }

    // nilpotency budget for (tau - 1): it raises the X-order strictly
    int tau_nilpotency_bound() const {
        int xi = ring->index_of('X');
        return ring->var[xi].cap - std::min(0, ring->var[xi].window_low) + 2;
    }

    // sum_{n >= 1} binom(u, n) (tau - 1)^{n-1} applied to m (finite by nilpotency)
    ZSeries tau_binomial_quotient(const ZSeries& m, i64 u) const {
        ZSeries t = m;
        ZSeries acc = ZSeries::zero(ring);
        acc.unc = m.unc;
        int guard = tau_nilpotency_bound();
        for (int n = 1; n <= guard + 1; ++n) {
            WittElement b = integer_binomial(ctx(), u, n);
            if (!b.is_zero()) acc = acc + t.scaled(b);
            ZSeries next = tau(t) - t;
            if (next.is_zero()) break;
            t = next;
            if (n > guard) throw precision_exhausted("tau_binomial_quotient: (tau-1) not nilpotent in this ring");
        }
        return acc;
    }

    // delta = (tau^{chi} - 1)/(tau - 1)
    ZSeries delta(const ZSeries& m) const { return tau_binomial_quotient(m, chi); }

    // tau^u for a p-adic integer u given exactly
    ZSeries tau_power(const ZSeries& m, i64 u) const { return m + tau_binomial_quotient(tau(m) - m, u); }

    // (gamma^n - 1)/(gamma - 1): finite on the truncated module since
    // (gamma - 1) is (p, X)-topologically nilpotent
    ZSeries gamma_binomial_quotient(const ZSeries& m, i64 u) const {
        ZSeries t = m;
        ZSeries acc = ZSeries::zero(ring);
        acc.unc = m.unc;
        int xi = ring->index_of('X');
        int guard = (ctx()->N + 2) * (ring->var[xi].cap - std::min(0, ring->var[xi].window_low) + 2);
        for (int n = 1; n <= guard + 1; ++n) {
            WittElement b = integer_binomial(ctx(), u, n);
            if (!b.is_zero()) acc = acc + t.scaled(b);
            ZSeries next = gamma(t) - t;
            if (next.is_zero()) break;
            t = next;
            if (n > guard) throw precision_exhausted("gamma_binomial_quotient did not terminate");
        }
        return acc;
    }
    ZSeries gamma_power(const ZSeries& m, i64 u) const { return m + gamma_binomial_quotient(gamma(m) - m, u); }

    // delta^{-1} by successive approximation: delta = chi + (X-order-raising tail)
    ZSeries delta_inverse(const ZSeries& m) const {
        i64 chi_inv = unit_inverse_mod(((chi % ctx()->pN) + ctx()->pN) % ctx()->pN, ctx()->p, ctx()->pN);
        ZSeries r = m.scaled_int(chi_inv);
        int guard = tau_nilpotency_bound() + ctx()->N + 2;
        for (int i = 0; i < guard; ++i) {
            ZSeries err = delta(r) - m;
            if (err.is_zero()) break;
            r = r - err.scaled_int(chi_inv);
        }
        return r;
    }
};

// triples of (possibly vector-valued) module elements
struct HerrTriple {
    std::vector<ZSeries> x, y, z;
    int degree = 1;
    int twist = 0;

    static HerrTriple scalar(ZSeries x, ZSeries y, ZSeries z, int twist, int degree = 1) {
        HerrTriple t;
        t.x = {std::move(x)};
        t.y = {std::move(y)};
        t.z = {std::move(z)};
        t.twist = twist;
        t.degree = degree;
        return t;
    }
    size_t width() const { return x.size(); }
};

// alpha = (phi - 1; gamma - 1; tau - 1)
inline std::array<ZSeries, 3> alpha_map(const HerrModule& M, const ZSeries& m) {
    return {M.phi(m) - m, M.gamma(m) - m, M.tau(m) - m};
}

// beta = ((gamma-1)x + (1-phi)y, (tau-1)x + (1-phi)z, (tau^chi - 1)y + (delta - gamma)z)
inline std::array<ZSeries, 3> beta_map(const HerrModule& M, const ZSeries& x, const ZSeries& y,
                                       const ZSeries& z) {
    ZSeries r0 = (M.gamma(x) - x) + (y - M.phi(y));
    ZSeries r1 = (M.tau(x) - x) + (z - M.phi(z));
    ZSeries r2 = (M.tau_power(y, M.chi) - y) + (M.delta(z) - M.gamma(z));
    return {r0, r1, r2};
}

// eta = (tau^chi - 1)u + (delta - gamma)v + (phi - 1)w
inline ZSeries eta_map(const HerrModule& M, const ZSeries& u, const ZSeries& v, const ZSeries& w) {
    return (M.tau_power(u, M.chi) - u) + (M.delta(v) - M.gamma(v)) + (M.phi(w) - w);
}

// classical three-term complex on an X-only module
inline std::array<ZSeries, 2> classical_f1(const HerrModule& M, const ZSeries& m) {
    return {M.phi(m) - m, M.gamma(m) - m};
}
inline ZSeries classical_f2(const HerrModule& M, const ZSeries& x, const ZSeries& y) {
    return (M.gamma(x) - x) + (y - M.phi(y));
}

// cocycle term gamma^n ((tau^m - 1)/(tau - 1)) z + ((gamma^n - 1)/(gamma - 1)) y,
// minus (sigma - 1) b when a solution b of (phi-1)b = x is supplied.
inline ZSeries realize_cocycle(const HerrModule& M, const HerrTriple& t, i64 n, i64 m,
                               const ZSeries* b = nullptr) {
    if (t.width() != 1) throw spec_mismatch("realize_cocycle: scalar triples only");
    ZSeries zpart = M.gamma_power(M.tau_binomial_quotient(t.z[0], m), n);
    ZSeries ypart = M.gamma_binomial_quotient(t.y[0], n);
    ZSeries out = zpart + ypart;
    if (b) {
        ZSeries sigma_b = M.gamma_power(M.tau_power(*b, m), n);
        out = out - (sigma_b - *b);
    }
    return out;
}

// ----- cup products -----

namespace detail_cup {
inline std::vector<ZSeries> broadcast_mul(const ZSeries& a, const std::vector<ZSeries>& v) {
    std::vector<ZSeries> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(a * s);
    return out;
}
} // namespace detail_cup

inline std::vector<ZSeries> cup_00(const ZSeries& a, const std::vector<ZSeries>& a2) {
    return detail_cup::broadcast_mul(a, a2);
}

// (x,y,z) cup (a'): degree 1 x degree 0
inline HerrTriple cup_10(const HerrTriple& t1, const ZSeries& a2, int twist2) {
    HerrTriple out;
    out.degree = 1;
    out.twist = t1.twist + twist2;
    for (size_t i = 0; i < t1.width(); ++i) {
        out.x.push_back(t1.x[i] * a2);
        out.y.push_back(t1.y[i] * a2);
        out.z.push_back(t1.z[i] * a2);
    }
    return out;
}

// (a) cup (x',y',z'): degree 0 x degree 1
inline HerrTriple cup_01(const ZSeries& a, int twist1, const HerrTriple& t2) {
    HerrTriple out;
    out.degree = 1;
    out.twist = twist1 + t2.twist;
    out.x = detail_cup::broadcast_mul(a, t2.x);
    out.y = detail_cup::broadcast_mul(a, t2.y);
    out.z = detail_cup::broadcast_mul(a, t2.z);
    return out;
}

// degree 1 x degree 1 per the four-term complex formulas. M1 acts on t1's
// module, M2 on t2's; t1 must be scalar-valued.
inline HerrTriple cup_11(const HerrModule& M1, const HerrTriple& t1, const HerrModule& M2,
                         const HerrTriple& t2) {
    if (t1.width() != 1) throw spec_mismatch("cup_11: left factor must be scalar-valued");
    const ZSeries &x = t1.x[0], &y = t1.y[0], &z = t1.z[0];
    HerrTriple out;
    out.degree = 2;
    out.twist = t1.twist + t2.twist;
    size_t w = t2.width();
    out.x.reserve(w);
    out.y.reserve(w);
    out.z.reserve(w);
    i64 chi = M1.chi;
    CtxPtr ctx = M1.ctx();

    // precompute (tau-1)^{k-1} z for the correction sum
    std::vector<ZSeries> tz;
    tz.push_back(z);
    {
        int guard = M1.tau_nilpotency_bound();
        for (int k = 1; k <= guard; ++k) {
            ZSeries next = M1.tau(tz.back()) - tz.back();
            if (next.is_zero()) break;
            tz.push_back(next);
        }
    }
    ZSeries dz = M1.delta(z);

    for (size_t j = 0; j < w; ++j) {
        ZSeries a = y * M2.gamma(t2.x[j]) - x * M2.phi(t2.y[j]);
        ZSeries b = z * M2.tau(t2.x[j]) - x * M2.phi(t2.z[j]);
        ZSeries c = dz * M2.tau_power(t2.y[j], chi) - y * M2.gamma(t2.z[j]);

        // Sigma_{z,z'} = sum_{n>=1} binom(chi, n+1) sum_{k=1}^{n} binom(n,k)
        //               (tau-1)^{k-1} z  *  tau^k (tau-1)^{n-k} z'
        std::vector<ZSeries> tzp; // (tau-1)^i z'
        tzp.push_back(t2.z[j]);
        int guard = M1.tau_nilpotency_bound();
        for (int i = 1; i <= guard; ++i) {
            ZSeries next = M2.tau(tzp.back()) - tzp.back();
            if (next.is_zero()) break;
            tzp.push_back(next);
        }
        for (int n = 1; n <= guard; ++n) {
            if (n >= static_cast<int>(tz.size() + tzp.size())) break;
            WittElement bo = integer_binomial(ctx, chi, n + 1);
            if (bo.is_zero()) continue;
            ZSeries inner = ZSeries::zero(b.ring);
            bool any = false;
            for (int k = 1; k <= n; ++k) {
                if (k - 1 >= static_cast<int>(tz.size())) break;
                if (n - k >= static_cast<int>(tzp.size())) continue;
                WittElement bk = integer_binomial(ctx, n, k);
                ZSeries right = tzp[n - k];
                for (int it = 0; it < k; ++it) right = M2.tau(right);
                inner = inner + (tz[k - 1] * right).scaled(bk);
                any = true;
            }
            if (any) c = c + inner.scaled(bo);
        }
        out.x.push_back(a);
        out.y.push_back(b);
        out.z.push_back(c);
    }
    return out;
}

// ----- homology on the finite truncated module -----

struct HomologyOrders {
    std::array<i64, 4> exponent = {0, 0, 0, 0}; // log_p |H^i|
};

inline HomologyOrders homology_orders(const HerrModule& M) {
    RingPtr ring = M.ring;
    CtxPtr ctx = ring->ctx;
    for (int i = 0; i < ring->nvars; ++i)
        if (ring->var[i].window_low < 0)
            throw spec_mismatch("homology_orders: Laurent windows are not operator-stable");
    // monomial basis
    std::vector<Exp> basis;
    for (int a = 0; a < ring->var[0].cap; ++a)
        for (int b = 0; b < ring->var[1].cap; ++b) {
            if (a + b >= ring->total_cap) continue;
            Exp e;
            e.set(0, a);
            e.set(1, b);
            basis.push_back(e);
        }
    int n = static_cast<int>(basis.size());
    int f = ctx->f;
    int dim = n * f;

    auto to_vec = [&](const ZSeries& s) {
        std::vector<i64> v(dim, 0);
        for (size_t bi = 0; bi < basis.size(); ++bi) {
            WittElement c = s.get(basis[bi]);
            for (int k = 0; k < f; ++k) v[bi * f + k] = c.c[k];
        }
        return v;
    };
    auto basis_elt = [&](int idx) {
        ZSeries s(ring);
        std::vector<i64> coords(f, 0);
        coords[idx % f] = 1;
        s.add_term(basis[idx / f], WittElement(ctx, coords));
        return s;
    };

    ZmodMatrix alpha(ctx->p, ctx->N, 3 * dim, dim), beta(ctx->p, ctx->N, 3 * dim, 3 * dim),
        eta(ctx->p, ctx->N, dim, 3 * dim);
    ZSeries zero = ZSeries::zero(ring);
    for (int j = 0; j < dim; ++j) {
        ZSeries e = basis_elt(j);
        auto a = alpha_map(M, e);
        for (int blk = 0; blk < 3; ++blk) {
            auto col = to_vec(a[blk]);
            for (int i = 0; i < dim; ++i) alpha.at(blk * dim + i, j) = col[i];
        }
        for (int pos = 0; pos < 3; ++pos) {
            std::array<const ZSeries*, 3> args = {&zero, &zero, &zero};
            args[pos] = &e;
            auto b = beta_map(M, *args[0], *args[1], *args[2]);
            for (int blk = 0; blk < 3; ++blk) {
                auto col = to_vec(b[blk]);
                for (int i = 0; i < dim; ++i) beta.at(blk * dim + i, pos * dim + j) = col[i];
            }
            ZSeries h = eta_map(M, *args[0], *args[1], *args[2]);
            auto col = to_vec(h);
            for (int i = 0; i < dim; ++i) eta.at(i, pos * dim + j) = col[i];
        }
    }

    HomologyOrders out;
    auto span_exp = [](const ZmodMatrix& m) { return span_log_size(howell_form(m)); };
    ZmodMatrix ker_a = kernel(alpha), ker_b = kernel(beta), ker_e = kernel(eta);
    out.exponent[0] = span_exp(ker_a);
    out.exponent[1] = span_exp(ker_b) - span_exp(alpha.transpose());
    out.exponent[2] = span_exp(ker_e) - span_exp(beta.transpose());
    out.exponent[3] = static_cast<i64>(dim) * ctx->N - span_exp(eta.transpose());
    return out;
}

// ----- Kummer triples -----

// classical triple (-L(F)(1/X + 1/2), 0, Y dlog F) tensor epsilon, with the
// certificate that the beta-equations hold modulo XY-integral + p^N.
struct KummerClassical {
    HerrTriple triple;
    CertificateReport certificate;
    ZSeries coleman; // L of the unit part
};

inline KummerClassical kummer_triple_classical(const HerrModule& M, const ZSeries& F_y,
                                               const ShadowPolicy& pol) {
    if (M.twist != 1) throw spec_mismatch("kummer_triple_classical: module must be Z_p(1)");
    RingPtr ring2 = M.ring;
    CtxPtr ctx = ring2->ctx;

    auto sp = split_admissible_unit(F_y, 'Y');
    ZSeries L = coleman_functional(sp.one_unit); // univariate Y
    ZSeries dlogu = dlog(sp.one_unit, 'Y');      // univariate Y

    auto embed = [&](const ZSeries& s) { return embed_univariate(s, ring2, 'Y'); };

    ZSeries Lr = embed(L);
    ZSeries half = ZSeries::constant(ring2, 1).scaled(WittElement::from_int(ctx, 2).inverse());
    ZSeries x = -(Lr * (ZSeries::variable(ring2, 'X', -1) + half));
    ZSeries y = ZSeries::zero(ring2);
    ZSeries z = embed(dlogu).shifted('Y', 1) + ZSeries::constant(ring2, sp.d);

    KummerClassical out;
    out.coleman = L;
    out.triple = HerrTriple::scalar(x, y, z, 1);

    auto b = beta_map(M, x, y, z);
    classify_into(out.certificate, b[0], pol, ShadowIdeal::XYIntegral, "beta row 1");
    classify_into(out.certificate, b[1], pol, ShadowIdeal::XYIntegral, "beta row 2");
    classify_into(out.certificate, b[2], pol, ShadowIdeal::XYIntegral, "beta row 3");
    return out;
}

// formal-group triple (x, 0, z) from the approximated period matrix; the
// certificate checks (tau - 1)x = (phi - 1)z modulo X-entire + p^M.
struct KummerFormal {
    HerrTriple triple;
    CertificateReport certificate;
};

inline KummerFormal kummer_triple_formal(const FormalGroupData& g, const PeriodMatrixApprox& pm,
                                         const HerrModule& M, const QSeries& beta_pt,
                                         const ShadowPolicy& pol) {
    if (g.op.h != 1) throw spec_mismatch("kummer_triple_formal: torsion Galois action known for h = 1 only");
    CtxPtr ctx = g.op.ctx;
    RingPtr ring2 = M.ring;

    // (A/p - 1) applied to l(beta) through the ambient Frobenius (Y -> Y^p)
    RationalCoefficient invp = RationalCoefficient::from_int(ctx, 1).divided_by_p_pow(1);
    QSeries lb = eval_series(g.log, {beta_pt});
    QSeries Tb = g.op.apply({lb})[0].scaled(invp) - lb;
    ZSeries Tb_int = to_integral(Tb, "(A/p - 1) l(beta)");

    QSeries x_q = pm.V_principal[0][0] * to_rational(Tb_int);
    ZSeries x_flat = to_integral(x_q, "principal-part contraction");

    // z = X Y V^(-1) d/dY (l(beta); m(beta)) -- h = 1: only the l row
    QSeries dlb = lb.derivative('Y');
    QSeries z_q = pm.V_principal[0][0] * dlb;
    ZSeries z_flat = to_integral(z_q, "z representative");

    // Orient the triple to the cocycle convention c_sigma = -(sigma - 1)b + ...
    // used by the classical triple; the solution b of (phi-1)b = x pairs with
    // +(beta, g] so the represented class needs the opposite sign.
    ZSeries x = -embed_univariate(x_flat, ring2, 'Y');
    ZSeries z = -(embed_univariate(z_flat, ring2, 'Y').shifted('Y', 1).shifted('X', 1));

    KummerFormal out;
    out.triple = HerrTriple::scalar(x, ZSeries::zero(ring2), z, M.twist);

    ZSeries lhs = M.tau(x) - x;
    ZSeries rhs = M.phi(z) - z;
    classify_into(out.certificate, lhs - rhs, pol, ShadowIdeal::XEntire, "(tau-1)x - (phi-1)z");
    return out;
}

} // namespace recip
