#pragma once

// Honda formal groups from a Frobenius operator: logarithm, pseudo-logarithm,
// group law and [p]-series with integrality asserted, height diagnostics, the
// block recursions from the inverse Frobenius matrix, and the approximated
// period matrix with its Laurent inverses.

#include <optional>

#include "recip/series_ops.hpp"

namespace recip {

// small dense matrix over W
struct WMatrix {
    int rows = 0, cols = 0;
    CtxPtr ctx;
    std::vector<WittElement> a;
    WMatrix() = default;
    WMatrix(int r, int c, CtxPtr context)
        : rows(r), cols(c), ctx(context), a(size_t(r) * c, WittElement::zero(context)) {}
    WittElement& at(int i, int j) { return a[size_t(i) * cols + j]; }
    const WittElement& at(int i, int j) const { return a[size_t(i) * cols + j]; }
    WMatrix frobenius() const {
        WMatrix r = *this;
        for (auto& x : r.a) x = x.frobenius();
        return r;
    }
    friend WMatrix operator*(const WMatrix& x, const WMatrix& y) {
        WMatrix r(x.rows, y.cols, x.ctx);
        for (int i = 0; i < x.rows; ++i)
            for (int k = 0; k < x.cols; ++k)
                for (int j = 0; j < y.cols; ++j) r.at(i, j) = r.at(i, j) + x.at(i, k) * y.at(k, j);
        return r;
    }
    bool operator==(const WMatrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

struct EBlocks {
    WMatrix A, B, C, D; // blocks of the inverse of the Frobenius matrix
};

class FrobeniusOperator {
  public:
    CtxPtr ctx;
    int d = 1, h = 1;
    int u_max = 0;
    std::vector<WMatrix> F;                // F[u-1], d x d
    std::vector<WMatrix> Fprime;           // F'[u-1], (h-d) x d
    std::optional<EBlocks> blocks;         // blocks of E^{-1} when built from one

    static FrobeniusOperator from_F_list(CtxPtr ctx, int d, int h, std::vector<WMatrix> F,
                                         std::vector<WMatrix> Fprime = {}) {
        FrobeniusOperator op;
        op.ctx = ctx;
        op.d = d;
        op.h = h;
        op.F = std::move(F);
        op.Fprime = std::move(Fprime);
        op.u_max = static_cast<int>(op.F.size());
        return op;
    }

    // F_1 = A, F_2 = B phi(C), F_u = B (prod_{1<=k<=u-2} phi^k(D)) phi^{u-1}(C);
    // F'_1 = C, F'_u = (prod_{0<=k<=u-2} phi^k(D)) phi^{u-1}(C).
    static FrobeniusOperator from_E_blocks(CtxPtr ctx, int d, int h, EBlocks e, int u_max) {
        FrobeniusOperator op;
        op.ctx = ctx;
        op.d = d;
        op.h = h;
        op.u_max = u_max;
        if (e.A.rows != d || e.A.cols != d || e.B.rows != d || e.B.cols != h - d || e.C.rows != h - d ||
            e.C.cols != d || e.D.rows != h - d || e.D.cols != h - d)
            throw spec_mismatch("from_E_blocks: block dimensions do not match (d, h)");
        op.blocks = e;
        std::vector<WMatrix> F(u_max, WMatrix(d, d, ctx)), Fp;
        if (h > d) Fp.assign(u_max, WMatrix(h - d, d, ctx));
        F[0] = e.A;
        if (h > d) {
            Fp[0] = e.C;
            WMatrix Dprod = WMatrix(h - d, h - d, ctx); // running prod of phi^k(D)
            for (int i = 0; i < h - d; ++i) Dprod.at(i, i) = WittElement::one(ctx);
            WMatrix Cfrob = e.C;
            for (int u = 2; u <= u_max; ++u) {
                // at step u: Dprod = prod_{1<=k<=u-2} phi^k(D); Cfrob -> phi^{u-1}(C)
                Cfrob = Cfrob.frobenius();
                if (u > 2) {
                    WMatrix Dk = e.D;
                    for (int k = 0; k < u - 2; ++k) Dk = Dk.frobenius();
                    Dprod = Dprod * Dk;
                }
                F[u - 1] = e.B * Dprod * Cfrob;
                WMatrix Dp0 = e.D * Dprod; // prod_{0<=k<=u-2} phi^k(D)
                Fp[u - 1] = Dp0 * Cfrob;
            }
        }
        op.F = std::move(F);
        op.Fprime = std::move(Fp);
        return op;
    }

    // apply A = sum_u F_u phi^u to a d-vector of series
    std::vector<QSeries> apply(const std::vector<QSeries>& v) const {
        RingPtr ring = v[0].ring;
        std::vector<QSeries> out(d, QSeries::zero(ring));
        std::vector<QSeries> fv = v;
        for (int u = 1; u <= u_max; ++u) {
            for (auto& s : fv) s = phi_power_series(s);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    const WittElement& m = F[u - 1].at(i, j);
                    if (m.is_zero()) continue;
                    out[i] = out[i] + fv[j].scaled(RationalCoefficient::from_witt(m));
                }
        }
        return out;
    }
    std::vector<QSeries> apply_prime(const std::vector<QSeries>& v) const {
        RingPtr ring = v[0].ring;
        std::vector<QSeries> out(h - d, QSeries::zero(ring));
        std::vector<QSeries> fv = v;
        for (int u = 1; u <= u_max; ++u) {
            for (auto& s : fv) s = phi_power_series(s);
            for (int i = 0; i < h - d; ++i)
                for (int j = 0; j < d; ++j) {
                    const WittElement& m = Fprime[u - 1].at(i, j);
                    if (m.is_zero()) continue;
                    out[i] = out[i] + fv[j].scaled(RationalCoefficient::from_witt(m));
                }
        }
        return out;
    }
};

// l(X) = X + sum_{m>=1} A^m(X)/p^m, truncated at the ring cap. d = 1 only
// exposes the scalar; the vector form covers d <= 2.
inline std::vector<QSeries> build_logarithm(const FrobeniusOperator& op, RingPtr ring) {
    if (op.d > ring->nvars) throw spec_mismatch("build_logarithm: ring has too few variables");
    std::vector<QSeries> X(op.d);
    for (int i = 0; i < op.d; ++i) X[i] = QSeries::variable(ring, ring->var[i].name);
    std::vector<QSeries> l = X;
    std::vector<QSeries> w = X;
    RationalCoefficient invp = RationalCoefficient::from_int(ring->ctx, 1).divided_by_p_pow(1);
    int guard = 1;
    {
        long long q = ring->ctx->p;
        int maxcap = 0;
        for (int i = 0; i < ring->nvars; ++i) maxcap = std::max(maxcap, ring->var[i].cap);
        while (q < maxcap) {
            q *= ring->ctx->p;
            ++guard;
        }
        guard += 1;
    }
    for (int m = 1; m <= guard; ++m) {
        w = op.apply(w);
        for (auto& s : w) s = s.scaled(invp);
        bool all_zero = true;
        for (int i = 0; i < op.d; ++i) {
            l[i] = l[i] + w[i];
            all_zero = all_zero && w[i].is_zero();
        }
        if (all_zero) break;
    }
    return l;
}

inline QSeries build_logarithm_1d(const FrobeniusOperator& op, RingPtr ring) {
    if (op.d != 1) throw spec_mismatch("build_logarithm_1d: operator is not one-dimensional");
    return build_logarithm(op, ring)[0];
}

// m(X) = sum_u F'_u phi^u(l)/p
inline std::vector<QSeries> build_pseudo_logarithm(const FrobeniusOperator& op, const std::vector<QSeries>& l) {
    if (op.h == op.d) return {};
    if (op.Fprime.empty()) throw spec_mismatch("build_pseudo_logarithm: F' blocks absent");
    RationalCoefficient invp = RationalCoefficient::from_int(op.ctx, 1).divided_by_p_pow(1);
    auto out = op.apply_prime(l);
    for (auto& s : out) s = s.scaled(invp);
    return out;
}

// Honda type check: u = p - A is special by construction; verify u(l) = 0 mod p.
inline void check_honda_type(const FrobeniusOperator& op, const std::vector<QSeries>& l) {
    auto Al = op.apply(l);
    for (int i = 0; i < op.d; ++i) {
        QSeries u = l[i].scaled_int(op.ctx->p) - Al[i];
        for (const auto& [e, c] : u.terms) {
            if (c.is_zero()) continue;
            if (c.val < 1) throw integrality_failure("check_honda_type: (p - A)(l) not divisible by p");
        }
    }
}

struct FormalGroupData {
    FrobeniusOperator op;
    QSeries log;                  // d = 1 logarithm in X
    std::vector<QSeries> pseudo;  // h-d further Dieudonne basis entries
    ZSeries group_law;            // F(X, Y), integral
    ZSeries p_series;             // [p](X), integral
    RingPtr xring;                // univariate ring of the logarithm
    RingPtr xyring;               // bivariate ring of the group law
};

inline FormalGroupData build_group_from_log(const FrobeniusOperator& op, const QSeries& log, int cap);

// F(X,Y) = l^{-1}(l(X) + l(Y)) and [p] = l^{-1}(p l(X)); both must be integral.
inline FormalGroupData build_group(const FrobeniusOperator& op, int log_cap, int law_cap = -1) {
    if (op.d != 1) throw spec_mismatch("build_group: implemented for d = 1");
    if (law_cap < 0) law_cap = log_cap;
    auto xring = SeriesRingSpec::power(op.ctx, 'X', log_cap);
    return build_group_from_log(op, build_logarithm_1d(op, xring), law_cap);
}

// Solve l(g) = target for an integral g by degreewise correction, snapping
// each new slice to integral coefficients. Integrality of every slice is the
// assertion; snapping keeps precision losses from compounding across degrees
// (each pass pays only for l's own denominators).
inline ZSeries solve_log_equation_integral(const QSeries& l, const QSeries& target, const char* what) {
    RingPtr tring = target.ring;
    if (!l.get(Exp{0, 0, 0}).is_zero()) throw not_strict("solve_log_equation: l has a constant term");
    int maxcap = 0;
    for (int i = 0; i < tring->nvars; ++i) maxcap = std::max(maxcap, tring->var[i].cap);
    if (tring->total_cap < EXP_INF) maxcap = std::min(maxcap, tring->total_cap);

    QSeries lin(tring);
    for (const auto& [e, c] : target.terms)
        if (e.total() <= 1) lin.add_term(e, c);
    ZSeries g = to_integral(lin, what); // corrections fill in the higher degrees
    for (int iter = 0; iter <= maxcap + 2; ++iter) {
        QSeries err = eval_series(l, std::vector<QSeries>{to_rational(g)}) - target;
        // lowest total degree with a nonzero (and meaningful) coefficient
        int low = EXP_INF;
        for (const auto& [e, c] : err.terms) {
            if (c.is_zero()) continue;
            if (err.unc.hides(e, tring->nvars)) continue;
            low = std::min(low, e.total());
        }
        if (low == EXP_INF) break;
        QSeries slice(tring);
        slice.unc.p_floor = err.unc.p_floor;
        for (const auto& [e, c] : err.terms)
            if (e.total() == low) slice.add_term(e, c);
        g = g - to_integral(slice, what);
    }
    return g;
}

// Build a formal group directly from a known strict logarithm. The law and
// [p]-series are built in a ring capped at `cap`, which may be smaller than
// the logarithm's cap.
inline FormalGroupData build_group_from_log(const FrobeniusOperator& op, const QSeries& log, int cap) {
    FormalGroupData g;
    g.op = op;
    g.xring = log.ring;
    g.log = log;
    check_honda_type(op, {g.log});
    if (op.h > op.d) g.pseudo = build_pseudo_logarithm(op, {g.log});
    auto law_xring = SeriesRingSpec::power(op.ctx, 'X', cap);
    QSeries log_small = reringed(log, law_xring);
    g.xyring = SeriesRingSpec::bivariate(op.ctx, {'X', cap, 0}, {'Y', cap, 0}, cap);
    QSeries lx = eval_series(log_small, {QSeries::variable(g.xyring, 'X')});
    QSeries ly = eval_series(log_small, {QSeries::variable(g.xyring, 'Y')});
    g.group_law = solve_log_equation_integral(log_small, lx + ly, "group law");
    g.p_series = solve_log_equation_integral(log_small, log_small.scaled_int(op.ctx->p), "[p]-series");
    return g;
}

// reduce [p] mod p; support must be unit * X^{p^h} plus multiples of p^h-indexed
// exponents. Returns the observed height.
inline int height_diagnostic(const ZSeries& p_series) {
    CtxPtr ctx = p_series.ring->ctx;
    i64 p = ctx->p;
    int lowest = EXP_INF;
    for (const auto& [e, c] : p_series.terms) {
        if (c.valuation() >= 1) continue; // zero mod p
        lowest = std::min(lowest, e.e0);
    }
    if (lowest == EXP_INF) throw height_undetectable("height: [p] = 0 mod p at this cap");
    int hobs = 0;
    i64 q = 1;
    while (q < lowest) {
        q *= p;
        ++hobs;
    }
    if (q != lowest) throw height_undetectable("height: lowest term of [p] mod p is not a p-power");
    if (p_series.ring->var[0].cap <= lowest) throw height_undetectable("height: cap too small");
    for (const auto& [e, c] : p_series.terms) {
        if (c.valuation() >= 1) continue;
        if (e.e0 % q != 0) throw height_undetectable("height: support not in p^h steps");
    }
    return hobs;
}

// Dieudonne-basis consistency check: E^{-1} ((phi/p) l ; phi m) = ((A/p) l ; m).
struct FrobFormReport {
    bool pass = true;
    std::string detail;
};

inline FrobFormReport check_frob_form(const FormalGroupData& g) {
    if (!g.op.blocks) throw spec_mismatch("check_frob_form: operator has no E blocks");
    const EBlocks& eb = *g.op.blocks;
    CtxPtr ctx = g.op.ctx;
    int d = g.op.d, h = g.op.h;
    RationalCoefficient invp = RationalCoefficient::from_int(ctx, 1).divided_by_p_pow(1);

    std::vector<QSeries> top(d), bottom(h - d);
    std::vector<QSeries> phl(d), phm(h - d);
    for (int i = 0; i < d; ++i) phl[i] = phi_power_series(g.log).scaled(invp);
    for (int i = 0; i < h - d; ++i) phm[i] = phi_power_series(g.pseudo[i]);

    auto mat_apply = [&](const WMatrix& M, const std::vector<QSeries>& u, const std::vector<QSeries>& v,
                         int row_count) {
        std::vector<QSeries> out(row_count, QSeries::zero(g.log.ring));
        for (int i = 0; i < row_count; ++i) {
            for (size_t j = 0; j < u.size(); ++j)
                out[i] = out[i] + u[j].scaled(RationalCoefficient::from_witt(M.at(i, static_cast<int>(j))));
        }
        return out;
    };
    // top rows: A (phi/p)l + B phi(m); bottom rows: C (phi/p)l + D phi(m)
    std::vector<QSeries> lhs_top = mat_apply(eb.A, phl, {}, d);
    std::vector<QSeries> lhs_bot = mat_apply(eb.C, phl, {}, h - d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < h - d; ++j)
            lhs_top[i] = lhs_top[i] + phm[j].scaled(RationalCoefficient::from_witt(eb.B.at(i, j)));
    for (int i = 0; i < h - d; ++i)
        for (int j = 0; j < h - d; ++j)
            lhs_bot[i] = lhs_bot[i] + phm[j].scaled(RationalCoefficient::from_witt(eb.D.at(i, j)));

    auto rhs_top = g.op.apply({g.log});
    for (auto& s : rhs_top) s = s.scaled(invp);

    FrobFormReport rep;
    for (int i = 0; i < d; ++i)
        if (!equal_mod_uncertainty(lhs_top[i], rhs_top[i])) {
            rep.pass = false;
            rep.detail = "top block mismatch";
        }
    for (int i = 0; i < h - d; ++i)
        if (!equal_mod_uncertainty(lhs_bot[i], g.pseudo[i])) {
            rep.pass = false;
            rep.detail = "bottom block mismatch";
        }
    return rep;
}

// ----------------- approximated period matrix -----------------

struct PeriodMatrixApprox {
    int M = 1;               // torsion level
    i64 e = 1;               // absolute ramification index of K
    RingPtr yring;           // Laurent ring in Y used by every entry
    std::vector<std::vector<QSeries>> V;          // h x h
    std::vector<std::vector<QSeries>> V_inv;      // belt-graded Laurent inverse
    std::vector<std::vector<QSeries>> V_principal; // exponents <= 0 of V_inv
    int h = 1;
};

inline QSeries principal_part(const QSeries& s) {
    QSeries out(s.ring);
    out.unc = s.unc;
    for (const auto& [e, c] : s.terms)
        if (e.e0 <= 0) out.add_term(e, c);
    return out;
}

// compose a univariate X-series with a Y-series with zero constant term
inline QSeries compose_with_point(const QSeries& xs, const QSeries& beta) {
    return eval_series(xs, {beta});
}

inline PeriodMatrixApprox build_period_matrix(const FormalGroupData& g, int M, i64 e,
                                              const std::vector<QSeries>& lifts, RingPtr yring) {
    int h = g.op.h, d = g.op.d;
    if (d != 1) throw spec_mismatch("build_period_matrix: d = 1 only");
    if (static_cast<int>(lifts.size()) != h) throw spec_mismatch("build_period_matrix: need h lifts");
    for (const auto& o : lifts)
        if (!o.get(Exp{0, 0}).is_zero()) throw spec_mismatch("build_period_matrix: lift with constant term");
    PeriodMatrixApprox pm;
    pm.M = M;
    pm.e = e;
    pm.h = h;
    pm.yring = yring;
    i64 pM = ipow(g.op.ctx->p, M);
    pm.V.assign(h, std::vector<QSeries>(h, QSeries::zero(yring)));
    for (int j = 0; j < h; ++j) {
        QSeries lo = compose_with_point(g.log, lifts[j]).scaled_int(pM);
        pm.V[0].at(j) = lo; // d = 1: one logarithm row
        for (int r = 0; r < h - d; ++r)
            pm.V[r + d].at(j) = compose_with_point(g.pseudo[r], lifts[j]).scaled_int(pM);
    }
    i64 kappa = e * (g.op.ctx->p - 1);
    if (h == 1) {
        pm.V_inv.assign(1, {belt_inverse(pm.V[0][0], kappa)});
    } else if (h == 2) {
        QSeries det = pm.V[0][0] * pm.V[1][1] - pm.V[0][1] * pm.V[1][0];
        QSeries dinv = belt_inverse(det, kappa);
        pm.V_inv.assign(2, std::vector<QSeries>(2, QSeries::zero(yring)));
        pm.V_inv[0][0] = pm.V[1][1] * dinv;
        pm.V_inv[0][1] = -(pm.V[0][1] * dinv);
        pm.V_inv[1][0] = -(pm.V[1][0] * dinv);
        pm.V_inv[1][1] = pm.V[0][0] * dinv;
    } else {
        throw spec_mismatch("build_period_matrix: h > 2 not supported");
    }
    pm.V_principal.assign(h, std::vector<QSeries>(h, QSeries::zero(yring)));
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j) pm.V_principal[i][j] = principal_part(pm.V_inv[i][j]);
    return pm;
}

// The multiplicative formal group with its classical logarithm; the operator
// is phi itself (F_1 = 1) and the identity frob_form check is trivial.
// log_cap controls the logarithm ring; law_cap the (more precision-hungry)
// group-law construction, whose reversion divides by factorials.
inline FormalGroupData gm_group(CtxPtr ctx, int log_cap, int law_cap = -1) {
    if (law_cap < 0) law_cap = log_cap;
    WMatrix one(1, 1, ctx);
    one.at(0, 0) = WittElement::one(ctx);
    EBlocks eb;
    eb.A = one;
    eb.B = WMatrix(1, 0, ctx);
    eb.C = WMatrix(0, 1, ctx);
    eb.D = WMatrix(0, 0, ctx);
    auto op = FrobeniusOperator::from_E_blocks(ctx, 1, 1, eb, 1);
    auto xring = SeriesRingSpec::power(ctx, 'X', log_cap);
    auto onex = ZSeries::constant(xring, 1) + ZSeries::variable(xring, 'X');
    QSeries log = log_one_unit(onex);
    return build_group_from_log(op, log, law_cap);
}

// (A/p) applied to the logarithm, as an X-series
inline QSeries phi_l_over_p_block(const FormalGroupData& g) {
    RationalCoefficient invp = RationalCoefficient::from_int(g.op.ctx, 1).divided_by_p_pow(1);
    auto Al = g.op.apply({g.log});
    return Al[0].scaled(invp);
}

// weight of a monomial in the residue-field valuation grading: X carries
// e*p/(p-1), Y carries 1; returned as a fraction over (p-1).
inline long long shadow_weight_num(int xexp, int yexp, i64 p, i64 e) {
    return static_cast<long long>(xexp) * e * p + static_cast<long long>(yexp) * (p - 1);
}

struct TauCongruenceReport {
    bool pass = true;
    std::vector<std::string> residuals;
};

// (tau - 1)(V^(-1) U) = X Y V^(-1) dU/dY modulo X*(positive part) + p^M.
inline TauCongruenceReport check_tau_congruence(const PeriodMatrixApprox& pm, const ZSeries& U_in,
                                                RingPtr xyring) {
    TauCongruenceReport rep;
    CtxPtr ctx = xyring->ctx;
    i64 p = ctx->p;
    int yi = xyring->index_of('Y');
    auto embed = [&](const QSeries& s) { return embed_univariate(s, xyring, 'Y'); };
    QSeries U = embed(to_rational(U_in));
    QSeries dU = embed(to_rational(U_in).derivative('Y'));
    QSeries xy = QSeries::variable(xyring, 'X') * QSeries::variable(xyring, 'Y');
    for (int i = 0; i < pm.h; ++i)
        for (int j = 0; j < pm.h; ++j) {
            QSeries K = embed(pm.V_principal[i][j]);
            QSeries lhs = tau_series(K * U) - K * U;
            QSeries rhs = xy * K * dU;
            QSeries diff = lhs - rhs;
            for (const auto& [e, c] : diff.terms) {
                if (c.is_zero() || c.val >= pm.M) continue;
                int a = e.get(1 - yi), n = e.get(yi);
                if (a >= 1 && shadow_weight_num(a - 1, n, p, pm.e) > 0) continue;
                std::ostringstream os;
                os << "entry (" << i << "," << j << ") term X^" << a << " Y^" << n << " val " << c.val;
                rep.residuals.push_back(os.str());
                rep.pass = false;
            }
        }
    return rep;
}

// diagnostic naive inverse (finitely many negative exponents, fraction field)
inline std::vector<std::vector<QSeries>> naive_period_inverse(const PeriodMatrixApprox& pm) {
    if (pm.h == 1) return {{naive_laurent_inverse(pm.V[0][0])}};
    if (pm.h == 2) {
        QSeries det = pm.V[0][0] * pm.V[1][1] - pm.V[0][1] * pm.V[1][0];
        QSeries dinv = naive_laurent_inverse(det);
        return {{pm.V[1][1] * dinv, -(pm.V[0][1] * dinv)}, {-(pm.V[1][0] * dinv), pm.V[0][0] * dinv}};
    }
    throw spec_mismatch("naive_period_inverse: h > 2 not supported");
}

} // namespace recip
