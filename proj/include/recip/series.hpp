#pragma once

// Truncated uni/bivariate power and Laurent series over W(F_{p^f}) or over
// p-adic rationals with valuation tracking. Exponents live in
// [window_low, cap) per variable; anything outside is truncated and the
// truncation recorded in a per-value uncertainty descriptor.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "recip/padic.hpp"

namespace recip {

constexpr int EXP_INF = 1 << 24;

struct VarSpec {
    char name = 'Y';
    int cap = 16;        // exclusive upper bound on exponents
    int window_low = 0;  // inclusive lower bound (0 for pure power series)
};

struct SeriesRingSpec {
    CtxPtr ctx;
    int nvars = 1;
    std::array<VarSpec, 3> var;
    int total_cap = EXP_INF; // optional bound on the total degree

    static std::shared_ptr<const SeriesRingSpec> power(CtxPtr ctx, char name, int cap) {
        auto r = std::make_shared<SeriesRingSpec>();
        r->ctx = ctx;
        r->nvars = 1;
        r->var[0] = {name, cap, 0};
        return r;
    }
    static std::shared_ptr<const SeriesRingSpec> laurent(CtxPtr ctx, char name, int cap, int window_low) {
        auto r = std::make_shared<SeriesRingSpec>();
        r->ctx = ctx;
        r->nvars = 1;
        r->var[0] = {name, cap, window_low};
        return r;
    }
    static std::shared_ptr<const SeriesRingSpec> bivariate(CtxPtr ctx, VarSpec v0, VarSpec v1,
                                                           int total_cap = EXP_INF) {
        auto r = std::make_shared<SeriesRingSpec>();
        r->ctx = ctx;
        r->nvars = 2;
        r->var[0] = v0;
        r->var[1] = v1;
        r->total_cap = total_cap;
        return r;
    }
    static std::shared_ptr<const SeriesRingSpec> trivariate(CtxPtr ctx, VarSpec v0, VarSpec v1, VarSpec v2,
                                                            int total_cap = EXP_INF) {
        auto r = std::make_shared<SeriesRingSpec>();
        r->ctx = ctx;
        r->nvars = 3;
        r->var[0] = v0;
        r->var[1] = v1;
        r->var[2] = v2;
        r->total_cap = total_cap;
        return r;
    }

    int index_of(char name) const {
        for (int i = 0; i < nvars; ++i)
            if (var[i].name == name) return i;
        throw spec_mismatch(std::string("ring has no variable ") + name);
    }
    bool same(const SeriesRingSpec& o) const {
        if (nvars != o.nvars || !ctx->same(*o.ctx)) return false;
        for (int i = 0; i < nvars; ++i)
            if (var[i].name != o.var[i].name || var[i].cap != o.var[i].cap ||
                var[i].window_low != o.var[i].window_low)
                return false;
        return true;
    }
};
using RingPtr = std::shared_ptr<const SeriesRingSpec>;

struct Exp {
    int e0 = 0, e1 = 0, e2 = 0;
    friend bool operator<(const Exp& a, const Exp& b) {
        if (a.e0 != b.e0) return a.e0 < b.e0;
        if (a.e1 != b.e1) return a.e1 < b.e1;
        return a.e2 < b.e2;
    }
    friend bool operator==(const Exp& a, const Exp& b) {
        return a.e0 == b.e0 && a.e1 == b.e1 && a.e2 == b.e2;
    }
    int get(int i) const { return i == 0 ? e0 : (i == 1 ? e1 : e2); }
    void set(int i, int v) { (i == 0 ? e0 : (i == 1 ? e1 : e2)) = v; }
    int total() const { return e0 + e1 + e2; }
};

// Truncation record: which ideal the value is only known modulo.
struct Uncertainty {
    int p_floor = APREC_INF;                                 // known mod p^{p_floor}
    std::array<int, 3> cap = {EXP_INF, EXP_INF, EXP_INF};    // exponents >= cap[i] unknown
    std::array<int, 3> win = {-EXP_INF, -EXP_INF, -EXP_INF}; // exponents < win[i] unknown
    int total_cap = EXP_INF;                                 // total degree >= this unknown

    static Uncertainty join(const Uncertainty& a, const Uncertainty& b) {
        Uncertainty u;
        u.p_floor = std::min(a.p_floor, b.p_floor);
        for (int i = 0; i < 3; ++i) {
            u.cap[i] = std::min(a.cap[i], b.cap[i]);
            u.win[i] = std::max(a.win[i], b.win[i]);
        }
        u.total_cap = std::min(a.total_cap, b.total_cap);
        return u;
    }
    bool hides(const Exp& e, int nvars) const {
        if (e.total() >= total_cap) return true;
        for (int i = 0; i < nvars; ++i)
            if (e.get(i) >= cap[i] || e.get(i) < win[i]) return true;
        return false;
    }
};

namespace coeff {

inline bool is_zero(const WittElement& c) { return c.is_zero(); }
inline bool is_zero(const RationalCoefficient& c) { return c.is_zero(); }
inline WittElement frob(const WittElement& c) { return c.frobenius(); }
inline RationalCoefficient frob(const RationalCoefficient& c) { return c.frobenius(); }
inline WittElement from_int(CtxPtr ctx, i64 v, const WittElement*) { return WittElement::from_int(ctx, v); }
inline RationalCoefficient from_int(CtxPtr ctx, i64 v, const RationalCoefficient*) {
    return RationalCoefficient::from_int(ctx, v);
}
inline int aprec(const WittElement& c) { return c.ctx->N; }
inline int aprec(const RationalCoefficient& c) { return c.aprec; }
inline int valuation(const WittElement& c) { return c.is_zero() ? APREC_INF : c.valuation(); }
inline int valuation(const RationalCoefficient& c) { return c.is_zero() ? APREC_INF : c.val; }

} // namespace coeff

template <class C>
class SeriesT {
  public:
    RingPtr ring;
    std::map<Exp, C> terms;
    Uncertainty unc;

    SeriesT() = default;
    explicit SeriesT(RingPtr r) : ring(std::move(r)) {}

    static SeriesT zero(RingPtr r) { return SeriesT(r); }
    static SeriesT constant(RingPtr r, i64 v) {
        SeriesT s(r);
        s.add_term({0, 0}, coeff::from_int(r->ctx, v, static_cast<const C*>(nullptr)));
        return s;
    }
    static SeriesT coeff_constant(RingPtr r, const C& c) {
        SeriesT s(r);
        s.add_term({0, 0}, c);
        return s;
    }
    static SeriesT variable(RingPtr r, char name, int power = 1) {
        SeriesT s(r);
        Exp e;
        e.set(r->index_of(name), power);
        s.add_term(e, coeff::from_int(r->ctx, 1, static_cast<const C*>(nullptr)));
        return s;
    }

    bool is_zero() const { return terms.empty(); }

    C get(const Exp& e) const {
        auto it = terms.find(e);
        if (it != terms.end()) return it->second;
        return coeff::from_int(ring->ctx, 0, static_cast<const C*>(nullptr));
    }
    C get2(int a, int b) const { return get(Exp{a, b}); }
    C get1(int a) const { return get(Exp{a, 0}); }

    // accumulate with truncation bookkeeping
    void add_term(const Exp& e, const C& c) {
        if (coeff::is_zero(c)) {
            note_aprec(c);
            return;
        }
        for (int i = 0; i < ring->nvars; ++i) {
            if (e.get(i) >= ring->var[i].cap) {
                unc.cap[i] = std::min(unc.cap[i], ring->var[i].cap);
                return;
            }
            if (e.get(i) < ring->var[i].window_low) {
                unc.win[i] = std::max(unc.win[i], ring->var[i].window_low);
                return;
            }
        }
        if (e.total() >= ring->total_cap) {
            unc.total_cap = std::min(unc.total_cap, ring->total_cap);
            return;
        }
        if (ring->nvars < 2 && e.e1 != 0) throw spec_mismatch("exponent in missing variable");
        if (ring->nvars < 3 && e.e2 != 0) throw spec_mismatch("exponent in missing variable");
        auto it = terms.find(e);
        if (it == terms.end()) {
            terms.emplace(e, c);
            note_aprec(c);
        } else {
            it->second = it->second + c;
            note_aprec(it->second);
            if (coeff::is_zero(it->second)) terms.erase(it);
        }
    }

    void note_aprec(const C& c) { unc.p_floor = std::min(unc.p_floor, coeff::aprec(c)); }

    friend SeriesT operator+(const SeriesT& a, const SeriesT& b) {
        check(a, b);
        SeriesT r = a;
        r.unc = Uncertainty::join(a.unc, b.unc);
        for (const auto& [e, c] : b.terms) r.add_term(e, c);
        return r;
    }
    friend SeriesT operator-(const SeriesT& a, const SeriesT& b) { return a + (-b); }
    SeriesT operator-() const {
        SeriesT r(ring);
        r.unc = unc;
        for (const auto& [e, c] : terms) r.terms.emplace(e, -c);
        return r;
    }
    friend SeriesT operator*(const SeriesT& a, const SeriesT& b) {
        check(a, b);
        SeriesT r(a.ring);
        r.unc = mul_uncertainty(a, b);
        for (const auto& [ea, ca] : a.terms)
            for (const auto& [eb, cb] : b.terms) {
                Exp e{ea.e0 + eb.e0, ea.e1 + eb.e1, ea.e2 + eb.e2};
                r.add_term(e, ca * cb);
            }
        return r;
    }
    SeriesT scaled(const C& c) const {
        SeriesT r(ring);
        r.unc = unc;
        for (const auto& [e, t] : terms) r.add_term(e, t * c);
        return r;
    }
    SeriesT scaled_int(i64 v) const {
        return scaled(coeff::from_int(ring->ctx, v, static_cast<const C*>(nullptr)));
    }

    SeriesT shifted(char name, int k) const { // multiply by var^k
        SeriesT r(ring);
        r.unc = unc;
        int i = ring->index_of(name);
        for (const auto& [e, c] : terms) {
            Exp e2 = e;
            e2.set(i, e.get(i) + k);
            r.add_term(e2, c);
        }
        if (k > 0 && unc.win[i] > -EXP_INF) r.unc.win[i] = unc.win[i] + k;
        if (k < 0 && unc.cap[i] < EXP_INF) r.unc.cap[i] = unc.cap[i] + k;
        return r;
    }

    // lowest exponent in variable `name` (EXP_INF if zero)
    int order(char name) const {
        int i = ring->index_of(name);
        int o = EXP_INF;
        for (const auto& [e, c] : terms) o = std::min(o, e.get(i));
        return o;
    }
    int degree(char name) const {
        int i = ring->index_of(name);
        int d = -EXP_INF;
        for (const auto& [e, c] : terms) d = std::max(d, e.get(i));
        return d;
    }

    SeriesT derivative(char name) const {
        SeriesT r(ring);
        r.unc = unc;
        int i = ring->index_of(name);
        for (const auto& [e, c] : terms) {
            int n = e.get(i);
            if (n == 0) continue;
            Exp e2 = e;
            e2.set(i, n - 1);
            r.add_term(e2, c * coeff::from_int(ring->ctx, n, static_cast<const C*>(nullptr)));
        }
        return r;
    }

    C residue(char name) const {
        int i = ring->index_of(name);
        C acc = coeff::from_int(ring->ctx, 0, static_cast<const C*>(nullptr));
        for (const auto& [e, c] : terms) {
            if (e.get(i) != -1) continue;
            if (ring->nvars == 2 && e.get(1 - i) != 0)
                throw spec_mismatch("residue: nonconstant coefficient in the other variable");
            acc = acc + c;
        }
        return acc;
    }

    // substitute series `img` for variable `name`; img must have positive order
    // in every variable unless this series has no negative powers of `name`.
    SeriesT substituted(char name, const SeriesT& img) const {
        int i = ring->index_of(name);
        // collect exponents of `name` and their single-variable polynomials
        // handled generically: sum over terms of coeff * img^{e_i} * other^{e_other}
        // negative powers need an inverse image, supplied by the caller via
        // substituted_with_inverse.
        return substituted_with_inverse(name, img, nullptr);
    }
    SeriesT substituted_with_inverse(char name, const SeriesT& img, const SeriesT* img_inv) const {
        check_ring_compat(img);
        int i = ring->index_of(name);
        std::map<int, SeriesT> pow_cache;
        pow_cache[0] = SeriesT::constant(img.ring, 1);
        std::function<const SeriesT&(int)> power = [&](int n) -> const SeriesT& {
            auto it = pow_cache.find(n);
            if (it != pow_cache.end()) return it->second;
            if (n > 0) {
                const SeriesT& prev = power(n - 1);
                auto r = pow_cache.emplace(n, prev * img);
                return r.first->second;
            }
            if (!img_inv) throw non_invertible("substitution at a negative power without an inverse image");
            const SeriesT& prev = power(n + 1);
            auto r = pow_cache.emplace(n, prev * (*img_inv));
            return r.first->second;
        };
        SeriesT out(img.ring);
        out.unc = Uncertainty::join(out.unc, unc);
        out.unc = Uncertainty::join(out.unc, img.unc);
        for (const auto& [e, c] : terms) {
            SeriesT term = power(e.get(i)).scaled(c);
            for (int j = 0; j < ring->nvars; ++j) {
                if (j == i || e.get(j) == 0) continue;
                term = term.shifted(ring->var[j].name, e.get(j));
            }
            out = out + term;
        }
        return out;
    }

    static void check(const SeriesT& a, const SeriesT& b) {
        if (!a.ring || !b.ring || !a.ring->same(*b.ring)) throw spec_mismatch("series ring mismatch");
    }
    void check_ring_compat(const SeriesT& other) const {
        if (!other.ring->ctx->same(*ring->ctx)) throw spec_mismatch("series context mismatch");
    }

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms) {
            if (!first) os << " + ";
            first = false;
            os << "(" << coeff_str(c) << ")";
            for (int i = 0; i < ring->nvars; ++i) {
                if (e.get(i) != 0) os << "*" << ring->var[i].name << "^" << e.get(i);
            }
        }
        if (first) os << "0";
        return os.str();
    }

  private:
    static Uncertainty mul_uncertainty(const SeriesT& a, const SeriesT& b) {
        // pessimistic: shift each cap by the other's order where finite
        Uncertainty u = Uncertainty::join(a.unc, b.unc);
        return u;
    }
    static std::string coeff_str(const WittElement& c) {
        std::ostringstream os;
        for (size_t i = 0; i < c.c.size(); ++i) {
            if (i) os << ",";
            os << c.c[i];
        }
        return os.str();
    }
    static std::string coeff_str(const RationalCoefficient& c) {
        std::ostringstream os;
        if (c.is_zero()) return "0";
        os << "p^" << c.val << "*";
        for (size_t i = 0; i < c.u.c.size(); ++i) {
            if (i) os << ",";
            os << c.u.c[i];
        }
        return os.str();
    }
};

using ZSeries = SeriesT<WittElement>;
using QSeries = SeriesT<RationalCoefficient>;

// copy a series into another ring over the same context (truncating per the
// target caps and windows); a wider target inherits the source bounds as
// uncertainty, since the data was only ever computed inside them
template <class C>
SeriesT<C> reringed(const SeriesT<C>& s, RingPtr target) {
    SeriesT<C> out(target);
    out.unc.p_floor = s.unc.p_floor;
    out.unc.total_cap = std::min(s.unc.total_cap, s.ring->total_cap);
    for (int i = 0; i < target->nvars && i < s.ring->nvars; ++i) {
        if (target->var[i].cap > s.ring->var[i].cap)
            out.unc.cap[i] = std::min(s.unc.cap[i], s.ring->var[i].cap);
        else
            out.unc.cap[i] = s.unc.cap[i];
        if (target->var[i].window_low < s.ring->var[i].window_low)
            out.unc.win[i] = std::max(s.unc.win[i], s.ring->var[i].window_low);
        else
            out.unc.win[i] = s.unc.win[i];
    }
    for (const auto& [e, c] : s.terms) out.add_term(e, c);
    return out;
}

// embed a univariate series as pure powers of the target's variable `name`
template <class C>
SeriesT<C> embed_univariate(const SeriesT<C>& s, RingPtr target, char name) {
    SeriesT<C> out(target);
    int ti = target->index_of(name);
    out.unc.p_floor = s.unc.p_floor;
    if (target->var[ti].cap > s.ring->var[0].cap)
        out.unc.cap[ti] = std::min(s.unc.cap[0], s.ring->var[0].cap);
    if (target->var[ti].window_low < s.ring->var[0].window_low)
        out.unc.win[ti] = std::max(s.unc.win[0], s.ring->var[0].window_low);
    for (const auto& [e, c] : s.terms) {
        Exp e2;
        e2.set(ti, e.e0);
        out.add_term(e2, c);
    }
    return out;
}

inline QSeries to_rational(const ZSeries& s) {
    QSeries r(s.ring);
    r.unc = s.unc;
    for (const auto& [e, c] : s.terms) r.add_term(e, RationalCoefficient::from_witt(c));
    return r;
}

// Assert every coefficient is p-integral and convert down. The first offending
// exponent is reported.
inline ZSeries to_integral(const QSeries& s, const char* what = "series") {
    ZSeries r(s.ring);
    r.unc = s.unc;
    for (const auto& [e, c] : s.terms) {
        if (c.aprec <= 0) {
            std::ostringstream os;
            os << what << ": precision exhausted (floor " << c.aprec << ") at exponent (" << e.e0 << ","
               << e.e1 << ")";
            throw precision_exhausted(os.str());
        }
        if (!c.is_integral()) {
            std::ostringstream os;
            os << what << ": non-integral coefficient (valuation " << c.val << ") at exponent (" << e.e0
               << "," << e.e1 << ")";
            throw integrality_failure(os.str());
        }
        r.add_term(e, c.to_witt());
        r.unc.p_floor = std::min(r.unc.p_floor, c.aprec);
    }
    return r;
}

// equality modulo the joint uncertainty ideal and modulo p^{p_bound}
template <class C>
bool equal_mod_uncertainty(const SeriesT<C>& a, const SeriesT<C>& b, int p_bound = APREC_INF) {
    SeriesT<C> d = a - b;
    int floor = std::min(p_bound, d.unc.p_floor);
    for (const auto& [e, c] : d.terms) {
        if (d.unc.hides(e, d.ring->nvars)) continue;
        if (coeff::is_zero(c)) continue;
        if (coeff::valuation(c) >= floor) continue;
        return false;
    }
    return true;
}

} // namespace recip
