#pragma once

// Linear algebra over Z/p^N: Howell normal form, left/right kernels,
// span sizes and membership. Used for homology of truncated complexes.

#include <cstdint>
#include <vector>

#include "recip/padic.hpp"

namespace recip {

struct ZmodMatrix {
    i64 p = 0;
    int N = 0;
    i64 q = 0; // p^N
    int rows = 0, cols = 0;
    std::vector<i64> a; // row-major, reduced mod q

    ZmodMatrix() = default;
    ZmodMatrix(i64 p_, int N_, int r, int c) : p(p_), N(N_), q(ipow(p_, N_)), rows(r), cols(c), a(size_t(r) * c, 0) {}

    i64& at(int i, int j) { return a[size_t(i) * cols + j]; }
    i64 at(int i, int j) const { return a[size_t(i) * cols + j]; }

    static ZmodMatrix identity(i64 p, int N, int n) {
        ZmodMatrix m(p, N, n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    ZmodMatrix transpose() const {
        ZmodMatrix t(p, N, cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
        return t;
    }

    friend ZmodMatrix operator*(const ZmodMatrix& x, const ZmodMatrix& y) {
        ZmodMatrix r(x.p, x.N, x.rows, y.cols);
        for (int i = 0; i < x.rows; ++i)
            for (int k = 0; k < x.cols; ++k) {
                i64 v = x.at(i, k);
                if (v == 0) continue;
                for (int j = 0; j < y.cols; ++j)
                    r.at(i, j) = addmod(r.at(i, j), mulmod(v, y.at(k, j), r.q), r.q);
            }
        return r;
    }

    std::vector<i64> apply(const std::vector<i64>& v) const {
        std::vector<i64> r(rows, 0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                if (at(i, j) != 0 && v[j] != 0) r[i] = addmod(r[i], mulmod(at(i, j), v[j], q), q);
        return r;
    }
};

struct HowellForm {
    ZmodMatrix H;                 // nonzero canonical rows
    ZmodMatrix transform;         // transform * M = H
    std::vector<int> pivot_col;   // pivot column per row
    std::vector<int> pivot_val;   // p-valuation of pivot per row
};

// Howell normal form of the row span of M over Z/p^N, with the row-operation
// transform carried along (H may have more rows than M because of the
// annihilator saturation).
inline HowellForm howell_form(const ZmodMatrix& M) {
    i64 p = M.p, q = M.q;
    int N = M.N, cols = M.cols;
    int aug = M.rows; // augmented identity tracks the transform
    std::vector<std::vector<i64>> work;
    work.reserve(M.rows);
    for (int i = 0; i < M.rows; ++i) {
        std::vector<i64> row(M.a.begin() + size_t(i) * cols, M.a.begin() + size_t(i + 1) * cols);
        row.resize(cols + aug, 0);
        row[cols + i] = 1;
        work.push_back(std::move(row));
    }

    std::vector<std::vector<i64>> done;
    std::vector<int> pcols, pvals;

    for (int j = 0; j < cols; ++j) {
        // select a row with minimal valuation in column j
        int best = -1, bestv = N;
        for (size_t i = 0; i < work.size(); ++i) {
            if (work[i][j] == 0) continue;
            int v = val_p(work[i][j], p);
            if (v < bestv) {
                bestv = v;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) continue;
        std::vector<i64> piv = work[best];
        work.erase(work.begin() + best);
        // normalize pivot entry to p^v
        i64 unit = piv[j] / ipow(p, bestv);
        i64 uinv = unit_inverse_mod(unit, p, q);
        for (i64& x : piv) x = mulmod(x, uinv, q);
        i64 pv = ipow(p, bestv);
        // eliminate column j in the remaining working rows
        for (auto& row : work) {
            if (row[j] == 0) continue;
            i64 c = row[j] / pv; // divisible: bestv minimal
            for (int k = 0; k < cols + aug; ++k) row[k] = submod(row[k], mulmod(c, piv[k], q), q);
        }
        // reduce earlier pivot rows: entries in column j mod p^{bestv}
        for (auto& row : done) {
            if (row[j] == 0) continue;
            i64 c = row[j] / pv;
            if (c == 0) continue;
            for (int k = 0; k < cols + aug; ++k) row[k] = submod(row[k], mulmod(c, piv[k], q), q);
        }
        // annihilator row keeps the span Howell-saturated
        if (bestv > 0) {
            std::vector<i64> ann(cols + aug);
            i64 m = ipow(p, N - bestv);
            for (int k = 0; k < cols + aug; ++k) ann[k] = mulmod(piv[k], m, q);
            ann[j] = 0;
            // clear its entries at the earlier pivot columns
            for (size_t r = 0; r < done.size(); ++r) {
                int jc = pcols[r];
                i64 pvr = ipow(p, pvals[r]);
                if (ann[jc] == 0 || ann[jc] % pvr != 0) continue;
                i64 cc = ann[jc] / pvr;
                for (int k = 0; k < cols + aug; ++k) ann[k] = submod(ann[k], mulmod(cc, done[r][k], q), q);
            }
            bool nz = false;
            for (int k = j + 1; k < cols; ++k) nz = nz || ann[k] != 0;
            if (nz) work.push_back(std::move(ann));
        }
        done.push_back(std::move(piv));
        pcols.push_back(j);
        pvals.push_back(bestv);
    }

    HowellForm out;
    out.H = ZmodMatrix(p, N, static_cast<int>(done.size()), cols);
    out.transform = ZmodMatrix(p, N, static_cast<int>(done.size()), M.rows);
    for (size_t i = 0; i < done.size(); ++i) {
        for (int k = 0; k < cols; ++k) out.H.at(static_cast<int>(i), k) = done[i][k];
        for (int k = 0; k < aug; ++k) out.transform.at(static_cast<int>(i), k) = done[i][cols + k];
    }
    out.pivot_col = pcols;
    out.pivot_val = pvals;
    return out;
}

// Reduce v against a Howell form; returns the residual (zero iff member of the span).
inline std::vector<i64> howell_reduce(const HowellForm& h, std::vector<i64> v) {
    i64 p = h.H.p, q = h.H.q;
    for (int i = 0; i < h.H.rows; ++i) {
        int j = h.pivot_col[i];
        if (v[j] == 0) continue;
        i64 pv = ipow(p, h.pivot_val[i]);
        if (v[j] % pv != 0) continue; // leaves a residual; caught by the caller
        i64 c = v[j] / pv;
        for (int k = 0; k < h.H.cols; ++k) v[k] = submod(v[k], mulmod(c, h.H.at(i, k), q), q);
    }
    return v;
}

inline bool in_span(const HowellForm& h, const std::vector<i64>& v) {
    auto r = howell_reduce(h, v);
    for (i64 x : r)
        if (x != 0) return false;
    return true;
}

// log_p of the cardinality of the row span.
inline i64 span_log_size(const HowellForm& h) {
    i64 s = 0;
    for (int v : h.pivot_val) s += h.H.N - v;
    return s;
}

// Generators of the right kernel {v : Mv = 0}, as rows of a matrix.
inline ZmodMatrix kernel(const ZmodMatrix& M) {
    // left kernel of M^T via augmented Howell
    ZmodMatrix A = M.transpose(); // rows = cols(M)
    int m = A.rows, c = A.cols;
    ZmodMatrix G(M.p, M.N, m, c + m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < c; ++j) G.at(i, j) = A.at(i, j);
        G.at(i, c + i) = 1;
    }
    HowellForm h = howell_form(G);
    std::vector<std::vector<i64>> gens;
    for (int i = 0; i < h.H.rows; ++i) {
        bool zero_left = true;
        for (int j = 0; j < c; ++j)
            if (h.H.at(i, j) != 0) {
                zero_left = false;
                break;
            }
        if (!zero_left) continue;
        std::vector<i64> g(m);
        for (int k = 0; k < m; ++k) g[k] = h.H.at(i, c + k);
        gens.push_back(std::move(g));
    }
    ZmodMatrix K(M.p, M.N, static_cast<int>(gens.size()), m);
    for (size_t i = 0; i < gens.size(); ++i)
        for (int k = 0; k < m; ++k) K.at(static_cast<int>(i), k) = gens[i][k];
    return K;
}

// log_p of the index of span(B) inside span(Z); B must be a submodule of Z.
inline i64 subquotient_order(const ZmodMatrix& Z, const ZmodMatrix& B) {
    HowellForm hz = howell_form(Z);
    for (int i = 0; i < B.rows; ++i) {
        std::vector<i64> row(B.a.begin() + size_t(i) * B.cols, B.a.begin() + size_t(i + 1) * B.cols);
        if (!in_span(hz, row)) throw not_a_submodule("subquotient_order: B not contained in Z");
    }
    HowellForm hb = howell_form(B);
    return span_log_size(hz) - span_log_size(hb);
}

} // namespace recip
