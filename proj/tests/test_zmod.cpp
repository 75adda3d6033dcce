#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "recip/zmod.hpp"

#include <random>
#include <set>

using namespace recip;

namespace {

// enumerate the full row span (small cases only)
std::set<std::vector<i64>> enumerate_span(const ZmodMatrix& M) {
    std::set<std::vector<i64>> span;
    std::vector<i64> coeff(M.rows, 0);
    while (true) {
        std::vector<i64> v(M.cols, 0);
        for (int i = 0; i < M.rows; ++i)
            for (int j = 0; j < M.cols; ++j)
                v[j] = addmod(v[j], mulmod(coeff[i], M.at(i, j), M.q), M.q);
        span.insert(v);
        int k = 0;
        while (k < M.rows && ++coeff[k] == M.q) coeff[k++] = 0;
        if (k == M.rows) break;
    }
    return span;
}

ZmodMatrix random_matrix(i64 p, int N, int r, int c, std::mt19937_64& rng) {
    ZmodMatrix m(p, N, r, c);
    for (auto& x : m.a) x = static_cast<i64>(rng() % static_cast<unsigned long long>(m.q));
    return m;
}

} // namespace

TEST_CASE("howell form span equality for [[3,0],[0,1]] over Z/9") {
    ZmodMatrix M(3, 2, 2, 2);
    M.at(0, 0) = 3;
    M.at(1, 1) = 1;
    auto h = howell_form(M);
    CHECK(enumerate_span(M) == enumerate_span(h.H));
    CHECK(span_log_size(h) == 3); // 27 elements: 3 * 9
}

TEST_CASE("howell of identity and zero") {
    auto id = ZmodMatrix::identity(3, 2, 3);
    auto h = howell_form(id);
    CHECK(h.H.rows == 3);
    CHECK(span_log_size(h) == 6);

    ZmodMatrix z(3, 2, 2, 2);
    CHECK(howell_form(z).H.rows == 0);
}

TEST_CASE("howell span equals input span on random matrices") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 15; ++trial) {
        auto M = random_matrix(3, 2, 3, 2, rng);
        auto h = howell_form(M);
        CHECK(enumerate_span(M) == enumerate_span(h.H));
        // membership both ways
        for (int i = 0; i < M.rows; ++i) {
            std::vector<i64> row(M.a.begin() + size_t(i) * M.cols, M.a.begin() + size_t(i + 1) * M.cols);
            CHECK(in_span(h, row));
        }
    }
}

TEST_CASE("kernel of [3] over Z/9") {
    ZmodMatrix M(3, 2, 1, 1);
    M.at(0, 0) = 3;
    auto K = kernel(M);
    auto h = howell_form(K);
    CHECK(span_log_size(h) == 1); // {0,3,6}
    CHECK(in_span(h, {3}));
    CHECK_FALSE(in_span(h, {1}));
}

TEST_CASE("kernel of an invertible matrix is trivial") {
    ZmodMatrix M(3, 2, 2, 2);
    M.at(0, 0) = 1;
    M.at(0, 1) = 4;
    M.at(1, 0) = 2;
    M.at(1, 1) = 1; // det = 1-8 = -7, unit mod 3
    auto K = kernel(M);
    CHECK(span_log_size(howell_form(K)) == 0);
}

TEST_CASE("kernel agrees with brute force on random 4x4 over Z/9") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 6; ++trial) {
        auto M = random_matrix(3, 2, 4, 4, rng);
        auto K = kernel(M);
        auto h = howell_form(K);
        // brute force: all 9^4 vectors
        i64 count = 0;
        std::vector<i64> v(4, 0);
        while (true) {
            auto img = M.apply(v);
            bool zero = true;
            for (i64 x : img) zero = zero && (x == 0);
            if (zero) {
                ++count;
                CHECK(in_span(h, v));
            }
            int k = 0;
            while (k < 4 && ++v[k] == 9) v[k++] = 0;
            if (k == 4) break;
        }
        CHECK(count == ipow(3, static_cast<int>(span_log_size(h))));
    }
}

TEST_CASE("kernel-image cardinality product for free domains") {
    std::mt19937_64 rng(23);
    for (int N : {1, 2}) {
        for (int trial = 0; trial < 8; ++trial) {
            auto M = random_matrix(3, N, 3, 3, rng);
            auto K = kernel(M);
            i64 kexp = span_log_size(howell_form(K));
            i64 imexp = span_log_size(howell_form(M.transpose()));
            CHECK(kexp + imexp == i64(3) * N);
        }
    }
}

TEST_CASE("subquotient orders") {
    // Z spans (Z/9)^1, B spans 3Z/9
    ZmodMatrix Z(3, 2, 1, 1), B(3, 2, 1, 1);
    Z.at(0, 0) = 1;
    B.at(0, 0) = 3;
    CHECK(subquotient_order(Z, B) == 1);
    CHECK(subquotient_order(Z, Z) == 0);
    ZmodMatrix C(3, 2, 1, 1);
    C.at(0, 0) = 2;
    CHECK_THROWS_AS(subquotient_order(B, C), not_a_submodule);
}

TEST_CASE("subquotient matches brute-force coset count over Z/27") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        auto B = random_matrix(3, 3, 2, 3, rng);
        // make Z = B plus extra generators so B is contained in Z
        auto Z = ZmodMatrix(3, 3, 3, 3);
        for (int j = 0; j < 3; ++j) {
            Z.at(0, j) = B.at(0, j);
            Z.at(1, j) = B.at(1, j);
            Z.at(2, j) = static_cast<i64>(rng() % 27);
        }
        auto sz = enumerate_span(Z).size();
        auto sb = enumerate_span(B).size();
        CHECK(subquotient_order(Z, B) == val_p(static_cast<i64>(sz / sb), 3));
    }
}

TEST_CASE("howell transform satisfies transform * M = H") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 12; ++trial) {
        auto M = random_matrix(3, 3, 3, 4, rng);
        auto h = howell_form(M);
        auto prod = h.transform * M;
        CHECK(prod.a == h.H.a);
    }
}
