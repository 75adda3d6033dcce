#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "recip/reciprocity.hpp"

#include <random>

using namespace recip;

namespace {

ZSeries random_one_unit(RingPtr ring, std::mt19937_64& rng, int terms = 6) {
    CtxPtr ctx = ring->ctx;
    ZSeries F = ZSeries::constant(ring, 1);
    F.add_term(Exp{0, 0, 0}, WittElement::from_int(ctx, ctx->p * static_cast<i64>(rng() % ctx->p)));
    for (int k = 1; k <= terms; ++k)
        F.add_term(Exp{k, 0, 0}, WittElement::from_int(ctx, static_cast<i64>(rng() % ctx->pN)));
    return F;
}

} // namespace

TEST_CASE("coleman bracket: diagonal vanishing and bilinearity") {
    auto pr = make_bracket_profile(3, 1, 1);
    auto ring = SeriesRingSpec::laurent(pr.ctx, 'X', pr.cap, pr.window);
    std::mt19937_64 rng(71);

    for (int i = 0; i < 4; ++i) {
        auto F = random_one_unit(ring, rng);
        auto G = random_one_unit(ring, rng);
        i64 fg = coleman_bracket(pr, F, G, 1, false).coords[0];
        i64 gf = coleman_bracket(pr, G, F, 1, false).coords[0];
        CHECK((fg + gf) % 3 == 0);
        i64 ff = coleman_bracket(pr, F, F, 1, false).coords[0];
        CHECK(ff == 0);
        // bilinearity
        auto F2 = random_one_unit(ring, rng);
        i64 prod = coleman_bracket(pr, F * F2, G, 1, false).coords[0];
        i64 sum = (coleman_bracket(pr, F, G, 1, false).coords[0] +
                   coleman_bracket(pr, F2, G, 1, false).coords[0]) % 3;
        CHECK(prod == sum);
    }
    // cap stability is a mandatory postcondition
    auto F = random_one_unit(ring, rng);
    auto G = random_one_unit(ring, rng);
    auto res = coleman_bracket(pr, F, G, 1, true);
    CHECK(res.cap_stable);
}

TEST_CASE("bv bracket: norm-argument oracle and basic identities") {
    auto sc = make_gm_scenario(3, 1);
    auto pr = BracketProfile{sc.ctx, sc.yring->var[0].cap, sc.yring->var[0].window_low};
    auto one = ZSeries::constant(sc.yring, 1);
    auto Y = ZSeries::variable(sc.yring, 'Y');

    // [Y, Y]_1 = 0 since L(Y) = 0 kills both terms
    CHECK(bv_bracket(pr, Y, Y, 1, sc.s, false).coords[0] == 0);

    // [1+Y, Y]_1 = 0: the uniformizer is a norm from the next cyclotomic layer
    CHECK(bv_bracket(pr, one + Y, Y, 1, sc.s, false).coords[0] == 0);

    std::mt19937_64 rng(73);
    for (int i = 0; i < 5; ++i) {
        auto F = random_one_unit(sc.yring, rng);
        auto G = random_one_unit(sc.yring, rng);
        i64 fg = bv_bracket(pr, F, G, 1, sc.s, false).coords[0];
        i64 gf = bv_bracket(pr, G, F, 1, sc.s, false).coords[0];
        CHECK((fg + gf) % 3 == 0);
    }
    // Steinberg [F, 1-F] = 0 for admissible F with 1-F admissible
    for (int i = 0; i < 5; ++i) {
        ZSeries F = ZSeries::constant(sc.yring, -1);
        for (int k = 1; k <= 5; ++k)
            F.add_term(Exp{k, 0, 0}, WittElement::from_int(sc.ctx, 3 * static_cast<i64>(rng() % 81)));
        ZSeries oneminus = one - F;
        CHECK(bv_bracket(pr, F, oneminus, 1, sc.s, false).coords[0] == 0);
    }
    // cap stability
    auto res = bv_bracket(pr, one + Y, Y, 1, sc.s, true);
    CHECK(res.cap_stable);
}

TEST_CASE("bv bracket antisymmetry at n = 2") {
    auto sc = make_gm_scenario(3, 2);
    auto pr = BracketProfile{sc.ctx, sc.yring->var[0].cap, sc.yring->var[0].window_low};
    std::mt19937_64 rng(79);
    for (int i = 0; i < 3; ++i) {
        auto F = random_one_unit(sc.yring, rng);
        auto G = random_one_unit(sc.yring, rng);
        i64 fg = bv_bracket(pr, F, G, 2, sc.s, false).coords[0];
        i64 gf = bv_bracket(pr, G, F, 2, sc.s, false).coords[0];
        CHECK((fg + gf) % 9 == 0);
    }
}

TEST_CASE("formal bracket: zero point, additivity, agreement with bv") {
    auto sc = make_gm_scenario(3, 1);
    auto pr = BracketProfile{sc.ctx, sc.yring->var[0].cap, sc.yring->var[0].window_low};
    auto one = ZSeries::constant(sc.yring, 1);
    auto Y = ZSeries::variable(sc.yring, 'Y');

    CHECK(formal_bracket(sc, one + Y, QSeries::zero(sc.yring), false).coords[0] == 0);

    std::mt19937_64 rng(83);
    for (int i = 0; i < 4; ++i) {
        auto a1 = random_one_unit(sc.yring, rng);
        auto a2 = random_one_unit(sc.yring, rng);
        QSeries b(sc.yring);
        for (int k = 1; k <= 4; ++k)
            b.add_term(Exp{k, 0, 0}, RationalCoefficient::from_int(sc.ctx, static_cast<i64>(rng() % 27)));
        i64 s12 = formal_bracket(sc, a1 * a2, b, false).coords[0];
        i64 s1 = formal_bracket(sc, a1, b, false).coords[0];
        i64 s2 = formal_bracket(sc, a2, b, false).coords[0];
        CHECK(s12 == (s1 + s2) % 3);
        // the main consistency: path A reproduces the classical bracket
        ZSeries oneb = one + to_integral(b, "beta");
        CHECK(s1 == bv_bracket(pr, a1, oneb, 1, sc.s, false).coords[0]);
    }
    // alpha with a Y-power factor
    auto au = random_one_unit(sc.yring, rng).shifted('Y', 1);
    QSeries b(sc.yring);
    b.add_term(Exp{1, 0, 0}, RationalCoefficient::from_int(sc.ctx, 1));
    ZSeries oneb = one + to_integral(b, "beta");
    CHECK(formal_bracket(sc, au, b, false).coords[0] == bv_bracket(pr, au, oneb, 1, sc.s, false).coords[0]);
}

TEST_CASE("formal bracket integrality certificate fields") {
    auto sc = make_gm_scenario(3, 1);
    auto Y = ZSeries::variable(sc.yring, 'Y');
    QSeries b(sc.yring);
    b.add_term(Exp{1, 0, 0}, RationalCoefficient::from_int(sc.ctx, 1));
    auto res = formal_bracket(sc, Y, b, false);
    REQUIRE(res.pre_reduction.size() == 1);
    CHECK(res.pre_reduction[0].is_integral());
    CHECK(res.precision_floor >= sc.M);
}

TEST_CASE("path B agrees with path A and leaves an empty failure log") {
    auto sc = make_gm_scenario(3, 1);
    auto cfg = make_pathb_config(sc);
    std::mt19937_64 rng(89);
    auto one = ZSeries::constant(sc.yring, 1);

    // alpha = Y, beta = 0 gives the zero vector
    {
        auto rB = formal_bracket_cohomological(sc, cfg, ZSeries::variable(sc.yring, 'Y'), QSeries::zero(sc.yring));
        CHECK(rB.coords[0] == 0);
        CHECK(rB.failure_log.empty());
    }
    for (int i = 0; i < 5; ++i) {
        auto a = random_one_unit(sc.yring, rng);
        if (i % 2 == 1) a = a.shifted('Y', 1);
        QSeries b(sc.yring);
        for (int k = 1; k <= 3; ++k)
            b.add_term(Exp{k, 0, 0}, RationalCoefficient::from_int(sc.ctx, static_cast<i64>(rng() % 27)));
        auto rA = formal_bracket(sc, a, b, false);
        auto rB = formal_bracket_cohomological(sc, cfg, a, b);
        CHECK(rA.coords[0] == rB.coords[0]);
        CHECK(rB.failure_log.empty());
        CHECK_FALSE(rB.discard_log.empty());
    }
}

TEST_CASE("working precision policy matches the design formula") {
    CHECK(working_precision(3, 1) == 5);
    CHECK(working_precision(3, 2) == 7);
    CHECK(working_precision(5, 1) == 5);
}
