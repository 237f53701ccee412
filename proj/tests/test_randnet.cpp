#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "restake/error.hpp"
#include "restake/randnet.hpp"
#include "restake/reference.hpp"
#include "restake/strategy.hpp"

using namespace restake;
using namespace testutil;

namespace {

randnet::ClearanceModel two_block() {
    return randnet::derive_clearance(reference::two_block_model());
}

randnet::SbmModel er_model(std::size_t n, double p, double alpha, double sigma_bar = 1.0,
                           double pi = 0.0) {
    randnet::SbmModel model;
    model.service_blocks = {{40, alpha, pi}};
    model.operator_counts = {n};
    model.p = {{p}};
    model.sigma_bar = sigma_bar;
    model.attacker_p = {0.5};
    return model;
}

}  // namespace

TEST_CASE("normal cdf agrees with the series reference to 1e-9") {
    long double worst = 0;
    for (int i = 0; i <= 1000; ++i) {
        long double z = -8.0L + 16.0L * i / 1000;
        long double err = fabsl((long double)randnet::normal_cdf((double)z) - normal_cdf_series(z));
        worst = std::max(worst, err);
    }
    CHECK(worst <= 1e-9L);
}

TEST_CASE("two-block clearance model matches the worked values") {
    auto m = two_block();
    CHECK(m.blocks[0].mu == doctest::Approx(18.0));
    CHECK(m.blocks[0].sigma == doctest::Approx(std::sqrt(12.6)).epsilon(1e-12));
    CHECK(m.blocks[1].mu == doctest::Approx(1.2));
    CHECK(m.blocks[1].sigma == doctest::Approx(std::sqrt(1.176)).epsilon(1e-12));
    CHECK(m.blocks[0].weight == doctest::Approx(0.5));

    CHECK(randnet::clearance(m, 0, 3.0) == doctest::Approx(1.673e-6).epsilon(0.03));
    CHECK(randnet::clearance(m, 1, 3.0) == doctest::Approx(0.95153).epsilon(1e-4));
    CHECK(randnet::success_single(m, 3.0) == doctest::Approx(0.47576).epsilon(1e-4));
    CHECK(randnet::success_k_identity(m, 3.0, 2) == doctest::Approx(0.30449).epsilon(1e-4));
    CHECK(randnet::success_sybil(m, 3.0, 2) == doctest::Approx(0.51626).epsilon(1e-4));
}

TEST_CASE("clearance hits one half exactly at the inflection stake") {
    auto m = two_block();
    // y with zero argument: (1-alpha)/alpha * y = mu.
    double y = m.blocks[0].mu * m.blocks[0].alpha / (1.0 - m.blocks[0].alpha);
    CHECK(randnet::clearance(m, 0, y) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("clearance is strictly increasing and bounded") {
    auto m = two_block();
    double prev = -1;
    for (double y = 0; y <= 60; y += 1.5) {
        double q = randnet::clearance(m, 0, y);
        CHECK(q >= 0);
        CHECK(q <= 1);
        CHECK(q > prev);
        prev = q;
    }
}

TEST_CASE("degenerate alpha is rejected") {
    randnet::SbmModel model = er_model(60, 0.3, 1.0);
    auto m = randnet::derive_clearance(model);
    CHECK_THROWS_AS(randnet::clearance(m, 0, 1.0), Error);
    CHECK_THROWS_AS(randnet::concavity_regime(m, 0), Error);
}

TEST_CASE("sybil success reduces to the single-identity curve at k = 1") {
    auto m = two_block();
    for (double x : {0.5, 1.0, 3.0, 10.0})
        CHECK(randnet::success_sybil(m, x, 1) ==
              doctest::Approx(randnet::success_single(m, x)).epsilon(1e-12));
    CHECK_THROWS_AS(randnet::success_sybil(m, 1.0, 0), Error);
}

TEST_CASE("inflection point and curvature classification") {
    // alpha = 2/3, mu = 18 gives T = 36.
    auto m = randnet::derive_clearance(er_model(60, 0.3, 2.0 / 3.0));
    auto regime = randnet::concavity_regime(m, 0);
    CHECK(regime.inflection == doctest::Approx(36.0));
    CHECK(regime.classify(30.0) == randnet::Curvature::Convex);
    CHECK(regime.classify(54.0) == randnet::Curvature::Concave);

    // Finite-difference second derivative changes sign across T.
    auto q = [&](double y) { return randnet::clearance(m, 0, y); };
    auto second = [&](double y) {
        double h = 0.05;
        return (q(y + h) - 2 * q(y) + q(y - h)) / (h * h);
    };
    CHECK(second(0.6 * regime.inflection) > 0);
    CHECK(second(1.5 * regime.inflection) < 0);
    CHECK(std::abs(second(regime.inflection)) < 1e-6);
}

TEST_CASE("minimum profitable sybil count on the two-block model") {
    auto m = two_block();
    auto result = randnet::min_sybil_count(m, 3.0, 16);
    REQUIRE(result.k_star.has_value());
    CHECK(*result.k_star == 2);
    CHECK(result.p_single == doctest::Approx(0.47576).epsilon(1e-4));
    // k* is minimal: every smaller k in the table shows no advantage.
    for (const auto& row : result.table)
        if (row.k < *result.k_star) CHECK_FALSE(row.advantage);

    // The sufficient bound always certifies an advantage when defined.
    REQUIRE(result.sufficient_bound.has_value());
    int kb = *result.sufficient_bound;
    if (kb <= result.k_max)
        CHECK(randnet::success_sybil(m, 3.0, kb) > result.p_single);
}

TEST_CASE("the advantage condition matches the threshold comparison") {
    auto m = two_block();
    auto result = randnet::min_sybil_count(m, 3.0, 12);
    for (const auto& row : result.table) {
        if (row.p_k <= 0 || row.p_k >= 1) continue;
        CHECK(row.advantage == (static_cast<double>(row.k) > row.threshold));
    }
}

TEST_CASE("homogeneous models show no sybil advantage in the concave regime") {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 50 + static_cast<std::size_t>(u(rng) * 450);
        double p = 0.1 + 0.8 * u(rng);
        double alpha = 0.3 + 0.5 * u(rng);
        auto m = randnet::derive_clearance(er_model(n, p, alpha, 0.5 + 1.5 * u(rng)));
        auto regime = randnet::concavity_regime(m, 0);
        for (int i = 0; i < 4; ++i) {
            double z = 0.1 + 3.9 * u(rng);  // concave side: q in (0.54, 0.99997)
            double x = (m.blocks[0].mu + z * m.blocks[0].sigma) * m.blocks[0].alpha /
                       (1.0 - m.blocks[0].alpha);
            REQUIRE(x > regime.inflection);
            double p_single = randnet::success_single(m, x);
            for (int k = 2; k <= 10; ++k) CHECK(randnet::success_sybil(m, x, k) < p_single);
        }
    }
}

TEST_CASE("jensen correction bound holds with background success") {
    // Footnote form: q(x/k) <= q(x)(1 - q(0))/k + q(0) on the concave side.
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 40; ++trial) {
        auto m = randnet::derive_clearance(
            er_model(30 + static_cast<std::size_t>(u(rng) * 100), 0.05 + 0.4 * u(rng),
                     0.3 + 0.4 * u(rng)));
        double q0 = randnet::clearance(m, 0, 0);
        if (q0 >= 1.0) continue;
        auto regime = randnet::concavity_regime(m, 0);
        for (int k = 2; k <= 6; ++k) {
            double x = regime.inflection * (1.1 + u(rng));
            double lhs = randnet::clearance(m, 0, x / k);
            double rhs = randnet::clearance(m, 0, x) * (1.0 - q0) / k + q0;
            CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("ER expected PNL vanishes on the knife edge and at zero stake") {
    auto m = randnet::derive_clearance(er_model(60, 0.3, 0.5, 1.0));
    double pi_edge = m.blocks[0].alpha * m.blocks[0].mu;
    CHECK(randnet::expected_pnl_er(m, 5.0, pi_edge, 1) == doctest::Approx(0.0));
    CHECK(randnet::expected_pnl_er(m, 0.0, 42.0, 1) == 0);
    CHECK_THROWS_AS(randnet::expected_pnl_er(two_block(), 1.0, 1.0, 1), Error);
}

TEST_CASE("splitting reduces ER expected PNL in the concave regime") {
    auto m = randnet::derive_clearance(er_model(60, 0.3, 0.5, 1.0));
    auto regime = randnet::concavity_regime(m, 0);
    double pi = m.blocks[0].alpha * m.blocks[0].mu * 1.5;  // profitable margin
    for (double factor : {1.1, 1.4, 2.0}) {
        double x = regime.inflection * factor;
        double base = randnet::expected_pnl_er(m, x, pi, 1);
        for (int k = 2; k <= 6; ++k) CHECK(randnet::expected_pnl_er(m, x, pi, k) < base);
    }
}

TEST_CASE("block separation admits a sybil PNL advantage") {
    auto m = two_block();
    // Margins: block 1 negative (10 - 12), block 2 positive (2 - 0.6).
    bool advantage = false;
    for (double x = 20; x <= 60 && !advantage; x += 2)
        for (int k = 2; k <= 8 && !advantage; ++k)
            if (randnet::expected_pnl_sbm(m, x, k) > randnet::expected_pnl_sbm(m, x, 1))
                advantage = true;
    CHECK(advantage);
}

TEST_CASE("sbm expected PNL reduces to ER and vanishes on the knife edge") {
    auto er = randnet::derive_clearance(er_model(60, 0.3, 0.5, 1.0, 11.0));
    for (double x : {5.0, 12.0, 20.0})
        CHECK(randnet::expected_pnl_sbm(er, x, 1) ==
              doctest::Approx(randnet::expected_pnl_er(er, x, 11.0, 1)).epsilon(1e-12));

    auto m = two_block();
    std::vector<double> knife = {m.blocks[0].alpha * m.blocks[0].mu,
                                 m.blocks[1].alpha * m.blocks[1].mu};
    CHECK(randnet::expected_pnl_sbm(m, 7.0, 1, &knife) == doctest::Approx(0.0));
}

TEST_CASE("pnl point bridges to the attack-level utilities") {
    RestakingGraph g = reference::overlap_graph();
    AttackSpec attack = reference::overlap_attack(g);

    // Pooled view of the overlap instance for the single-service attacker.
    std::vector<randnet::PnlService> pooled = {{4.0, 3.5, 14.0 / 15.0}};
    CHECK(randnet::pnl_point(1.0, pooled) ==
          doctest::Approx(utility_attack_level(g, attack, "v1", 1.0)).epsilon(1e-12));

    // Sole attacker at full clearance reduces to pi - alpha sigma_T.
    double alpha_sigma = 1.75;
    std::vector<randnet::PnlService> solo = {{2.0, 1.0, alpha_sigma / 1.0}};
    CHECK(randnet::pnl_point(1.0, solo) == doctest::Approx(2.0 - alpha_sigma).epsilon(1e-12));

    CHECK(randnet::pnl_point(0.0, pooled) == 0);
    std::vector<randnet::PnlService> broken = {{1.0, 0.0, 0.5}};
    CHECK_THROWS_AS(randnet::pnl_point(1.0, broken), Error);
}

TEST_CASE("success probabilities stay inside the unit interval") {
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 60; ++trial) {
        randnet::SbmModel model;
        model.service_blocks = {{30, 0.2 + 0.6 * u(rng), 1.0}, {30, 0.2 + 0.6 * u(rng), 1.0}};
        model.operator_counts = {20 + static_cast<std::size_t>(u(rng) * 100)};
        model.p = {{u(rng), u(rng)}};
        model.sigma_bar = 0.5 + u(rng);
        model.attacker_p = {0.1 + 0.9 * u(rng), 0.1 + 0.9 * u(rng)};
        auto m = randnet::derive_clearance(model);
        for (int i = 0; i < 5; ++i) {
            double x = 40.0 * u(rng);
            int k = 1 + static_cast<int>(u(rng) * 9);
            double ps = randnet::success_single(m, x);
            double pk = randnet::success_k_identity(m, x, k);
            double pp = randnet::success_sybil(m, x, k);
            for (double v : {ps, pk, pp}) {
                CHECK(v >= 0);
                CHECK(v <= 1);
            }
        }
    }
}
