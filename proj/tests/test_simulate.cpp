#include <cmath>
#include <map>

#include "doctest.h"
#include "mrw/errors.hpp"
#include "mrw/simulate.hpp"
#include "mrw/zoo.hpp"
#include "test_util.hpp"

using namespace mrw;

TEST_CASE("constant walk partial sums") {
    Model m = build_model(zoo_single_state(Kernel::point(1.0)));
    Trajectory t = run_trajectory(m, 0, 5, 1);
    REQUIRE(t.horizon() == 5);
    for (int k = 0; k <= 5; ++k) CHECK(t.S(k) == k);
    for (int k = 1; k <= 5; ++k) CHECK(t.S(k) - t.S(k - 1) == t.X(k));
}

TEST_CASE("petal flower: S_n = n at even times") {
    Model m = build_model(zoo_from_string("petal-flower"));
    for (std::uint64_t seed : {1, 2, 3}) {
        Trajectory t = run_trajectory(m, 0, 6, seed);
        CHECK(t.S(2) == 2.0);
        CHECK(t.S(4) == 4.0);
        CHECK(t.S(6) == 6.0);
        CHECK(t.S(1) < 0.0);
    }
}

TEST_CASE("sisyphus: P(tau > 4) matches 4^-1.5 for two seeds") {
    Model m = build_model(zoo_sisyphus(0.5));
    for (std::uint64_t seed : {11, 12}) {
        CycleSampleConfig c;
        c.cycles = 1000000;
        c.seed = seed;
        c.max_len = 4;  // cycles longer than 4 are censored
        CycleStats cs = sample_cycles(m, c);
        double n = double(cs.size() + cs.censored);
        double p = std::pow(4.0, -1.5);
        double phat = cs.censored / n;
        CHECK(std::abs(phat - p) < 3 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("petal flower cycles: length 2, sum 2, D = 1/p of the visited petal") {
    Model m = build_model(zoo_from_string("petal-flower"));
    Trajectory t = run_trajectory(m, 0, 2000, 5);
    CycleStats cs = cycle_decompose(t, 0);
    CHECK(cs.size() == 1000);
    CHECK(cs.discarded == 0);
    for (std::size_t k = 0; k < cs.size(); ++k) {
        CHECK(cs.length[k] == 2);
        CHECK(cs.sum[k] == 2.0);
        State petal = t.states[2 * k + 1];
        CHECK(cs.down[k] == doctest::Approx(1.0 / testing::zipf2(petal)).epsilon(1e-14));
        CHECK(cs.down[k] >= std::max(0.0, -cs.sum[k]));
    }
}

TEST_CASE("trailing partial cycle is discarded") {
    Model m = build_model(zoo_from_string("petal-flower"));
    Trajectory t = run_trajectory(m, 0, 7, 5);
    CycleStats cs = cycle_decompose(t, 0);
    CHECK(cs.size() == 3);
    CHECK(cs.discarded == 1);
}

TEST_CASE("xlogx petal cycles: D = tau - 1") {
    Model m = build_model(zoo_from_string("gen-petal-xlogx"));
    Trajectory t = run_trajectory(m, 0, 20000, 8);
    CycleStats cs = cycle_decompose(t, 0);
    REQUIRE(cs.size() > 10);
    for (std::size_t k = 0; k < cs.size(); ++k) CHECK(cs.down[k] == double(cs.length[k] - 1));
}

TEST_CASE("stopping times of the constant walk at x = 2.5") {
    Model m = build_model(zoo_single_state(Kernel::point(1.0)));
    Trajectory t = run_trajectory(m, 0, 100, 1);
    StoppingRecord r = stopping_times(t, 2.5);
    CHECK(r.sigma_gt.value == 3);
    CHECK_FALSE(r.sigma_gt.censored);
    CHECK(r.N.value == 2);
    CHECK_FALSE(r.N.censored);
    CHECK(r.rho.value == 2);
    CHECK_FALSE(r.rho.censored);
    CHECK(r.sigma_min.value == 1);
    CHECK_FALSE(r.sigma_min.censored);
    // never at or below -2.5: censored at the horizon
    CHECK(r.sigma_le.censored);
    CHECK(r.sigma_le.value == 100);
}

TEST_CASE("petal flower: sigma>(0) = 2") {
    Model m = build_model(zoo_from_string("petal-flower"));
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Trajectory t = run_trajectory(m, 0, 10, seed);
        CHECK(stopping_times(t, 0.0).sigma_gt.value == 2);
    }
}

TEST_CASE("symmetric walk: law of sigma>(0) against Catalan numbers") {
    Model m = build_model(zoo_single_state(Kernel::parse("pm1")));
    const int N = 40000;
    std::map<std::int64_t, int> cnt;
    for (int k = 0; k < N; ++k) {
        Trajectory t = run_trajectory(m, 0, 64, trial_seed(77, k));
        StoppingRecord r = stopping_times(t, 0.0);
        if (!r.sigma_gt.censored) ++cnt[static_cast<std::int64_t>(r.sigma_gt.value)];
    }
    double catalan = 1;  // C_0
    for (int k = 1; k <= 6; ++k) {
        double p = catalan / std::pow(2.0, 2 * k - 1);
        double phat = cnt[2 * k - 1] / double(N);
        CHECK(std::abs(phat - p) < 4 * std::sqrt(p * (1 - p) / N));
        CHECK(cnt[2 * k] == 0);
        catalan = catalan * 2 * (2 * k - 1) / (k + 1);
    }
}

TEST_CASE("ladder records") {
    SUBCASE("constant walk: sigma_n = n, heights n") {
        Model m = build_model(zoo_single_state(Kernel::point(1.0)));
        LadderRecord L = ladder_process(run_trajectory(m, 0, 20, 1), 0);
        REQUIRE(L.asc_epochs.size() == 20);
        for (std::size_t n = 0; n < 20; ++n) {
            CHECK(L.asc_epochs[n] == std::int64_t(n + 1));
            CHECK(L.asc_heights[n] == double(n + 1));
        }
    }
    SUBCASE("petal flower: zeta_n = n, tau_n^> = 2n") {
        Model m = build_model(zoo_from_string("petal-flower"));
        LadderRecord L = ladder_process(run_trajectory(m, 0, 40, 2), 0);
        REQUIRE(L.zeta.size() == 20);
        for (std::size_t n = 0; n < 20; ++n) {
            CHECK(L.zeta[n] == std::int64_t(n + 1));
            CHECK(L.tau_gt[n] == std::int64_t(2 * (n + 1)));
        }
    }
    SUBCASE("symmetric walk: heights strictly increase and the sandwich holds") {
        Model m = build_model(zoo_single_state(Kernel::parse("pm1")));
        for (int k = 0; k < 10000; ++k) {
            LadderRecord L = ladder_process(run_trajectory(m, 0, 1000, trial_seed(5, k)), 0);
            for (std::size_t n = 1; n < L.asc_heights.size(); ++n) {
                REQUIRE(L.asc_heights[n] > L.asc_heights[n - 1]);
                REQUIRE(L.asc_epochs[n] > L.asc_epochs[n - 1]);
            }
            REQUIRE(L.sandwich_ok);
        }
    }
}

TEST_CASE("campaigns do not depend on the worker count") {
    Model m = build_model(zoo_from_string("sisyphus"));
    CampaignConfig c;
    c.horizon = 300;
    c.trials = 200;
    c.seed = 21;
    c.x_grid = {0.0, 2.0};
    auto same = [](const CampaignResult& a, const CampaignResult& b) {
        REQUIRE(a.trials.size() == b.trials.size());
        for (std::size_t i = 0; i < a.trials.size(); ++i) {
            CHECK(a.trials[i].final_s == b.trials[i].final_s);
            CHECK(a.trials[i].cycles == b.trials[i].cycles);
            for (std::size_t j = 0; j < a.trials[i].stops.size(); ++j) {
                CHECK(a.trials[i].stops[j].sigma_gt.value == b.trials[i].stops[j].sigma_gt.value);
                CHECK(a.trials[i].stops[j].rho.value == b.trials[i].stops[j].rho.value);
            }
        }
        CHECK(a.cycles.sum == b.cycles.sum);
    };
    c.workers = 1;
    CampaignResult a = run_campaign(m, c);
    c.workers = 8;
    CampaignResult b = run_campaign(m, c);
    same(a, b);
    same(a, run_campaign_serial(m, c));

    CycleSampleConfig cc;
    cc.cycles = 3000;
    cc.seed = 4;
    cc.workers = 1;
    CycleStats p = sample_cycles(m, cc);
    cc.workers = 8;
    CHECK(sample_cycles(m, cc).sum == p.sum);
    CHECK(sample_cycles_serial(m, cc).down == p.down);
}

TEST_CASE("sisyphus: mean of tau ^ H against the closed-form tail") {
    const std::int64_t H = 1000;
    Model m = build_model(zoo_sisyphus(1.0));
    CycleSampleConfig c;
    c.cycles = 100000;
    c.seed = 31;
    c.max_len = H;
    CycleStats cs = sample_cycles(m, c);
    double n = double(cs.size() + cs.censored);
    double s = 0, s2 = 0;
    for (auto l : cs.length) {
        s += double(l);
        s2 += double(l) * double(l);
    }
    s += double(cs.censored) * H;
    s2 += double(cs.censored) * H * H;
    double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    // E(tau ^ H) = sum_{n < H} P(tau > n), P(tau > n) = n^-2, P(tau > 0) = 1
    double exact = 1.0;
    for (std::int64_t k = 1; k < H; ++k) exact += 1.0 / double(k * k);
    CHECK(std::abs(mean - exact) < 3 * se);
}

TEST_CASE("petal flower: P(D > t) against the petal series") {
    Model m = build_model(zoo_from_string("petal-flower"));
    CycleSampleConfig c;
    c.cycles = 100000;
    c.seed = 41;
    CycleStats cs = sample_cycles(m, c);
    for (double t : {2.0, 10.0, 100.0}) {
        double p = 0;
        for (std::int64_t i = 1; i < 100000; ++i)
            if (1.0 / testing::zipf2(i) > t) p += testing::zipf2(i);
        // the remaining petals all have 1/p_0i > t
        p += 1.0 - [&] {
            double s = 0;
            for (std::int64_t i = 1; i < 100000; ++i) s += testing::zipf2(i);
            return s;
        }();
        double hits = 0;
        for (double d : cs.down) hits += d > t;
        double n = double(cs.size());
        CHECK(std::abs(hits / n - p) < 4 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("invalid inputs") {
    Model m = build_model(zoo_from_string("petal-flower"));
    Trajectory t = run_trajectory(m, 0, 10, 1);
    CHECK_THROWS_AS(stopping_times(t, -1.0), InvalidParameter);
}
