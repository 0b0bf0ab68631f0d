#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mrw/criteria.hpp"
#include "mrw/errors.hpp"
#include "mrw/spec_io.hpp"
#include "mrw/zoo.hpp"
#include "test_util.hpp"

using namespace mrw;

namespace {

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

CycleStats pool_of(const std::vector<double>& sums) {
    CycleStats cs;
    for (double s : sums) {
        CyclePath p;
        p.length = 1;
        p.sum = DD(s);
        p.down = std::max(0.0, -s);
        if (s < 0) p.negs = {{-s, 1}};
        cs.add(p);
    }
    return cs;
}

}  // namespace

TEST_CASE("exact distribution: null-homologous loop returns to a point mass") {
    Model m = build_model(zoo_two_state_loop());
    JointDistribution d = exact_distribution_Sn(m, 0, 2);
    REQUIRE(d.atoms.size() == 1);
    CHECK(d.atoms[0].state == 0);
    CHECK(d.atoms[0].value == 0.0);
    CHECK(d.atoms[0].prob == doctest::Approx(1.0));
}

TEST_CASE("exact distribution: three-petal flower has S_2 = 2") {
    Model m = build_model(zoo_petal_flower(make_table_law(1, {0.5, 0.3, 0.2})));
    JointDistribution d = exact_distribution_Sn(m, 0, 2);
    CHECK(d.total() == doctest::Approx(1.0));
    CHECK(d.cdf(2.0) - d.cdf(1.999) == doctest::Approx(1.0));
}

TEST_CASE("exact distribution: symmetric walk is a shifted binomial") {
    Model m = build_model(zoo_single_state(Kernel::parse("pm1")));
    JointDistribution d = exact_distribution_Sn(m, 0, 10);
    REQUIRE(d.atoms.size() == 11);
    for (const auto& a : d.atoms) {
        int k = static_cast<int>((a.value + 10) / 2);
        CHECK(a.prob == doctest::Approx(binom(10, k) / 1024.0).epsilon(1e-14));
    }
    auto path = exact_cdf_path(m, 0, 10, 0.0);
    CHECK(path[9] == doctest::Approx(d.cdf(0.0)).epsilon(1e-14));
}

TEST_CASE("exact distribution: state marginals are matrix powers") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Model m = testing::random_rational_model(seed * 31337, 5);
        Eigen::MatrixXd P = testing::to_eigen(m.matrix()), Pn = Eigen::MatrixXd::Identity(P.rows(), P.cols());
        for (int n = 1; n <= 6; ++n) {
            Pn = Pn * P;
            auto marg = exact_distribution_Sn(m, 0, n).state_marginal(m.num_states());
            for (Eigen::Index j = 0; j < P.cols(); ++j) CHECK(std::abs(marg[j] - Pn(0, j)) < 1e-12);
        }
    }
}

TEST_CASE("truncated means") {
    SUBCASE("S_tau = 2: A(x) = min(2, x)") {
        TruncatedMean tm({2.0}, {1.0});
        for (double x : {0.1, 1.0, 2.0, 5.0, 1e6}) CHECK(tm.A(x) == doctest::Approx(std::min(2.0, x)));
    }
    SUBCASE("symmetric +-1: A = 0") {
        TruncatedMean tm({1.0, -1.0}, {0.5, 0.5});
        for (double x : {0.5, 1.0, 3.0}) CHECK(tm.A(x) == doctest::Approx(0.0));
    }
    SUBCASE("linear between atoms") {
        TruncatedMean tm({1.0, 3.0}, {0.5, 0.5});
        CHECK(tm.pos(2.0) == doctest::Approx(0.5 * 1 + 0.5 * 2));
        CHECK(tm.pos(0.5) == doctest::Approx(0.5));
    }
    SUBCASE("table flags ultimately positive only for positive drift") {
        std::vector<double> v;
        for (int k = 0; k < 200; ++k) v.insert(v.end(), {2, 2, 2, -1, 3});
        auto up = truncated_means(pool_of(v));
        CHECK(up.ultimately_positive);
        auto sym = truncated_means(pool_of({1, -1, 1, -1}));
        CHECK_FALSE(sym.ultimately_positive);
        CHECK_FALSE(sym.ultimately_negative);
    }
}

TEST_CASE("tail comparison: E(S_tau ^ x) grows like x^((2 - alpha)/2)") {
    const double alpha = 1.5;
    Model m = build_model(zoo_tail_comparison(alpha));
    ExactOptions o;
    o.max_len = 4000;
    CycleStats pool = exact_cycle_law(m, 0, o);
    TruncatedMean tm(pool.sum, pool.weight);
    std::vector<double> xs, ys;
    for (double x = 100; x <= 10000; x *= 1.5) {
        xs.push_back(x);
        ys.push_back(tm.pos(x) + pool.residual * x);  // unenumerated cycles all have S_tau > x
    }
    CHECK(testing::loglog_slope(xs, ys) == doctest::Approx((2 - alpha) / 2).epsilon(0.1 / 0.25));
    CHECK(std::abs(testing::loglog_slope(xs, ys) - (2 - alpha) / 2) < 0.1);
}

TEST_CASE("J function") {
    TruncatedMean tm({2.0}, {1.0});
    JFunction j = make_J(tm);
    CHECK(eval_J(j, 0.0) == 1.0);
    for (double x : {0.5, 1.0, 2.0, 3.0, 10.0}) CHECK(eval_J(j, x) == doctest::Approx(std::max(1.0, x / 2)));
    JFunction deg = make_J(TruncatedMean({-1.0}, {1.0}));
    CHECK(deg.degenerate);
    CHECK(eval_J(deg, 3.5) == 3.5);
    CHECK(eval_J(deg, 0.0) == 1.0);
    CHECK(eval_J(make_J(tm, 0.0), 3.0) == 3.0);
    CHECK_THROWS_AS(make_J(tm, -1.0), InvalidParameter);
}

TEST_CASE("excursion measure: petal flower at alpha = 1 is the petal series") {
    Model m = build_model(zoo_from_string("petal-flower"));
    ExactOptions o;
    o.max_len = 2;
    CycleStats pool = exact_cycle_law(m, 0, o);
    std::vector<double> grid{1.5, 2.0, 10.0, 100.0, 1000.0};
    ExcursionMeasure e = excursion_measure(pool, 1.0, grid);
    CHECK(e.sandwich_ok);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double p = 0;
        for (std::int64_t i = 1; i < 200000; ++i)
            if (1.0 / testing::zipf2(i) > grid[k]) p += testing::zipf2(i);
        CHECK(e.tail[k] == doctest::Approx(e.p_down[k]).epsilon(1e-12));
        CHECK(std::abs(e.tail[k] - p) < 1e-5 + pool.residual);
    }
}

TEST_CASE("moment functionals") {
    SUBCASE("E J(D) = 1 for the constant walk") {
        Model m = build_model(zoo_single_state(Kernel::point(1.0)));
        CycleStats pool = exact_cycle_law(m, 0);
        JFunction j = make_J(TruncatedMean(pool.sum, pool.weight));
        MomentEstimate e = moment_functional(Functional::J_D, pool, j, 1.0);
        CHECK(e.estimate == 1.0);
        CHECK(e.status == Status::Holds);
        CHECK(e.id == "E_J_D");
    }
    SUBCASE("E_pi |X_1| = 3/2 for excursions of length 2") {
        Model m = build_model(zoo_generalized_petal_flower(make_table_law(2, {1.0}), GenPetalVariant::XLogX));
        CycleSampleConfig c;
        c.cycles = 1000;
        c.keep_increments = true;
        CycleStats pool = sample_cycles(m, c);
        JFunction j = make_J(TruncatedMean(pool.sum, pool.weight));
        double abs_sum = moment_functional(Functional::Abs_sum_excursion, pool, j, 1.0).estimate;
        double tau = moment_functional(Functional::Tau_pow, pool, j, 0.0).estimate;
        CHECK(tau == doctest::Approx(2.0));
        CHECK(abs_sum / tau == doctest::Approx(1.5));
    }
    SUBCASE("bounded samples hold, Pareto(0.8) samples fail") {
        std::vector<double> ones(5000, 1.0);
        CHECK(estimate_mean("ones", ones, nullptr, false, 0.0).status == Status::Holds);
        Engine g(3);
        std::vector<double> heavy;
        for (int k = 0; k < 20000; ++k) heavy.push_back(std::pow(uniform01(g), -1.0 / 0.8));
        MomentEstimate h = estimate_mean("heavy", heavy, nullptr, false, 0.0);
        CHECK(h.divergence_flag);
        CHECK(h.status == Status::Fails);
        CHECK(h.tail_index < 1.1);
    }
    SUBCASE("stopping moments with heavy censoring fail") {
        std::vector<CensoredStat> v;
        for (int k = 0; k < 1000; ++k) v.push_back({k < 300 ? 100.0 : 3.0, k < 300, 100});
        CHECK(stopping_moment("s", v, 1.0, false).status == Status::Fails);
        std::vector<CensoredStat> w(1000, CensoredStat{2.0, false, 100});
        CHECK(stopping_moment("s", w, 2.0, false).status == Status::Holds);
        CHECK(stopping_moment("s", w, 2.0, false).estimate == doctest::Approx(4.0));
    }
}

TEST_CASE("Cauchy tail test") {
    std::vector<double> conv, div;
    for (int k = 1; k <= 14; ++k) {
        conv.push_back(std::pow(2.0, -k));
        div.push_back(1.0);
    }
    CHECK(cauchy_tail_test(conv).converges == Status::Holds);
    CHECK(cauchy_tail_test(div).converges == Status::Fails);
}

TEST_CASE("Spitzer series") {
    SUBCASE("constant walk: finite sum over n <= x") {
        Model m = build_model(zoo_single_state(Kernel::point(1.0)));
        SpitzerSeries s = spitzer_series(m, 0, 3.0, 1.0, 64);
        CHECK(s.partial.back() == doctest::Approx(3.0));
        CHECK(s.test.converges == Status::Holds);
        SpitzerSeries h = spitzer_series(m, 0, 3.0, 0.5, 64);
        CHECK(h.partial.back() == doctest::Approx(1 + std::pow(2.0, -0.5) + std::pow(3.0, -0.5)));
    }
    SUBCASE("symmetric walk, alpha = 0: partial sums grow like (1/2) log n") {
        Model m = build_model(zoo_single_state(Kernel::parse("pm1")));
        SpitzerSeries s = spitzer_series(m, 0, 0.0, 0.0, 1 << 14);
        double a = s.partial[(1 << 10) - 1], b = s.partial[(1 << 14) - 1];
        double slope = (b - a) / (std::log(double(1 << 14)) - std::log(double(1 << 10)));
        CHECK(std::abs(slope - 0.5) < 0.05);
        CHECK(s.test.converges == Status::Fails);
    }
    SUBCASE("petal flower, alpha = 0: even times never contribute") {
        Model m = build_model(zoo_from_string("petal-flower"));
        SpitzerSeries s = spitzer_series(m, 0, 0.0, 0.0, 64);
        for (std::size_t n = 2; n <= 64; n += 2) CHECK(s.prob[n - 1] == 0.0);
        CHECK(s.prob[0] == doctest::Approx(1.0));
    }
    SUBCASE("exact and Monte Carlo agree on a finite model") {
        Model m = build_model(zoo_single_state(Kernel::parse("d(2@0.6;-1@0.4)")));
        SpitzerSeries e = spitzer_series(m, 0, 1.0, 1.0, 32);
        SpitzerOptions o;
        o.mode = "mc";
        o.trials = 20000;
        o.seed = 5;
        SpitzerSeries mc = spitzer_series(m, 0, 1.0, 1.0, 32, o);
        for (std::size_t n = 0; n < 32; n += 5) CHECK(std::abs(mc.prob[n] - e.prob[n]) < 4 * mc.se[n] + 1e-9);
    }
}

TEST_CASE("identities on a two-state chain") {
    Model m = build_model(parse_model_json(R"({"states": ["a", "b"],
        "transitions": {"a": {"a": "1/3", "b": "2/3"}, "b": {"a": "1/4", "b": "3/4"}},
        "kernels": {"a->a": 2, "a->b": -1, "b->a": 3, "b->b": -1}})"));
    IdentityReport r = identity_checks(m, 4);
    CHECK(r.exact);
    CHECK(r.duality_residual < 1e-12);
    CHECK(r.occupation_residual < 1e-10);
    CHECK(r.drift_residual < 1e-10);
    CHECK(r.kac_residual < 1e-10);
    CHECK(r.duality_length == 4);
    IdentityReport mc = identity_checks_mc(m, 0, 100000, 7);
    CHECK(std::abs(mc.drift_z) < 4);
    CHECK(std::abs(mc.occupation_z) < 4);
    CHECK(stationary_drift(m) == doctest::Approx((3.0 / 11) * (2.0 / 3 - 2.0 / 3) + (8.0 / 11) * (0.75 - 0.75)));
}

TEST_CASE("harmonic renewal ratio") {
    std::vector<double> y;
    for (double v = 10; v <= 100; v += 10) y.push_back(v);
    SUBCASE("constant walk: ratio floor(y)/y") {
        Model m = build_model(zoo_single_state(Kernel::point(1.0)));
        HarmonicRenewal h = harmonic_renewal_check(m, y, 200);
        for (std::size_t k = 0; k < y.size(); ++k) CHECK(h.ratio[k] == doctest::Approx(std::floor(y[k]) / y[k]));
        CHECK(h.bounded);
    }
    SUBCASE("{+2, -1} walk: bounded ratio") {
        Model m = build_model(zoo_single_state(Kernel::parse("d(2@0.6;-1@0.4)")));
        HarmonicRenewal h = harmonic_renewal_check(m, y, 2000);
        CHECK(h.bounded);
        CHECK(h.ratio_min > 0.0);
        MESSAGE("c = " << h.ratio_min << ", C = " << h.ratio_max);
    }
    SUBCASE("{+1, -1} walk with P(+1) = 0.7: bounded ratio") {
        Model m = build_model(zoo_single_state(Kernel::parse("d(1@0.7;-1@0.3)")));
        HarmonicRenewal h = harmonic_renewal_check(m, y, 2000);
        CHECK(h.bounded);
    }
    SUBCASE("no positive drift is rejected") {
        Model m = build_model(zoo_single_state(Kernel::parse("pm1")));
        CHECK_THROWS_AS(harmonic_renewal_check(m, y, 100), NotPositiveDivergent);
    }
}
