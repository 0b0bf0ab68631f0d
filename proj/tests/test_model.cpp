#include <cmath>

#include "doctest.h"
#include "mrw/errors.hpp"
#include "mrw/model.hpp"
#include "mrw/simulate.hpp"
#include "mrw/spec_io.hpp"
#include "mrw/zoo.hpp"
#include "test_util.hpp"

using namespace mrw;

namespace {

ModelSpec two_state(const std::string& p12, const std::string& p21) {
    bool swap = p12 == "1";
    std::string j = swap ? R"({"name": "two", "states": ["1", "2"],
        "transitions": {"1": {"2": "1"}, "2": {"1": "1"}},
        "kernels": {"1->2": 1, "2->1": "-1"}})"
                         : R"({"name": "two", "states": ["1", "2"],
        "transitions": {"1": {"1": "1/2", "2": ")" + p12 + R"("}, "2": {"1": ")" + p21 + R"(", "2": "1/2"}},
        "kernels": {"1->2": 1, "2->1": "-1", "1->1": 0, "2->2": {"point": 0}}})";
    return parse_model_json(j);
}

}  // namespace

TEST_CASE("two-state swap chain has uniform stationary law") {
    Model m = build_model(two_state("1", "1"));
    REQUIRE(m.finite());
    CHECK(m.num_states() == 2);
    CHECK(m.stationary().pi[0] == doctest::Approx(0.5));
    CHECK(m.stationary().pi[1] == doctest::Approx(0.5));
    REQUIRE(m.stationary().exact.size() == 2);
    CHECK(m.stationary().exact[0] == "1/2");
}

TEST_CASE("petal flower stationary law is pi_0 = 1/2, pi_i = p_0i / 2") {
    Model m = build_model(zoo_from_string("petal-flower"));
    CHECK(m.pi(0) == doctest::Approx(0.5));
    for (State i : {1, 2, 5, 40}) CHECK(m.pi(i) == doctest::Approx(testing::zipf2(i) / 2).epsilon(1e-12));
}

TEST_CASE("random finite models: stationary law agrees with an independent linear solve") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Model m = testing::random_rational_model(seed * 7919, 5);
        auto P = m.matrix();
        Eigen::VectorXd pi = testing::stationary_oracle(P);
        const auto& law = m.stationary();
        CHECK(law.residual < 1e-12);
        for (std::size_t i = 0; i < P.size(); ++i) CHECK(law.pi[i] == doctest::Approx(pi(i)).epsilon(1e-12));
        // pi P = pi
        Eigen::RowVectorXd r = Eigen::Map<const Eigen::RowVectorXd>(law.pi.data(), P.size());
        CHECK((r * testing::to_eigen(P) - r).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reversible two-state chain is its own dual") {
    Model m = build_model(two_state("1/2", "1/2"));
    Model d = dual_model(m);
    CHECK(d.is_dual());
    auto P = m.matrix(), Q = d.matrix();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(Q[i][j] == doctest::Approx(P[i][j]).epsilon(1e-14));
}

TEST_CASE("dual of a random model is an involution") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Model m = testing::random_rational_model(seed * 104729, 4);
        Model dd = dual_model(dual_model(m));
        auto P = m.matrix(), Q = dd.matrix();
        for (std::size_t i = 0; i < P.size(); ++i)
            for (std::size_t j = 0; j < P.size(); ++j) CHECK(std::abs(P[i][j] - Q[i][j]) < 1e-12);
        // the dual rows are stochastic too
        for (const auto& row : dual_model(m).matrix()) {
            double s = 0;
            for (double p : row) s += p;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("petal flower dual increments are 2 + 1/p_0i out and -1/p_0i back") {
    Model d = dual_model(build_model(zoo_from_string("petal-flower")));
    Row r = d.chain().row(0, 1e-9);
    REQUIRE(r.edges.size() > 10);
    for (std::size_t k = 0; k < 10; ++k) {
        const Edge& e = r.edges[k];
        double p = testing::zipf2(e.to);
        CHECK(e.p == doctest::Approx(p).epsilon(1e-12));
        CHECK(e.k.point_value().value() == doctest::Approx(2.0 + 1.0 / p).epsilon(1e-12));
        Row back = d.chain().row(e.to, 1e-9);
        REQUIRE(back.edges.size() == 1);
        CHECK(back.edges[0].to == 0);
        CHECK(back.edges[0].k.point_value().value() == doctest::Approx(-1.0 / p).epsilon(1e-12));
    }
}

TEST_CASE("model validation errors") {
    CHECK_THROWS_AS(build_model(parse_model_json(
                        R"({"states": ["a", "b"], "transitions": {"a": {"a": "0.5", "b": "0.4"}, "b": {"a": "1"}},
                            "kernels": {"a->a": 0, "a->b": 0, "b->a": 0}})")),
                    NotStochastic);
    CHECK_THROWS_AS(build_model(parse_model_json(
                        R"({"states": ["a", "b"], "transitions": {"a": {"a": "1"}, "b": {"a": "1"}},
                            "kernels": {"a->a": 0, "b->a": 0}})")),
                    Reducible);
    CHECK_THROWS_AS(parse_model_json(R"({"states": ["a"], "transitions": {"a": {"a": "1"}}, "bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_model_json("{\"states\": [\"a\"],\n \"transitions\": {"), ConfigError);
    CHECK_THROWS_AS(zoo_from_string("petal-flower:q0=zipf2"), ConfigError);
    CHECK_THROWS_AS(zoo_from_string("no-such-model"), ConfigError);
    CHECK_THROWS_AS(zoo_from_string("gen-petal-min:alpha=0.5"), InvalidParameter);
}

TEST_CASE("missing kernel on a positive edge is rejected") {
    CHECK_THROWS(build_model(parse_model_json(
        R"({"states": ["a", "b"], "transitions": {"a": {"b": "1"}, "b": {"a": "1"}}, "kernels": {"a->b": 1}})")));
}

TEST_CASE("model file round trip keeps exact probabilities") {
    Model m = testing::random_rational_model(99, 4);
    ModelSpec back = parse_model_json(model_spec_to_json(m.spec()).dump());
    Model m2 = build_model(back);
    auto P = m.matrix(), Q = m2.matrix();
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < P.size(); ++j) CHECK(P[i][j] == Q[i][j]);
    CHECK(m2.stationary().exact == m.stationary().exact);
}

TEST_CASE("sisyphus: return tail n^-(1+alpha) from the transition probabilities") {
    for (double a : {0.5, 1.0}) {
        Model m = build_model(zoo_sisyphus(a));
        // P_0(tau > n) = p_01 p_12 ... p_{n-1,n}
        double prod = 1.0;
        for (State k = 0; k < 20; ++k) {
            Row r = m.chain().row(k, 1e-12);
            for (const auto& e : r.edges)
                if (e.to == k + 1) prod *= e.p;
            std::int64_t n = k + 1;
            CHECK(prod == doctest::Approx(std::pow(double(n), -1.0 - a)).epsilon(1e-12));
        }
    }
}

TEST_CASE("sisyphus cycle facts: sigma>(0) = 1 and S_tau < 1 + pi^2/6") {
    Model m = build_model(zoo_sisyphus(0.5));
    CycleSampleConfig c;
    c.cycles = 20000;
    c.seed = 3;
    c.max_len = 1 << 20;
    CycleStats cs = sample_cycles(m, c);
    for (std::size_t k = 0; k < cs.size(); ++k) {
        CHECK(cs.sum[k] < 1 + std::numbers::pi * std::numbers::pi / 6);
        CHECK(cs.down[k] == 0.0);  // every increment is positive
    }
    Trajectory t = run_trajectory(m, 0, 200, 9);
    CHECK(t.S(1) > 0.0);
}

TEST_CASE("generalized petal flowers") {
    SUBCASE("xlogx variant: S_tau = 1 and D = tau - 1") {
        Model m = build_model(zoo_from_string("gen-petal-xlogx"));
        CycleSampleConfig c;
        c.cycles = 5000;
        c.seed = 4;
        CycleStats cs = sample_cycles(m, c);
        REQUIRE(cs.size() > 4900);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            CHECK(cs.sum[k] == 1.0);
            CHECK(cs.down[k] == double(cs.length[k] - 1));
        }
    }
    SUBCASE("min variant: D = sum_{k < tau} k^(1/alpha)") {
        const double a = 1.5;
        Model m = build_model(zoo_from_string("gen-petal-min:alpha=1.5"));
        CycleSampleConfig c;
        c.cycles = 3000;
        c.seed = 5;
        CycleStats cs = sample_cycles(m, c);
        for (std::size_t k = 0; k < cs.size(); k += 7) {
            double d = 0;
            for (std::int64_t j = 1; j < cs.length[k]; ++j) d += std::pow(double(j), 1.0 / a);
            CHECK(cs.down[k] == doctest::Approx(d).epsilon(1e-12));
        }
    }
    SUBCASE("Gamma = 2 reduces to cycles of length 2") {
        Model m = build_model(zoo_generalized_petal_flower(make_table_law(2, {1.0}), GenPetalVariant::XLogX));
        CycleSampleConfig c;
        c.cycles = 500;
        CycleStats cs = sample_cycles(m, c);
        for (std::size_t k = 0; k < cs.size(); ++k) CHECK(cs.length[k] == 2);
    }
}

TEST_CASE("tail comparison: S_tau = (tau - 1) tau / 2") {
    Model m = build_model(zoo_tail_comparison(1.5));
    CycleSampleConfig c;
    c.cycles = 5000;
    c.seed = 6;
    CycleStats cs = sample_cycles(m, c);
    for (std::size_t k = 0; k < cs.size(); ++k) {
        double t = double(cs.length[k]);
        CHECK(cs.sum[k] == (t - 1) * t / 2);
    }
}

TEST_CASE("sigma-moment model: out-step f(i), return step -f(i) - i") {
    Model m = build_model(zoo_from_string("sigma-moment"));
    Row r = m.chain().row(0, 1e-9);
    REQUIRE(r.edges.size() > 5);
    int checked = 0;
    for (const Edge& e : r.edges) {
        if (e.to == 0) continue;
        Row back = m.chain().row(e.to, 1e-9);
        REQUIRE(back.edges.size() == 1);
        CHECK(back.edges[0].to == 0);
        DD sum = dd_add(e.k.point_value(), back.edges[0].k.point_value());
        CHECK(sum.value() == -double(e.to));
        if (++checked == 5) break;
    }
    CHECK(checked == 5);
}

TEST_CASE("petal flower series sum p log p diverges for p ~ 1/(i log^2 i)") {
    LawPtr l = make_inverse_log_tail_law(1);
    auto partial = [&](std::int64_t n) {
        double s = 0;
        for (std::int64_t i = 1; i <= n; ++i) {
            double p = l->pmf(i);
            if (p > 0) s += p * std::abs(std::log(p));
        }
        return s;
    };
    double a = partial(1000), b = partial(100000), c = partial(10000000);
    CHECK(b > a);
    CHECK(c > b);
    // growth per two decades does not die out
    CHECK(c - b > 0.5 * (b - a));
}

TEST_CASE("scaled model multiplies increments") {
    Model m = build_model(zoo_single_state(Kernel::parse("d(2@0.6;-1@0.4)")));
    Model s = scaled_model(m, -3.0);
    CHECK(s.chain().row(0, 1e-12).edges[0].k.mean() == doctest::Approx(-2.4));
}
