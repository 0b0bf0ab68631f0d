#include "doctest.h"
#include "mrw/classify.hpp"
#include "mrw/errors.hpp"
#include "mrw/spec_io.hpp"
#include "mrw/zoo.hpp"

using namespace mrw;

namespace {

ClassifyConfig small(std::uint64_t seed) {
    ClassifyConfig c;
    c.seed = seed;
    c.trials = 400;
    c.cycles = 5000;
    return c;
}

Model zoo(const std::string& s) { return build_model(zoo_from_string(s)); }

}  // namespace

TEST_CASE("null homology") {
    SUBCASE("two-state loop is a coboundary with g = (0, 1)") {
        Model m = build_model(zoo_two_state_loop());
        NullHomology nh = null_homology_test(m, 0);
        CHECK(nh.null_homologous);
        CHECK(nh.subclass == "NH-2");
        REQUIRE(nh.g.size() == 2);
        CHECK(nh.g[0].second == 0.0);
        CHECK(nh.g[1].second == 1.0);
        CHECK(null_homology_test(m, 0, "mc").null_homologous);
    }
    SUBCASE("zero increments give g = 0") {
        NullHomology nh = null_homology_test(build_model(zoo_single_state(Kernel::point(0.0))), 0);
        CHECK(nh.null_homologous);
        CHECK(nh.subclass == "NH-1");
    }
    SUBCASE("petal flower is not null-homologous") {
        NullHomology nh = null_homology_test(zoo("petal-flower"), 0);
        CHECK_FALSE(nh.null_homologous);
        CHECK_FALSE(nh.reason.empty());
    }
    SUBCASE("birth-death chain without noise: g unbounded both ways") {
        NullHomology nh = null_homology_test(zoo("birth-death:y=0"), 0);
        CHECK(nh.null_homologous);
        CHECK(nh.subclass == "NH-5");
        CHECK(nh.advisory);
        CHECK_FALSE(nh.bounded_below);
        CHECK_FALSE(nh.bounded_above);
    }
    SUBCASE("classification refuses null-homologous input") {
        CHECK_THROWS_AS(fluctuation_verdict(build_model(zoo_two_state_loop()), 0, small(1)), NullHomologousInput);
    }
}

TEST_CASE("constant walk is PD by all three sources") {
    Verdict v = fluctuation_verdict(zoo("single-state:+1"), 0, small(2));
    CHECK(v.category == Category::PD);
    CHECK(v.embedded == "PD");
    CHECK(v.full_walk == "PD");
    CHECK(v.path == "PD");
    CHECK_FALSE(v.disagreement);
}

TEST_CASE("petal flowers") {
    SUBCASE("plain: embedded PD, walk Osc, dual PD") {
        Model m = zoo("petal-flower");
        Verdict v = fluctuation_verdict(m, 0, small(7));
        CHECK(v.category == Category::Osc);
        CHECK(v.embedded == "PD");
        CHECK(v.full_walk == "Osc");
        CHECK(v.disagreement);
        CHECK(fluctuation_verdict(dual_model(m), 0, small(7)).category == Category::PD);
    }
    SUBCASE("alternating: walk and dual Osc, embedded PD") {
        Model m = zoo("petal-flower-alt");
        Verdict v = fluctuation_verdict(m, 0, small(7));
        CHECK(v.category == Category::Osc);
        CHECK(v.embedded == "PD");
        CHECK(fluctuation_verdict(dual_model(m), 0, small(7)).category == Category::Osc);
    }
}

TEST_CASE("rate classification") {
    SUBCASE("fair {0, 2} walk: mu = 1 = E_pi X_1") {
        Trichotomy t = trichotomy_and_slln(zoo("single-state:d(0@0.5;2@0.5)"), 0, small(3));
        CHECK(t.rate_class == "linear-rate");
        CHECK(t.mu == doctest::Approx(1.0).epsilon(0.02));
        REQUIRE(t.stationary_mean);
        CHECK(*t.stationary_mean == 1.0);
        CHECK(t.stationary_mean_source == "exact");
        CHECK(t.mean_matches);
    }
    SUBCASE("petal flower: S_2n / 2n = 1") {
        Trichotomy t = trichotomy_and_slln(zoo("petal-flower"), 0, small(3));
        CHECK(t.rate_class == "linear-rate");
        CHECK(t.mu == 1.0);
        CHECK(t.abs_increment == Status::Fails);
    }
    SUBCASE("tail comparison: S_n / n grows") {
        ClassifyConfig cfg;
        cfg.seed = 3;
        Trichotomy t = trichotomy_and_slln(zoo("tail-comparison"), 0, cfg);
        CHECK(t.rate_class == "PD+");
        CHECK(trichotomy_and_slln(zoo("tail-comparison"), 0, small(3)).rate_class != "linear-rate");
        CHECK(t.abs_cycle_sum == Status::Fails);
    }
    SUBCASE("birth-death: rate 0 while E_pi |X_1| is infinite") {
        Trichotomy t = trichotomy_and_slln(zoo("birth-death"), 0, small(3));
        CHECK(t.rate_class == "linear-rate");
        CHECK(std::abs(t.mu) < 0.05);
        CHECK(t.abs_increment == Status::Fails);
        CHECK_FALSE(t.stationary_mean);
    }
}

TEST_CASE("finite three-state model with bounded increments: finite-state conditions hold") {
    Model m = build_model(parse_model_json(R"({"name": "three", "states": ["a", "b", "c"],
        "transitions": {"a": {"b": "1/2", "c": "1/2"}, "b": {"a": "1/3", "c": "2/3"}, "c": {"a": "3/4", "b": "1/4"}},
        "kernels": {"a->b": 2, "a->c": -1, "b->a": 1, "b->c": {"discrete": {"values": [3, -1], "probs": [0.5, 0.5]}},
                    "c->a": 1, "c->b": -2}})"));
    TheoremReport r = theorem_suite(m, 0, 1.0, small(4), {"finite-state"});
    CHECK(r.red_alarms == 0);
    REQUIRE_FALSE(r.conditions.empty());
    for (const char* id : {"pi_J", "pi_J_pow", "pi_D_pow_J"}) {
        const Condition* c = r.find(id);
        REQUIRE(c);
        CHECK(c->status == Status::Holds);
    }
}

TEST_CASE("sigma-moment model: finite first-passage moments while the walk oscillates") {
    Model m = zoo("sigma-moment");
    ClassifyConfig cfg = small(5);
    Samples s = collect_samples(m, 0, cfg);
    CHECK(fluctuation_verdict(m, s, cfg).category == Category::Osc);
    TheoremReport r = theorem_suite(m, s, 1.0, cfg);
    CHECK(r.red_alarms == 0);
    const Condition* c = r.find("sigma_gt_pow");
    REQUIRE(c);
    CHECK(c->status != Status::Fails);
}

TEST_CASE("heavy minimum model: overshoot moments finite while E D^alpha J(D) diverges") {
    Model m = zoo("gen-petal-min:alpha=1.5");
    TheoremReport r = theorem_suite(m, 0, 1.5, small(6), {"minimum"});
    CHECK(r.red_alarms == 0);
    const Condition* b = r.find("D_pow_J_D");
    const Condition* c = r.find("min_pow");
    const Condition* o = r.find("overshoot_pow");
    REQUIRE(b);
    REQUIRE(c);
    REQUIRE(o);
    CHECK(b->status == Status::Fails);
    CHECK(c->status != Status::Holds);
    CHECK(o->status == Status::Holds);
}

TEST_CASE("suite monotonicity and alarms across the zoo") {
    for (const auto& e : zoo_catalog()) {
        if (e.name == "two-state-loop") continue;
        Model m = zoo(e.name);
        ClassifyConfig cfg = small(8);
        Samples s = collect_samples(m, m.default_anchor(), cfg);
        TheoremReport r = theorem_suite(m, s, 1.0, cfg, {"last-exit", "chains"});
        INFO(e.name);
        CHECK(r.red_alarms == 0);
        const Condition* ta = r.find("type_alpha");
        const Condition* b = r.find("J_D_pow");
        const Condition* sg = r.find("sigma_gt_pow");
        REQUIRE(ta);
        if (b && sg && ta->status == Status::Holds)
            CHECK_FALSE((b->status == Status::Holds && sg->status == Status::Fails));
    }
}

TEST_CASE("verdicts are invariant under positive scaling and swap under reflection") {
    for (const char* name : {"single-state:d(2@0.6;-1@0.4)", "affine-env", "petal-flower", "sisyphus"}) {
        INFO(name);
        Model m = zoo(name);
        ClassifyConfig cfg = small(9);
        Category c = fluctuation_verdict(m, 0, cfg).category;
        CHECK(fluctuation_verdict(scaled_model(m, 3.0), 0, cfg).category == c);
        Category r = fluctuation_verdict(scaled_model(m, -1.0), 0, cfg).category;
        Category want = c == Category::PD ? Category::ND : c == Category::ND ? Category::PD : c;
        CHECK(r == want);
    }
}

TEST_CASE("suite configuration errors") {
    Model m = zoo("single-state:+1");
    CHECK_THROWS_AS(theorem_suite(m, 0, 1.0, small(1), {"no-such-suite"}), ConfigError);
    ClassifyConfig tiny = small(1);
    tiny.cycles = 10;
    CHECK_THROWS_AS(collect_samples(zoo("sisyphus"), 0, tiny), InsufficientSamples);
}
