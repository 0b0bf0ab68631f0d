#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mrw/errors.hpp"
#include "mrw/kernel.hpp"
#include "mrw/laws.hpp"
#include "mrw/model.hpp"
#include "mrw/numeric.hpp"
#include "test_util.hpp"

using namespace mrw;

TEST_CASE("hurwitz zeta matches known constants") {
    CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-13));
    CHECK(hurwitz_zeta(3.0, 1.0) == doctest::Approx(1.2020569031595942).epsilon(1e-13));
    // zeta(2, 2) = zeta(2) - 1
    CHECK(hurwitz_zeta(2.0, 2.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6 - 1).epsilon(1e-13));
}

TEST_CASE("zipf2 law has pmf 6/(pi^2 n^2)") {
    LawPtr l = parse_law("zipf2");
    CHECK(l->lo() == 1);
    CHECK(l->survival(0) == doctest::Approx(1.0));
    for (std::int64_t n : {1, 2, 7, 100})
        CHECK(l->pmf(n) == doctest::Approx(testing::zipf2(n)).epsilon(1e-12));
    // survival by direct summation of the pmf
    double s = 1.0;
    for (std::int64_t n = 1; n <= 50; ++n) s -= testing::zipf2(n);
    CHECK(l->survival(50) == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("power and table laws") {
    LawPtr p = make_power_tail_law(1, 1.5);
    for (std::int64_t n : {0, 1, 5, 1000}) CHECK(p->survival(n) == doctest::Approx(std::pow(n + 1.0, -1.5)));
    LawPtr t = make_table_law(2, {0.25, 0.75});
    CHECK(t->pmf(2) == doctest::Approx(0.25));
    CHECK(t->pmf(3) == doctest::Approx(0.75));
    CHECK(t->mean() == doctest::Approx(2.75));
    CHECK(t->survival(3) == doctest::Approx(0.0));
}

TEST_CASE("geometric sampling frequencies") {
    LawPtr l = parse_law("geom(0.3)");
    Engine g(42);
    const int N = 200000;
    std::vector<int> cnt(5, 0);
    for (int k = 0; k < N; ++k) {
        auto v = l->sample(g);
        if (v - l->lo() < 5) ++cnt[static_cast<std::size_t>(v - l->lo())];
    }
    for (int k = 0; k < 5; ++k) {
        double p = l->pmf(l->lo() + k);
        double se = std::sqrt(p * (1 - p) / N);
        CHECK(std::abs(cnt[k] / double(N) - p) < 4 * se);
    }
}

TEST_CASE("invalid laws are rejected") {
    CHECK_THROWS_AS(parse_law("nosuch(1)"), Error);
    CHECK_THROWS_AS(make_table_law(1, {0.5, 0.4}), InvalidDistribution);
}

TEST_CASE("discrete kernel atoms, mean and scaling") {
    Kernel k = Kernel::parse("d(2@0.6;-1@0.4)");
    CHECK(k.exact());
    auto a = k.atoms();
    REQUIRE(a.size() == 2);
    CHECK(k.mean() == doctest::Approx(0.8));
    CHECK(k.mean_pos() == doctest::Approx(1.2));
    CHECK(k.mean_neg() == doctest::Approx(0.4));
    CHECK(k.scaled(-1.0).mean() == doctest::Approx(-0.8));
    CHECK(Kernel::parse("pm1").mean() == doctest::Approx(0.0));
    CHECK(Kernel::parse("+1").point_value().value() == 1.0);
    CHECK_THROWS_AS(Kernel::normal(0, 1).atoms(), UnsupportedKernel);
}

TEST_CASE("kernel json round trip") {
    Kernel k = Kernel::parse("d(2@0.6;-1@0.4)");
    Kernel r = Kernel::from_json(nlohmann::json::parse(k.to_json().dump()), "test");
    CHECK(r.mean() == doctest::Approx(k.mean()));
    CHECK(r.atoms().size() == 2);
}

TEST_CASE("double-double sums cancel petal increments exactly") {
    for (std::int64_t i = 1; i < 2000; i += 37) {
        double f = 1.0 / testing::zipf2(i);
        DD s = dd_add(DD(0.0), DD(-f));
        s = dd_add(s, dd_add(DD(2.0), DD(f)));
        CHECK(s.value() == 2.0);
    }
}

TEST_CASE("probability strings") {
    auto [v, e] = parse_probability("1/3");
    CHECK(v == doctest::Approx(1.0 / 3));
    CHECK(e == "1/3");
    auto [v2, e2] = parse_probability("0.25");
    CHECK(v2 == 0.25);
    CHECK(e2 == "1/4");
    CHECK_THROWS(parse_probability("x/3"));
    CHECK_THROWS(parse_probability("-1/3"));
}
