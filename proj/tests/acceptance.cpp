#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mrw/classify.hpp"
#include "mrw/criteria.hpp"
#include "mrw/errors.hpp"
#include "mrw/rng.hpp"
#include "mrw/simulate.hpp"
#include "mrw/zoo.hpp"
#include "test_util.hpp"

using namespace mrw;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void fail(const std::string& why) {
        if (pass) detail.str("");
        pass = false;
        detail << why << "; ";
    }
    void note(const std::string& s) {
        if (pass) detail << s << "; ";
    }
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

Model zoo(const std::string& s) { return build_model(zoo_from_string(s)); }

std::vector<std::string> zoo_names() {
    std::vector<std::string> v;
    for (const auto& e : zoo_catalog()) v.push_back(e.name);
    return v;
}

std::vector<Model> random_models() {
    std::vector<Model> v;
    for (std::uint64_t k = 0; k < 20; ++k) v.push_back(testing::random_rational_model(1000 + k));
    return v;
}

// 1. petal flower returns to 0 exactly at even times with S_2n = 2n
void petal_exactness(Outcome& o) {
    for (const char* name : {"petal-flower", "petal-flower:p0=geom(0.3)", "petal-flower-alt"}) {
        Model m = zoo(name);
        std::int64_t bad = 0;
        for (std::uint64_t t = 0; t < 1000; ++t) {
            Trajectory tr = run_trajectory(m, 0, 1000, trial_seed(1, t));
            for (std::int64_t n = 1; 2 * n <= 1000; ++n) {
                const auto k = static_cast<std::size_t>(2 * n);
                if (tr.S(2 * n) != static_cast<double>(2 * n) || tr.states[k] != 0 || tr.states[k - 1] == 0) ++bad;
            }
        }
        if (bad) o.fail(std::string(name) + ": " + std::to_string(bad) + " violations");
    }
    o.note("3 petal variants, 1000 paths each, horizon 1000");
}

// 2. P_0(tau(0) > n) = n^{-(1+alpha)}
void sisyphus_return_law(Outcome& o) {
    double worst = 0.0;
    for (double alpha : {0.5, 1.0}) {
        Model m = build_model(zoo_sisyphus(alpha));
        CycleSampleConfig c;
        c.cycles = 1000000;
        c.seed = 2;
        c.max_len = 17;
        CycleStats s = sample_cycles(m, c);
        for (int n : {2, 4, 8, 16}) {
            // cycles longer than max_len are counted in `censored` only
            double hits = static_cast<double>(s.censored), total = static_cast<double>(s.size() + s.censored);
            for (std::size_t k = 0; k < s.size(); ++k) hits += s.length[k] > n ? 1.0 : 0.0;
            double p = hits / total;
            double want = std::pow(n, -(1.0 + alpha));
            double z = std::abs(p - want) / std::sqrt(want * (1 - want) / total);
            worst = std::max(worst, z);
            if (z > 4.0) o.fail("alpha " + fmt(alpha) + " n " + std::to_string(n) + " z " + fmt(z));
        }
    }
    o.note("max |z| " + fmt(worst));
}

// 3. occupation, drift and duality identities by enumeration
void identity_suite(Outcome& o) {
    double worst = 0.0;
    for (const Model& m : random_models()) {
        IdentityReport r = identity_checks(m, 4);
        double res = std::max({r.occupation_residual, r.drift_residual, r.duality_residual, r.kac_residual});
        worst = std::max(worst, res);
        if (!r.exact || res >= 1e-10) o.fail(m.name() + " residual " + fmt(res));
    }
    o.note("20 models, max residual " + fmt(worst));
}

// 4. the exact law of (M_n, S_n) against P^n and against simulation
void oracle_equivalence(Outcome& o) {
    double worst_p = 0.0, worst_z = 0.0;
    std::uint64_t seed = 40;
    for (const Model& m : random_models()) {
        const std::size_t d = m.num_states();
        Eigen::MatrixXd P = testing::to_eigen(m.matrix()), Pn = Eigen::MatrixXd::Identity(d, d);
        for (int n = 1; n <= 10; ++n) {
            Pn = Pn * P;
            auto marg = exact_distribution_Sn(m, 0, n).state_marginal(d);
            for (std::size_t j = 0; j < d; ++j) worst_p = std::max(worst_p, std::abs(marg[j] - Pn(0, static_cast<Eigen::Index>(j))));
        }
        const std::int64_t n = 4, N = 1000000;
        JointDistribution jd = exact_distribution_Sn(m, 0, n);
        std::vector<JointAtom> atoms = jd.atoms;
        std::sort(atoms.begin(), atoms.end(), [](const JointAtom& a, const JointAtom& b) { return a.prob > b.prob; });
        atoms.resize(std::min<std::size_t>(5, atoms.size()));
        std::vector<double> hits(atoms.size(), 0.0);
        Engine g(trial_seed(seed++, 0));
        for (std::int64_t t = 0; t < N; ++t) {
            State s = 0;
            DD x;
            for (std::int64_t k = 0; k < n; ++k) {
                auto [nx, inc] = m.chain().step(s, g);
                s = nx;
                x = dd_add(x, inc);
            }
            for (std::size_t a = 0; a < atoms.size(); ++a)
                if (atoms[a].state == s && x.value() == atoms[a].value) hits[a] += 1.0;
        }
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            double p = atoms[a].prob, f = hits[a] / static_cast<double>(N);
            double z = std::abs(f - p) / std::sqrt(p * (1 - p) / static_cast<double>(N));
            worst_z = std::max(worst_z, z);
            if (z > 4.0) o.fail(m.name() + " atom z " + fmt(z));
        }
    }
    if (worst_p > 1e-12) o.fail("marginal vs P^n " + fmt(worst_p));
    o.note("max |marginal - P^n| " + fmt(worst_p) + ", max atom |z| " + fmt(worst_z));
}

// 5. J is nondecreasing and subadditive; petal flower J(x) = max(1, x/2)
void j_laws(Outcome& o) {
    std::size_t pairs = 0;
    for (const auto& name : zoo_names()) {
        Model m = zoo(name);
        CycleSampleConfig c;
        c.anchor = m.default_anchor();
        c.cycles = 20000;
        c.seed = 5;
        CycleStats pool = sample_cycles(m, c);
        TruncatedMean tm(pool.sum, pool.weight);
        TruncatedMeanTable tab = truncated_means(pool);
        if (tm.p_pos() == 0.0) continue;
        for (double gamma : {0.0, 0.5, 1.0}) {
            JFunction jf = make_J(tm, gamma);
            const auto& x = tab.grid;
            for (std::size_t a = 0; a < x.size(); ++a) {
                double ja = eval_J(jf, x[a]);
                for (std::size_t b = a; b < x.size(); ++b) {
                    double jb = eval_J(jf, x[b]), js = eval_J(jf, x[a] + x[b]);
                    double tol = 1e-9 * std::max(1.0, js);
                    ++pairs;
                    if (jb < ja - tol) o.fail(name + " not monotone at gamma " + fmt(gamma));
                    if (js > ja + jb + tol) o.fail(name + " not subadditive at gamma " + fmt(gamma));
                }
            }
        }
        if (name == "petal-flower") {
            JFunction jf = make_J(tm, 1.0);
            for (double x : tab.grid)
                if (std::abs(eval_J(jf, x) - std::max(1.0, x / 2.0)) > 1e-12) o.fail("petal J(" + fmt(x) + ")");
        }
    }
    o.note(std::to_string(pairs) + " grid pairs");
}

// 6. P(D > x) <= V^alpha((x, inf)) <= E tau^alpha 1{D > x}
void sandwich(Outcome& o) {
    for (const auto& name : zoo_names()) {
        Model m = zoo(name);
        CycleSampleConfig c;
        c.anchor = m.default_anchor();
        c.cycles = 100000;
        c.seed = 6;
        CycleStats pool = sample_cycles(m, c);
        std::vector<double> grid = default_grid(pool.down);
        for (double alpha : {0.5, 1.0, 2.0}) {
            ExcursionMeasure e = excursion_measure(pool, alpha, grid);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                double tol = 1e-12 * std::max(1.0, e.tau_weighted[k]);
                if (e.p_down[k] > e.tail[k] + tol || e.tail[k] > e.tau_weighted[k] + tol)
                    o.fail(name + " alpha " + fmt(alpha) + " x " + fmt(grid[k]));
            }
            if (!e.sandwich_ok) o.fail(name + " sandwich flag");
        }
    }
    // tau = 2: the upper bound is exactly twice the lower one
    Model m = zoo("petal-general");
    CycleSampleConfig c;
    c.cycles = 100000;
    c.seed = 6;
    CycleStats pool = sample_cycles(m, c);
    ExcursionMeasure e = excursion_measure(pool, 1.0, default_grid(pool.down));
    for (std::size_t k = 0; k < e.grid.size(); ++k)
        if (std::abs(e.tau_weighted[k] - 2.0 * e.p_down[k]) > 1e-12) o.fail("tau = 2 pattern at x " + fmt(e.grid[k]));
    o.note(std::to_string(zoo_names().size()) + " models x 3 alphas; tau = 2 chain gives V within [P(D>x), 2 P(D>x)]");
}

// 7. counterexamples
void counterexamples(Outcome& o) {
    ClassifyConfig cfg;
    cfg.seed = 7;
    {
        Verdict v = fluctuation_verdict(zoo("petal-flower"), 0, cfg);
        if (v.category != Category::Osc || v.embedded != "PD")
            o.fail("(i) petal " + to_string(v.category) + " embedded " + v.embedded);
    }
    {
        Model m = zoo("petal-flower-alt");
        Category a = fluctuation_verdict(m, 0, cfg).category;
        Category d = fluctuation_verdict(dual_model(m), 0, cfg).category;
        if (a != Category::Osc || d != Category::Osc) o.fail("(ii) alt " + to_string(a) + " dual " + to_string(d));
    }
    {
        Model m = build_model(zoo_sigma_moment_counterexample(1.0, 2.5));
        CampaignConfig cc;
        cc.trials = 100000;
        cc.horizon = 1024;
        cc.seed = 7;
        cc.x_grid = {0.0, 1.0};
        cc.keep_cycles = false;
        CampaignResult r = run_campaign(m, cc);
        for (std::size_t k = 0; k < cc.x_grid.size(); ++k) {
            std::vector<CensoredStat> v;
            for (const auto& t : r.trials) v.push_back(t.stops[k].sigma_gt);
            MomentEstimate e = stopping_moment("sigma_gt^2", v, 2.0, false);
            if (e.divergence_flag || !e.stable) o.fail("(iii) E sigma>(" + fmt(cc.x_grid[k]) + ")^2 flagged");
            else o.note("(iii) E sigma>(" + fmt(cc.x_grid[k]) + ")^2 = " + fmt(e.estimate));
        }
        Category c = fluctuation_verdict(m, 0, cfg).category;
        if (c != Category::Osc) o.fail("(iii) verdict " + to_string(c));
    }
    {
        Model m = zoo("gen-petal-xlogx");
        SpitzerSeries s = spitzer_series(m, 0, 0.0, 0.0, 1024);
        if (s.test.converges != Status::Holds) o.fail("(iv) Spitzer series " + to_string(s.test.converges));
        JFunction jf = make_J(TruncatedMean({1.0}, {1.0}), 1.0);
        ExactOptions eo;
        eo.max_len = std::int64_t{1} << 24;
        SeriesTest it = integral_series_exact(Functional::Int_logJ_dV, m, 0, jf, 0.0, eo);
        bool grows = it.partial.size() > 1 && it.partial.back() > it.partial[it.partial.size() / 2];
        if (it.converges == Status::Holds || !grows) o.fail("(iv) log integral " + to_string(it.converges));
        else o.note("(iv) log-integral partial sum " + fmt(it.partial.back()) + " " + to_string(it.converges));
    }
}

// 8. tail slopes of the cycle sum and of the stationary increment
void tail_slopes(Outcome& o) {
    const double alpha = 1.5;
    Model m = build_model(zoo_tail_comparison(alpha));
    CycleSampleConfig c;
    c.cycles = 1000000;
    c.seed = 8;
    c.keep_increments = true;
    CycleStats pool = sample_cycles(m, c);
    // the regenerative estimate of P_pi(X_1 > n) weighs each cycle by its occupation count, which has infinite
    // variance here; its fit uses n in [1, 100], where the sample still holds thousands of cycles longer than n
    std::vector<double> ns_sum, ns_inc, ps, px;
    for (int k = 0; k <= 8; ++k) {
        ns_sum.push_back(10.0 * std::pow(10.0, k / 4.0));
        ns_inc.push_back(std::pow(10.0, k / 4.0));
    }
    double steps = 0;
    for (auto l : pool.length) steps += static_cast<double>(l);
    for (double n : ns_sum) {
        double a = 0;
        for (double s : pool.sum) a += s > n ? 1.0 : 0.0;
        ps.push_back(a / static_cast<double>(pool.size()));
    }
    for (double n : ns_inc) {
        double b = 0;
        for (std::size_t k = 0; k < pool.inc_value.size(); ++k)
            if (pool.inc_value[k] > n) b += static_cast<double>(pool.inc_count[k]);
        px.push_back(b / steps);
    }
    double s1 = testing::loglog_slope(ns_sum, ps), s2 = testing::loglog_slope(ns_inc, px);
    if (std::abs(s1 + alpha / 2) > 0.15) o.fail("cycle-sum slope " + fmt(s1));
    if (std::abs(s2 + (alpha - 1)) > 0.15) o.fail("increment slope " + fmt(s2));
    o.note("slopes " + fmt(s1) + " (want " + fmt(-alpha / 2) + "), " + fmt(s2) + " (want " + fmt(1 - alpha) + ")");
}

std::pair<int, std::string> run_cli(const std::string& args) {
    std::string cmd = std::string(MRW_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

// 9. verify output does not depend on the worker count
void determinism(Outcome& o) {
    for (const char* name : {"petal-flower", "sisyphus", "sigma-moment", "affine-env"}) {
        std::string args = std::string("verify --zoo ") + name + " --seed 9 --trials 500 --cycles 5000 --alpha 0.5,1 --format json";
        auto a = run_cli(args + " --workers 1");
        auto b = run_cli(args + " --workers 4");
        auto c = run_cli(args + " --workers 2");
        if (a.first != 0 || a.second.empty()) o.fail(std::string(name) + " exit " + std::to_string(a.first));
        else if (a.second != b.second || a.second != c.second) o.fail(std::string(name) + " output differs");
    }
    o.note("4 models, workers 1, 2, 4");
}

// 10. no implication is contradicted anywhere in the zoo
void no_red_alarms(Outcome& o) {
    int suites = 0;
    for (const auto& name : zoo_names()) {
        Model m = zoo(name);
        ClassifyConfig cfg;
        cfg.seed = 10;
        Samples s;
        try {
            s = collect_samples(m, m.default_anchor(), cfg);
            fluctuation_verdict(m, s, cfg);
        } catch (const NullHomologousInput&) {
            o.note(name + " is null-homologous, no suite");
            continue;
        }
        for (double alpha : {0.5, 1.0}) {
            TheoremReport r = theorem_suite(m, s, alpha, cfg);
            ++suites;
            if (r.red_alarms) o.fail(name + " alpha " + fmt(alpha) + ": " + std::to_string(r.red_alarms) + " alarms");
        }
    }
    o.note(std::to_string(suites) + " suites");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"petal flower exactness", petal_exactness},
        {"sisyphus return law", sisyphus_return_law},
        {"identity suite", identity_suite},
        {"oracle equivalence", oracle_equivalence},
        {"J laws", j_laws},
        {"excursion sandwich", sandwich},
        {"counterexample regression", counterexamples},
        {"tail-comparison slopes", tail_slopes},
        {"determinism across workers", determinism},
        {"no red alarms", no_red_alarms},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[k].second(o);
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += o.pass ? 0 : 1;
        std::printf("criterion %zu: %s  %s  [%s] (%.1f s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
