#include "mrw/classify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "mrw/errors.hpp"

namespace mrw {

std::string to_string(Category c) {
    switch (c) {
        case Category::NullHomologous: return "NullHomologous";
        case Category::PD: return "PD";
        case Category::ND: return "ND";
        case Category::Osc: return "Osc";
        default: return "Inconclusive";
    }
}

const Condition* TheoremReport::find(const std::string& id) const {
    for (const auto& c : conditions)
        if (c.id == id) return &c;
    return nullptr;
}

// ---------- null homology ----------

namespace {

// the single value of a kernel that is a point mass, if it is one
std::optional<DD> point_of(const Kernel& k) {
    if (k.kind() == Kernel::Kind::Point) return k.point_value();
    if (k.kind() == Kernel::Kind::Discrete) {
        auto a = k.atoms();
        std::vector<std::pair<DD, double>> pos;
        for (const auto& x : a)
            if (x.second > 0.0) pos.push_back(x);
        if (pos.size() == 1) return pos[0].first;
    }
    return std::nullopt;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// states adjacent to the anchor first; the expensive rows of hub states are visited once
void bfs_g(const Model& m, State anchor, std::size_t max_states, NullHomology& r) {
    std::unordered_map<State, double> g;
    std::deque<State> q;
    g[anchor] = 0.0;
    q.push_back(anchor);
    r.g.push_back({anchor, 0.0});
    bool frontier = false;
    while (!q.empty()) {
        State i = q.front();
        q.pop_front();
        Row row = m.chain().row(i, m.tail_eps());
        if (row.tail > 0.0) frontier = true;
        for (const auto& e : row.edges) {
            auto v = point_of(e.k);
            if (!v) {
                r.null_homologous = false;
                r.reason = "edge " + m.label(i) + "->" + m.label(e.to) + " has a non-degenerate increment law";
                return;
            }
            double gj = g[i] + v->value();
            auto it = g.find(e.to);
            if (it == g.end()) {
                if (g.size() >= max_states) {
                    frontier = true;
                    continue;
                }
                g[e.to] = gj;
                r.g.push_back({e.to, gj});
                q.push_back(e.to);
            } else if (!same(it->second, gj)) {
                r.null_homologous = false;
                r.reason = "inconsistent potential at " + m.label(e.to);
                return;
            }
        }
    }
    r.null_homologous = true;
    r.explored = g.size();
    r.advisory = !m.finite() || frontier;
    r.g_min = r.g_max = 0.0;
    for (const auto& [s, v] : r.g) {
        r.g_min = std::min(r.g_min, v);
        r.g_max = std::max(r.g_max, v);
    }
    if (!r.advisory) {
        r.bounded_above = r.bounded_below = true;
    } else {
        // growth of the range between the first and the second half of the explored states
        double lo1 = 0.0, hi1 = 0.0;
        for (std::size_t k = 0; k < r.g.size() / 2; ++k) {
            lo1 = std::min(lo1, r.g[k].second);
            hi1 = std::max(hi1, r.g[k].second);
        }
        r.bounded_above = !(r.g_max > hi1 + 1e-9);
        r.bounded_below = !(r.g_min < lo1 - 1e-9);
    }
    bool zero = std::max(std::abs(r.g_min), std::abs(r.g_max)) <= 1e-12;
    if (zero) r.subclass = "NH-1";
    else if (r.bounded_above && r.bounded_below) r.subclass = "NH-2";
    else if (!r.bounded_below && r.bounded_above) r.subclass = "NH-3";
    else if (r.bounded_below && !r.bounded_above) r.subclass = "NH-4";
    else r.subclass = "NH-5";
}

}  // namespace

NullHomology null_homology_test(const Model& m, State anchor, const std::string& mode, const NullHomologyOptions& opt) {
    if (!m.chain().valid_state(anchor)) throw IncompatibleAnchor("anchor " + std::to_string(anchor) + " is not a state");
    NullHomology r;
    r.mode = mode;
    if (mode == "mc") {
        CycleSampleConfig cfg;
        cfg.anchor = anchor;
        cfg.cycles = opt.cycles;
        cfg.seed = opt.seed;
        cfg.workers = opt.workers;
        cfg.max_len = 1000000;
        CycleStats cs = sample_cycles(m, cfg);
        r.cycles_checked = cs.size();
        for (std::size_t c = 0; c < cs.size(); ++c)
            if (std::abs(cs.sum[c]) > 1e-12) {
                r.reason = "cycle sum " + std::to_string(cs.sum[c]) + " observed";
                return r;
            }
        if (!m.exact_kernels()) {
            // candidate only; continuous kernels cannot be degenerate here
            r.reason = "sampled cycle sums vanish but kernels are continuous";
            return r;
        }
    } else if (mode == "exact") {
        if (!m.exact_kernels()) throw UnsupportedKernel("exact null-homology test needs point-mass or discrete kernels");
        // short cycles first: a single nonzero sum settles the question
        ExactOptions eo;
        eo.max_len = 8;
        eo.max_paths = 200000;
        std::size_t checked = 0;
        bool nonzero = false;
        try {
            for_each_exact_cycle(m, anchor, eo, [&](const CyclePath& c) {
                ++checked;
                if (!nonzero && std::abs(c.sum.value()) > 1e-12) {
                    nonzero = true;
                    r.reason = "cycle of length " + std::to_string(c.length) + " with sum " + std::to_string(c.sum.value());
                }
            });
        } catch (const LatticeBlowup&) {
        }
        r.cycles_checked = checked;
        if (nonzero) return r;
    } else {
        throw ConfigError("null-homology mode must be exact or mc");
    }
    bfs_g(m, anchor, opt.max_states, r);
    return r;
}

// ---------- shared samples ----------

Samples collect_samples(const Model& m, State anchor, const ClassifyConfig& cfg) {
    if (!m.chain().valid_state(anchor)) throw IncompatibleAnchor("anchor " + std::to_string(anchor) + " is not a state");
    if (cfg.cycles < static_cast<std::int64_t>(cfg.min_samples) || cfg.trials < static_cast<std::int64_t>(cfg.min_samples))
        throw InsufficientSamples("at least " + std::to_string(cfg.min_samples) + " cycles and trials are required");
    Samples s;
    s.anchor = anchor;
    CycleSampleConfig cc;
    cc.anchor = anchor;
    cc.cycles = cfg.cycles;
    cc.seed = cfg.seed;
    cc.max_len = cfg.max_cycle_len;
    cc.keep_increments = true;
    cc.workers = cfg.workers;
    s.pool = sample_cycles(m, cc);
    if (s.pool.size() < cfg.min_samples) throw InsufficientSamples("too few complete cycles");
    CampaignConfig c;
    c.start = anchor;
    c.anchor = anchor;
    c.horizon = cfg.horizon;
    c.trials = cfg.trials;
    c.seed = splitmix64(cfg.seed ^ 0x5bd1e995ULL);
    c.workers = cfg.workers;
    c.x_grid = cfg.x_grid;
    c.keep_cycles = false;
    c.cert = cfg.cert;
    s.campaign = run_campaign(m, c);
    s.table = truncated_means(s.pool, {}, cfg.top_k);
    TruncatedMean tm(s.pool.sum, s.pool.weight);
    s.J = make_J(tm, 1.0);
    s.J_neg = make_J(tm, 1.0, true);
    return s;
}

namespace {

Status all_of(std::initializer_list<Status> v) {
    bool inc = false;
    for (Status s : v) {
        if (s == Status::Fails) return Status::Fails;
        if (s == Status::Inconclusive) inc = true;
    }
    return inc ? Status::Inconclusive : Status::Holds;
}

Status all_of(const std::vector<Status>& v) {
    bool inc = false;
    for (Status s : v) {
        if (s == Status::Fails) return Status::Fails;
        if (s == Status::Inconclusive) inc = true;
    }
    return inc ? Status::Inconclusive : Status::Holds;
}

Evidence moment_evidence(const MomentEstimate& e) {
    Evidence ev;
    ev.id = e.id;
    ev.value = e.estimate;
    ev.threshold = e.top_share;
    ev.status = to_string(e.status);
    char buf[160];
    std::snprintf(buf, sizeof buf, "se=%.4g n=%zu censored=%zu top_share=%.3f tail_index=%.3g stable=%d", e.se, e.n, e.censored,
                  e.top_share, e.tail_index, e.stable ? 1 : 0);
    ev.note = buf;
    return ev;
}

// pd: A ultimately positive and the J moment finite
Status sign_and_moment(bool right_sign, bool wrong_sign, Status moment) {
    if (right_sign && moment == Status::Holds) return Status::Holds;
    if (wrong_sign || moment == Status::Fails) return Status::Fails;
    return Status::Inconclusive;
}

std::string category_of(Status pd, Status nd) {
    if (pd == Status::Holds) return "PD";
    if (nd == Status::Holds) return "ND";
    if (pd == Status::Fails && nd == Status::Fails) return "Osc";
    return "inconclusive";
}

MomentEstimate values_moment(const std::string& id, const std::vector<double>& v, const DiagnosticConfig& dc,
                             std::int64_t censored, std::size_t size) {
    MomentEstimate e = estimate_mean(id, v, nullptr, false, 0.0, dc);
    e.censored = static_cast<std::size_t>(censored);
    if (censored > 0 && e.status == Status::Holds &&
        static_cast<double>(censored) / static_cast<double>(size + static_cast<std::size_t>(censored)) > 0.001)
        e.status = Status::Inconclusive;
    return e;
}

struct PathDiag {
    double lows = 0.0, highs = 0.0, mean_final = 0.0;
    Status pd = Status::Inconclusive, nd = Status::Inconclusive;
};

PathDiag path_diag(const CampaignResult& c) {
    PathDiag d;
    const double n = static_cast<double>(c.trials.size());
    for (const auto& t : c.trials) {
        d.lows += t.new_low_late ? 1.0 : 0.0;
        d.highs += t.new_high_late ? 1.0 : 0.0;
        d.mean_final += t.final_s;
    }
    d.lows /= n;
    d.highs /= n;
    d.mean_final /= n;
    if (d.lows <= 0.05 && d.highs >= 0.95 && d.mean_final > 0) d.pd = Status::Holds;
    else if (d.lows >= 0.3 || d.highs <= 0.3) d.pd = Status::Fails;
    if (d.highs <= 0.05 && d.lows >= 0.95 && d.mean_final < 0) d.nd = Status::Holds;
    else if (d.highs >= 0.3 || d.lows <= 0.3) d.nd = Status::Fails;
    return d;
}

void check_nontrivial(const Model& m, const Samples& s) {
    for (double v : s.pool.sum)
        if (std::abs(v) > 1e-12) return;
    if (m.exact_kernels()) {
        NullHomology nh = null_homology_test(m, s.anchor, "exact");
        if (!nh.null_homologous) return;
        throw NullHomologousInput("increments are a coboundary (" + nh.subclass + ")");
    }
    throw NullHomologousInput("every sampled cycle sum vanishes");
}

struct FluctuationParts {
    MomentEstimate j_sneg, j_spos_neg, j_d, j_u_neg;
    Status emb_pd, emb_nd, full_pd, full_nd;
    PathDiag path;
};

FluctuationParts fluctuation_parts(const Samples& s, const ClassifyConfig& cfg) {
    FluctuationParts p;
    const auto& pool = s.pool;
    std::vector<double> a, b;
    for (std::size_t c = 0; c < pool.size(); ++c) {
        a.push_back(eval_J(s.J_neg, std::max(0.0, pool.sum[c])));
        b.push_back(eval_J(s.J_neg, pool.up_start[c]));
    }
    p.j_sneg = moment_functional(Functional::J_Sneg, pool, s.J, 1.0, cfg.dc);
    p.j_spos_neg = values_moment("E_Jneg_Spos", a, cfg.dc, pool.censored, pool.size());
    p.j_d = moment_functional(Functional::J_D, pool, s.J, 1.0, cfg.dc);
    p.j_u_neg = values_moment("E_Jneg_U", b, cfg.dc, pool.censored, pool.size());
    bool up = s.table.ultimately_positive, un = s.table.ultimately_negative;
    p.emb_pd = sign_and_moment(up, un, p.j_sneg.status);
    p.emb_nd = sign_and_moment(un, up, p.j_spos_neg.status);
    p.full_pd = sign_and_moment(up, un, p.j_d.status);
    p.full_nd = sign_and_moment(un, up, p.j_u_neg.status);
    p.path = path_diag(s.campaign);
    return p;
}

}  // namespace

// ---------- fluctuation verdict ----------

Verdict fluctuation_verdict(const Model& m, State anchor, const ClassifyConfig& cfg) {
    return fluctuation_verdict(m, collect_samples(m, anchor, cfg), cfg);
}

Verdict fluctuation_verdict(const Model& m, const Samples& s, const ClassifyConfig& cfg) {
    check_nontrivial(m, s);
    Verdict v;
    FluctuationParts p = fluctuation_parts(s, cfg);
    v.embedded = category_of(p.emb_pd, p.emb_nd);
    v.full_walk = category_of(p.full_pd, p.full_nd);
    v.path = category_of(p.path.pd, p.path.nd);

    Evidence a;
    a.id = "A_top_grid";
    a.value = s.table.A.back();
    a.threshold = 3.0 * s.table.se.back();
    a.status = s.table.ultimately_positive ? "positive" : s.table.ultimately_negative ? "negative" : "mixed";
    a.note = "top " + std::to_string(s.table.top_k) + " of " + std::to_string(s.table.grid.size()) + " grid points";
    v.evidence.push_back(a);
    for (const auto* e : {&p.j_sneg, &p.j_spos_neg, &p.j_d, &p.j_u_neg}) v.evidence.push_back(moment_evidence(*e));
    v.evidence.push_back({"path_new_low_late", p.path.lows, 0.05, to_string(p.path.pd), "fraction of trials"});
    v.evidence.push_back({"path_new_high_late", p.path.highs, 0.95, to_string(p.path.nd), "fraction of trials"});
    v.evidence.push_back({"path_mean_final", p.path.mean_final, 0.0, "", "mean S at the horizon"});
    std::vector<double> len(s.pool.length.begin(), s.pool.length.end());
    MomentEstimate et = estimate_mean("E_tau", len, nullptr, false, 0.0, cfg.dc);
    v.evidence.push_back(moment_evidence(et));

    std::string final = v.full_walk != "inconclusive" ? v.full_walk : v.path;
    if (final == "PD") v.category = Category::PD;
    else if (final == "ND") v.category = Category::ND;
    else if (final == "Osc") v.category = Category::Osc;
    else v.category = Category::Inconclusive;

    if (v.embedded != "inconclusive" && v.full_walk != "inconclusive" && v.embedded != v.full_walk) {
        v.disagreement = true;
        v.notes.push_back("embedded walk " + v.embedded + " while the full walk is " + v.full_walk);
    }
    if (v.full_walk != "inconclusive" && v.path != "inconclusive" && v.full_walk != v.path) {
        v.disagreement = true;
        v.notes.push_back("path diagnostics suggest " + v.path + " against the excursion criterion " + v.full_walk);
    }
    if (v.full_walk == "inconclusive") v.notes.push_back("excursion criterion inconclusive; category from path diagnostics");
    if (et.status == Status::Fails)
        v.notes.push_back("mean return time looks infinite: the driving chain may be null recurrent (advisory)");
    return v;
}

// ---------- trichotomy and SLLN ----------

Trichotomy trichotomy_and_slln(const Model& m, State anchor, const ClassifyConfig& cfg) {
    return trichotomy_and_slln(m, collect_samples(m, anchor, cfg), cfg);
}

namespace {

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t k = static_cast<std::size_t>(pos);
    double f = pos - static_cast<double>(k);
    return k + 1 < v.size() ? v[k] * (1 - f) + v[k + 1] * f : v[k];
}

}  // namespace

Trichotomy trichotomy_and_slln(const Model& m, const Samples& s, const ClassifyConfig& cfg) {
    check_nontrivial(m, s);
    Trichotomy t;
    const auto& c = s.campaign;
    const double N = static_cast<double>(c.trials.size());
    std::vector<double> se_med;
    for (std::size_t k = 0; k < c.checkpoint_times.size(); ++k) {
        double tt = static_cast<double>(c.checkpoint_times[k]);
        std::vector<double> r, ar;
        double mean = 0.0;
        for (const auto& tr : c.trials) {
            r.push_back(tr.checkpoints[k] / tt);
            ar.push_back(std::abs(tr.checkpoints[k]) / tt);
            mean += tr.checkpoints[k] / tt;
        }
        t.times.push_back(c.checkpoint_times[k]);
        t.mean_ratio.push_back(mean / N);
        t.median_ratio.push_back(quantile(r, 0.5));
        t.abs_median_ratio.push_back(quantile(ar, 0.5));
        double iqr = quantile(r, 0.75) - quantile(r, 0.25);
        se_med.push_back(1.2533 * iqr / 1.349 / std::sqrt(N));
    }
    std::size_t K = t.times.size() - 1;
    t.mu = t.median_ratio[K];
    t.mu_se = se_med[K];

    MomentEstimate abs_sum = moment_functional(Functional::Abs_sum, s.pool, s.J, 1.0, cfg.dc);
    double mean_se = 0.0;  // sampling error of a cycle-based stationary mean
    t.abs_cycle_sum = abs_sum.status;
    if (m.finite()) {
        t.abs_increment = Status::Holds;
    } else {
        t.abs_increment = moment_functional(Functional::Abs_sum_excursion, s.pool, s.J, 1.0, cfg.dc).status;
    }
    if (m.finite() && m.exact_kernels()) {
        t.stationary_mean = stationary_drift(m);
        t.stationary_mean_source = "exact";
    } else if (t.abs_increment == Status::Holds && abs_sum.status == Status::Holds) {
        const double n = static_cast<double>(s.pool.size());
        double mean = 0.0, sq = 0.0;
        for (double v : s.pool.sum) mean += v;
        mean /= n;
        for (double v : s.pool.sum) sq += (v - mean) * (v - mean);
        t.stationary_mean = m.pi(s.anchor) * mean;
        mean_se = m.pi(s.anchor) * std::sqrt(sq / (n - 1.0) / n);
        t.stationary_mean_source = "cycles";
    } else {
        t.stationary_mean_source = "none";
    }

    if (K < 3) {
        t.notes.push_back("horizon too short for a rate class");
        return t;
    }
    std::size_t k0 = K - 2;
    double drift = std::abs(t.median_ratio[K] - t.median_ratio[k0]);
    bool stable = drift <= 0.1 * std::abs(t.median_ratio[K]) + 3.0 * (se_med[K] + se_med[k0]);
    bool growing = t.abs_median_ratio[K] > 1.5 * t.abs_median_ratio[k0] && t.abs_median_ratio[K] > 0.0;
    double pos = 0.0;
    for (const auto& tr : c.trials) pos += tr.final_s > 0 ? 1.0 : 0.0;
    pos /= N;
    if (growing) {
        if (t.abs_cycle_sum == Status::Fails) {
            t.rate_class = pos >= 0.9 ? "PD+" : pos <= 0.1 ? "ND+" : "Osc+";
        } else {
            t.notes.push_back("S_n/n grows but the infinite cycle-mean diagnostic did not fire");
        }
    } else if (stable && t.abs_cycle_sum == Status::Fails) {
        t.notes.push_back("S_n/n looks stable but the cycle sums have infinite absolute mean; horizon too short");
    } else if (stable) {
        t.rate_class = "linear-rate";
    }
    if (t.stationary_mean) {
        double tol = 4.0 * std::hypot(t.mu_se, mean_se) + 0.01 * std::max(1.0, std::abs(*t.stationary_mean));
        t.mean_matches = std::abs(t.mu - *t.stationary_mean) <= tol;
    }
    if (t.abs_increment == Status::Fails) t.notes.push_back("stationary increment mean does not exist (infinite absolute mean)");
    if (t.abs_cycle_sum == Status::Fails) t.notes.push_back("infinite absolute cycle-sum mean; sign criterion of A may be dropped");
    return t;
}

// ---------- theorem suite ----------

namespace {

struct SuiteBuilder {
    TheoremReport rep;
    std::map<std::string, Status> st;

    void add(const std::string& id, const std::string& thm, const std::string& desc, Status s, std::vector<Evidence> ev = {}) {
        if (st.count(id)) return;
        rep.conditions.push_back({id, thm, desc, s, std::move(ev)});
        st[id] = s;
    }
    Status get(const std::string& id) const {
        auto it = st.find(id);
        return it == st.end() ? Status::Inconclusive : it->second;
    }
    void imp(const std::string& thm, const std::string& p, const std::string& q, std::vector<std::string> gates = {}) {
        Implication e{thm, p, q, gates, ""};
        bool gated = true;
        for (const auto& g : gates) gated = gated && get(g) == Status::Holds;
        if (!gated) e.state = "not-applicable";
        else if (get(p) == Status::Holds && get(q) == Status::Fails) e.state = "alarm";
        else if (get(p) == Status::Holds && get(q) == Status::Holds) e.state = "consistent";
        else e.state = "open";
        if (e.state == "alarm") ++rep.red_alarms;
        rep.implications.push_back(std::move(e));
    }
    void equiv(const std::string& thm, const std::vector<std::string>& ids, std::vector<std::string> gates = {}) {
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = 0; b < ids.size(); ++b)
                if (a != b) imp(thm, ids[a], ids[b], gates);
    }
};

MomentEstimate stop_moment(const std::string& id, const Samples& s, std::size_t xi, double p, bool cert,
                           CensoredStat StoppingRecord::*field, const DiagnosticConfig& dc) {
    std::vector<CensoredStat> v;
    for (const auto& t : s.campaign.trials) v.push_back(t.stops[xi].*field);
    return stopping_moment(id, v, p, cert, dc);
}

std::string xs(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%g", x);
    return b;
}

SpitzerSeries series_for(const Model& m, State anchor, double x, double alpha, const ClassifyConfig& cfg) {
    SpitzerOptions o;
    o.seed = splitmix64(cfg.seed ^ 0x9e3779b9ULL);
    o.workers = cfg.workers;
    o.trials = cfg.trials;
    std::string mode = cfg.series_mode;
    bool closed = m.chain().cycle_partial_cdf(anchor, 1, 0.0).has_value();
    if (mode == "auto") mode = (m.finite() && m.exact_kernels()) || closed ? "exact" : "mc";
    std::int64_t n = cfg.series_n;
    if (mode == "exact" && !m.finite()) n = std::min<std::int64_t>(n, 256);
    if (mode == "mc") n = std::max(n, cfg.horizon);
    o.mode = mode;
    try {
        return spitzer_series(m, anchor, x, alpha, n, o);
    } catch (const LatticeBlowup&) {
    } catch (const UnsupportedKernel&) {
    }
    o.mode = "mc";
    return spitzer_series(m, anchor, x, alpha, std::max(cfg.series_n, cfg.horizon), o);
}

Evidence series_evidence(const std::string& id, const SpitzerSeries& s) {
    return {id, s.partial.empty() ? 0.0 : s.partial.back(), -1.15, to_string(s.test.converges),
            "mode=" + s.mode + " slope=" + xs(s.test.slope) + " n=" + std::to_string(s.prob.size())};
}

bool wanted(const std::vector<std::string>& ts, const std::string& t) {
    return ts.empty() || std::find(ts.begin(), ts.end(), t) != ts.end();
}

}  // namespace

TheoremReport theorem_suite(const Model& m, State anchor, double alpha, const ClassifyConfig& cfg,
                            const std::vector<std::string>& theorems) {
    return theorem_suite(m, collect_samples(m, anchor, cfg), alpha, cfg, theorems);
}

TheoremReport theorem_suite(const Model& m, const Samples& s, double alpha, const ClassifyConfig& cfg,
                            const std::vector<std::string>& theorems) {
    if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
    check_nontrivial(m, s);
    static const std::vector<std::string> known{"divergence", "last-exit", "spitzer-alpha", "occupation", "chains",
                                                "minimum",    "finite-state", "slln", "post-passage", "passage-solidarity"};
    for (const auto& t : theorems)
        if (std::find(known.begin(), known.end(), t) == known.end()) throw ConfigError("unknown theorem suite '" + t + "'");

    SuiteBuilder b;
    b.rep.model = m.name();
    b.rep.anchor = s.anchor;
    b.rep.alpha = alpha;
    const auto& dc = cfg.dc;
    const auto& pool = s.pool;
    const auto& xg = cfg.x_grid;
    const double a1 = 1.0 + alpha;

    // shared conditions
    FluctuationParts fp = fluctuation_parts(s, cfg);
    b.add("A_positive", "divergence", "A ultimately positive", s.table.ultimately_positive ? Status::Holds
                                                               : s.table.ultimately_negative ? Status::Fails
                                                                                              : Status::Inconclusive,
          {{"A_top_grid", s.table.A.back(), 3.0 * s.table.se.back(), "", ""}});
    b.add("pd_path", "divergence", "running extremes indicate S_n -> infinity", fp.path.pd,
          {{"new_low_late", fp.path.lows, 0.05, "", ""}, {"new_high_late", fp.path.highs, 0.95, "", ""}});
    b.add("embedded_pd", "post-passage", "embedded walk at the anchor is positive divergent", fp.emb_pd,
          {moment_evidence(fp.j_sneg)});
    auto tau_pow = moment_functional(Functional::Tau_pow, pool, s.J, alpha, dc);
    b.add("type_alpha", "last-exit", "E tau^{1+alpha} finite", tau_pow.status, {moment_evidence(tau_pow)});
    auto sg_stat = [&](double p) {
        std::vector<Status> v;
        std::vector<Evidence> ev;
        for (std::size_t k = 0; k < xg.size(); ++k) {
            auto e = stop_moment("E_sigma_gt(" + xs(xg[k]) + ")^" + xs(p), s, k, p, false, &StoppingRecord::sigma_gt, dc);
            v.push_back(e.status);
            ev.push_back(moment_evidence(e));
        }
        return std::make_pair(all_of(v), ev);
    };
    {
        auto [st, ev] = sg_stat(a1);
        b.add("sigma_gt_pow", "chains", "E sigma>(x)^{1+alpha} finite on the x grid", st, ev);
    }
    auto j_sneg_pow = moment_functional(Functional::J_Sneg_pow, pool, s.J, alpha, dc);
    b.add("J_Sneg_pow", "spitzer-alpha", "E J(S_tau^-)^{1+alpha} finite", j_sneg_pow.status, {moment_evidence(j_sneg_pow)});

    if (wanted(theorems, "divergence")) {
        b.add("J_D", "divergence", "A ultimately positive and E J(D) finite", fp.full_pd, {moment_evidence(fp.j_d)});
        std::vector<Status> v;
        std::vector<Evidence> ev;
        for (double x : xg) {
            auto sp = series_for(m, s.anchor, x, 0.0, cfg);
            v.push_back(sp.test.converges);
            ev.push_back(series_evidence("spitzer0(" + xs(x) + ")", sp));
        }
        b.add("spitzer0", "divergence", "sum n^{-1} P(S_n <= x) finite", all_of(v), ev);
        auto [st1, ev1] = sg_stat(1.0);
        b.add("sigma_gt", "divergence", "E sigma>(x) finite on the x grid", st1, ev1);
        auto tl = moment_functional(Functional::Tau_log_tau, pool, s.J, alpha, dc);
        b.add("tau_log_tau", "divergence", "E tau log tau finite", tl.status, {moment_evidence(tl)});
        auto lg = moment_functional(Functional::Int_logJ_dV, pool, s.J, alpha, dc);
        auto ls = integral_series(Functional::Int_logJ_dV, pool, s.J, alpha);
        Status lst = lg.status == Status::Holds ? Status::Holds : (lg.status == Status::Fails ? Status::Fails : Status::Inconclusive);
        b.add("log_integral", "divergence", "int log J dV finite", lst,
              {moment_evidence(lg), {"int_logJ_dV_blocks", ls.slope, -1.15, to_string(ls.converges), "dyadic level blocks"}});
        b.equiv("divergence", {"pd_path", "J_D"});
        b.imp("divergence", "J_D", "spitzer0");
        b.imp("divergence", "pd_path", "spitzer0");
        b.imp("divergence", "spitzer0", "sigma_gt");
        // the log-integral form needs the sign condition on A as well, as in the single-state case
        b.equiv("divergence", {"spitzer0", "log_integral"}, {"tau_log_tau", "A_positive"});
    }

    const std::vector<std::string> pd_type{"pd_path", "type_alpha"};
    if (wanted(theorems, "last-exit") || wanted(theorems, "chains")) {
        auto jd = moment_functional(Functional::J_D_pow, pool, s.J, alpha, dc);
        b.add("J_D_pow", "last-exit", "E J(D)^{1+alpha} finite", jd.status, {moment_evidence(jd)});
        std::vector<Status> vr, vm, vl;
        std::vector<Evidence> er, em, el;
        for (std::size_t k = 0; k < xg.size(); ++k) {
            auto r = stop_moment("E_rho(" + xs(xg[k]) + ")^" + xs(alpha), s, k, alpha, true, &StoppingRecord::rho, dc);
            vr.push_back(r.status);
            er.push_back(moment_evidence(r));
            // sigma_le(-x) on the event of finiteness; censoring is read as never reaching -x
            std::vector<double> fin;
            std::size_t cens = 0;
            for (const auto& t : s.campaign.trials) {
                if (t.stops[k].sigma_le.censored) ++cens;
                else fin.push_back(std::pow(t.stops[k].sigma_le.value, alpha));
            }
            double pinf = static_cast<double>(cens) / static_cast<double>(s.campaign.trials.size());
            Status st = Status::Inconclusive;
            Evidence e{"P(sigma_le(-" + xs(xg[k]) + ")=inf)", pinf, 0.05, "", ""};
            if (fin.empty()) {
                st = pinf >= 0.05 ? Status::Holds : Status::Inconclusive;
            } else {
                auto me = estimate_mean("E_sigma_le(-" + xs(xg[k]) + ")^" + xs(alpha), fin, nullptr, false, 0.0, dc);
                el.push_back(moment_evidence(me));
                if (me.status == Status::Fails) st = Status::Fails;
                else if (me.status == Status::Holds && pinf >= 0.05) st = Status::Holds;
            }
            vl.push_back(st);
            el.push_back(e);
        }
        auto sm = stop_moment("E_sigma_min^" + xs(alpha), s, 0, alpha, true, &StoppingRecord::sigma_min, dc);
        b.add("rho_pow", "last-exit", "E rho(x)^alpha finite", all_of(vr), er);
        b.add("sigma_min_pow", "last-exit", "E sigma_min^alpha finite", sm.status, {moment_evidence(sm)});
        b.add("sigma_le_pow", "last-exit", "P(sigma<=(-x) = inf) > 0 and E sigma<=(-x)^alpha on finiteness", all_of(vl), el);
        b.equiv("last-exit", {"J_D_pow", "rho_pow", "sigma_min_pow", "sigma_le_pow"}, pd_type);
        for (const auto& id : {"J_D_pow", "rho_pow", "sigma_min_pow", "sigma_le_pow"}) b.imp("chains", id, "sigma_gt_pow", pd_type);
    }

    if (wanted(theorems, "spitzer-alpha") || wanted(theorems, "chains")) {
        auto ij = moment_functional(Functional::Int_Jalpha_dV, pool, s.J, alpha, dc);
        Status st = sign_and_moment(s.table.ultimately_positive, s.table.ultimately_negative, all_of({j_sneg_pow.status, ij.status}));
        b.add("spitzer_integral", "spitzer-alpha", "A ultimately positive, E J(S^-)^{1+alpha} and int J^alpha dV finite", st,
              {moment_evidence(j_sneg_pow), moment_evidence(ij)});
        std::vector<Status> v;
        std::vector<Evidence> ev;
        for (double x : xg) {
            auto sp = series_for(m, s.anchor, x, alpha, cfg);
            v.push_back(sp.test.converges);
            ev.push_back(series_evidence("spitzer_alpha(" + xs(x) + ")", sp));
        }
        b.add("spitzer_alpha", "spitzer-alpha", "sum n^{alpha-1} P(S_n <= x) finite", all_of(v), ev);
        b.equiv("spitzer-alpha", {"spitzer_integral", "spitzer_alpha"}, {"type_alpha"});
    }

    if (wanted(theorems, "occupation") || wanted(theorems, "chains")) {
        auto ij = moment_functional(Functional::Int_J_dValpha, pool, s.J, alpha, dc);
        b.add("renewal_integral", "occupation", "E J(S^-)^{1+alpha} and int J dV^alpha finite",
              all_of({j_sneg_pow.status, ij.status}), {moment_evidence(j_sneg_pow), moment_evidence(ij)});
        std::vector<Status> v;
        std::vector<Evidence> ev;
        for (std::size_t k = 0; k < xg.size(); ++k) {
            auto e = stop_moment("E_N(" + xs(xg[k]) + ")^" + xs(alpha), s, k, alpha, true, &StoppingRecord::N, dc);
            v.push_back(e.status);
            ev.push_back(moment_evidence(e));
        }
        b.add("N_pow", "occupation", "E N(x)^alpha finite", all_of(v), ev);
        b.imp("occupation", "renewal_integral", "N_pow", pd_type);
        if (alpha >= 1.0) b.imp("occupation", "N_pow", "renewal_integral", pd_type);
    }

    if (wanted(theorems, "chains")) {
        if (alpha >= 1.0) {
            b.imp("chains", "J_D_pow", "spitzer_integral", pd_type);
            b.imp("chains", "J_D_pow", "spitzer_alpha", pd_type);
            b.imp("chains", "spitzer_integral", "renewal_integral", pd_type);
            b.imp("chains", "spitzer_alpha", "N_pow", pd_type);
        }
        if (alpha <= 1.0) {
            b.imp("chains", "J_D_pow", "renewal_integral", pd_type);
            b.imp("chains", "J_D_pow", "N_pow", pd_type);
            b.imp("chains", "renewal_integral", "spitzer_integral", pd_type);
            b.imp("chains", "N_pow", "spitzer_alpha", pd_type);
        }
        for (const auto& id : {"spitzer_integral", "spitzer_alpha", "renewal_integral", "N_pow"})
            b.imp("chains", id, "sigma_gt_pow", pd_type);
    }

    if (wanted(theorems, "minimum")) {
        auto dj = moment_functional(Functional::D_pow_J_D, pool, s.J, alpha, dc);
        b.add("D_pow_J_D", "minimum", "E D^alpha J(D) finite", dj.status, {moment_evidence(dj)});
        std::vector<CensoredStat> mins;
        for (const auto& t : s.campaign.trials) {
            CensoredStat c = t.stops[0].sigma_min;
            c.value = std::max(0.0, -t.stops[0].min_value);
            mins.push_back(c);
        }
        auto mm = stopping_moment("E_abs_min^" + xs(alpha), mins, alpha, true, dc);
        b.add("min_pow", "minimum", "E |min S_n|^alpha finite", mm.status, {moment_evidence(mm)});
        std::vector<Status> v;
        std::vector<Evidence> ev;
        for (std::size_t k = 0; k < xg.size(); ++k) {
            std::vector<double> vals;
            for (const auto& t : s.campaign.trials)
                vals.push_back(t.stops[k].sigma_le.censored ? 0.0 : std::pow(std::abs(t.stops[k].s_at_sigma_le), alpha));
            auto e = estimate_mean("E_abs_S_sigma_le(-" + xs(xg[k]) + ")^" + xs(alpha), vals, nullptr, false, 0.0, dc);
            v.push_back(e.status);
            ev.push_back(moment_evidence(e));
        }
        b.add("overshoot_pow", "minimum", "E |S at sigma<=(-x)|^alpha on finiteness", all_of(v), ev);
        b.equiv("minimum", {"D_pow_J_D", "min_pow"}, {"pd_path"});
        b.imp("minimum", "min_pow", "overshoot_pow", {"pd_path"});
        b.imp("minimum", "D_pow_J_D", "overshoot_pow", {"pd_path"});
    }

    if (wanted(theorems, "finite-state") && m.finite() && m.exact_kernels()) {
        TruncatedMean sl = stationary_increment_law(m);
        JFunction jp = make_J(sl, 1.0);
        const auto& vals = sl.values();
        const auto& w = sl.weights();
        double top = 0.0;
        for (double v : vals) top = std::max(top, std::abs(v));
        // finite support: A_pi(x) is the drift beyond the largest atom
        double apos = sl.A(2.0 * top + 1.0);
        long double e0 = 0, e1 = 0, e2 = 0, W = 0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
            double xm = std::max(0.0, -vals[k]);
            double J = eval_J(jp, xm);
            e0 += w[k] * J;
            e1 += w[k] * std::pow(J, a1);
            e2 += w[k] * (xm > 0 ? std::pow(xm, alpha) * J : 0.0);
            W += w[k];
        }
        Status pos = apos > 1e-12 ? Status::Holds : Status::Fails;
        b.add("pi_J", "finite-state", "A_pi ultimately positive and E_pi J_pi(X^-) finite", pos,
              {{"A_pi(inf)", apos, 0.0, to_string(pos), "exact"}, {"E_pi_J_pi", static_cast<double>(e0 / W), 0, "holds", "exact"}});
        b.add("pi_J_pow", "finite-state", "E_pi J_pi(X^-)^{1+alpha} finite", Status::Holds,
              {{"E_pi_J_pi_pow", static_cast<double>(e1 / W), 0, "holds", "exact, finite support"}});
        b.add("pi_D_pow_J", "finite-state", "E_pi (X^-)^alpha J_pi(X^-) finite", Status::Holds,
              {{"E_pi_Xneg_pow_J", static_cast<double>(e2 / W), 0, "holds", "exact, finite support"}});
        for (const auto& id : {"pd_path", "J_D", "spitzer0", "sigma_gt"}) {
            if (!b.st.count(id)) continue;
            b.imp("finite-state", "pi_J", id);
            b.imp("finite-state", id, "pi_J");
        }
        for (const auto& id : {"J_D_pow", "rho_pow", "sigma_min_pow", "spitzer_alpha", "N_pow", "sigma_gt_pow"}) {
            if (!b.st.count(id)) continue;
            b.imp("finite-state", "pi_J_pow", id, pd_type);
        }
        for (const auto& id : {"D_pow_J_D", "min_pow", "overshoot_pow", "sigma_gt_pow"}) {
            if (!b.st.count(id)) continue;
            b.imp("finite-state", "pi_D_pow_J", id, {"pd_path"});
        }
    }

    if (wanted(theorems, "post-passage")) {
        std::vector<Status> vb, vc;
        std::vector<Evidence> eb, ec;
        for (std::size_t k = 0; k < xg.size(); ++k) {
            auto e1 = stop_moment("E_sigma_bar_gt(" + xs(xg[k]) + ")^" + xs(a1), s, k, a1, false, &StoppingRecord::sigma_bar_gt, dc);
            vb.push_back(e1.status);
            eb.push_back(moment_evidence(e1));
            std::vector<CensoredStat> tn;
            for (const auto& t : s.campaign.trials) tn.push_back(t.tau_nu[k]);
            auto e2 = stopping_moment("E_tau_nu(" + xs(xg[k]) + ")^" + xs(a1), tn, a1, false, dc);
            vc.push_back(e2.status);
            ec.push_back(moment_evidence(e2));
        }
        b.add("post_passage_pow", "post-passage", "E sigma-bar>(x)^{1+alpha} finite", all_of(vb), eb);
        b.add("tau_nu_pow", "post-passage", "E tau_nu(x)^{1+alpha} finite", all_of(vc), ec);
        const std::vector<std::string> g{"embedded_pd", "type_alpha"};
        b.equiv("post-passage", {"J_Sneg_pow", "post_passage_pow", "tau_nu_pow"}, g);
        for (const auto& id : {"J_Sneg_pow", "post_passage_pow", "tau_nu_pow"}) b.imp("post-passage", id, "sigma_gt_pow", g);
    }

    if (wanted(theorems, "passage-solidarity")) {
        auto e = stop_moment("E_sigma_gt(0)^" + xs(a1), s, 0, a1, false, &StoppingRecord::sigma_gt, dc);
        Status st = xg.empty() || xg[0] != 0.0 ? Status::Inconclusive : e.status;
        b.add("sigma_gt0_pow", "passage-solidarity", "E sigma>(0)^{1+alpha} finite", st, {moment_evidence(e)});
        b.imp("passage-solidarity", "sigma_gt0_pow", "sigma_gt_pow", {"type_alpha"});
    }

    if (wanted(theorems, "slln")) {
        Trichotomy t = trichotomy_and_slln(m, s, cfg);
        b.add("pi_abs_mean", "slln", "E_pi |X_1| finite", t.abs_increment);
        Status sl = Status::Inconclusive;
        if (t.rate_class == "linear-rate" && (!t.stationary_mean || t.mean_matches)) sl = Status::Holds;
        else if (t.rate_class == "PD+" || t.rate_class == "ND+" || t.rate_class == "Osc+") sl = Status::Fails;
        Evidence ev{"S_n/n", t.mu, t.stationary_mean.value_or(NAN), to_string(sl), "rate class " + t.rate_class};
        b.add("slln", "slln", "S_n/n converges to E_pi X_1", sl, {ev});
        b.imp("slln", "pi_abs_mean", "slln");
    }

    // a second anchor for the some/all phrasing
    if (cfg.second_anchor && wanted(theorems, "divergence")) {
        std::vector<State> near = m.chain().explore(s.anchor, m.tail_eps(), 8);
        for (State j : near) {
            if (j == s.anchor || m.pi(j) < 1e-3) continue;
            ClassifyConfig c2 = cfg;
            c2.cycles = std::min<std::int64_t>(cfg.cycles, 5000);
            CycleSampleConfig cc;
            cc.anchor = j;
            cc.cycles = c2.cycles;
            cc.seed = splitmix64(cfg.seed + 17);
            cc.max_len = std::min<std::int64_t>(cfg.max_cycle_len, 1000000);
            cc.workers = cfg.workers;
            CycleStats p2 = sample_cycles(m, cc);
            if (p2.size() < cfg.min_samples) break;
            auto tab = truncated_means(p2, {}, cfg.top_k);
            TruncatedMean tm(p2.sum, p2.weight);
            auto jd = moment_functional(Functional::J_D, p2, make_J(tm, 1.0), 1.0, dc);
            Status st2 = sign_and_moment(tab.ultimately_positive, tab.ultimately_negative, jd.status);
            Status st1 = b.get("J_D");
            std::string note = "second anchor " + m.label(j) + ": A ultimately positive and E J(D) finite is " + to_string(st2);
            if ((st1 == Status::Holds && st2 == Status::Fails) || (st1 == Status::Fails && st2 == Status::Holds))
                note += " (disagrees with the main anchor)";
            b.rep.notes.push_back(note);
            break;
        }
    }
    return b.rep;
}

}  // namespace mrw
