#include "mrw/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "mrw/errors.hpp"

namespace mrw {

namespace {

constexpr std::int64_t kCycleBlock = 256;

double neg_part(double v) { return v < 0.0 ? -v : 0.0; }

}  // namespace

Trajectory run_trajectory(const Model& m, State start, std::int64_t horizon, Engine& g) {
    if (horizon < 1) throw InvalidParameter("horizon must be at least 1");
    if (!m.chain().valid_state(start)) throw ConfigError("start state " + std::to_string(start) + " is not a state of the model");
    Trajectory t;
    t.start = start;
    const auto n = static_cast<std::size_t>(horizon);
    t.states.resize(n + 1);
    t.x.resize(n + 1);
    t.s.resize(n + 1);
    t.states[0] = start;
    const ChainFamily& f = m.chain();
    State cur = start;
    DD acc(0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        auto [next, inc] = f.step(cur, g);
        cur = next;
        acc = dd_add(acc, inc);
        t.states[k] = cur;
        t.x[k] = inc;
        t.s[k] = acc;
    }
    return t;
}

Trajectory run_trajectory(const Model& m, State start, std::int64_t horizon, std::uint64_t seed) {
    Engine g(seed);
    return run_trajectory(m, start, horizon, g);
}

void compress_desc(std::vector<double>& v, std::vector<std::pair<double, std::int64_t>>& out) {
    out.clear();
    std::sort(v.begin(), v.end(), std::greater<double>());
    for (double a : v) {
        if (!out.empty() && out.back().first == a) ++out.back().second;
        else out.push_back({a, 1});
    }
}

CyclePath make_cycle(const std::vector<DD>& s, std::size_t from, std::size_t to) {
    CyclePath c;
    c.length = static_cast<std::int64_t>(to - from);
    c.sum = dd_sub(s[to], s[from]);
    std::vector<double> negs;
    for (std::size_t k = from + 1; k <= to; ++k) {
        double rel = dd_sub(s[k], s[from]).value();
        if (rel < 0.0) {
            negs.push_back(-rel);
            c.down = std::max(c.down, -rel);
        } else {
            c.up_start = std::max(c.up_start, rel);
        }
        c.up_end = std::max(c.up_end, dd_sub(s[k], s[to]).value());
    }
    compress_desc(negs, c.negs);
    return c;
}

double CycleStats::total_weight() const {
    long double t = 0.0L;
    for (double w : weight) t += w;
    return static_cast<double>(t);
}

void CycleStats::add(const CyclePath& c, const std::vector<std::pair<double, std::int64_t>>* incs) {
    length.push_back(c.length);
    sum.push_back(c.sum.value());
    down.push_back(c.down);
    up_start.push_back(c.up_start);
    up_end.push_back(c.up_end);
    weight.push_back(c.weight);
    for (const auto& [v, k] : c.negs) {
        neg_value.push_back(v);
        neg_count.push_back(k);
    }
    neg_offset.push_back(neg_value.size());
    if (incs) {
        has_increments = true;
        for (const auto& [v, k] : *incs) {
            inc_value.push_back(v);
            inc_count.push_back(k);
        }
        inc_offset.push_back(inc_value.size());
    }
}

void CycleStats::append(const CycleStats& o) {
    auto cat = [](auto& a, const auto& b) { a.insert(a.end(), b.begin(), b.end()); };
    std::size_t nb = neg_value.size(), ib = inc_value.size();
    cat(length, o.length);
    cat(sum, o.sum);
    cat(down, o.down);
    cat(up_start, o.up_start);
    cat(up_end, o.up_end);
    cat(weight, o.weight);
    cat(neg_value, o.neg_value);
    cat(neg_count, o.neg_count);
    for (std::size_t k = 1; k < o.neg_offset.size(); ++k) neg_offset.push_back(nb + o.neg_offset[k]);
    if (o.has_increments) {
        has_increments = true;
        cat(inc_value, o.inc_value);
        cat(inc_count, o.inc_count);
        for (std::size_t k = 1; k < o.inc_offset.size(); ++k) inc_offset.push_back(ib + o.inc_offset[k]);
    }
    discarded += o.discarded;
    censored += o.censored;
    residual += o.residual;
}

std::int64_t CycleStats::count_below(std::size_t c, double x) const {
    std::int64_t n = 0;
    for (std::size_t k = neg_offset[c]; k < neg_offset[c + 1] && neg_value[k] > x; ++k) n += neg_count[k];
    return n;
}

CyclePath CycleStats::path(std::size_t c) const {
    CyclePath p;
    p.weight = weight[c];
    p.length = length[c];
    p.sum = DD(sum[c]);
    p.down = down[c];
    p.up_start = up_start[c];
    p.up_end = up_end[c];
    for (std::size_t k = neg_offset[c]; k < neg_offset[c + 1]; ++k) p.negs.push_back({neg_value[k], neg_count[k]});
    return p;
}

CycleStats cycle_decompose(const Trajectory& t, State anchor) {
    CycleStats cs;
    cs.anchor = anchor;
    std::optional<std::size_t> last;
    if (t.states[0] == anchor) last = 0;
    for (std::size_t k = 1; k < t.states.size(); ++k) {
        if (t.states[k] != anchor) continue;
        if (last) cs.add(make_cycle(t.s, *last, k));
        last = k;
    }
    if (!last) {
        cs.anchor_never_visited = true;
        return cs;
    }
    if (*last + 1 < t.states.size()) cs.discarded = 1;
    return cs;
}

namespace {

CycleStats cycle_block(const Model& m, const CycleSampleConfig& cfg, std::int64_t block) {
    CycleStats cs;
    cs.anchor = cfg.anchor;
    Engine g(trial_seed(cfg.seed, static_cast<std::uint64_t>(block)));
    const ChainFamily& f = m.chain();
    std::int64_t first = block * kCycleBlock;
    std::int64_t last = std::min(cfg.cycles, first + kCycleBlock);
    std::vector<DD> s;
    std::vector<double> incs;
    std::vector<std::pair<double, std::int64_t>> inc_rle;
    for (std::int64_t c = first; c < last; ++c) {
        s.assign(1, DD(0.0));
        incs.clear();
        State cur = cfg.anchor;
        bool done = false;
        for (std::int64_t k = 1; k <= cfg.max_len; ++k) {
            auto [next, inc] = f.step(cur, g);
            cur = next;
            s.push_back(dd_add(s.back(), inc));
            if (cfg.keep_increments) incs.push_back(inc.value());
            if (cur == cfg.anchor) {
                done = true;
                break;
            }
        }
        if (!done) {
            ++cs.censored;
            continue;
        }
        CyclePath p = make_cycle(s, 0, s.size() - 1);
        if (cfg.keep_increments) {
            compress_desc(incs, inc_rle);
            cs.add(p, &inc_rle);
        } else {
            cs.add(p);
        }
    }
    return cs;
}

}  // namespace

CycleStats sample_cycles(const Model& m, const CycleSampleConfig& cfg) {
    if (cfg.cycles < 1) throw InvalidParameter("cycle count must be positive");
    const std::int64_t blocks = (cfg.cycles + kCycleBlock - 1) / kCycleBlock;
    std::vector<CycleStats> parts(static_cast<std::size_t>(blocks));
    int nt = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (std::int64_t b = 0; b < blocks; ++b) parts[static_cast<std::size_t>(b)] = cycle_block(m, cfg, b);
    CycleStats out;
    out.anchor = cfg.anchor;
    for (const auto& p : parts) out.append(p);
    return out;
}

CycleStats sample_cycles_serial(const Model& m, const CycleSampleConfig& cfg) {
    if (cfg.cycles < 1) throw InvalidParameter("cycle count must be positive");
    const std::int64_t blocks = (cfg.cycles + kCycleBlock - 1) / kCycleBlock;
    CycleStats out;
    out.anchor = cfg.anchor;
    for (std::int64_t b = 0; b < blocks; ++b) out.append(cycle_block(m, cfg, b));
    return out;
}

StoppingRecord stopping_times(const Trajectory& t, double x, const Certification& cert) {
    if (!(x >= 0.0)) throw InvalidParameter("level x must be nonnegative");
    const std::int64_t H = t.horizon();
    StoppingRecord r;
    r.x = x;
    auto init = [&](CensoredStat& c) {
        c.value = static_cast<double>(H);
        c.censored = true;
        c.horizon = H;
    };
    init(r.sigma_gt);
    init(r.sigma_le);
    init(r.rho);
    init(r.N);
    init(r.sigma_min);
    init(r.sigma_bar_gt);

    std::int64_t ret = -1;  // tau(M_0)
    std::int64_t rho = 0, count = 0, argmin = 1;
    double mn = std::numeric_limits<double>::infinity();
    for (std::int64_t k = 1; k <= H; ++k) {
        double s = t.S(k);
        if (r.sigma_gt.censored && s > x) {
            r.sigma_gt.value = static_cast<double>(k);
            r.sigma_gt.censored = false;
        }
        if (r.sigma_le.censored && s <= -x) {
            r.sigma_le.value = static_cast<double>(k);
            r.sigma_le.censored = false;
            r.s_at_sigma_le = s;
        }
        if (s <= x) {
            rho = k;
            ++count;
        }
        if (s < mn) {
            mn = s;
            argmin = k;
        }
        if (ret < 0 && t.states[static_cast<std::size_t>(k)] == t.start) ret = k;
        if (ret >= 0 && k > ret && r.sigma_bar_gt.censored && s > x) {
            r.sigma_bar_gt.value = static_cast<double>(k);
            r.sigma_bar_gt.censored = false;
        }
    }
    r.min_value = mn;

    // certification: the last `window` steps stay above the level by a drift-scaled margin
    std::int64_t M = cert.window > 0 ? std::min(cert.window, H) : std::max<std::int64_t>(1, H / 4);
    double drift = t.S(H) / static_cast<double>(H);
    double delta = drift * static_cast<double>(M) * cert.margin_factor;
    double win_min = std::numeric_limits<double>::infinity();
    for (std::int64_t k = H - M + 1; k <= H; ++k) win_min = std::min(win_min, t.S(k));
    if (drift > 0.0 && win_min > x + delta) {
        r.rho = {static_cast<double>(rho), false, H};
        r.N = {static_cast<double>(count), false, H};
    }
    if (drift > 0.0 && argmin <= H - M && win_min > mn + delta) r.sigma_min = {static_cast<double>(argmin), false, H};
    return r;
}

LadderRecord ladder_process(const Trajectory& t, State anchor) {
    LadderRecord L;
    const std::int64_t H = t.horizon();
    double best = t.S(0);
    std::int64_t last_le = 0;
    double le_height = t.S(0);
    for (std::int64_t k = 1; k <= H; ++k) {
        double s = t.S(k);
        if (s > best) {
            best = s;
            L.asc_epochs.push_back(k);
            L.asc_states.push_back(t.states[static_cast<std::size_t>(k)]);
            L.asc_heights.push_back(s);
        }
        if (s <= le_height) {
            le_height = s;
            last_le = k;
            L.desc_epochs.push_back(k);
            L.desc_heights.push_back(s);
        }
    }
    (void)last_le;

    // embedded walk at the anchor
    std::vector<std::int64_t> taus;
    for (std::int64_t k = 0; k <= H; ++k)
        if (t.states[static_cast<std::size_t>(k)] == anchor) taus.push_back(k);
    if (taus.empty()) return L;
    const std::int64_t tau0 = taus[0];
    double rec = t.S(tau0);
    std::int64_t prev = tau0;
    for (std::size_t n = 1; n < taus.size(); ++n) {
        double s = t.S(taus[n]);
        if (s > rec) {
            double d = 0.0;
            for (std::int64_t k = prev + 1; k <= taus[n]; ++k) d = std::max(d, neg_part(t.S(k) - t.S(prev)));
            L.zeta.push_back(static_cast<std::int64_t>(n));
            L.tau_gt.push_back(taus[n]);
            L.d_gt.push_back(d);
            rec = s;
            prev = taus[n];
        }
    }
    if (!L.zeta.empty()) {
        // D_1 <= D_1^> <= sum_{k <= zeta_1} D_k
        double sum_d = 0.0, d1 = 0.0;
        for (std::int64_t n = 1; n <= L.zeta[0]; ++n) {
            double d = 0.0;
            for (std::int64_t k = taus[n - 1] + 1; k <= taus[n]; ++k) d = std::max(d, neg_part(t.S(k) - t.S(taus[n - 1])));
            if (n == 1) d1 = d;
            sum_d += d;
        }
        double tol = 1e-9 * std::max(1.0, sum_d);
        L.sandwich_checked = true;
        L.sandwich_ok = d1 <= L.d_gt[0] + tol && L.d_gt[0] <= sum_d + tol;
    }
    return L;
}

namespace {

std::vector<std::int64_t> dyadic_times(std::int64_t H) {
    std::vector<std::int64_t> out;
    for (std::int64_t n = 1; n <= H; n *= 2) out.push_back(n);
    if (out.back() != H) out.push_back(H);
    return out;
}

TrialRecord one_trial(const Model& m, const CampaignConfig& cfg, std::int64_t index, CycleStats* cycles,
                      const std::vector<std::int64_t>& cps) {
    Engine g(trial_seed(cfg.seed, static_cast<std::uint64_t>(index)));
    Trajectory t = run_trajectory(m, cfg.start, cfg.horizon, g);
    TrialRecord r;
    const std::int64_t H = t.horizon();
    for (double x : cfg.x_grid) r.stops.push_back(stopping_times(t, x, cfg.cert));
    r.first_return = {static_cast<double>(H), true, H};
    r.tau_nu.assign(cfg.x_grid.size(), CensoredStat{static_cast<double>(H), true, H});
    std::size_t pending = cfg.x_grid.size();
    for (std::int64_t k = 1; k <= H; ++k) {
        if (t.states[static_cast<std::size_t>(k)] != cfg.anchor) continue;
        ++r.cycles;
        if (r.first_return.censored) r.first_return = {static_cast<double>(k), false, H};
        if (pending == 0) continue;
        double s = t.S(k);
        for (std::size_t j = 0; j < cfg.x_grid.size(); ++j)
            if (r.tau_nu[j].censored && s > cfg.x_grid[j]) {
                r.tau_nu[j] = {static_cast<double>(k), false, H};
                --pending;
            }
    }
    for (auto n : cps) r.checkpoints.push_back(t.S(n));
    r.final_s = t.S(H);
    double lo1 = 0.0, hi1 = 0.0, lo2 = std::numeric_limits<double>::infinity(), hi2 = -lo2;
    for (std::int64_t k = 1; k <= H; ++k) {
        double s = t.S(k);
        if (k <= H / 2) {
            lo1 = std::min(lo1, s);
            hi1 = std::max(hi1, s);
        } else {
            lo2 = std::min(lo2, s);
            hi2 = std::max(hi2, s);
        }
    }
    r.new_low_late = lo2 < lo1;
    r.new_high_late = hi2 > hi1;
    if (cycles) *cycles = cycle_decompose(t, cfg.anchor);
    return r;
}

void check_campaign(const Model& m, const CampaignConfig& cfg) {
    if (cfg.trials < 1) throw InvalidParameter("trials must be at least 1");
    if (cfg.horizon < 1) throw InvalidParameter("horizon must be at least 1");
    if (!m.chain().valid_state(cfg.start)) throw ConfigError("start state is not a state of the model");
    if (!m.chain().valid_state(cfg.anchor)) throw ConfigError("anchor is not a state of the model");
    for (double x : cfg.x_grid)
        if (!(x >= 0.0)) throw InvalidParameter("levels in the x grid must be nonnegative");
}

CampaignResult fold(const CampaignConfig& cfg, std::vector<TrialRecord>&& trials, std::vector<CycleStats>& cyc) {
    CampaignResult res;
    res.config = cfg;
    res.checkpoint_times = dyadic_times(cfg.horizon);
    res.trials = std::move(trials);
    res.cycles.anchor = cfg.anchor;
    if (cfg.keep_cycles) {
        bool visited = false;
        for (auto& c : cyc) {
            res.cycles.append(c);
            visited = visited || !c.anchor_never_visited;
        }
        res.cycles.anchor_never_visited = !visited;
    }
    return res;
}

}  // namespace

CampaignResult run_campaign(const Model& m, const CampaignConfig& cfg) {
    check_campaign(m, cfg);
    const auto n = static_cast<std::size_t>(cfg.trials);
    auto cps = dyadic_times(cfg.horizon);
    std::vector<TrialRecord> trials(n);
    std::vector<CycleStats> cyc(cfg.keep_cycles ? n : 0);
    int nt = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nt)
    for (std::int64_t i = 0; i < cfg.trials; ++i) {
        auto k = static_cast<std::size_t>(i);
        trials[k] = one_trial(m, cfg, i, cfg.keep_cycles ? &cyc[k] : nullptr, cps);
    }
    return fold(cfg, std::move(trials), cyc);
}

CampaignResult run_campaign_serial(const Model& m, const CampaignConfig& cfg) {
    check_campaign(m, cfg);
    const auto n = static_cast<std::size_t>(cfg.trials);
    auto cps = dyadic_times(cfg.horizon);
    std::vector<TrialRecord> trials(n);
    std::vector<CycleStats> cyc(cfg.keep_cycles ? n : 0);
    for (std::size_t k = 0; k < n; ++k)
        trials[k] = one_trial(m, cfg, static_cast<std::int64_t>(k), cfg.keep_cycles ? &cyc[k] : nullptr, cps);
    return fold(cfg, std::move(trials), cyc);
}

}  // namespace mrw
