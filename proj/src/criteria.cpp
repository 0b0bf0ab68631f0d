#include "mrw/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrw/errors.hpp"

namespace mrw {

std::string to_string(Status s) {
    switch (s) {
        case Status::Holds: return "holds";
        case Status::Fails: return "fails";
        default: return "inconclusive";
    }
}

// ---------- truncated means ----------

double TruncatedMean::Side::eval(double x) const {
    if (!(x > 0.0) || v.empty()) return 0.0;
    std::size_t idx = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
    return wv_prefix[idx] + x * w_suffix[idx];
}

TruncatedMean::TruncatedMean(const std::vector<double>& values, const std::vector<double>& weights)
    : n_(values.size()), vals_(values), w_(weights) {
    if (values.size() != weights.size()) throw InvalidParameter("values and weights differ in length");
    long double tot = 0.0L;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidParameter("negative weight");
        tot += w;
    }
    if (!(tot > 0.0L)) throw EmptySample("truncated means of an empty law");
    std::vector<std::pair<double, double>> p, q;
    for (std::size_t k = 0; k < values.size(); ++k) {
        double w = static_cast<double>(weights[k] / tot);
        if (values[k] > 0.0) p.push_back({values[k], w});
        else if (values[k] < 0.0) q.push_back({-values[k], w});
    }
    auto build = [](std::vector<std::pair<double, double>>& a, Side& s, double& mass) {
        std::sort(a.begin(), a.end());
        s.v.resize(a.size());
        s.wv_prefix.assign(a.size() + 1, 0.0);
        s.w_suffix.assign(a.size() + 1, 0.0);
        long double acc = 0.0L;
        for (std::size_t k = 0; k < a.size(); ++k) {
            s.v[k] = a[k].first;
            acc += static_cast<long double>(a[k].first) * a[k].second;
            s.wv_prefix[k + 1] = static_cast<double>(acc);
        }
        acc = 0.0L;
        for (std::size_t k = a.size(); k-- > 0;) {
            acc += a[k].second;
            s.w_suffix[k] = static_cast<double>(acc);
        }
        mass = s.w_suffix.empty() ? 0.0 : s.w_suffix[0];
    };
    build(p, pos_, p_pos_);
    build(q, neg_, p_neg_);
}

double TruncatedMean::pos(double x) const { return pos_.eval(x); }
double TruncatedMean::neg(double x) const { return neg_.eval(x); }
double TruncatedMean::mean_pos() const { return pos_.wv_prefix.empty() ? 0.0 : pos_.wv_prefix.back(); }
double TruncatedMean::mean_neg() const { return neg_.wv_prefix.empty() ? 0.0 : neg_.wv_prefix.back(); }

std::vector<double> default_grid(const std::vector<double>& values, int points) {
    std::vector<double> a;
    for (double v : values)
        if (v != 0.0 && std::isfinite(v)) a.push_back(std::abs(v));
    double med = 1.0, q99 = 1.0;
    if (!a.empty()) {
        std::sort(a.begin(), a.end());
        med = a[a.size() / 2];
        q99 = a[std::min(a.size() - 1, static_cast<std::size_t>(0.99 * static_cast<double>(a.size())))];
    }
    double lo = med / 100.0, hi = std::max(10.0 * med, q99);
    std::vector<double> g;
    for (int k = 0; k < points; ++k)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(points - 1)));
    return g;
}

TruncatedMeanTable truncated_means(const CycleStats& pool, const std::vector<double>& grid, int top_k) {
    if (pool.empty()) throw EmptySample("no cycles at the anchor");
    TruncatedMeanTable t;
    t.anchor = pool.anchor;
    t.grid = grid.empty() ? default_grid(pool.sum) : grid;
    t.source = pool.exact ? "exact" : "empirical";
    t.sample_size = pool.size();
    t.top_k = top_k;
    TruncatedMean tm(pool.sum, pool.weight);
    const double n = static_cast<double>(pool.size());
    for (double x : t.grid) {
        double a = tm.A(x);
        t.A.push_back(a);
        t.pos.push_back(tm.pos(x));
        t.neg.push_back(tm.neg(x));
        double se = 0.0;
        if (!pool.exact) {
            double m2 = 0.0;
            for (double y : pool.sum) {
                double z = (y > 0 ? std::min(y, x) : -std::min(-y, x)) - a;
                m2 += z * z;
            }
            se = std::sqrt(m2 / std::max(1.0, n - 1.0) / n);
        }
        t.se.push_back(se);
    }
    // top grid points only: the sign for large x is what matters
    std::size_t k0 = t.grid.size() > static_cast<std::size_t>(top_k) ? t.grid.size() - static_cast<std::size_t>(top_k) : 0;
    bool pos = true, neg = true;
    for (std::size_t k = k0; k < t.grid.size(); ++k) {
        double thr = pool.exact ? 1e-12 * std::max(1.0, t.pos[k] + t.neg[k]) : 3.0 * t.se[k];
        if (pool.exact) thr = std::max(thr, pool.residual * t.grid[k]);
        pos = pos && t.A[k] > thr;
        neg = neg && t.A[k] < -thr;
    }
    t.ultimately_positive = pos;
    t.ultimately_negative = neg;
    return t;
}

JFunction make_J(const TruncatedMean& tm, double gamma, bool negative_side) {
    if (gamma < 0.0) throw InvalidParameter("gamma must be nonnegative");
    JFunction j;
    j.gamma = gamma;
    j.tm = tm;
    j.negative_side = negative_side;
    j.degenerate = (negative_side ? tm.p_neg() : tm.p_pos()) <= 0.0;
    return j;
}

double eval_J(const JFunction& jf, double x) {
    if (!(x > 0.0)) return jf.gamma > 0.0 ? 1.0 : 0.0;
    if (jf.degenerate || jf.gamma == 0.0) return x;
    double d = jf.negative_side ? jf.tm.neg(x) : jf.tm.pos(x);
    if (!(d > 0.0)) return x;
    return x / std::pow(d, jf.gamma);
}

// ---------- excursion measure ----------

ExcursionMeasure excursion_measure(const CycleStats& pool, double alpha, const std::vector<double>& grid) {
    if (pool.empty()) throw EmptySample("no cycles at the anchor");
    if (alpha < 0.0) throw InvalidParameter("alpha must be nonnegative");
    ExcursionMeasure e;
    e.anchor = pool.anchor;
    e.alpha = alpha;
    e.grid = grid.empty() ? default_grid(pool.down) : grid;
    e.sample_size = pool.size();
    e.exact = pool.exact;
    const double W = pool.total_weight();
    const double n = static_cast<double>(pool.size());
    for (double x : e.grid) {
        long double t = 0, t2 = 0, pd = 0, tw = 0, occ = 0;
        for (std::size_t c = 0; c < pool.size(); ++c) {
            double w = pool.weight[c];
            double cnt = static_cast<double>(pool.count_below(c, x));
            double v = std::pow(cnt, alpha);
            if (cnt == 0.0) v = 0.0;
            t += w * v;
            t2 += w * v * v;
            occ += w * cnt;
            if (pool.down[c] > x) {
                pd += w;
                tw += w * std::pow(static_cast<double>(pool.length[c]), alpha);
            }
        }
        double tail = static_cast<double>(t / W);
        e.tail.push_back(tail);
        e.tail_se.push_back(pool.exact ? 0.0 : std::sqrt(std::max(0.0, static_cast<double>(t2 / W) - tail * tail) / n));
        e.p_down.push_back(static_cast<double>(pd / W));
        e.tau_weighted.push_back(static_cast<double>(tw / W));
        e.occupation.push_back(static_cast<double>(occ / W));
        double tol = 1e-12 * std::max(1.0, e.tau_weighted.back());
        if (e.p_down.back() > tail + tol || tail > e.tau_weighted.back() + tol) e.sandwich_ok = false;
    }
    return e;
}

// ---------- moment functionals ----------

std::string functional_id(Functional f) {
    switch (f) {
        case Functional::J_D: return "E_J_D";
        case Functional::J_D_pow: return "E_J_D_pow";
        case Functional::J_Sneg: return "E_J_Sneg";
        case Functional::J_Sneg_pow: return "E_J_Sneg_pow";
        case Functional::D_pow_J_D: return "E_D_pow_J_D";
        case Functional::Int_Jalpha_dV: return "int_Jalpha_dV";
        case Functional::Int_J_dValpha: return "int_J_dValpha";
        case Functional::Int_logJ_dV: return "int_logJ_dV";
        case Functional::Tau_pow: return "E_tau_pow";
        case Functional::Tau_log_tau: return "E_tau_log_tau";
        case Functional::Abs_sum: return "E_abs_S_tau";
        case Functional::Abs_sum_excursion: return "E_sum_abs_X";
    }
    return "unknown";
}

namespace {

double log_plus(double v) { return v > 1.0 ? std::log(v) : 0.0; }

// contribution of one run (value v, count c, starting after j0 larger values)
double run_value(Functional f, const JFunction& jf, double alpha, double v, std::int64_t c, std::int64_t j0) {
    double J = eval_J(jf, v);
    double cnt = static_cast<double>(c);
    switch (f) {
        case Functional::Int_Jalpha_dV: return cnt * std::pow(J, alpha);
        case Functional::Int_J_dValpha:
            return J * (std::pow(static_cast<double>(j0 + c), alpha) - std::pow(static_cast<double>(j0), alpha));
        case Functional::Int_logJ_dV: return cnt * log_plus(J);
        default: return 0.0;
    }
}

bool is_integral(Functional f) {
    return f == Functional::Int_Jalpha_dV || f == Functional::Int_J_dValpha || f == Functional::Int_logJ_dV;
}

double cycle_value(Functional f, const CyclePath& c, const JFunction& jf, double alpha,
                   const std::vector<std::pair<double, std::int64_t>>* incs) {
    double sneg = std::max(0.0, -c.sum.value());
    double tau = static_cast<double>(c.length);
    switch (f) {
        case Functional::J_D: return eval_J(jf, c.down);
        case Functional::J_D_pow: return std::pow(eval_J(jf, c.down), 1.0 + alpha);
        case Functional::J_Sneg: return eval_J(jf, sneg);
        case Functional::J_Sneg_pow: return std::pow(eval_J(jf, sneg), 1.0 + alpha);
        case Functional::D_pow_J_D: return c.down > 0.0 ? std::pow(c.down, alpha) * eval_J(jf, c.down) : 0.0;
        case Functional::Tau_pow: return std::pow(tau, 1.0 + alpha);
        case Functional::Tau_log_tau: return tau * std::log(tau);
        case Functional::Abs_sum: return std::abs(c.sum.value());
        case Functional::Abs_sum_excursion: {
            if (!incs) throw InvalidParameter("the cycle pool carries no increments");
            double s = 0.0;
            for (const auto& [v, k] : *incs) s += std::abs(v) * static_cast<double>(k);
            return s;
        }
        default: {
            double s = 0.0;
            std::int64_t j0 = 0;
            for (const auto& [v, k] : c.negs) {
                s += run_value(f, jf, alpha, v, k, j0);
                j0 += k;
            }
            return s;
        }
    }
}

}  // namespace

std::vector<double> functional_values(Functional f, const CycleStats& pool, const JFunction& jf, double alpha) {
    std::vector<double> out(pool.size());
    for (std::size_t c = 0; c < pool.size(); ++c) {
        std::vector<std::pair<double, std::int64_t>> incs;
        if (pool.has_increments)
            for (std::size_t k = pool.inc_offset[c]; k < pool.inc_offset[c + 1]; ++k) incs.push_back({pool.inc_value[k], pool.inc_count[k]});
        out[c] = cycle_value(f, pool.path(c), jf, alpha, pool.has_increments ? &incs : nullptr);
    }
    return out;
}

MomentEstimate moment_functional(Functional f, const CycleStats& pool, const JFunction& jf, double alpha,
                                 const DiagnosticConfig& dc) {
    if (pool.empty()) throw EmptySample("no cycles at the anchor");
    auto v = functional_values(f, pool, jf, alpha);
    MomentEstimate e = estimate_mean(functional_id(f), v, pool.exact ? &pool.weight : nullptr, pool.exact, pool.residual, dc);
    e.censored = static_cast<std::size_t>(pool.censored);
    if (!pool.exact && pool.censored > 0) {
        // censored cycles are the long ones; the estimate is then a lower bound
        double frac = static_cast<double>(pool.censored) / static_cast<double>(pool.size() + static_cast<std::size_t>(pool.censored));
        if (frac > 0.001 && e.status == Status::Holds) e.status = Status::Inconclusive;
    }
    return e;
}

MomentEstimate estimate_mean(const std::string& id, const std::vector<double>& values, const std::vector<double>* weights,
                             bool exact, double residual, const DiagnosticConfig& dc) {
    if (values.empty()) throw EmptySample("no samples for " + id);
    MomentEstimate e;
    e.id = id;
    e.n = values.size();
    e.exact = exact;
    e.residual = residual;
    for (double v : values)
        if (std::isnan(v)) throw InvalidParameter("nan sample in " + id);
    if (weights) {
        long double s = 0, w = 0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            s += static_cast<long double>((*weights)[k]) * values[k];
            w += (*weights)[k];
        }
        e.estimate = static_cast<double>(s / w);
    } else {
        long double s = 0;
        for (double v : values) s += v;
        e.estimate = static_cast<double>(s / static_cast<long double>(values.size()));
    }
    if (exact) {
        // partial sums over an enumeration; finite only when nothing was left out
        e.tail_index = INFINITY;
        e.status = residual == 0.0 && std::isfinite(e.estimate) ? Status::Holds : Status::Inconclusive;
        return e;
    }
    const double n = static_cast<double>(values.size());
    long double m2 = 0;
    for (double v : values) m2 += (v - e.estimate) * static_cast<long double>(v - e.estimate);
    e.se = std::sqrt(static_cast<double>(m2) / std::max(1.0, n - 1.0) / n);

    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::size_t top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dc.top_fraction * n)));
    long double tsum = 0, all = 0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        all += std::abs(sorted[k]);
        if (k < top) tsum += std::abs(sorted[k]);
    }
    e.top_share = all > 0 ? static_cast<double>(tsum / all) : 0.0;
    e.divergence_flag = values.size() >= 100 && e.top_share > dc.top_share_limit;

    auto running = [&](std::size_t upto) {
        long double s = 0;
        for (std::size_t k = 0; k < upto; ++k) s += values[k];
        return static_cast<double>(s / static_cast<long double>(upto));
    };
    std::size_t h = values.size() / 2, q = 3 * values.size() / 4;
    e.stable = true;
    if (h > 0 && e.estimate != 0.0) {
        double scale = std::abs(e.estimate);
        e.stable = std::abs(running(h) - e.estimate) <= dc.stability * scale &&
                   std::abs(running(q) - e.estimate) <= dc.stability * scale;
    }

    // Hill estimator over the k largest positive values
    std::size_t k = std::max<std::size_t>(10, values.size() / 100);
    std::size_t npos = 0;
    while (npos < sorted.size() && sorted[npos] > 0.0) ++npos;
    if (npos < k + 1) {
        e.tail_index = INFINITY;
    } else {
        long double hsum = 0;
        for (std::size_t i = 0; i < k; ++i) hsum += std::log(sorted[i] / sorted[k]);
        double H = static_cast<double>(hsum / static_cast<long double>(k));
        e.tail_index = H > 0.0 ? 1.0 / H : INFINITY;
    }
    if (!std::isfinite(e.estimate)) {
        e.status = Status::Fails;
    } else if (e.stable && !e.divergence_flag && e.tail_index > dc.tail_holds) {
        e.status = Status::Holds;
    } else if (e.divergence_flag && (e.tail_index < dc.tail_fails || !e.stable) && e.estimate > dc.ceiling) {
        e.status = Status::Fails;
    } else {
        e.status = Status::Inconclusive;
    }
    return e;
}

MomentEstimate stopping_moment(const std::string& id, const std::vector<CensoredStat>& samples, double p,
                               bool certification_based, const DiagnosticConfig& dc) {
    if (samples.empty()) throw EmptySample("no samples for " + id);
    std::vector<double> v;
    std::size_t cens = 0;
    for (const auto& s : samples) {
        if (s.censored) ++cens;
        double x = s.censored ? static_cast<double>(s.horizon) : s.value;
        v.push_back(p == 0.0 ? 1.0 : std::pow(std::max(0.0, x), p));
    }
    MomentEstimate e = estimate_mean(id, v, nullptr, false, 0.0, dc);
    e.censored = cens;
    double frac = static_cast<double>(cens) / static_cast<double>(samples.size());
    if (certification_based) {
        if (frac > 0.001) e.status = Status::Inconclusive;
    } else if (frac > 0.2) {
        e.status = Status::Fails;
    } else if (frac > 0.001) {
        e.status = Status::Inconclusive;
    }
    return e;
}

// ---------- series ----------

SeriesTest cauchy_tail_test(const std::vector<double>& blocks) {
    SeriesTest t;
    t.blocks = blocks;
    double acc = 0.0;
    for (double b : blocks) t.partial.push_back(acc += b);
    const std::size_t K = blocks.size();
    std::size_t k0 = std::max<std::size_t>(1, K / 2);
    if (K < 4 || K - k0 < 3) return t;
    std::vector<double> xs, ys;
    std::size_t zeros = 0;
    for (std::size_t k = k0; k < K; ++k) {
        if (blocks[k] > 0.0) {
            xs.push_back(std::log(static_cast<double>(k)));
            ys.push_back(std::log(blocks[k]));
        } else {
            ++zeros;
        }
    }
    if (xs.empty() || (zeros > xs.size() && blocks.back() <= 0.0)) {
        t.slope = -INFINITY;
        t.converges = Status::Holds;
        return t;
    }
    if (xs.size() < 3) return t;
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    t.slope = sxy / sxx;
    if (t.slope < -1.15) t.converges = Status::Holds;
    else if (t.slope > -0.95) t.converges = Status::Fails;
    return t;
}

SpitzerSeries spitzer_from_probabilities(std::vector<double> prob, std::vector<double> se, double x, double alpha) {
    SpitzerSeries s;
    s.x = x;
    s.alpha = alpha;
    s.prob = std::move(prob);
    s.se = std::move(se);
    double acc = 0.0;
    std::vector<double> blocks;
    // block k holds n in [2^k, 2^{k+1}); only complete blocks enter the test
    for (std::size_t i = 0; i < s.prob.size(); ++i) {
        double n = static_cast<double>(i + 1);
        double term = std::pow(n, alpha - 1.0) * s.prob[i];
        s.partial.push_back(acc += term);
        std::size_t k = static_cast<std::size_t>(std::floor(std::log2(n) + 1e-12));
        if (blocks.size() <= k) blocks.resize(k + 1, 0.0);
        blocks[k] += term;
    }
    std::size_t complete = 0;
    while ((std::size_t(2) << complete) - 1 <= s.prob.size()) ++complete;
    blocks.resize(std::min(blocks.size(), complete));
    s.test = cauchy_tail_test(blocks);
    return s;
}

namespace {

void add_block(std::vector<double>& blocks, double v, double contrib) {
    if (!(v > 0.0) || contrib == 0.0) return;
    std::size_t k = v < 1.0 ? 0 : static_cast<std::size_t>(std::floor(std::log2(v))) + 1;
    if (blocks.size() <= k) blocks.resize(k + 1, 0.0);
    blocks[k] += contrib;
}

void integral_blocks(Functional f, const CyclePath& c, const JFunction& jf, double alpha, double w, std::vector<double>& blocks) {
    std::int64_t j0 = 0;
    for (const auto& [v, k] : c.negs) {
        add_block(blocks, v, w * run_value(f, jf, alpha, v, k, j0));
        j0 += k;
    }
}

}  // namespace

SeriesTest integral_series(Functional f, const CycleStats& pool, const JFunction& jf, double alpha) {
    if (!is_integral(f)) throw InvalidParameter(functional_id(f) + " is not an integral functional");
    if (pool.empty()) throw EmptySample("no cycles at the anchor");
    std::vector<double> blocks;
    double W = pool.total_weight();
    for (std::size_t c = 0; c < pool.size(); ++c) integral_blocks(f, pool.path(c), jf, alpha, pool.weight[c] / W, blocks);
    return cauchy_tail_test(blocks);
}

SeriesTest integral_series_exact(Functional f, const Model& m, State anchor, const JFunction& jf, double alpha,
                                 const ExactOptions& opt) {
    if (!is_integral(f)) throw InvalidParameter(functional_id(f) + " is not an integral functional");
    std::vector<double> blocks;
    for_each_exact_cycle(m, anchor, opt, [&](const CyclePath& c) { integral_blocks(f, c, jf, alpha, c.weight, blocks); });
    return cauchy_tail_test(blocks);
}

}  // namespace mrw
