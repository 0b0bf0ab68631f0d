#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <functional>
#include <unordered_map>

#include <omp.h>

#include "mrw/criteria.hpp"
#include "mrw/errors.hpp"

namespace mrw {

namespace {

using PathSink = std::function<void(double, const std::vector<DD>&)>;

class RowCache {
public:
    RowCache(const ChainFamily& f, double eps) : f_(f), eps_(eps) {}
    const Row& get(State s) {
        auto it = big_.find(s);
        if (it != big_.end()) return it->second;
        Row r = f_.row(s, eps_);
        if (r.edges.size() >= 64) return big_.emplace(s, std::move(r)).first->second;
        tmp_.push_back(std::move(r));
        if (tmp_.size() > 4096) tmp_.erase(tmp_.begin(), tmp_.begin() + 2048);
        return tmp_.back();
    }

private:
    const ChainFamily& f_;
    double eps_;
    std::unordered_map<State, Row> big_;
    std::vector<Row> tmp_;
};

// depth-first enumeration of all cycle paths from the anchor
struct CycleDfs {
    const Model& m;
    State anchor;
    const ExactOptions& opt;
    const PathSink& sink;
    const PathSink* cut;
    RowCache cache;
    std::vector<DD> s;
    double residual = 0.0;
    std::size_t paths = 0;

    CycleDfs(const Model& mm, State a, const ExactOptions& o, const PathSink& k, const PathSink* c)
        : m(mm), anchor(a), opt(o), sink(k), cut(c), cache(mm.chain(), o.eps) {}

    struct Move {
        State to;
        double p, q;
        DD v;
    };
    struct Frame {
        double w;
        std::int64_t depth;
        std::vector<Move> moves;
        std::size_t next = 0;
    };

    // explicit stack: cycle lengths up to max_len must not exhaust the call stack
    void run(State start) {
        std::vector<Frame> stack;
        auto enter = [&](State cur, double w, std::int64_t depth) {
            // copy the edges: the cache may evict small rows while the walk goes deeper
            const Row row = cache.get(cur);
            residual += w * row.tail;
            Frame f{w, depth, {}, 0};
            for (const auto& e : row.edges)
                for (const auto& [v, q] : e.k.atoms()) f.moves.push_back({e.to, e.p, q, v});
            stack.push_back(std::move(f));
        };
        auto count_path = [&] {
            if (++paths > opt.max_paths) throw LatticeBlowup("cycle enumeration exceeded " + std::to_string(opt.max_paths) + " paths");
        };
        enter(start, 1.0, 0);
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next == f.moves.size()) {
                stack.pop_back();
                if (!stack.empty()) s.pop_back();
                continue;
            }
            const Move mv = f.moves[f.next++];
            const double w = f.w;
            const std::int64_t depth = f.depth;
            double w2 = w * mv.p * mv.q;
            if (!(w2 > 0.0)) continue;
            s.push_back(dd_add(s.back(), mv.v));
            if (mv.to == anchor) {
                count_path();
                sink(w2, s);
            } else if (depth + 1 < opt.max_len) {
                enter(mv.to, w2, depth + 1);
                continue;
            } else {
                residual += w2;
                if (cut) (*cut)(w2, s);
                count_path();
            }
            s.pop_back();
        }
    }
};

// `cut` sees the paths stopped at max_len without returning
double enumerate_paths(const Model& m, State anchor, const ExactOptions& opt, const PathSink& sink,
                       const PathSink* cut = nullptr) {
    if (!m.exact_kernels()) throw UnsupportedKernel("exact enumeration needs point-mass or discrete kernels");
    CycleDfs dfs(m, anchor, opt, sink, cut);
    dfs.s.assign(1, DD(0.0));
    dfs.run(anchor);
    return dfs.residual;
}

// merge atoms with nearly equal values; input sorted by value
void merge_sorted(std::vector<std::pair<double, double>>& a, double tol) {
    std::size_t out = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (out > 0 && std::abs(a[k].first - a[out - 1].first) <= tol * std::max(1.0, std::abs(a[k].first)))
            a[out - 1].second += a[k].second;
        else
            a[out++] = a[k];
    }
    a.resize(out);
}

using AtomMap = std::unordered_map<State, std::vector<std::pair<double, double>>>;

void dp_step(const Model& m, AtomMap& cur, double& residual, const DpOptions& opt, RowCache& cache) {
    std::unordered_map<State, std::vector<std::vector<std::pair<double, double>>>> incoming;
    std::vector<State> order;
    for (const auto& kv : cur) order.push_back(kv.first);
    std::sort(order.begin(), order.end());
    for (State st : order) {
        const auto& atoms = cur[st];
        double mass = 0.0;
        for (const auto& a : atoms) mass += a.second;
        const Row& row = cache.get(st);
        residual += mass * row.tail;
        for (const auto& e : row.edges) {
            for (const auto& [v, q] : e.k.atoms()) {
                std::vector<std::pair<double, double>> shifted;
                shifted.reserve(atoms.size());
                double pq = e.p * q;
                for (const auto& [x, w] : atoms) shifted.push_back({dd_add(DD(x), v).value(), w * pq});
                incoming[e.to].push_back(std::move(shifted));
            }
        }
    }
    (void)m;
    AtomMap next;
    std::size_t total = 0;
    for (auto& [st, lists] : incoming) {
        // pairwise merge of sorted lists
        while (lists.size() > 1) {
            std::vector<std::vector<std::pair<double, double>>> merged;
            for (std::size_t k = 0; k + 1 < lists.size(); k += 2) {
                std::vector<std::pair<double, double>> out(lists[k].size() + lists[k + 1].size());
                std::merge(lists[k].begin(), lists[k].end(), lists[k + 1].begin(), lists[k + 1].end(), out.begin());
                merge_sorted(out, opt.merge_tol);
                merged.push_back(std::move(out));
            }
            if (lists.size() % 2) merged.push_back(std::move(lists.back()));
            lists = std::move(merged);
        }
        merge_sorted(lists[0], opt.merge_tol);
        total += lists[0].size();
        next[st] = std::move(lists[0]);
    }
    if (total > opt.max_atoms) throw LatticeBlowup("value lattice exceeded " + std::to_string(opt.max_atoms) + " atoms");
    cur = std::move(next);
}

}  // namespace

double for_each_exact_cycle(const Model& m, State anchor, const ExactOptions& opt, const CycleSink& fn) {
    double residual = 0.0;
    if (m.chain().for_each_cycle(anchor, opt.max_len, fn, residual)) return residual;
    return enumerate_paths(m, anchor, opt, [&](double w, const std::vector<DD>& s) {
        CyclePath c = make_cycle(s, 0, s.size() - 1);
        c.weight = w;
        fn(c);
    });
}

CycleStats exact_cycle_law(const Model& m, State anchor, const ExactOptions& opt) {
    CycleStats cs;
    cs.anchor = anchor;
    cs.exact = true;
    cs.residual = for_each_exact_cycle(m, anchor, opt, [&](const CyclePath& c) { cs.add(c); });
    return cs;
}

double JointDistribution::total() const {
    long double t = 0.0L;
    for (const auto& a : atoms) t += a.prob;
    return static_cast<double>(t);
}

double JointDistribution::cdf(double x) const {
    long double t = 0.0L;
    double tol = 1e-12 * std::max(1.0, std::abs(x));
    for (const auto& a : atoms)
        if (a.value <= x + tol) t += a.prob;
    return static_cast<double>(t);
}

std::vector<double> JointDistribution::state_marginal(std::size_t num_states) const {
    std::vector<double> out(num_states, 0.0);
    for (const auto& a : atoms)
        if (a.state >= 0 && static_cast<std::size_t>(a.state) < num_states) out[static_cast<std::size_t>(a.state)] += a.prob;
    return out;
}

JointDistribution exact_distribution_Sn(const Model& m, State start, std::int64_t n, const DpOptions& opt) {
    if (n < 0) throw InvalidParameter("n must be nonnegative");
    if (!m.exact_kernels()) throw UnsupportedKernel("exact distribution needs point-mass or discrete kernels");
    AtomMap cur;
    cur[start] = {{0.0, 1.0}};
    JointDistribution jd;
    jd.n = n;
    RowCache cache(m.chain(), opt.eps);
    for (std::int64_t k = 0; k < n; ++k) dp_step(m, cur, jd.residual, opt, cache);
    std::vector<State> order;
    for (const auto& kv : cur) order.push_back(kv.first);
    std::sort(order.begin(), order.end());
    for (State st : order)
        for (const auto& [v, w] : cur[st]) jd.atoms.push_back({st, v, w});
    return jd;
}

std::vector<double> exact_cdf_path(const Model& m, State start, std::int64_t n, double x, const DpOptions& opt) {
    if (!m.exact_kernels()) throw UnsupportedKernel("exact distribution needs point-mass or discrete kernels");
    AtomMap cur;
    cur[start] = {{0.0, 1.0}};
    double residual = 0.0;
    std::vector<double> out;
    RowCache cache(m.chain(), opt.eps);
    double tol = 1e-12 * std::max(1.0, std::abs(x));
    for (std::int64_t k = 0; k < n; ++k) {
        dp_step(m, cur, residual, opt, cache);
        long double t = 0.0L;
        for (const auto& kv : cur)
            for (const auto& [v, w] : kv.second) {
                if (v > x + tol) break;
                t += w;
            }
        out.push_back(static_cast<double>(t));
    }
    return out;
}

namespace {

// P_i(S_n <= x), n = 1..n_max, through the regeneration structure at the start state
std::vector<double> regenerative_cdf(const Model& m, State anchor, std::int64_t n_max, double x, double& residual,
                                     const DpOptions& dp) {
    const ChainFamily& f = m.chain();
    bool closed = f.cycle_partial_cdf(anchor, 1, 0.0).has_value();
    // cycle law of (tau, S_tau)
    std::vector<std::vector<std::pair<double, double>>> cyc(static_cast<std::size_t>(n_max + 1));
    std::vector<std::vector<std::pair<double, double>>> part(closed ? 0 : static_cast<std::size_t>(n_max + 1));
    ExactOptions opt;
    opt.max_len = n_max;
    opt.eps = dp.eps;
    opt.max_paths = dp.max_atoms;
    if (closed) {
        residual = for_each_exact_cycle(m, anchor, opt, [&](const CyclePath& c) {
            cyc[static_cast<std::size_t>(c.length)].push_back({c.sum.value(), c.weight});
        });
    } else {
        auto prefixes = [&](double w, const std::vector<DD>& s, std::size_t upto) {
            for (std::size_t k = 1; k <= upto; ++k) part[k].push_back({s[k].value(), w});
        };
        PathSink cut = [&](double w, const std::vector<DD>& s) { prefixes(w, s, s.size() - 1); };
        residual = enumerate_paths(
            m, anchor, opt,
            [&](double w, const std::vector<DD>& s) {
                std::size_t len = s.size() - 1;
                cyc[len].push_back({s.back().value(), w});
                prefixes(w, s, len - 1);
            },
            &cut);
    }
    for (auto& v : cyc) {
        std::sort(v.begin(), v.end());
        merge_sorted(v, dp.merge_tol);
    }
    std::vector<std::vector<double>> part_prefix;
    if (!closed) {
        part_prefix.resize(part.size());
        for (std::size_t k = 1; k < part.size(); ++k) {
            std::sort(part[k].begin(), part[k].end());
            merge_sorted(part[k], dp.merge_tol);
            double c = 0.0;
            for (auto& a : part[k]) part_prefix[k].push_back(c += a.second);
        }
    }
    std::map<std::pair<std::int64_t, std::uint64_t>, double> memo;
    auto F = [&](std::int64_t mm, double y) -> double {
        double tol = 1e-12 * std::max(1.0, std::abs(y));
        if (mm == 0) return y >= -tol ? 1.0 : 0.0;
        if (closed) {
            // the closed forms can be O(m) each; the same (m, y) pairs recur across n
            std::uint64_t bits;
            std::memcpy(&bits, &y, sizeof bits);
            auto key = std::make_pair(mm, bits);
            auto it = memo.find(key);
            if (it != memo.end()) return it->second;
            double v = *f.cycle_partial_cdf(anchor, mm, y);
            memo.emplace(key, v);
            return v;
        }
        const auto& v = part[static_cast<std::size_t>(mm)];
        auto it = std::upper_bound(v.begin(), v.end(), std::make_pair(y + tol, 2.0));
        std::size_t idx = static_cast<std::size_t>(it - v.begin());
        return idx == 0 ? 0.0 : part_prefix[static_cast<std::size_t>(mm)][idx - 1];
    };
    // renewal measure U(t, s)
    std::vector<std::vector<std::pair<double, double>>> U(static_cast<std::size_t>(n_max + 1));
    U[0] = {{0.0, 1.0}};
    for (std::int64_t t = 1; t <= n_max; ++t) {
        std::vector<std::pair<double, double>> acc;
        for (std::int64_t l = 1; l <= t; ++l) {
            const auto& c = cyc[static_cast<std::size_t>(l)];
            if (c.empty()) continue;
            for (const auto& [s0, w0] : U[static_cast<std::size_t>(t - l)])
                for (const auto& [s1, w1] : c) acc.push_back({dd_add(DD(s0), DD(s1)).value(), w0 * w1});
        }
        std::sort(acc.begin(), acc.end());
        merge_sorted(acc, dp.merge_tol);
        U[static_cast<std::size_t>(t)] = std::move(acc);
    }
    std::vector<double> out;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        long double p = 0.0L;
        for (std::int64_t t = 0; t <= n; ++t)
            for (const auto& [s, w] : U[static_cast<std::size_t>(t)]) p += w * F(n - t, x - s);
        out.push_back(static_cast<double>(p));
    }
    return out;
}

}  // namespace

SpitzerSeries spitzer_series(const Model& m, State start, double x, double alpha, std::int64_t n_max,
                             const SpitzerOptions& opt) {
    if (n_max < 1) throw InvalidParameter("n_max must be positive");
    std::vector<double> prob, se;
    double residual = 0.0;
    if (opt.mode == "exact") {
        if (m.finite()) {
            prob = exact_cdf_path(m, start, n_max, x, opt.dp);
        } else {
            if (!m.exact_kernels()) throw UnsupportedKernel("exact series needs point-mass or discrete kernels");
            prob = regenerative_cdf(m, start, n_max, x, residual, opt.dp);
        }
        se.assign(prob.size(), 0.0);
    } else if (opt.mode == "mc") {
        CampaignConfig cfg;
        cfg.start = start;
        cfg.anchor = start;
        cfg.horizon = n_max;
        cfg.trials = opt.trials;
        cfg.seed = opt.seed;
        cfg.workers = opt.workers;
        cfg.keep_cycles = false;
        cfg.x_grid = {};
        // count S_n <= x per n directly from the trajectories
        std::vector<std::vector<std::int64_t>> counts;
        const std::int64_t blocks = (opt.trials + 63) / 64;
        counts.assign(static_cast<std::size_t>(blocks), std::vector<std::int64_t>(static_cast<std::size_t>(n_max), 0));
#pragma omp parallel for schedule(dynamic) num_threads(opt.workers > 0 ? opt.workers : omp_get_max_threads())
        for (std::int64_t b = 0; b < blocks; ++b) {
            for (std::int64_t t = b * 64; t < std::min(opt.trials, (b + 1) * 64); ++t) {
                Engine g(trial_seed(opt.seed, static_cast<std::uint64_t>(t)));
                Trajectory tr = run_trajectory(m, start, n_max, g);
                for (std::int64_t n = 1; n <= n_max; ++n)
                    if (tr.S(n) <= x) ++counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(n - 1)];
            }
        }
        prob.assign(static_cast<std::size_t>(n_max), 0.0);
        for (const auto& c : counts)
            for (std::size_t n = 0; n < c.size(); ++n) prob[n] += static_cast<double>(c[n]);
        for (double& p : prob) {
            p /= static_cast<double>(opt.trials);
            se.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(opt.trials)));
        }
    } else {
        throw ConfigError("series mode must be exact or mc");
    }
    SpitzerSeries s = spitzer_from_probabilities(std::move(prob), std::move(se), x, alpha);
    s.mode = opt.mode;
    s.residual = residual;
    return s;
}

TruncatedMean stationary_increment_law(const Model& m) {
    if (!m.finite()) throw UnsupportedKernel("stationary increment law needs a finite model");
    std::vector<double> v, w;
    for (State c : m.chain().states()) {
        for (const auto& e : m.chain().row(c, 0.0).edges)
            for (const auto& [x, q] : e.k.atoms()) {
                v.push_back(x.value());
                w.push_back(m.pi(c) * e.p * q);
            }
    }
    return TruncatedMean(v, w);
}

double stationary_drift(const Model& m) {
    if (!m.finite()) throw UnsupportedKernel("stationary drift needs a finite model");
    long double d = 0.0L;
    for (State c : m.chain().states())
        for (const auto& e : m.chain().row(c, 0.0).edges) d += static_cast<long double>(m.pi(c)) * e.p * e.k.mean();
    return static_cast<double>(d);
}

namespace {

using LD = long double;

std::vector<LD> solve_dense(std::vector<std::vector<LD>> A, std::vector<LD> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (A[piv][c] == 0.0L) throw Reducible("singular linear system in identity check");
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || A[r][c] == 0.0L) continue;
            LD f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= A[i][i];
    return b;
}

}  // namespace

IdentityReport identity_checks(const Model& m, int n_dual) {
    if (!m.finite()) throw UnsupportedKernel("exact identity checks need a finite model");
    if (!m.exact_kernels()) throw UnsupportedKernel("exact identity checks need point-mass or discrete kernels");
    const std::size_t n = m.num_states();
    const auto P = m.matrix();
    std::vector<std::vector<std::vector<std::pair<double, double>>>> K(n, std::vector<std::vector<std::pair<double, double>>>(n));
    for (std::size_t c = 0; c < n; ++c)
        for (const auto& e : m.chain().row(static_cast<State>(c), 0.0).edges)
            for (const auto& [v, q] : e.k.atoms()) K[c][static_cast<std::size_t>(e.to)].push_back({v.value(), q});

    // test functions f(state, x)
    std::vector<std::function<double(std::size_t, double)>> fs;
    fs.push_back([](std::size_t, double) { return 1.0; });
    for (std::size_t j = 0; j < n; ++j) fs.push_back([j](std::size_t a, double) { return a == j ? 1.0 : 0.0; });
    for (double c : {0.5, 1.0, 2.0}) fs.push_back([c](std::size_t, double x) { return std::clamp(x, -c, c); });
    fs.push_back([](std::size_t, double x) { return std::max(x, 0.0); });
    fs.push_back([](std::size_t, double x) { return x > 0.0 ? 1.0 : 0.0; });
    fs.push_back([](std::size_t a, double x) { return static_cast<double>(a + 1) * x; });

    auto edge_mean = [&](std::size_t c, std::size_t a, const std::function<double(std::size_t, double)>& f) {
        LD t = 0.0L;
        for (const auto& [v, q] : K[c][a]) t += static_cast<LD>(q) * f(a, v);
        return t;
    };

    IdentityReport rep;
    rep.exact = true;
    rep.functions = fs.size();
    for (std::size_t i = 0; i < n; ++i) {
        // expected visits N_a before the return to i (taboo Green's function)
        std::vector<std::vector<LD>> A(n, std::vector<LD>(n, 0.0L));
        std::vector<LD> b(n, 0.0L);
        for (std::size_t a = 0; a < n; ++a) {
            A[a][a] = 1.0L;
            if (a == i) {
                b[a] = 1.0L;
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) A[a][c] -= static_cast<LD>(P[c][a]);
        }
        auto N = solve_dense(A, b);
        LD Etau = 0.0L;
        for (LD v : N) Etau += v;
        rep.kac_residual = std::max(rep.kac_residual, static_cast<double>(std::abs(static_cast<LD>(m.pi(static_cast<State>(i))) * Etau - 1.0L)));
        for (const auto& f : fs) {
            LD lhs = 0.0L, rhs = 0.0L;
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t a = 0; a < n; ++a) {
                    if (P[c][a] <= 0.0) continue;
                    LD em = static_cast<LD>(P[c][a]) * edge_mean(c, a, f);
                    lhs += static_cast<LD>(m.pi(static_cast<State>(c))) * em;
                    rhs += N[c] * em;
                }
            rep.occupation_residual = std::max(rep.occupation_residual, static_cast<double>(std::abs(lhs - rhs / Etau)));
        }
        // E_i S_tau by first-step analysis: h(a) = sum_b p_ab (m_ab + 1{b != i} h(b))
        std::vector<std::vector<LD>> B(n, std::vector<LD>(n, 0.0L));
        std::vector<LD> r(n, 0.0L);
        for (std::size_t a = 0; a < n; ++a) {
            B[a][a] = 1.0L;
            for (std::size_t bb = 0; bb < n; ++bb) {
                if (P[a][bb] <= 0.0) continue;
                LD mean = edge_mean(a, bb, [](std::size_t, double x) { return x; });
                r[a] += static_cast<LD>(P[a][bb]) * mean;
                if (bb != i) B[a][bb] -= static_cast<LD>(P[a][bb]);
            }
        }
        auto h = solve_dense(B, r);
        LD drift = 0.0L;
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t a = 0; a < n; ++a)
                if (P[c][a] > 0.0)
                    drift += static_cast<LD>(m.pi(static_cast<State>(c))) * P[c][a] *
                             edge_mean(c, a, [](std::size_t, double x) { return x; });
        rep.drift_residual = std::max(rep.drift_residual,
                                      static_cast<double>(std::abs(drift - static_cast<LD>(m.pi(static_cast<State>(i))) * h[i])));
    }

    // duality: pi_i P_i(path) = pi_j P#_j(reversed path)
    Model d = dual_model(m);
    const auto Pd = d.matrix();
    rep.duality_length = n_dual;
    std::vector<std::size_t> path;
    std::vector<std::size_t> atom;
    std::function<void(int, int)> walk = [&](int len, int depth) {
        if (depth == len) {
            LD fwd = m.pi(static_cast<State>(path[0]));
            LD bwd = d.pi(static_cast<State>(path[static_cast<std::size_t>(len)]));
            for (int k = 1; k <= len; ++k) {
                std::size_t a = path[static_cast<std::size_t>(k - 1)], b = path[static_cast<std::size_t>(k)];
                double q = K[a][b][atom[static_cast<std::size_t>(k - 1)]].second;
                fwd *= static_cast<LD>(P[a][b]) * q;
                // dual step b -> a carries the kernel of the edge a -> b
                bwd *= static_cast<LD>(Pd[b][a]) * q;
            }
            rep.duality_residual = std::max(rep.duality_residual, static_cast<double>(std::abs(fwd - bwd)));
            ++rep.duality_paths;
            return;
        }
        std::size_t a = path.back();
        for (std::size_t b = 0; b < n; ++b) {
            if (P[a][b] <= 0.0) continue;
            for (std::size_t q = 0; q < K[a][b].size(); ++q) {
                path.push_back(b);
                atom.push_back(q);
                walk(len, depth + 1);
                path.pop_back();
                atom.pop_back();
            }
        }
    };
    for (int len = 1; len <= n_dual; ++len)
        for (std::size_t i = 0; i < n; ++i) {
            path.assign(1, i);
            atom.clear();
            walk(len, 0);
        }
    return rep;
}

IdentityReport identity_checks_mc(const Model& m, State anchor, std::int64_t cycles, std::uint64_t seed, int workers) {
    CycleSampleConfig cfg;
    cfg.anchor = anchor;
    cfg.cycles = cycles;
    cfg.seed = seed;
    cfg.workers = workers;
    cfg.keep_increments = true;
    CycleStats cs = sample_cycles(m, cfg);
    if (cs.empty()) throw EmptySample("no complete cycles");
    IdentityReport rep;
    const double n = static_cast<double>(cs.size());
    double pi = m.pi(anchor);
    double mt = 0.0, mt2 = 0.0, ms = 0.0, ms2 = 0.0;
    for (std::size_t c = 0; c < cs.size(); ++c) {
        double t = static_cast<double>(cs.length[c]);
        mt += t;
        mt2 += t * t;
        ms += cs.sum[c];
        ms2 += cs.sum[c] * cs.sum[c];
    }
    mt /= n;
    ms /= n;
    double set = std::sqrt(std::max(0.0, mt2 / n - mt * mt) / n);
    double ses = std::sqrt(std::max(0.0, ms2 / n - ms * ms) / n);
    rep.kac_residual = std::abs(pi * mt - 1.0);
    rep.occupation_z = set > 0 ? (pi * mt - 1.0) / (pi * set) : (rep.kac_residual < 1e-12 ? 0.0 : INFINITY);
    if (m.finite() && m.exact_kernels()) {
        double drift = stationary_drift(m);
        rep.drift_residual = std::abs(pi * ms - drift);
        rep.drift_z = ses > 0 ? (pi * ms - drift) / (pi * ses) : (rep.drift_residual < 1e-12 ? 0.0 : INFINITY);
    }
    return rep;
}

HarmonicRenewal harmonic_renewal_check(const Model& m, const std::vector<double>& y_grid, std::int64_t n_max, double bound) {
    if (!m.finite() || m.num_states() != 1) throw InvalidParameter("harmonic renewal check needs a single-state model");
    if (!m.exact_kernels()) throw UnsupportedKernel("harmonic renewal check needs a discrete increment law");
    if (y_grid.empty()) throw InvalidParameter("empty y grid");
    const Kernel k = m.chain().row(0, 0.0).edges.at(0).k;
    if (!(k.mean() > 0.0)) throw NotPositiveDivergent("increment mean is not positive");
    std::vector<double> v, w;
    for (const auto& [x, q] : k.atoms()) {
        v.push_back(x.value());
        w.push_back(q);
    }
    TruncatedMean tm(v, w);
    JFunction jf = make_J(tm, 1.0);
    HarmonicRenewal h;
    h.y = y_grid;
    std::sort(h.y.begin(), h.y.end());
    h.sums.assign(h.y.size(), 0.0);
    AtomMap cur;
    cur[0] = {{0.0, 1.0}};
    double residual = 0.0;
    DpOptions opt;
    RowCache cache(m.chain(), 0.0);
    for (std::int64_t n = 1; n <= n_max; ++n) {
        dp_step(m, cur, residual, opt, cache);
        const auto& atoms = cur[0];
        // atoms sorted by value
        long double run = 0.0L;
        std::size_t j = 0;
        auto it = std::lower_bound(atoms.begin(), atoms.end(), std::make_pair(-1e-12, -1.0));
        for (std::size_t g = 0; g < h.y.size(); ++g) {
            for (; it != atoms.end() && it->first <= h.y[g] + 1e-12; ++it) run += it->second;
            h.sums[g] += static_cast<double>(run);
        }
        (void)j;
        if (n == n_max) h.truncation = static_cast<double>(run);
    }
    double ymax = h.y.back();
    h.ratio_min = INFINITY;
    h.ratio_max = 0.0;
    for (std::size_t g = 0; g < h.y.size(); ++g) {
        h.J.push_back(eval_J(jf, h.y[g]));
        h.ratio.push_back(h.sums[g] / h.J.back());
        if (h.y[g] >= ymax / 10.0) {
            h.ratio_min = std::min(h.ratio_min, h.ratio.back());
            h.ratio_max = std::max(h.ratio_max, h.ratio.back());
        }
    }
    h.bounded = h.ratio_min > 0.0 && h.ratio_max / h.ratio_min <= bound;
    return h;
}

}  // namespace mrw
