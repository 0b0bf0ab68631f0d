#include "mrw/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>

#include "mrw/errors.hpp"

namespace mrw {

using Rational = boost::multiprecision::cpp_rational;

namespace {

Rational rational_from_string(const std::string& s) {
    std::string t = s;
    t.erase(std::remove_if(t.begin(), t.end(), ::isspace), t.end());
    if (t.empty()) throw ConfigError("empty probability");
    auto slash = t.find('/');
    // cpp_int reads a leading 0 as an octal prefix
    auto integer = [](std::string d) {
        bool neg = !d.empty() && d[0] == '-';
        if (!d.empty() && (d[0] == '-' || d[0] == '+')) d.erase(0, 1);
        auto nz = d.find_first_not_of('0');
        d = nz == std::string::npos ? "0" : d.substr(nz);
        boost::multiprecision::cpp_int v(d);
        return neg ? -v : v;
    };
    auto digits = [](const std::string& d) {
        if (d.empty()) return false;
        std::size_t i = (d[0] == '-' || d[0] == '+') ? 1 : 0;
        if (i == d.size()) return false;
        for (; i < d.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
        return true;
    };
    if (slash != std::string::npos) {
        std::string a = t.substr(0, slash), b = t.substr(slash + 1);
        if (!digits(a) || !digits(b)) throw ConfigError("malformed rational '" + s + "'");
        boost::multiprecision::cpp_int num = integer(a), den = integer(b);
        if (den == 0) throw ConfigError("zero denominator in '" + s + "'");
        return Rational(num, den);
    }
    // decimal, optionally with exponent
    std::string mant = t;
    long exp10 = 0;
    auto e = t.find_first_of("eE");
    if (e != std::string::npos) {
        mant = t.substr(0, e);
        std::string ex = t.substr(e + 1);
        if (!digits(ex)) throw ConfigError("malformed number '" + s + "'");
        exp10 = std::stol(ex);
    }
    auto dot = mant.find('.');
    std::string intpart = mant, frac;
    if (dot != std::string::npos) {
        intpart = mant.substr(0, dot);
        frac = mant.substr(dot + 1);
    }
    bool neg = !intpart.empty() && intpart[0] == '-';
    if (!intpart.empty() && (intpart[0] == '-' || intpart[0] == '+')) intpart = intpart.substr(1);
    if (intpart.empty()) intpart = "0";
    if (!digits(intpart) || (!frac.empty() && !digits(frac))) throw ConfigError("malformed number '" + s + "'");
    boost::multiprecision::cpp_int num = integer(intpart + frac);
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    Rational r(num, den);
    for (long i = 0; i < std::abs(exp10); ++i) r = exp10 > 0 ? Rational(r * 10) : Rational(r / 10);
    return neg ? Rational(-r) : r;
}

std::string rational_to_string(const Rational& r) {
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

double to_double(const Rational& r) { return static_cast<double>(r); }

class FiniteChain : public ChainFamily {
public:
    FiniteChain(const FiniteSpec& fs, std::vector<double> pi) : names_(fs.names), pi_(std::move(pi)) {
        const std::size_t n = fs.P.size();
        fwd_.resize(n);
        rev_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double p = fs.P[i][j];
                if (p <= 0.0) continue;
                const Kernel& k = fs.kernels.at({static_cast<int>(i), static_cast<int>(j)});
                if (!k.exact()) exact_ = false;
                fwd_[i].add(static_cast<State>(j), p, k);
                rev_[j].add(static_cast<State>(i), pi_[i] * p / pi_[j], k);
            }
        in_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (fs.P[i][j] > 0.0) in_[j].edges.push_back({static_cast<State>(i), fs.P[i][j], fs.kernels.at({int(i), int(j)})});
        for (auto& r : fwd_) r.finish();
        for (auto& r : rev_) r.finish();
    }
    std::string kind() const override { return "finite"; }
    bool finite() const override { return true; }
    std::vector<State> states() const override {
        std::vector<State> s(names_.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<State>(i);
        return s;
    }
    bool valid_state(State s) const override { return s >= 0 && s < static_cast<State>(names_.size()); }
    std::string label(State s) const override {
        return valid_state(s) ? names_[static_cast<std::size_t>(s)] : std::to_string(s);
    }
    std::optional<State> parse_label(const std::string& s) const override {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == s) return static_cast<State>(i);
        return ChainFamily::parse_label(s);
    }
    Row row(State i, double) const override {
        Row r;
        const auto& f = fwd_[static_cast<std::size_t>(i)];
        for (std::size_t e = 0; e < f.to.size(); ++e) r.edges.push_back({f.to[e], f.p[e], f.k[e]});
        return r;
    }
    Row in_row(State j, double) const override { return in_[static_cast<std::size_t>(j)]; }
    std::pair<State, DD> step(State i, Engine& g) const override { return fwd_[static_cast<std::size_t>(i)].draw(g); }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override {
        return rev_[static_cast<std::size_t>(j)].draw(g);
    }
    double pi(State i) const override { return valid_state(i) ? pi_[static_cast<std::size_t>(i)] : 0.0; }
    bool exact_kernels() const override { return exact_; }

private:
    struct Out {
        std::vector<State> to;
        std::vector<double> p, cdf;
        std::vector<Kernel> k;
        void add(State t, double q, const Kernel& kk) {
            to.push_back(t);
            p.push_back(q);
            k.push_back(kk);
        }
        void finish() {
            cdf.resize(p.size());
            double c = 0.0, tot = 0.0;
            for (double q : p) tot += q;
            for (std::size_t e = 0; e < p.size(); ++e) cdf[e] = (c += p[e] / tot);
            if (!cdf.empty()) cdf.back() = 1.0;
        }
        std::pair<State, DD> draw(Engine& g) const {
            std::size_t e = 0;
            if (to.size() > 1) {
                double u = uniform01(g);
                e = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                if (e >= to.size()) e = to.size() - 1;
            }
            return {to[e], k[e].sample(g)};
        }
    };
    std::vector<std::string> names_;
    std::vector<double> pi_;
    std::vector<Out> fwd_, rev_;
    std::vector<Row> in_;
    bool exact_ = true;
};

class DualFamily : public ChainFamily {
public:
    explicit DualFamily(FamilyPtr inner) : inner_(std::move(inner)) {}
    const FamilyPtr& inner() const { return inner_; }
    std::string kind() const override { return "dual:" + inner_->kind(); }
    ojson params() const override { return inner_->params(); }
    bool finite() const override { return inner_->finite(); }
    std::vector<State> states() const override { return inner_->states(); }
    bool valid_state(State s) const override { return inner_->valid_state(s); }
    State default_anchor() const override { return inner_->default_anchor(); }
    std::string label(State s) const override { return inner_->label(s); }
    std::optional<State> parse_label(const std::string& s) const override { return inner_->parse_label(s); }
    Row row(State j, double eps) const override {
        Row in = inner_->in_row(j, eps);
        Row r;
        r.tail = in.tail;
        double pj = inner_->pi(j);
        for (auto& e : in.edges) r.edges.push_back({e.to, inner_->pi(e.to) * e.p / pj, e.k});
        return r;
    }
    Row in_row(State i, double eps) const override {
        Row out = inner_->row(i, eps);
        Row r;
        r.tail = out.tail;
        // dual p_{j i} = pi_i p_ij / pi_j
        for (auto& e : out.edges) r.edges.push_back({e.to, inner_->pi(i) * e.p / inner_->pi(e.to), e.k});
        return r;
    }
    std::pair<State, DD> step(State i, Engine& g) const override { return inner_->step_reverse(i, g); }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override { return inner_->step(j, g); }
    double pi(State i) const override { return inner_->pi(i); }
    bool exact_kernels() const override { return inner_->exact_kernels(); }
    double unrepresentable_mass() const override { return inner_->unrepresentable_mass(); }

private:
    FamilyPtr inner_;
};

class ScaledFamily : public ChainFamily {
public:
    ScaledFamily(FamilyPtr inner, double c) : inner_(std::move(inner)), c_(c) {}
    std::string kind() const override { return inner_->kind(); }
    ojson params() const override {
        ojson p = inner_->params();
        p["scale"] = c_;
        return p;
    }
    bool finite() const override { return inner_->finite(); }
    std::vector<State> states() const override { return inner_->states(); }
    bool valid_state(State s) const override { return inner_->valid_state(s); }
    State default_anchor() const override { return inner_->default_anchor(); }
    std::string label(State s) const override { return inner_->label(s); }
    std::optional<State> parse_label(const std::string& s) const override { return inner_->parse_label(s); }
    Row row(State i, double eps) const override { return scale(inner_->row(i, eps)); }
    Row in_row(State j, double eps) const override { return scale(inner_->in_row(j, eps)); }
    std::pair<State, DD> step(State i, Engine& g) const override {
        auto r = inner_->step(i, g);
        return {r.first, dd_scale(r.second, c_)};
    }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override {
        auto r = inner_->step_reverse(j, g);
        return {r.first, dd_scale(r.second, c_)};
    }
    double pi(State i) const override { return inner_->pi(i); }
    bool exact_kernels() const override { return inner_->exact_kernels(); }
    double unrepresentable_mass() const override { return inner_->unrepresentable_mass(); }

private:
    Row scale(Row r) const {
        for (auto& e : r.edges) e.k = e.k.scaled(c_);
        return r;
    }
    FamilyPtr inner_;
    double c_;
};

// strongly connected check on a dense matrix
bool strongly_connected(const std::vector<std::vector<double>>& P) {
    const std::size_t n = P.size();
    for (int dir = 0; dir < 2; ++dir) {
        std::vector<char> seen(n, 0);
        std::deque<std::size_t> q{0};
        seen[0] = 1;
        while (!q.empty()) {
            std::size_t i = q.front();
            q.pop_front();
            for (std::size_t j = 0; j < n; ++j) {
                double p = dir == 0 ? P[i][j] : P[j][i];
                if (p > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    q.push_back(j);
                }
            }
        }
        if (std::count(seen.begin(), seen.end(), 1) != static_cast<long>(n)) return false;
    }
    return true;
}

std::vector<Rational> solve_exact(const std::vector<std::vector<Rational>>& Q) {
    const std::size_t n = Q.size();
    // (P^T - I) pi = 0 with the last row replaced by sum pi = 1
    std::vector<std::vector<Rational>> A(n, std::vector<Rational>(n + 1));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) A[r][c] = Q[c][r] - (r == c ? Rational(1) : Rational(0));
    for (std::size_t c = 0; c < n; ++c) A[n - 1][c] = 1;
    A[n - 1][n] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && A[piv][c] == 0) ++piv;
        if (piv == n) throw Reducible("singular stationary system");
        std::swap(A[c], A[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || A[r][c] == 0) continue;
            Rational f = A[r][c] / A[c][c];
            for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::vector<Rational> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = A[i][n] / A[i][i];
    return pi;
}

std::vector<double> solve_float(const std::vector<std::vector<double>>& P) {
    const std::size_t n = P.size();
    using LD = long double;
    std::vector<std::vector<LD>> A(n, std::vector<LD>(n + 1, 0.0L));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) A[r][c] = static_cast<LD>(P[c][r]) - (r == c ? 1.0L : 0.0L);
    for (std::size_t c = 0; c < n; ++c) A[n - 1][c] = 1.0L;
    A[n - 1][n] = 1.0L;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (A[piv][c] == 0.0L) throw Reducible("singular stationary system");
        std::swap(A[c], A[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || A[r][c] == 0.0L) continue;
            LD f = A[r][c] / A[c][c];
            for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = static_cast<double>(A[i][n] / A[i][i]);
    return pi;
}

double stationary_residual(const std::vector<std::vector<double>>& P, const std::vector<double>& pi) {
    const std::size_t n = P.size();
    double res = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(pi[i]) * P[i][j];
        res = std::max(res, static_cast<double>(std::abs(s - pi[j])));
    }
    return res;
}

Model build_finite(const ModelSpec& spec, double tol) {
    FiniteSpec fs = *spec.finite;
    const std::size_t n = fs.P.size();
    if (n == 0) throw ConfigError("model has no states");
    if (fs.names.size() != n) {
        fs.names.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            if (fs.names[i].empty()) fs.names[i] = std::to_string(i);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (fs.P[i].size() != n) throw ConfigError("transition row " + fs.names[i] + " has wrong length");
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double p = fs.P[i][j];
            if (!(p >= 0.0) || !std::isfinite(p))
                throw InvalidDistribution("negative or non-finite probability on " + fs.names[i] + "->" + fs.names[j]);
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw NotStochastic("row " + fs.names[i] + " sums to " + std::to_string(s));
    }
    bool exact = !fs.P_exact.empty();
    std::vector<std::vector<Rational>> Q;
    if (exact) {
        Q.assign(n, std::vector<Rational>(n));
        for (std::size_t i = 0; i < n; ++i) {
            Rational s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                Q[i][j] = fs.P_exact[i][j].empty() ? Rational(0) : rational_from_string(fs.P_exact[i][j]);
                s += Q[i][j];
            }
            if (s != 1) throw NotStochastic("row " + fs.names[i] + " sums to " + rational_to_string(s) + " exactly");
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            bool has = fs.kernels.count({int(i), int(j)}) > 0;
            if (fs.P[i][j] > 0.0 && !has)
                throw InvalidDistribution("edge " + fs.names[i] + "->" + fs.names[j] + " has positive probability but no kernel");
            if (fs.P[i][j] == 0.0 && has)
                throw InvalidDistribution("kernel on zero-probability edge " + fs.names[i] + "->" + fs.names[j]);
        }
    if (!strongly_connected(fs.P)) throw Reducible("driving chain is not irreducible");

    StationaryLaw law;
    if (exact) {
        auto pr = solve_exact(Q);
        law.pi.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            law.pi[i] = to_double(pr[i]);
            law.exact.push_back(rational_to_string(pr[i]));
        }
    } else {
        law.pi = solve_float(fs.P);
    }
    law.residual = stationary_residual(fs.P, law.pi);
    law.total = 0.0;
    for (double p : law.pi) law.total += p;
    for (double p : law.pi)
        if (!(p > 0.0)) throw Reducible("stationary law has a nonpositive entry");
    if (law.residual > std::max(tol, 1e-15) * 1e3 || std::abs(law.total - 1.0) > 1e-9)
        throw NotStochastic("stationary solve did not converge (residual " + std::to_string(law.residual) + ")");
    ModelSpec stored = spec;
    stored.finite = fs;
    auto fam = std::make_shared<FiniteChain>(fs, law.pi);
    return Model(std::move(stored), std::move(fam), std::move(law));
}

Model build_family(const ModelSpec& spec, double) {
    const ChainFamily& f = *spec.family;
    double lost = f.unrepresentable_mass();
    if (lost > spec.tail_eps)
        throw TailMassTooLarge("family '" + f.kind() + "' leaves mass " + std::to_string(lost) +
                               " beyond its index space, above the truncation threshold " + std::to_string(spec.tail_eps));
    StationaryLaw law;
    law.closed_form = true;
    auto explored = f.explore(f.default_anchor(), spec.tail_eps, 48);
    double res = 0.0, tot = 0.0;
    for (State s : explored) {
        Row r = f.row(s, spec.tail_eps);
        double sum = r.tail;
        for (const auto& e : r.edges) {
            if (!(e.p > 0.0)) throw InvalidDistribution("nonpositive probability emitted by the family generator");
            sum += e.p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw NotStochastic("row " + f.label(s) + " sums to " + std::to_string(sum));
        Row in = f.in_row(s, spec.tail_eps);
        long double acc = 0.0L;
        for (const auto& e : in.edges) acc += static_cast<long double>(f.pi(e.to)) * e.p;
        double pj = f.pi(s);
        if (!(pj > 0.0)) throw Reducible("closed-form stationary law vanishes at " + f.label(s));
        res = std::max(res, static_cast<double>(std::abs(acc - pj) - in.tail * pj));
        tot += pj;
    }
    law.residual = std::max(0.0, res);
    law.total = tot;
    if (law.residual > 1e-8 || tot > 1.0 + 1e-9)
        throw InvalidDistribution("closed-form stationary law inconsistent with the generator (residual " +
                                  std::to_string(law.residual) + ")");
    return Model(spec, spec.family, std::move(law));
}

}  // namespace

std::optional<State> ChainFamily::parse_label(const std::string& s) const {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos == s.size() && valid_state(v)) return static_cast<State>(v);
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

std::vector<State> ChainFamily::explore(State from, double eps, std::size_t max_states) const {
    std::vector<State> out;
    std::unordered_set<State> seen{from};
    std::deque<State> q{from};
    while (!q.empty() && out.size() < max_states) {
        State s = q.front();
        q.pop_front();
        out.push_back(s);
        Row r = row(s, eps);
        for (const auto& e : r.edges)
            if (seen.insert(e.to).second) q.push_back(e.to);
    }
    return out;
}

std::size_t Model::num_states() const { return fam_->finite() ? fam_->states().size() : 0; }

std::vector<std::vector<double>> Model::matrix() const {
    if (!finite()) throw UnsupportedKernel("transition matrix requested for an infinite model");
    const std::size_t n = num_states();
    std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : fam_->row(static_cast<State>(i), 0.0).edges) P[i][static_cast<std::size_t>(e.to)] += e.p;
    return P;
}

State Model::parse_state(const std::string& s) const {
    auto r = fam_->parse_label(s);
    if (!r) throw ConfigError("unknown state '" + s + "'");
    return *r;
}

std::pair<double, std::string> parse_probability(const std::string& s) {
    Rational r = rational_from_string(s);
    if (r < 0) throw ConfigError("negative probability '" + s + "'");
    return {to_double(r), rational_to_string(r)};
}

ModelSpec finite_spec_model(std::string name, FiniteSpec fs) {
    ModelSpec spec;
    spec.name = std::move(name);
    spec.finite = std::move(fs);
    return spec;
}

Model build_model(const ModelSpec& spec, double tol) {
    if (spec.finite) return build_finite(spec, tol);
    if (spec.family) return build_family(spec, tol);
    throw ConfigError("model spec has neither a finite description nor a family");
}

Model dual_model(const Model& m) {
    if (m.finite() && m.spec().finite) {
        const FiniteSpec& fs = *m.spec().finite;
        const auto& law = m.stationary();
        const std::size_t n = fs.P.size();
        FiniteSpec d;
        d.names = fs.names;
        d.P.assign(n, std::vector<double>(n, 0.0));
        bool exact = !fs.P_exact.empty() && law.exact.size() == n;
        std::vector<Rational> pr;
        if (exact) {
            d.P_exact.assign(n, std::vector<std::string>(n));
            for (const auto& s : law.exact) pr.push_back(rational_from_string(s));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (fs.P[j][i] <= 0.0) continue;
                if (exact) {
                    Rational q = pr[j] * rational_from_string(fs.P_exact[j][i]) / pr[i];
                    d.P_exact[i][j] = rational_to_string(q);
                    d.P[i][j] = to_double(q);
                } else {
                    d.P[i][j] = law.pi[j] * fs.P[j][i] / law.pi[i];
                }
                d.kernels[{int(i), int(j)}] = fs.kernels.at({int(j), int(i)});
            }
        if (!exact) {
            // renormalise rows against rounding so the dual passes validation
            for (auto& row : d.P) {
                long double s = 0.0L;
                for (double p : row) s += p;
                for (double& p : row) p = static_cast<double>(p / s);
            }
        }
        ModelSpec spec;
        spec.name = "dual(" + m.name() + ")";
        spec.parameters = m.spec().parameters;
        spec.finite = d;
        Model out = build_model(spec);
        return Model(out.spec(), out.chain_ptr(), out.stationary(), !m.is_dual());
    }
    if (auto df = std::dynamic_pointer_cast<const DualFamily>(m.chain_ptr())) {
        ModelSpec spec = m.spec();
        spec.family = df->inner();
        if (spec.name.rfind("dual(", 0) == 0) spec.name = spec.name.substr(5, spec.name.size() - 6);
        return Model(spec, df->inner(), m.stationary(), false);
    }
    ModelSpec spec = m.spec();
    spec.name = "dual(" + m.name() + ")";
    spec.family = std::make_shared<DualFamily>(m.chain_ptr());
    return Model(spec, spec.family, m.stationary(), true);
}

Model scaled_model(const Model& m, double c) {
    if (m.spec().finite) {
        ModelSpec spec = m.spec();
        for (auto& kv : spec.finite->kernels) kv.second = kv.second.scaled(c);
        spec.parameters["scale"] = c;
        return build_model(spec);
    }
    ModelSpec spec = m.spec();
    spec.parameters["scale"] = c;
    spec.family = std::make_shared<ScaledFamily>(m.chain_ptr(), c);
    return Model(spec, spec.family, m.stationary(), m.is_dual());
}

}  // namespace mrw
