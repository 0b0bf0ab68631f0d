#include "mrw/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mrw/errors.hpp"

namespace mrw {

namespace {

DD exact_sum(double a, double b) {
    double s, e;
    two_sum(a, b, s, e);
    return DD(s, e);
}

// number of enumerated indices for a law row: stop at tail <= eps or the row cap
std::int64_t row_end(const IntegerLaw& law, double eps) {
    std::int64_t k = law.tail_index(eps);
    return std::min(k, law.lo() + kRowCap - 1);
}

class PetalFamily : public ChainFamily {
public:
    enum class Inc { Plain, Alternating, Power };
    PetalFamily(LawPtr p0, Inc inc, double c) : p0_(std::move(p0)), inc_(inc), c_(c) {
        if (p0_->lo() < 1) throw InvalidDistribution("petal law must live on 1, 2, ...");
    }
    std::string kind() const override {
        return inc_ == Inc::Power ? "petal-general" : inc_ == Inc::Alternating ? "petal-flower-alt" : "petal-flower";
    }
    ojson params() const override {
        ojson p;
        p["p0"] = p0_->describe();
        if (inc_ == Inc::Power) p["c"] = c_;
        else p["variant"] = inc_ == Inc::Plain ? "plain" : "alternating";
        return p;
    }
    Row row(State i, double eps) const override {
        Row r;
        if (i == 0) {
            std::int64_t end = row_end(*p0_, eps);
            for (std::int64_t k = p0_->lo(); k <= end; ++k) {
                double p = p0_->pmf(k);
                if (p > 0.0) r.edges.push_back({k, p, Kernel::point(out(k))});
            }
            r.tail = p0_->survival(end);
        } else {
            r.edges.push_back({0, 1.0, Kernel::point(back(i))});
        }
        return r;
    }
    Row in_row(State j, double eps) const override {
        Row r;
        if (j == 0) {
            std::int64_t end = row_end(*p0_, eps);
            for (std::int64_t k = p0_->lo(); k <= end; ++k)
                if (p0_->pmf(k) > 0.0) r.edges.push_back({k, 1.0, Kernel::point(back(k))});
            r.tail = p0_->survival(end);
        } else {
            r.edges.push_back({0, p0_->pmf(j), Kernel::point(out(j))});
        }
        return r;
    }
    std::pair<State, DD> step(State i, Engine& g) const override {
        if (i == 0) {
            State k = p0_->sample(g);
            return {k, out(k)};
        }
        return {0, back(i)};
    }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override {
        if (j == 0) {
            State k = p0_->sample(g);
            return {k, back(k)};
        }
        return {0, out(j)};
    }
    double pi(State i) const override { return i == 0 ? 0.5 : 0.5 * p0_->pmf(i); }
    double unrepresentable_mass() const override { return p0_->survival(kIndexCap); }
    bool valid_state(State s) const override { return s == 0 || (s >= p0_->lo() && p0_->pmf(s) > 0.0); }

    DD out(State i) const {
        double x = xval(i);
        if (inc_ == Inc::Alternating && i % 2 != 0) return exact_sum(x, 2.0);
        return DD(-x);
    }
    DD back(State i) const {
        double x = xval(i);
        if (inc_ == Inc::Alternating && i % 2 != 0) return DD(-x);
        return exact_sum(x, 2.0);
    }

private:
    double xval(State i) const {
        if (inc_ == Inc::Power) return std::pow(static_cast<double>(i), c_);
        return 1.0 / p0_->pmf(i);
    }
    LawPtr p0_;
    Inc inc_;
    double c_;
};

class GenPetalFamily : public ChainFamily {
public:
    static constexpr std::int64_t kMaxM = 4000000000LL;
    GenPetalFamily(LawPtr gamma, GenPetalVariant v, double alpha) : g_(std::move(gamma)), v_(v), alpha_(alpha) {
        if (g_->lo() < 2) throw InvalidDistribution("excursion length law must live on 2, 3, ...");
        mean_ = g_->mean();
        if (!std::isfinite(mean_)) throw InvalidDistribution("excursion length law needs a finite mean");
        if (v_ == GenPetalVariant::MinCounterexample && !(alpha_ > 0.0)) throw InvalidParameter("alpha must be positive");
    }
    std::string kind() const override { return v_ == GenPetalVariant::XLogX ? "gen-petal-xlogx" : "gen-petal-min"; }
    ojson params() const override {
        ojson p;
        p["gamma"] = g_->describe();
        if (v_ == GenPetalVariant::MinCounterexample) p["alpha"] = alpha_;
        return p;
    }
    static State id(std::int64_t m, std::int64_t k) { return 1 + (m - 1) * (m - 2) / 2 + (k - 1); }
    static std::pair<std::int64_t, std::int64_t> decode(State s) {
        long double x = std::sqrt(2.0L * static_cast<long double>(s));
        std::int64_t m = static_cast<std::int64_t>(x) + 1;
        while (m > 2 && (m - 1) * (m - 2) / 2 >= s) --m;
        while (m * (m - 1) / 2 < s) ++m;
        return {m, s - 1 - (m - 1) * (m - 2) / 2 + 1};
    }
    std::string label(State s) const override {
        if (s == 0) return "0";
        auto [m, k] = decode(s);
        return "(" + std::to_string(m) + "," + std::to_string(k) + ")";
    }
    std::optional<State> parse_label(const std::string& s) const override {
        std::string t = s;
        if (!t.empty() && t.front() == '(' && t.back() == ')') t = t.substr(1, t.size() - 2);
        auto comma = t.find(',');
        if (comma == std::string::npos) return ChainFamily::parse_label(s);
        try {
            std::int64_t m = std::stoll(t.substr(0, comma)), k = std::stoll(t.substr(comma + 1));
            if (m >= 2 && k >= 1 && k < m) return id(m, k);
        } catch (const std::exception&) {
        }
        return std::nullopt;
    }
    bool valid_state(State s) const override {
        if (s == 0) return true;
        if (s < 0) return false;
        return g_->pmf(decode(s).first) > 0.0;
    }
    Row row(State s, double eps) const override {
        Row r;
        if (s == 0) {
            std::int64_t end = std::min(row_end(*g_, eps), kMaxM);
            for (std::int64_t m = g_->lo(); m <= end; ++m) {
                double p = g_->pmf(m);
                if (p > 0.0) r.edges.push_back({id(m, 1), p, Kernel::point(enter(m))});
            }
            r.tail = g_->survival(end);
            return r;
        }
        auto [m, k] = decode(s);
        if (k < m - 1) r.edges.push_back({id(m, k + 1), 1.0, Kernel::point(inner(k + 1))});
        else r.edges.push_back({0, 1.0, Kernel::point(ret(m))});
        return r;
    }
    Row in_row(State s, double eps) const override {
        Row r;
        if (s == 0) {
            std::int64_t end = std::min(row_end(*g_, eps), kMaxM);
            for (std::int64_t m = g_->lo(); m <= end; ++m)
                if (g_->pmf(m) > 0.0) r.edges.push_back({id(m, m - 1), 1.0, Kernel::point(ret(m))});
            r.tail = g_->survival(end);
            return r;
        }
        auto [m, k] = decode(s);
        if (k == 1) r.edges.push_back({0, g_->pmf(m), Kernel::point(enter(m))});
        else r.edges.push_back({id(m, k - 1), 1.0, Kernel::point(inner(k))});
        return r;
    }
    std::pair<State, DD> step(State s, Engine& g) const override {
        if (s == 0) {
            std::int64_t m = std::min(g_->sample(g), kMaxM);
            return {id(m, 1), enter(m)};
        }
        auto [m, k] = decode(s);
        if (k < m - 1) return {s + 1, inner(k + 1)};
        return {0, ret(m)};
    }
    std::pair<State, DD> step_reverse(State s, Engine& g) const override {
        if (s == 0) {
            std::int64_t m = std::min(g_->sample(g), kMaxM);
            return {id(m, m - 1), ret(m)};
        }
        auto [m, k] = decode(s);
        if (k == 1) return {0, enter(m)};
        return {s - 1, inner(k)};
    }
    double pi(State s) const override {
        if (s == 0) return 1.0 / mean_;
        return g_->pmf(decode(s).first) / mean_;
    }
    double unrepresentable_mass() const override { return g_->survival(kMaxM); }

    bool for_each_cycle(State anchor, std::int64_t max_len, const CycleSink& fn, double& residual) const override {
        if (anchor != 0) return false;
        std::int64_t end = std::min(max_len, kMaxM);
        CyclePath c;
        for (std::int64_t m = g_->lo(); m <= end; ++m) {
            double w = g_->pmf(m);
            if (!(w > 0.0)) continue;
            c.weight = w;
            c.length = m;
            c.sum = DD(1.0);
            c.up_start = 1.0;
            c.up_end = 0.0;
            c.negs.clear();
            if (v_ == GenPetalVariant::XLogX) {
                c.down = static_cast<double>(m - 1);
                c.negs.push_back({c.down, m - 1});
            } else {
                DD acc(0.0);
                for (std::int64_t l = 1; l <= m - 1; ++l) {
                    acc = dd_add(acc, DD(std::pow(static_cast<double>(l), 1.0 / alpha_)));
                    c.negs.push_back({acc.value(), 1});
                }
                std::reverse(c.negs.begin(), c.negs.end());
                c.down = acc.value();
            }
            fn(c);
        }
        residual = g_->survival(end);
        return true;
    }
    std::optional<double> cycle_partial_cdf(State anchor, std::int64_t m, double y) const override {
        if (anchor != 0 || m < 1) return std::nullopt;
        if (v_ == GenPetalVariant::XLogX) {
            // S_m = -(Gamma - 1) on {Gamma > m}
            double c = std::ceil(1.0 - y);
            std::int64_t n = m;
            if (c - 1.0 > static_cast<double>(m)) n = c - 1.0 >= 9.0e18 ? kIndexCap : static_cast<std::int64_t>(c - 1.0);
            return g_->survival(n);
        }
        DD acc(0.0);
        for (std::int64_t l = 1; l <= m; ++l) acc = dd_add(acc, DD(std::pow(static_cast<double>(l), 1.0 / alpha_)));
        return -acc.value() <= y ? g_->survival(m) : 0.0;
    }

private:
    // increment on entering (m,1)
    DD enter(std::int64_t m) const {
        if (v_ == GenPetalVariant::XLogX) return DD(-static_cast<double>(m - 1));
        return DD(-1.0);
    }
    // increment on entering (m,k), k >= 2
    DD inner(std::int64_t k) const {
        if (v_ == GenPetalVariant::XLogX) return DD(0.0);
        return DD(-std::pow(static_cast<double>(k), 1.0 / alpha_));
    }
    DD ret(std::int64_t m) const {
        if (v_ == GenPetalVariant::XLogX) return DD(static_cast<double>(m));
        DD acc(0.0);
        for (std::int64_t l = 1; l <= m - 1; ++l) acc = dd_add(acc, DD(std::pow(static_cast<double>(l), 1.0 / alpha_)));
        return dd_add(acc, DD(1.0));
    }
    LawPtr g_;
    GenPetalVariant v_;
    double alpha_;
    double mean_;
};

class SisyphusFamily : public ChainFamily {
public:
    // P_0(tau > n) = n^{-e}; increments (M_n + 1)^{-2} or M_n
    SisyphusFamily(double e, bool tail_comparison, double alpha)
        : e_(e), tc_(tail_comparison), alpha_(alpha) {
        if (!(e > 1.0)) throw InvalidParameter("return-time exponent must exceed 1");
        c_ = 1.0 / (1.0 + hurwitz_zeta(e, 1.0));
    }
    std::string kind() const override { return tc_ ? "tail-comparison" : "sisyphus"; }
    ojson params() const override { return ojson{{"alpha", alpha_}}; }
    Row row(State i, double) const override {
        Row r;
        if (i == 0) {
            r.edges.push_back({1, 1.0, Kernel::point(x(1))});
        } else {
            double p = up(i);
            r.edges.push_back({i + 1, p, Kernel::point(x(i + 1))});
            r.edges.push_back({0, 1.0 - p, Kernel::point(x(0))});
        }
        return r;
    }
    Row in_row(State j, double eps) const override {
        Row r;
        if (j == 0) {
            // weights pi_n p_n0 / pi_0 = n^{-e} - (n+1)^{-e}
            std::int64_t end = static_cast<std::int64_t>(std::ceil(std::pow(eps, -1.0 / e_)));
            end = std::clamp<std::int64_t>(end, 1, kRowCap);
            for (std::int64_t n = 1; n <= end; ++n) r.edges.push_back({n, 1.0 - up(n), Kernel::point(x(0))});
            r.tail = std::pow(static_cast<double>(end + 1), -e_);
        } else {
            r.edges.push_back({j - 1, j == 1 ? 1.0 : up(j - 1), Kernel::point(x(j))});
        }
        return r;
    }
    std::pair<State, DD> step(State i, Engine& g) const override {
        if (i == 0) return {1, x(1)};
        if (uniform01(g) < up(i)) return {i + 1, x(i + 1)};
        return {0, x(0)};
    }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override {
        if (j == 0) {
            double k = std::floor(std::pow(uniform01(g), -1.0 / e_));
            State n = k < 4.0e18 ? static_cast<State>(k) : kIndexCap;
            return {n, x(0)};
        }
        return {j - 1, x(j)};
    }
    double pi(State i) const override { return i == 0 ? c_ : c_ * std::pow(static_cast<double>(i), -e_); }

private:
    double up(State n) const { return std::exp(e_ * std::log1p(-1.0 / (static_cast<double>(n) + 1.0))); }
    DD x(State j) const {
        double d = static_cast<double>(j);
        return tc_ ? DD(d) : DD(1.0 / ((d + 1.0) * (d + 1.0)));
    }
    double e_;
    bool tc_;
    double alpha_;
    double c_;
};

class BirthDeathFamily : public ChainFamily {
public:
    explicit BirthDeathFamily(Kernel y) : y_(std::move(y)) {}
    std::string kind() const override { return "birth-death"; }
    ojson params() const override { return ojson{{"y", y_.to_json()}}; }
    Row row(State i, double) const override {
        Row r;
        if (i == 0) {
            r.edges.push_back({1, 1.0, k(0, 1)});
        } else {
            r.edges.push_back({i - 1, down(i), k(i, i - 1)});
            r.edges.push_back({i + 1, 1.0 - down(i), k(i, i + 1)});
        }
        return r;
    }
    Row in_row(State j, double) const override {
        Row r;
        if (j == 0) {
            r.edges.push_back({1, down(1), k(1, 0)});
        } else {
            r.edges.push_back({j - 1, j == 1 ? 1.0 : 1.0 - down(j - 1), k(j - 1, j)});
            r.edges.push_back({j + 1, down(j + 1), k(j + 1, j)});
        }
        return r;
    }
    std::pair<State, DD> step(State i, Engine& g) const override {
        State j = (i == 0 || uniform01(g) >= down(i)) ? i + 1 : i - 1;
        return {j, inc(i, j, g)};
    }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override {
        // reversible chain: predecessor law equals the forward row
        State i = (j == 0 || uniform01(g) >= down(j)) ? j + 1 : j - 1;
        return {i, inc(i, j, g)};
    }
    double pi(State i) const override {
        if (i == 0) return 0.25;
        double d = static_cast<double>(i);
        return 1.0 / (d * (d + 2.0));
    }

private:
    static double down(State i) {
        double d = static_cast<double>(i);
        return (d + 2.0) / (2.0 * (d + 1.0));
    }
    Kernel k(State i, State j) const {
        return y_.shifted(static_cast<double>(birth_death_gamma(j) - birth_death_gamma(i)));
    }
    DD inc(State i, State j, Engine& g) const {
        return dd_add(y_.sample(g), DD(static_cast<double>(birth_death_gamma(j) - birth_death_gamma(i))));
    }
    Kernel y_;
};

class SigmaMomentFamily : public ChainFamily {
public:
    SigmaMomentFamily(double alpha, double theta) : alpha_(alpha), theta_(theta) {
        if (!(alpha >= 0.0)) throw InvalidParameter("alpha must be nonnegative");
        if (!(theta > 1.0 + alpha)) throw InvalidParameter("theta must exceed 1 + alpha");
        const double a = alpha;
        auto s = [a](std::int64_t n) -> double {
            if (n >= 2) return std::pow(static_cast<double>(n), -(1.0 + a));
            double s2 = std::pow(2.0, -(1.0 + a));
            double s1 = (1.0 + 3.0 * s2) / 4.0;
            return n == 1 ? s1 : (1.0 + s1) / 2.0;
        };
        auto ti = [a](double t) { return std::pow(t, -a) / a; };
        law_ = make_survival_law(0, s, "ydown", a > 0 ? std::function<double(double)>(ti) : std::function<double(double)>());
        p00_ = law_->pmf(0);
    }
    std::string kind() const override { return "sigma-moment"; }
    ojson params() const override { return ojson{{"alpha", alpha_}, {"theta", theta_}}; }
    Row row(State i, double eps) const override {
        Row r;
        if (i == 0) {
            r.edges.push_back({0, p00_, Kernel::point(0.0)});
            std::int64_t end = row_end(*law_, eps);
            for (std::int64_t n = 1; n <= end; ++n) r.edges.push_back({n, law_->pmf(n), Kernel::point(f(n))});
            r.tail = law_->survival(end);
        } else {
            r.edges.push_back({0, 1.0, Kernel::point(back(i))});
        }
        return r;
    }
    Row in_row(State j, double eps) const override {
        Row r;
        if (j == 0) {
            r.edges.push_back({0, p00_, Kernel::point(0.0)});
            std::int64_t end = row_end(*law_, eps);
            for (std::int64_t n = 1; n <= end; ++n) r.edges.push_back({n, 1.0, Kernel::point(back(n))});
            r.tail = law_->survival(end);
        } else {
            r.edges.push_back({0, law_->pmf(j), Kernel::point(f(j))});
        }
        return r;
    }
    std::pair<State, DD> step(State i, Engine& g) const override {
        if (i == 0) {
            State n = law_->sample(g);
            if (n == 0) return {0, DD(0.0)};
            return {n, DD(f(n))};
        }
        return {0, back(i)};
    }
    std::pair<State, DD> step_reverse(State j, Engine& g) const override {
        if (j == 0) {
            State n = law_->sample(g);
            if (n == 0) return {0, DD(0.0)};
            return {n, back(n)};
        }
        return {0, DD(f(j))};
    }
    double pi(State i) const override {
        double p0 = 1.0 / (2.0 - p00_);
        return i == 0 ? p0 : p0 * law_->pmf(i);
    }
    double unrepresentable_mass() const override { return law_->survival(kIndexCap); }

    // f(i) = 2^{theta i^{1+alpha}} capped at 2^1000
    double f(State i) const {
        double e = theta_ * std::pow(static_cast<double>(i), 1.0 + alpha_);
        return e >= 1000.0 ? std::ldexp(1.0, 1000) : std::exp2(e);
    }
    DD back(State i) const { return exact_sum(-f(i), -static_cast<double>(i)); }

private:
    double alpha_, theta_;
    LawPtr law_;
    double p00_;
};

std::map<std::string, std::string> parse_params(const std::string& text, const std::string& primary) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    // split on commas that are not inside parentheses
    std::vector<std::string> items;
    int depth = 0;
    std::string cur;
    for (char ch : text) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    items.push_back(cur);
    for (const auto& it : items) {
        auto eq = it.find('=');
        if (eq == std::string::npos || it.find('(') < eq) {
            if (primary.empty()) throw ConfigError("zoo parameter '" + it + "' needs key=value");
            out[primary] = it;
        } else {
            out[it.substr(0, eq)] = it.substr(eq + 1);
        }
    }
    return out;
}

double num(const std::map<std::string, std::string>& p, const std::string& key, double def) {
    auto it = p.find(key);
    if (it == p.end()) return def;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("zoo parameter " + key + "='" + it->second + "' is not a number");
    }
}

std::string str(const std::map<std::string, std::string>& p, const std::string& key, const std::string& def) {
    auto it = p.find(key);
    return it == p.end() ? def : it->second;
}

void check_keys(const std::map<std::string, std::string>& p, std::initializer_list<const char*> allowed,
                const std::string& zoo) {
    for (const auto& kv : p) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || kv.first == a;
        if (!ok) throw ConfigError("zoo model '" + zoo + "' has no parameter '" + kv.first + "'");
    }
}

ModelSpec family_spec(const std::string& name, FamilyPtr fam, double eps = 1e-12) {
    ModelSpec s;
    s.name = name;
    s.parameters = fam->params();
    s.family = std::move(fam);
    s.tail_eps = eps;
    return s;
}

}  // namespace

ModelSpec zoo_petal_flower(LawPtr p0, PetalVariant variant) {
    auto inc = variant == PetalVariant::Plain ? PetalFamily::Inc::Plain : PetalFamily::Inc::Alternating;
    auto fam = std::make_shared<PetalFamily>(std::move(p0), inc, 0.0);
    return family_spec(fam->kind(), fam);
}

ModelSpec zoo_petal_general(LawPtr p0, double c) {
    if (!(c > 0.0)) throw InvalidParameter("petal-general needs c > 0");
    auto fam = std::make_shared<PetalFamily>(std::move(p0), PetalFamily::Inc::Power, c);
    return family_spec("petal-general", fam);
}

ModelSpec zoo_sisyphus(double alpha) {
    if (!(alpha > 0.0)) throw InvalidParameter("sisyphus needs alpha > 0");
    return family_spec("sisyphus", std::make_shared<SisyphusFamily>(1.0 + alpha, false, alpha));
}

ModelSpec zoo_generalized_petal_flower(LawPtr gamma, GenPetalVariant variant, double alpha) {
    auto fam = std::make_shared<GenPetalFamily>(std::move(gamma), variant, alpha);
    // the state index space ends at excursion length 4e9; the declared truncation threshold covers it
    return family_spec(fam->kind(), fam, 1e-11);
}

ModelSpec zoo_tail_comparison(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw InvalidParameter("tail-comparison needs alpha in (1,2)");
    return family_spec("tail-comparison", std::make_shared<SisyphusFamily>(alpha, true, alpha));
}

ModelSpec zoo_birth_death(const Kernel& y) { return family_spec("birth-death", std::make_shared<BirthDeathFamily>(y)); }

ModelSpec zoo_single_state(const Kernel& x) {
    FiniteSpec fs;
    fs.names = {"0"};
    fs.P = {{1.0}};
    fs.P_exact = {{"1/1"}};
    fs.kernels[{0, 0}] = x;
    ModelSpec s = finite_spec_model("single-state", fs);
    s.parameters["x"] = x.to_json();
    return s;
}

ModelSpec zoo_sigma_moment_counterexample(double alpha, double theta) {
    return family_spec("sigma-moment", std::make_shared<SigmaMomentFamily>(alpha, theta));
}

ModelSpec zoo_affine_env(const FiniteSpec& a_spec) {
    FiniteSpec fs = a_spec;
    for (auto& kv : fs.kernels) {
        const Kernel& a = kv.second;
        if (a.kind() == Kernel::Kind::Point) {
            double v = a.point_value().value();
            if (v == 0.0) throw InvalidParameter("A must be nonzero");
            kv.second = Kernel::point(std::log(std::abs(v)));
        } else if (a.kind() == Kernel::Kind::Discrete) {
            std::vector<double> vals, ps;
            for (auto& [v, p] : a.atoms()) {
                if (v.value() == 0.0) throw InvalidParameter("A must be nonzero");
                vals.push_back(std::log(std::abs(v.value())));
                ps.push_back(p);
            }
            kv.second = Kernel::discrete(vals, ps);
        } else {
            throw UnsupportedKernel("affine environment needs point or discrete laws for A");
        }
    }
    ModelSpec s = finite_spec_model("affine-env", fs);
    s.parameters["increments"] = "log|A|";
    return s;
}

ModelSpec zoo_affine_env_default() {
    FiniteSpec a;
    a.names = {"calm", "storm"};
    a.P = {{0.75, 0.25}, {0.5, 0.5}};
    a.P_exact = {{"3/4", "1/4"}, {"1/2", "1/2"}};
    a.kernels[{0, 0}] = Kernel::discrete({0.5, 1.5}, {0.5, 0.5});
    a.kernels[{0, 1}] = Kernel::point(0.8);
    a.kernels[{1, 0}] = Kernel::point(1.25);
    a.kernels[{1, 1}] = Kernel::discrete({-3.0, 0.25}, {0.25, 0.75});
    return zoo_affine_env(a);
}

ModelSpec zoo_two_state_loop() {
    FiniteSpec fs;
    fs.names = {"1", "2"};
    fs.P = {{0.0, 1.0}, {1.0, 0.0}};
    fs.P_exact = {{"0/1", "1/1"}, {"1/1", "0/1"}};
    fs.kernels[{0, 1}] = Kernel::point(1.0);
    fs.kernels[{1, 0}] = Kernel::point(-1.0);
    return finite_spec_model("two-state-loop", fs);
}

ModelSpec zoo_from_string(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    ModelSpec s;
    if (name == "petal-flower" || name == "petal-flower-alt") {
        auto p = parse_params(rest, "p0");
        check_keys(p, {"p0", "variant"}, name);
        std::string variant = str(p, "variant", name == "petal-flower" ? "plain" : "alternating");
        if (variant != "plain" && variant != "alternating") throw ConfigError("variant must be plain or alternating");
        s = zoo_petal_flower(parse_law(str(p, "p0", "zipf2")),
                             variant == "plain" ? PetalVariant::Plain : PetalVariant::Alternating);
    } else if (name == "petal-general") {
        auto p = parse_params(rest, "c");
        check_keys(p, {"p0", "c"}, name);
        s = zoo_petal_general(parse_law(str(p, "p0", "zeta(3)")), num(p, "c", 1.5));
    } else if (name == "sisyphus") {
        auto p = parse_params(rest, "alpha");
        check_keys(p, {"alpha"}, name);
        s = zoo_sisyphus(num(p, "alpha", 1.0));
    } else if (name == "gen-petal-xlogx") {
        auto p = parse_params(rest, "gamma");
        check_keys(p, {"gamma"}, name);
        s = zoo_generalized_petal_flower(parse_law(str(p, "gamma", "logtail(1.5)"), 2), GenPetalVariant::XLogX);
    } else if (name == "gen-petal-min") {
        auto p = parse_params(rest, "alpha");
        check_keys(p, {"alpha", "gamma"}, name);
        double a = num(p, "alpha", 1.5);
        if (!(a > 1.0)) throw InvalidParameter("gen-petal-min needs alpha > 1");
        std::ostringstream def;
        def.precision(17);
        def << "power(" << (1.0 + a) * (1.0 + 1.0 / a) << ")";
        s = zoo_generalized_petal_flower(parse_law(str(p, "gamma", def.str()), 2), GenPetalVariant::MinCounterexample, a);
    } else if (name == "tail-comparison") {
        auto p = parse_params(rest, "alpha");
        check_keys(p, {"alpha"}, name);
        s = zoo_tail_comparison(num(p, "alpha", 1.5));
    } else if (name == "birth-death") {
        auto p = parse_params(rest, "y");
        check_keys(p, {"y"}, name);
        s = zoo_birth_death(Kernel::parse(str(p, "y", "pm1")));
    } else if (name == "single-state") {
        auto p = parse_params(rest, "x");
        check_keys(p, {"x"}, name);
        s = zoo_single_state(Kernel::parse(str(p, "x", "+1")));
    } else if (name == "sigma-moment") {
        auto p = parse_params(rest, "");
        check_keys(p, {"alpha", "theta"}, name);
        double a = num(p, "alpha", 1.0);
        s = zoo_sigma_moment_counterexample(a, num(p, "theta", a + 1.5));
    } else if (name == "affine-env") {
        if (!rest.empty()) throw ConfigError("affine-env takes its environment from a model file");
        s = zoo_affine_env_default();
    } else if (name == "two-state-loop") {
        if (!rest.empty()) throw ConfigError("two-state-loop has no parameters");
        s = zoo_two_state_loop();
    } else {
        throw ConfigError("unknown zoo model '" + name + "'");
    }
    s.name = text;
    return s;
}

std::vector<ZooEntry> zoo_catalog() {
    return {
        {"petal-flower", "p0=zipf2", "flower chain, out-step -1/p0i, return 2+1/p0i"},
        {"petal-flower-alt", "p0=zipf2", "flower chain with signs alternating between even and odd petals"},
        {"petal-general", "p0=zeta(3),c=1.5", "flower chain with out-step -x_i and return x_i+2, x_i=i^c"},
        {"sisyphus", "alpha=1", "climb-or-fall chain with P(tau>n)=n^-(1+alpha), increments (M+1)^-2"},
        {"gen-petal-xlogx", "gamma=logtail(1.5)", "excursions of random length Gamma with E Gamma log Gamma infinite"},
        {"gen-petal-min", "alpha=1.5", "excursions with increments -l^(1/alpha), heavy minimum"},
        {"tail-comparison", "alpha=1.5", "climb-or-fall chain with P(tau>n)=n^-alpha, increments M_n"},
        {"birth-death", "y=pm1", "birth-death chain with coboundary gamma plus iid noise Y"},
        {"single-state", "x=+1", "ordinary random walk"},
        {"sigma-moment", "alpha=1,theta=2.5", "embedded walk drifts down, first passage moments stay finite"},
        {"affine-env", "", "log|A| increments of a random difference equation in a two-state environment"},
        {"two-state-loop", "", "deterministic loop with increments +1 and -1"},
    };
}

}  // namespace mrw
