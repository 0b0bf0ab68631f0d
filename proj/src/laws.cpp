#include "mrw/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mrw/errors.hpp"
#include "mrw/numeric.hpp"

namespace mrw {

double hurwitz_zeta(double s, double q) {
    if (!(s > 1.0) || !(q > 0.0)) return std::numeric_limits<double>::infinity();
    // Euler-Maclaurin with a short direct head
    int n = q < 12.0 ? static_cast<int>(std::ceil(12.0 - q)) : 0;
    double head = 0.0;
    for (int k = n - 1; k >= 0; --k) head += std::pow(q + k, -s);
    double a = q + n;
    double res = head + std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
    static const double b2j[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};
    double fact = 1.0;   // (2j)!
    double rising = s;   // s (s+1) ... (s+2j-2)
    double apow = std::pow(a, -s - 1.0);
    for (int j = 1; j <= 6; ++j) {
        fact *= (2.0 * j - 1.0) * (2.0 * j);
        res += b2j[j - 1] / fact * rising * apow;
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        apow /= a * a;
    }
    return res;
}

double IntegerLaw::pmf(std::int64_t n) const {
    if (n < lo()) return 0.0;
    return survival(n - 1) - survival(n);
}

void IntegerLaw::build_cache(std::int64_t len) {
    cache_.resize(static_cast<std::size_t>(len));
    for (std::int64_t k = 0; k < len; ++k) cache_[static_cast<std::size_t>(k)] = survival(lo() + k);
}

std::int64_t IntegerLaw::tail_index(double v) const {
    const std::int64_t base = lo();
    if (v >= 1.0) return base - 1;
    if (!cache_.empty() && v >= cache_.back()) {
        auto it = std::partition_point(cache_.begin(), cache_.end(), [v](double s) { return s > v; });
        return base + static_cast<std::int64_t>(it - cache_.begin());
    }
    if (auto h = hi()) {
        std::int64_t a = base - 1, b = *h;  // survival(a) > v >= survival(b) = 0
        if (!cache_.empty()) a = base + static_cast<std::int64_t>(cache_.size()) - 1;
        while (b - a > 1) {
            std::int64_t m = a + (b - a) / 2;
            if (survival(m) > v) a = m; else b = m;
        }
        return b;
    }
    std::int64_t a = cache_.empty() ? base - 1 : base + static_cast<std::int64_t>(cache_.size()) - 1;
    std::int64_t step = std::max<std::int64_t>(1, a - base + 1);
    std::int64_t b = a;
    while (true) {
        if (b >= kIndexCap) return kIndexCap;
        b = (kIndexCap - a > step) ? a + step : kIndexCap;
        if (survival(b) <= v) break;
        a = b;
        if (step < kIndexCap / 2) step *= 2;
    }
    while (b - a > 1) {
        std::int64_t m = a + (b - a) / 2;
        if (survival(m) > v) a = m; else b = m;
    }
    return b;
}

std::int64_t IntegerLaw::sample(Engine& g) const { return tail_index(uniform01(g)); }

double IntegerLaw::mean() const {
    const std::int64_t base = lo();
    std::int64_t top = base + 2000000;
    if (auto h = hi()) top = std::min(top, *h);
    double acc = 0.0;
    for (std::int64_t n = top; n >= base; --n) acc += survival(n);
    if (!hi() || *hi() > top) acc += survival_tail_integral(static_cast<double>(top) + 0.5);
    return static_cast<double>(base) + acc;
}

namespace {

class TableLaw : public IntegerLaw {
public:
    TableLaw(std::int64_t lo, std::vector<double> p, std::string name) : lo_(lo), p_(std::move(p)), name_(std::move(name)) {
        if (p_.empty()) throw InvalidDistribution("empty table law");
        double s = 0.0;
        for (double x : p_) {
            if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidDistribution("negative or non-finite probability in table law");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-12) throw InvalidDistribution("table law sums to " + std::to_string(s));
        tail_.assign(p_.size(), 0.0);
        double t = 0.0;
        for (std::size_t k = p_.size(); k-- > 0;) {
            tail_[k] = t;  // P(X > lo + k)
            t += p_[k];
        }
        build_cache(static_cast<std::int64_t>(p_.size()));
    }
    std::int64_t lo() const override { return lo_; }
    std::optional<std::int64_t> hi() const override { return lo_ + static_cast<std::int64_t>(p_.size()) - 1; }
    double survival(std::int64_t n) const override {
        if (n < lo_) return 1.0;
        std::int64_t k = n - lo_;
        if (k >= static_cast<std::int64_t>(p_.size())) return 0.0;
        return tail_[static_cast<std::size_t>(k)];
    }
    double pmf(std::int64_t n) const override {
        std::int64_t k = n - lo_;
        if (k < 0 || k >= static_cast<std::int64_t>(p_.size())) return 0.0;
        return p_[static_cast<std::size_t>(k)];
    }
    double mean() const override {
        double m = 0.0;
        for (std::size_t k = 0; k < p_.size(); ++k) m += p_[k] * static_cast<double>(lo_ + static_cast<std::int64_t>(k));
        return m;
    }
    std::string describe() const override { return name_; }

private:
    std::int64_t lo_;
    std::vector<double> p_, tail_;
    std::string name_;
};

class ZetaLaw : public IntegerLaw {
public:
    ZetaLaw(double s, std::int64_t lo) : s_(s), lo_(lo) {
        if (!(s > 1.0)) throw InvalidDistribution("zeta law needs s > 1");
        if (lo < 1) throw InvalidDistribution("zeta law needs support in the positive integers");
        z_ = hurwitz_zeta(s, static_cast<double>(lo));
        build_cache(4096);
    }
    std::int64_t lo() const override { return lo_; }
    double survival(std::int64_t n) const override {
        if (n < lo_) return 1.0;
        return hurwitz_zeta(s_, static_cast<double>(n) + 1.0) / z_;
    }
    double pmf(std::int64_t n) const override {
        if (n < lo_) return 0.0;
        return std::pow(static_cast<double>(n), -s_) / z_;
    }
    double mean() const override {
        if (s_ <= 2.0) return std::numeric_limits<double>::infinity();
        return hurwitz_zeta(s_ - 1.0, static_cast<double>(lo_)) / z_;
    }
    std::string describe() const override {
        std::ostringstream o;
        o << "zeta(" << s_ << ")";
        return o.str();
    }

private:
    double s_;
    std::int64_t lo_;
    double z_;
};

class PowerTailLaw : public IntegerLaw {
public:
    PowerTailLaw(std::int64_t lo, double a) : lo_(lo), a_(a) {
        if (!(a > 0.0)) throw InvalidDistribution("power tail exponent must be positive");
        build_cache(4096);
    }
    std::int64_t lo() const override { return lo_; }
    double survival(std::int64_t n) const override {
        if (n < lo_) return 1.0;
        return std::pow(static_cast<double>(n - lo_ + 2), -a_);
    }
    std::int64_t sample(Engine& g) const override {
        double v = uniform01(g);
        double k = std::floor(std::pow(v, -1.0 / a_));
        if (!(k < 4.0e18)) return kIndexCap;
        std::int64_t r = lo_ - 1 + static_cast<std::int64_t>(k);
        return std::min(r, kIndexCap);
    }
    double mean() const override {
        if (a_ <= 1.0) return std::numeric_limits<double>::infinity();
        return static_cast<double>(lo_ - 1) + hurwitz_zeta(a_, 1.0);
    }
    std::string describe() const override {
        std::ostringstream o;
        o << "power(" << a_ << ")";
        return o.str();
    }

private:
    std::int64_t lo_;
    double a_;
};

class LogTailLaw : public IntegerLaw {
public:
    LogTailLaw(std::int64_t lo, double beta) : lo_(lo), beta_(beta) {
        if (!(beta > 1.0)) throw InvalidDistribution("log tail law needs beta > 1 for a finite mean");
        build_cache(4096);
    }
    std::int64_t lo() const override { return lo_; }
    double survival(std::int64_t n) const override {
        if (n < lo_) return 1.0;
        double k1 = static_cast<double>(n - lo_ + 2);
        return 1.0 / (k1 * std::pow(1.0 + std::log(k1), beta_));
    }
    std::string describe() const override {
        std::ostringstream o;
        o << "logtail(" << beta_ << ")";
        return o.str();
    }

protected:
    double survival_tail_integral(double t) const override {
        double k1 = t - static_cast<double>(lo_) + 2.0;
        return std::pow(1.0 + std::log(k1), 1.0 - beta_) / (beta_ - 1.0);
    }

private:
    std::int64_t lo_;
    double beta_;
};

class InverseLogTailLaw : public IntegerLaw {
public:
    explicit InverseLogTailLaw(std::int64_t lo) : lo_(lo) { build_cache(4096); }
    std::int64_t lo() const override { return lo_; }
    double survival(std::int64_t n) const override {
        if (n < lo_) return 1.0;
        return 1.0 / (1.0 + std::log(static_cast<double>(n - lo_ + 2)));
    }
    double pmf(std::int64_t n) const override {
        if (n < lo_) return 0.0;
        double k = static_cast<double>(n - lo_ + 1);
        return std::log1p(1.0 / k) / ((1.0 + std::log(k)) * (1.0 + std::log(k + 1.0)));
    }
    double mean() const override { return std::numeric_limits<double>::infinity(); }
    std::string describe() const override { return "invlog"; }

private:
    std::int64_t lo_;
};

class GeometricLaw : public IntegerLaw {
public:
    GeometricLaw(std::int64_t lo, double p) : lo_(lo), p_(p) {
        if (!(p > 0.0 && p <= 1.0)) throw InvalidDistribution("geometric law needs p in (0,1]");
        build_cache(256);
    }
    std::int64_t lo() const override { return lo_; }
    double survival(std::int64_t n) const override {
        if (n < lo_) return 1.0;
        return std::pow(1.0 - p_, static_cast<double>(n - lo_ + 1));
    }
    double mean() const override { return static_cast<double>(lo_) + (1.0 - p_) / p_; }
    std::string describe() const override {
        std::ostringstream o;
        o << "geom(" << p_ << ")";
        return o.str();
    }

private:
    std::int64_t lo_;
    double p_;
};

class SurvivalLaw : public IntegerLaw {
public:
    SurvivalLaw(std::int64_t lo, std::function<double(std::int64_t)> s, std::string name, std::function<double(double)> ti)
        : lo_(lo), s_(std::move(s)), name_(std::move(name)), ti_(std::move(ti)) {
        build_cache(4096);
    }
    std::int64_t lo() const override { return lo_; }
    double survival(std::int64_t n) const override { return n < lo_ ? 1.0 : s_(n); }
    std::string describe() const override { return name_; }

protected:
    double survival_tail_integral(double t) const override { return ti_ ? ti_(t) : 0.0; }

private:
    std::int64_t lo_;
    std::function<double(std::int64_t)> s_;
    std::string name_;
    std::function<double(double)> ti_;
};

double parse_number(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse number '" + s + "'");
    }
}

}  // namespace

LawPtr make_table_law(std::int64_t lo, std::vector<double> probs, std::string name) {
    return std::make_shared<TableLaw>(lo, std::move(probs), std::move(name));
}
LawPtr make_zeta_law(double s, std::int64_t lo) { return std::make_shared<ZetaLaw>(s, lo); }
LawPtr make_power_tail_law(std::int64_t lo, double a) { return std::make_shared<PowerTailLaw>(lo, a); }
LawPtr make_log_tail_law(std::int64_t lo, double beta) { return std::make_shared<LogTailLaw>(lo, beta); }
LawPtr make_inverse_log_tail_law(std::int64_t lo) { return std::make_shared<InverseLogTailLaw>(lo); }
LawPtr make_survival_law(std::int64_t lo, std::function<double(std::int64_t)> surv, std::string name,
                         std::function<double(double)> tail_integral) {
    return std::make_shared<SurvivalLaw>(lo, std::move(surv), std::move(name), std::move(tail_integral));
}

LawPtr parse_law(const std::string& text, std::int64_t lo) {
    std::string name = text, arg;
    auto open = text.find('(');
    if (open != std::string::npos) {
        if (text.back() != ')') throw ConfigError("malformed law '" + text + "'");
        name = text.substr(0, open);
        arg = text.substr(open + 1, text.size() - open - 2);
    }
    if (name == "zipf2") return make_zeta_law(2.0, lo);
    if (name == "zeta" || name == "zipf") return make_zeta_law(parse_number(arg), lo);
    if (name == "power") return make_power_tail_law(lo, parse_number(arg));
    if (name == "logtail") return make_log_tail_law(lo, arg.empty() ? 1.5 : parse_number(arg));
    if (name == "invlog") return make_inverse_log_tail_law(lo);
    if (name == "geom") return std::make_shared<GeometricLaw>(lo, parse_number(arg));
    if (name == "point") {
        std::int64_t k = static_cast<std::int64_t>(parse_number(arg));
        if (k < lo) throw InvalidDistribution("point law below support");
        std::vector<double> p(static_cast<std::size_t>(k - lo + 1), 0.0);
        p.back() = 1.0;
        return make_table_law(lo, p, text);
    }
    if (name == "table") {
        std::vector<double> p;
        std::stringstream ss(arg);
        std::string item;
        while (std::getline(ss, item, ';')) p.push_back(parse_number(item));
        return make_table_law(lo, p, text);
    }
    throw ConfigError("unknown law '" + text + "'");
}

}  // namespace mrw
