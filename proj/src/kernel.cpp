#include "mrw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrw/errors.hpp"

namespace mrw {

namespace {

double num(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse number '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

const double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

Kernel Kernel::point(double v) { return point(DD(v)); }

Kernel Kernel::point(DD v) {
    Kernel k;
    k.kind_ = Kind::Point;
    k.point_ = v;
    return k;
}

Kernel Kernel::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty())
        throw InvalidDistribution("discrete kernel needs matching nonempty values and probabilities");
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0) || !std::isfinite(values[i])) throw InvalidDistribution("bad discrete kernel entry");
        s += probs[i];
    }
    if (std::abs(s - 1.0) > 1e-12) throw InvalidDistribution("discrete kernel probabilities sum to " + std::to_string(s));
    Kernel k;
    k.kind_ = Kind::Discrete;
    k.values_ = std::move(values);
    k.probs_ = std::move(probs);
    k.cdf_.resize(k.probs_.size());
    double c = 0.0;
    for (std::size_t i = 0; i < k.probs_.size(); ++i) k.cdf_[i] = (c += k.probs_[i]);
    k.cdf_.back() = 1.0;
    return k;
}

Kernel Kernel::normal(double mu, double sigma) {
    if (!(sigma > 0.0)) throw InvalidDistribution("normal kernel needs sigma > 0");
    Kernel k;
    k.kind_ = Kind::Normal;
    k.a_ = mu;
    k.b_ = sigma;
    return k;
}

Kernel Kernel::exponential(double rate) {
    if (!(rate > 0.0)) throw InvalidDistribution("exponential kernel needs rate > 0");
    Kernel k;
    k.kind_ = Kind::Exponential;
    k.a_ = rate;
    return k;
}

Kernel Kernel::uniform(double a, double b) {
    if (!(a < b)) throw InvalidDistribution("uniform kernel needs a < b");
    Kernel k;
    k.kind_ = Kind::Uniform;
    k.a_ = a;
    k.b_ = b;
    return k;
}

DD Kernel::sample(Engine& g) const {
    switch (kind_) {
        case Kind::Point:
            return point_;
        case Kind::Discrete: {
            double u = uniform01(g);
            auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
            std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), values_.size() - 1);
            return DD(values_[i]);
        }
        case Kind::Normal: {
            // Box-Muller on one pair, first coordinate only keeps the stream layout simple
            double u1 = uniform01(g), u2 = uniform01(g);
            double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            return DD(shift_ + scale_ * (a_ + b_ * z));
        }
        case Kind::Exponential:
            return DD(shift_ + scale_ * (-std::log(uniform01(g)) / a_));
        case Kind::Uniform:
            return DD(shift_ + scale_ * (a_ + (b_ - a_) * uniform01(g)));
    }
    return DD();
}

std::vector<std::pair<DD, double>> Kernel::atoms() const {
    if (kind_ == Kind::Point) return {{point_, 1.0}};
    if (kind_ == Kind::Discrete) {
        std::vector<std::pair<DD, double>> out;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (probs_[i] > 0.0) out.emplace_back(DD(values_[i]), probs_[i]);
        return out;
    }
    throw UnsupportedKernel("continuous kernel has no atoms");
}

double Kernel::mean() const {
    switch (kind_) {
        case Kind::Point: return point_.value();
        case Kind::Discrete: {
            double m = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
            return m;
        }
        case Kind::Normal: return shift_ + scale_ * a_;
        case Kind::Exponential: return shift_ + scale_ / a_;
        case Kind::Uniform: return shift_ + scale_ * 0.5 * (a_ + b_);
    }
    return 0.0;
}

double Kernel::mean_pos() const {
    switch (kind_) {
        case Kind::Point: return std::max(0.0, point_.value());
        case Kind::Discrete: {
            double m = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) m += std::max(0.0, values_[i]) * probs_[i];
            return m;
        }
        case Kind::Normal: {
            double mu = shift_ + scale_ * a_, sd = std::abs(scale_) * b_;
            double z = mu / sd;
            return mu * 0.5 * std::erfc(-z * kInvSqrt2) + sd * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        }
        case Kind::Exponential: {
            // shift + scale * E, E ~ Exp(rate)
            double c = shift_, s = scale_, r = a_;
            if (s > 0) {
                if (c >= 0) return c + s / r;
                double t = -c / s;
                return std::exp(-r * t) * s / r;
            }
            if (c <= 0) return 0.0;
            double t = c / -s;
            return c * (1.0 - std::exp(-r * t)) + s * ((1.0 - std::exp(-r * t)) / r - t * std::exp(-r * t));
        }
        case Kind::Uniform: {
            double lo = shift_ + scale_ * a_, hi = shift_ + scale_ * b_;
            if (lo > hi) std::swap(lo, hi);
            if (hi <= 0) return 0.0;
            if (lo >= 0) return 0.5 * (lo + hi);
            return hi * hi / (2.0 * (hi - lo));
        }
    }
    return 0.0;
}

double Kernel::mean_neg() const { return scaled(-1.0).mean_pos(); }

Kernel Kernel::scaled(double c) const {
    Kernel k = *this;
    if (kind_ == Kind::Point) {
        k.point_ = dd_scale(point_, c);
    } else if (kind_ == Kind::Discrete) {
        for (auto& v : k.values_) v *= c;
    } else {
        k.scale_ *= c;
        k.shift_ *= c;
    }
    return k;
}

Kernel Kernel::shifted(double c) const {
    Kernel k = *this;
    if (kind_ == Kind::Point) {
        k.point_ = dd_add(point_, DD(c));
    } else if (kind_ == Kind::Discrete) {
        for (auto& v : k.values_) v += c;
    } else {
        k.shift_ += c;
    }
    return k;
}

nlohmann::ordered_json Kernel::to_json() const {
    nlohmann::ordered_json j;
    switch (kind_) {
        case Kind::Point: j["point"] = point_.value(); break;
        case Kind::Discrete: j["discrete"] = {{"values", values_}, {"probs", probs_}}; break;
        case Kind::Normal: j["normal"] = {{"mu", a_}, {"sigma", b_}}; break;
        case Kind::Exponential: j["exponential"] = {{"rate", a_}}; break;
        case Kind::Uniform: j["uniform"] = {{"a", a_}, {"b", b_}}; break;
    }
    if (kind_ != Kind::Point && kind_ != Kind::Discrete && (scale_ != 1.0 || shift_ != 0.0)) {
        j["scale"] = scale_;
        j["shift"] = shift_;
    }
    return j;
}

Kernel Kernel::from_json(const nlohmann::json& j, const std::string& where) {
    auto need_num = [&](const nlohmann::json& o, const char* key) -> double {
        if (!o.is_object() || !o.contains(key) || !o[key].is_number())
            throw ConfigError(where + "/" + key + ": expected a number");
        return o[key].get<double>();
    };
    if (j.is_number()) return point(j.get<double>());
    if (j.is_string()) return parse(j.get<std::string>());
    if (!j.is_object() || j.size() != 1) throw ConfigError(where + ": kernel must be a number, string or single-key object");
    auto it = j.begin();
    const std::string key = it.key();
    const auto& v = it.value();
    if (key == "point") {
        if (!v.is_number()) throw ConfigError(where + "/point: expected a number");
        return point(v.get<double>());
    }
    if (key == "discrete") {
        if (!v.is_object() || !v.contains("values") || !v.contains("probs") || !v["values"].is_array() ||
            !v["probs"].is_array())
            throw ConfigError(where + "/discrete: expected {values: [...], probs: [...]}");
        std::vector<double> vals, ps;
        for (std::size_t i = 0; i < v["values"].size(); ++i) {
            if (!v["values"][i].is_number()) throw ConfigError(where + "/discrete/values/" + std::to_string(i) + ": expected a number");
            vals.push_back(v["values"][i].get<double>());
        }
        for (std::size_t i = 0; i < v["probs"].size(); ++i) {
            if (!v["probs"][i].is_number()) throw ConfigError(where + "/discrete/probs/" + std::to_string(i) + ": expected a number");
            ps.push_back(v["probs"][i].get<double>());
        }
        return discrete(vals, ps);
    }
    if (key == "normal") return normal(need_num(v, "mu"), need_num(v, "sigma"));
    if (key == "exponential") return exponential(need_num(v, "rate"));
    if (key == "uniform") return uniform(need_num(v, "a"), need_num(v, "b"));
    throw ConfigError(where + ": unknown kernel type '" + key + "'");
}

Kernel Kernel::parse(const std::string& text) {
    if (text == "pm1") return discrete({1.0, -1.0}, {0.5, 0.5});
    std::string name = text, arg;
    auto open = text.find('(');
    if (open != std::string::npos) {
        if (text.back() != ')') throw ConfigError("malformed kernel '" + text + "'");
        name = text.substr(0, open);
        arg = text.substr(open + 1, text.size() - open - 2);
    }
    if (name == "pm1") {
        double p = num(arg);
        return discrete({1.0, -1.0}, {p, 1.0 - p});
    }
    if (name == "d") {
        std::vector<double> vals, ps;
        for (const auto& item : split(arg, ';')) {
            auto at = item.find('@');
            if (at == std::string::npos) throw ConfigError("discrete kernel entries need value@prob: '" + item + "'");
            vals.push_back(num(item.substr(0, at)));
            ps.push_back(num(item.substr(at + 1)));
        }
        return discrete(vals, ps);
    }
    if (name == "normal") {
        auto a = split(arg, ';');
        if (a.size() != 2) throw ConfigError("normal(mu;sigma) expected");
        return normal(num(a[0]), num(a[1]));
    }
    if (name == "exp") return exponential(num(arg));
    if (name == "unif") {
        auto a = split(arg, ';');
        if (a.size() != 2) throw ConfigError("unif(a;b) expected");
        return uniform(num(a[0]), num(a[1]));
    }
    if (open == std::string::npos) return point(num(text));
    throw ConfigError("unknown kernel '" + text + "'");
}

}  // namespace mrw
