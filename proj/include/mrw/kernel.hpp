#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mrw/numeric.hpp"
#include "mrw/rng.hpp"

namespace mrw {

// increment law on one edge of the driving chain
class Kernel {
public:
    enum class Kind { Point, Discrete, Normal, Exponential, Uniform };

    Kernel() = default;
    static Kernel point(double v);
    static Kernel point(DD v);
    static Kernel discrete(std::vector<double> values, std::vector<double> probs);
    static Kernel normal(double mu, double sigma);
    static Kernel exponential(double rate);
    static Kernel uniform(double a, double b);

    Kind kind() const { return kind_; }
    bool exact() const { return kind_ == Kind::Point || kind_ == Kind::Discrete; }
    DD sample(Engine& g) const;
    // atoms of an exact kernel (value, probability); throws UnsupportedKernel otherwise
    std::vector<std::pair<DD, double>> atoms() const;
    double mean() const;
    double mean_pos() const;
    double mean_neg() const;
    // law of c*X (c may be negative)
    Kernel scaled(double c) const;
    Kernel shifted(double c) const;
    DD point_value() const { return point_; }

    nlohmann::ordered_json to_json() const;
    static Kernel from_json(const nlohmann::json& j, const std::string& where);
    // "+1", "-1", "0", "pm1", "pm1(0.7)", "d(2@0.6;-1@0.4)", "normal(mu;sigma)", "exp(rate)", "unif(a;b)"
    static Kernel parse(const std::string& text);

private:
    Kind kind_ = Kind::Point;
    DD point_{};
    std::vector<double> values_, probs_, cdf_;
    double a_ = 0.0, b_ = 0.0;
    double scale_ = 1.0, shift_ = 0.0;
};

}  // namespace mrw
