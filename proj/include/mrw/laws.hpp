#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrw/rng.hpp"

namespace mrw {

// largest index a sampled integer may take; searches saturate here
constexpr std::int64_t kIndexCap = std::int64_t(1) << 62;

// law of an integer random variable with support {lo, lo+1, ...}
class IntegerLaw {
public:
    virtual ~IntegerLaw() = default;
    virtual std::int64_t lo() const = 0;
    virtual std::optional<std::int64_t> hi() const { return std::nullopt; }
    // P(X > n)
    virtual double survival(std::int64_t n) const = 0;
    virtual double pmf(std::int64_t n) const;
    virtual std::int64_t sample(Engine& g) const;
    virtual double mean() const;
    virtual std::string describe() const = 0;
    // exact rational pmf "p/q" when available
    virtual std::optional<std::string> rational_pmf(std::int64_t) const { return std::nullopt; }

    // smallest n >= lo - 1 with P(X > n) <= v, saturating at kIndexCap
    std::int64_t tail_index(double v) const;

protected:
    // integral of the survival function from k to infinity, used to close mean()
    virtual double survival_tail_integral(double) const { return 0.0; }
    void build_cache(std::int64_t len);
    std::vector<double> cache_;  // survival(lo + k), k < cache_.size()
};

using LawPtr = std::shared_ptr<const IntegerLaw>;

LawPtr make_table_law(std::int64_t lo, std::vector<double> probs, std::string name = "table");
// pmf proportional to n^{-s}, n >= lo
LawPtr make_zeta_law(double s, std::int64_t lo = 1);
// P(X > n) = (n - lo + 2)^{-a}
LawPtr make_power_tail_law(std::int64_t lo, double a);
// P(X > lo - 1 + k) = 1 / ((k+1) (1 + log(k+1))^beta)
LawPtr make_log_tail_law(std::int64_t lo, double beta);
// P(X > lo - 1 + k) = 1 / (1 + log(1+k)); pmf of order 1/(k log^2 k)
LawPtr make_inverse_log_tail_law(std::int64_t lo);
LawPtr make_survival_law(std::int64_t lo, std::function<double(std::int64_t)> surv, std::string name,
                         std::function<double(double)> tail_integral = {});

// "zipf2", "zeta(s)", "power(a)", "logtail(beta)", "invlog", "geom(p)", "table(p1;p2;...)"
LawPtr parse_law(const std::string& text, std::int64_t lo = 1);

}  // namespace mrw
