#pragma once

#include <cmath>

namespace mrw {

// unevaluated sum hi + lo; partial sums are carried in this form so that
// increments like -f and f + 2 cancel exactly
struct DD {
    double hi = 0.0;
    double lo = 0.0;
    constexpr DD() = default;
    constexpr DD(double h) : hi(h) {}
    constexpr DD(double h, double l) : hi(h), lo(l) {}
    double value() const { return hi + lo; }
};

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

inline void quick_two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    e = b - (s - a);
}

inline DD dd_add(const DD& a, const DD& b) {
    double s, e, t, f;
    two_sum(a.hi, b.hi, s, e);
    two_sum(a.lo, b.lo, t, f);
    e += t;
    quick_two_sum(s, e, s, e);
    e += f;
    quick_two_sum(s, e, s, e);
    if (!std::isfinite(s)) return DD(s, 0.0);
    return DD(s, e);
}

inline DD dd_neg(const DD& a) { return DD(-a.hi, -a.lo); }
inline DD dd_sub(const DD& a, const DD& b) { return dd_add(a, dd_neg(b)); }

inline DD dd_scale(const DD& a, double c) {
    double p = a.hi * c;
    double e = std::fma(a.hi, c, -p);
    double s, f;
    quick_two_sum(p, e + a.lo * c, s, f);
    return DD(s, f);
}

// Hurwitz zeta sum_{k>=0} (q+k)^{-s}, s > 1, q > 0
double hurwitz_zeta(double s, double q);

}  // namespace mrw
