#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rbeim {

// Unevaluated sum of two doubles, hi = fl(hi + lo), |lo| <= ulp(hi)/2.
// Roughly doubles the significand (~32 decimal digits); all arithmetic is
// built from the error-free transformations below.
struct DDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DDouble() = default;
    constexpr DDouble(double h) : hi(h), lo(0.0) {}
    constexpr DDouble(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

namespace eft {

// s + e = a + b exactly, no assumption on magnitudes (6 flops).
inline DDouble two_sum(double a, double b) {
    double s = a + b;
    double bv = s - a;
    double e = (a - (s - bv)) + (b - bv);
    return {s, e};
}

// s + e = a + b exactly, requires |a| >= |b| (3 flops).
inline DDouble fast_two_sum(double a, double b) {
    double s = a + b;
    double e = b - (s - a);
    return {s, e};
}

// p + e = a * b exactly, via fused multiply-add (2 flops).
inline DDouble two_prod(double a, double b) {
    double p = a * b;
    double e = std::fma(a, b, -p);
    return {p, e};
}

} // namespace eft

inline DDouble operator+(DDouble a, DDouble b) {
    DDouble s = eft::two_sum(a.hi, b.hi);
    DDouble t = eft::two_sum(a.lo, b.lo);
    double c = s.lo + t.hi;
    DDouble v = eft::fast_two_sum(s.hi, c);
    double w = t.lo + v.lo;
    return eft::fast_two_sum(v.hi, w);
}

inline DDouble operator-(DDouble a) { return {-a.hi, -a.lo}; }
inline DDouble operator-(DDouble a, DDouble b) { return a + (-b); }

inline DDouble operator*(DDouble a, DDouble b) {
    DDouble p = eft::two_prod(a.hi, b.hi);
    double t = a.hi * b.lo + a.lo * b.hi;
    return eft::fast_two_sum(p.hi, p.lo + t);
}

// One Newton correction on the double quotient.
inline DDouble operator/(DDouble a, DDouble b) {
    double q1 = a.hi / b.hi;
    DDouble r = a - b * DDouble(q1);
    double q2 = (r.hi + r.lo) / (b.hi + b.lo);
    return eft::fast_two_sum(q1, q2);
}

inline DDouble& operator+=(DDouble& a, DDouble b) { a = a + b; return a; }
inline DDouble& operator-=(DDouble& a, DDouble b) { a = a - b; return a; }
inline DDouble& operator*=(DDouble& a, DDouble b) { a = a * b; return a; }
inline DDouble& operator/=(DDouble& a, DDouble b) { a = a / b; return a; }

inline bool operator==(DDouble a, DDouble b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator<(DDouble a, DDouble b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DDouble a, DDouble b) { return b < a; }

inline bool is_finite(DDouble a) { return std::isfinite(a.hi) && std::isfinite(a.lo); }
inline DDouble abs(DDouble a) { return (a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0)) ? -a : a; }

inline DDouble promote(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("promote: non-finite input");
    return {x, 0.0};
}
inline double demote(DDouble a) { return a.hi + a.lo; }

inline std::ostream& operator<<(std::ostream& os, DDouble a) {
    return os << "(" << a.hi << " + " << a.lo << ")";
}

} // namespace rbeim
