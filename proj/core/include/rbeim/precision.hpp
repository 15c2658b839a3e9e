#pragma once

#include <stdexcept>
#include <string>

#include "rbeim/double_double.hpp"

namespace rbeim {

enum class Precision { Single, Double, Extended };

struct PrecisionTag {
    Precision kind = Precision::Double;
    double eps = 5e-16;
};

// Unit roundoffs: float and the double-word format bracket the documented
// double-precision reference value 5e-16.
inline PrecisionTag precision_tag(Precision p) {
    switch (p) {
        case Precision::Single:   return {Precision::Single, 6e-8};
        case Precision::Double:   return {Precision::Double, 5e-16};
        case Precision::Extended: return {Precision::Extended, 1e-31};
    }
    throw std::logic_error("precision_tag: bad enum");
}

inline std::string precision_name(Precision p) {
    switch (p) {
        case Precision::Single:   return "single";
        case Precision::Double:   return "double";
        case Precision::Extended: return "extended";
    }
    throw std::logic_error("precision_name: bad enum");
}

inline Precision parse_precision(const std::string& s) {
    if (s == "single")   return Precision::Single;
    if (s == "double")   return Precision::Double;
    if (s == "extended") return Precision::Extended;
    throw std::invalid_argument("unknown precision '" + s + "' (single|double|extended)");
}

// Maps a Precision to the scalar type the generic kernels run on.
template <Precision P> struct scalar_of;
template <> struct scalar_of<Precision::Single>   { using type = float; };
template <> struct scalar_of<Precision::Double>   { using type = double; };
template <> struct scalar_of<Precision::Extended> { using type = DDouble; };

template <class T> inline T to_scalar(double x) { return static_cast<T>(x); }
template <> inline DDouble to_scalar<DDouble>(double x) { return {x, 0.0}; }

template <class T> inline double to_double(T x) { return static_cast<double>(x); }
template <> inline double to_double<DDouble>(DDouble x) { return demote(x); }

} // namespace rbeim
