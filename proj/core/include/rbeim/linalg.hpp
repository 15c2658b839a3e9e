#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rbeim/precision.hpp"

namespace rbeim {

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Complex pair over a generic real scalar. Multiplication is the naive
// 4-multiply formula at every precision, for reproducibility across formats.
template <class T>
struct Cplx {
    T re{};
    T im{};
};

template <class T> inline Cplx<T> operator+(Cplx<T> a, Cplx<T> b) { return {a.re + b.re, a.im + b.im}; }
template <class T> inline Cplx<T> operator-(Cplx<T> a, Cplx<T> b) { return {a.re - b.re, a.im - b.im}; }
template <class T> inline Cplx<T> operator*(Cplx<T> a, Cplx<T> b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> inline Cplx<T>& operator+=(Cplx<T>& a, Cplx<T> b) { a = a + b; return a; }
template <class T> inline Cplx<T> conj(Cplx<T> a) { return {a.re, -a.im}; }

template <class T>
inline Cplx<T> to_cplx(std::complex<double> z) {
    return {to_scalar<T>(z.real()), to_scalar<T>(z.imag())};
}
template <class T>
inline std::complex<double> to_complexd(Cplx<T> z) {
    return {to_double<T>(z.re), to_double<T>(z.im)};
}

template <class T>
inline std::vector<Cplx<T>> to_cvec(const Vec& v) {
    std::vector<Cplx<T>> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = to_cplx<T>(v[i]);
    return out;
}

// sum_i conj(x_i) * y_i, accumulated in T.
template <class T>
inline Cplx<T> cdot(const std::vector<Cplx<T>>& x, const std::vector<Cplx<T>>& y) {
    Cplx<T> acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += conj(x[i]) * y[i];
    return acc;
}

// Bound data for the developed quadratic form, held in the active precision.
template <class T>
struct BoundData {
    T delta2{};                          // ||G00||_V^2
    std::vector<Cplx<T>> s;              // s_I = G00^H (A_k u_i)
    std::vector<std::vector<Cplx<T>>> S; // S_IJ = W_I^H (A_l u_j), Hermitian
};

// delta^2 + 2 Re(s^T xhat) + xhat^H S xhat, evaluated entirely in T.
template <class T>
inline T quad_form(const BoundData<T>& bd, const std::vector<Cplx<T>>& xhat) {
    const std::size_t m = xhat.size();
    Cplx<T> lin{};
    for (std::size_t i = 0; i < m; ++i) lin += bd.s[i] * xhat[i];
    Cplx<T> quad{};
    for (std::size_t i = 0; i < m; ++i) {
        Cplx<T> row{};
        for (std::size_t j = 0; j < m; ++j) row += bd.S[i][j] * xhat[j];
        quad += conj(xhat[i]) * row;
    }
    T two = to_scalar<T>(2.0);
    return bd.delta2 + two * lin.re + quad.re;
}

} // namespace rbeim
