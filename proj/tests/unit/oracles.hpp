#pragma once

// Test-side oracles: brute-force versions of quantities the library
// computes, written without touching library internals.

#include <array>
#include <cmath>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;
using Vec4 = std::array<cplx, 4>;

// Q written out entry by entry.
inline std::array<std::array<cplx, 4>, 4> Q()
{
    const cplx i(0.0, 1.0), o(0.0, 0.0);
    return {{{o, o, -i, o}, {o, o, o, i}, {i, o, o, o}, {o, -i, o, o}}};
}

// x Q y^* by explicit summation.
inline cplx qform(const Vec4& x, const Vec4& y)
{
    const auto q = Q();
    cplx s = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) s += x[a] * q[a][b] * std::conj(y[b]);
    return s;
}

// Delta = -i / (M Q N^*), from the definition of the scalar Krein block.
inline cplx delta(const Vec4& M, const Vec4& N)
{
    return cplx(0.0, -1.0) / qform(M, N);
}

// Positive roots w of cot(2w) = w, i.e. cos 2w - w sin 2w = 0, by bisection
// on (k pi/2, k pi/2 + pi/4) where the root of the k-th branch lies.
inline double cot_root(int k)
{
    auto f = [](double w) { return std::cos(2.0 * w) - w * std::sin(2.0 * w); };
    const double pi = std::acos(-1.0);
    double a = k * pi / 2.0 + 1e-15, b = k * pi / 2.0 + pi / 4.0;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if ((f(a) > 0) == (f(m) > 0)) a = m; else b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace oracle
