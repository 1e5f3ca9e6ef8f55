#pragma once

// Quadrature helpers shared by the grid builders. Internal header.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "indefsl/coefficients.hpp"

namespace indefsl::detail {

inline bool is_integer(double v) { return v == std::floor(v); }

/// int_a^b c(x) h(x) dx (or |c(x)| h(x) when take_abs is set), split at piece
/// breaks and anchors. Subintervals ending at a non-smooth anchor use
/// tanh-sinh, the rest Gauss-Legendre.
template <class H>
double integrate_piecewise(const CoefficientFunction& c, double a, double b, H h, bool take_abs)
{
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a, b};
    for (const auto& pc : c.pieces) {
        for (double v : {pc.lo, pc.hi, pc.anchor})
            if (v > a && v < b) cuts.push_back(v);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k], hi = cuts[k + 1];
        const auto& pc = c.piece_at(0.5 * (lo + hi), Side::right);
        auto f = [&](double x) {
            const double v = pc.value(x);
            return (take_abs ? std::abs(v) : v) * h(x);
        };
        const bool singular =
            !is_integer(pc.order) && pc.order != 0.0 && (pc.anchor == lo || pc.anchor == hi);
        if (singular) {
            boost::math::quadrature::tanh_sinh<double> ts;
            total += ts.integrate(f, lo, hi);
        } else {
            total += boost::math::quadrature::gauss<double, 15>::integrate(f, lo, hi);
        }
    }
    return total;
}

template <class H>
double integrate_abs(const CoefficientFunction& c, double a, double b, H h)
{
    return integrate_piecewise(c, a, b, h, true);
}

}  // namespace indefsl::detail
