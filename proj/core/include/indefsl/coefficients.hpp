#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "indefsl/types.hpp"

namespace indefsl {

/// Smooth factor g1 of an order-form piece. Either a polynomial in powers of
/// x or an arbitrary callable; the derivative of a callable without an
/// explicit derivative is taken by central differences.
class SmoothFactor {
public:
    SmoothFactor();  // the constant 1

    static SmoothFactor polynomial(std::vector<double> coeffs);
    static SmoothFactor callable(std::function<double(double)> f,
                                 std::function<double(double)> df = {});

    double operator()(double x) const;
    double derivative(double x) const;

    bool is_polynomial() const { return !fn_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    std::vector<double> coeffs_;
    std::function<double(double)> fn_;
    std::function<double(double)> dfn_;
};

/// g(x) = |x - anchor|^order * factor(x) on [lo, hi].
struct CoefficientPiece {
    double lo = -1.0;
    double hi = 1.0;
    double anchor = 0.0;
    double order = 0.0;
    SmoothFactor factor;

    double value(double x) const;
    double derivative(double x) const;
};

/// A piecewise coefficient. Pieces are sorted, contiguous and cover [-1, 1].
struct CoefficientFunction {
    std::vector<CoefficientPiece> pieces;

    /// Piece used for x approached from `side`. At -1 and 1 the only
    /// available piece is returned whatever the side.
    const CoefficientPiece& piece_at(double x, Side side) const;

    double operator()(double x, Side side = Side::right) const;

    /// Interior breakpoints strictly inside (-1, 1), sorted.
    std::vector<double> breakpoints() const;

    static CoefficientFunction constant(double v);
};

enum class Coefficient { p, q, r };

const char* to_string(Coefficient c) noexcept;

struct CoefficientModel {
    CoefficientFunction p;
    CoefficientFunction q;
    CoefficientFunction r;
    /// Accept p with a nonzero order at anchors, provided both ends of a
    /// connection share it.
    bool allow_p_order = false;
    /// Accept r > 0 on all of [-1, 1]. Reference problems only: smooth
    /// connections and the W operators need x r(x) > 0.
    bool definite_weight = false;

    const CoefficientFunction& get(Coefficient c) const;

    /// Throws InvalidModel on gaps, overlaps, sign violations of p or r,
    /// or non-integrable orders.
    void validate() const;
};

struct OrderInfo {
    double order = 0.0;
    double g1_at_point = 0.0;
};

/// Order and one-sided smooth-factor value at point in {-1, 0, 1}. A piece
/// anchored elsewhere that is nonzero at point has order 0 there.
OrderInfo order_at(const CoefficientModel& m, Coefficient coeff, double point, Side side);

struct HalfNeighborhood {
    double point = 0.0;
    Side side = Side::right;
};

struct SmoothConnection {
    double a = 0.0;
    double b = 0.0;
    Side side_a = Side::right;
    Side side_b = Side::right;
    double alpha_prime = 1.0;  // signed slope of alpha, |alpha'| = 1
    double beta_prime = 1.0;   // signed slope of beta, |beta'| = scale
    double scale = 1.0;
    double eps = 0.125;
    double rho0 = 1.0;
    double tau = 1.0;
    double order_gap = 0.0;    // nu_b - nu_a
    double rho_energy = 0.0;   // int_0^eps |rho'|^2 p(alpha) dt

    double alpha(double t) const { return a + alpha_prime * t; }
    double beta(double t) const { return b + beta_prime * t; }

    /// rho(t) = |r(beta(t))| / |r(alpha(t))|, with rho(0) the limit.
    double rho(double t) const;
    /// rho'(t) for t > 0.
    double rho_prime(double t) const;
    /// varpi(t) = p(beta(t)) / p(alpha(t)).
    double varpi(double t) const;

    /// |beta'| rho(0), the quantity compared against |alpha'|.
    double transfer_gain() const { return std::abs(beta_prime) * rho0; }

    std::shared_ptr<const CoefficientModel> model;
};

SmoothConnection build_smooth_connection(const CoefficientModel& m, HalfNeighborhood from,
                                         HalfNeighborhood to, double scale);

struct ConditionReport {
    double point = 0.0;
    bool holds = false;
    std::optional<SmoothConnection> connection;
    double inequality_margin = 0.0;
    std::vector<std::string> diagnostics;
};

ConditionReport check_condition_at(const CoefficientModel& m, double point);

}  // namespace indefsl
