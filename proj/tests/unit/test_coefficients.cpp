#include <cmath>

#include "doctest.h"

#include "indefsl/coefficients.hpp"
#include "indefsl/error.hpp"

using namespace indefsl;

namespace {

CoefficientPiece piece(double lo, double hi, double anchor, double order, std::vector<double> poly)
{
    CoefficientPiece p;
    p.lo = lo;
    p.hi = hi;
    p.anchor = anchor;
    p.order = order;
    p.factor = SmoothFactor::polynomial(std::move(poly));
    return p;
}

// r = sgn(x) |x|^nu, p = 1, q = 0.
CoefficientModel signed_power(double nu)
{
    CoefficientModel m;
    m.p = CoefficientFunction::constant(1.0);
    m.q = CoefficientFunction::constant(0.0);
    m.r.pieces = {piece(-1, 0, 0, nu, {-1}), piece(0, 1, 0, nu, {1})};
    return m;
}

}  // namespace

TEST_CASE("order-form pieces evaluate as |x - a|^nu g(x)")
{
    const auto pc = piece(0, 1, 0, 0.5, {1, 2});
    CHECK(pc.value(0.25) == doctest::Approx(0.5 * 1.5));
    CHECK(pc.derivative(0.25) == doctest::Approx(0.5 / 0.5 * 1.5 + 0.5 * 2.0));
    const auto f = SmoothFactor::callable([](double x) { return std::exp(x); });
    CHECK(f.derivative(0.3) == doctest::Approx(std::exp(0.3)).epsilon(1e-7));
    CHECK_FALSE(f.is_polynomial());
}

TEST_CASE("one-sided lookup and breakpoints")
{
    const auto m = signed_power(1.0);
    CHECK(m.r(0.0, Side::left) == 0.0);
    CHECK(m.r(-0.5, Side::left) == doctest::Approx(-0.5));
    CHECK(m.r.breakpoints() == std::vector<double>{0.0});
    CHECK(CoefficientFunction::constant(2.0).breakpoints().empty());
}

TEST_CASE("order_at")
{
    SUBCASE("r = x on [0, 1] at 0 from the right")
    {
        const auto o = order_at(signed_power(1.0), Coefficient::r, 0.0, Side::right);
        CHECK(o.order == 1.0);
        CHECK(o.g1_at_point == doctest::Approx(1.0));
    }
    SUBCASE("sign of a square-root weight sits in the smooth factor")
    {
        const auto o = order_at(signed_power(0.5), Coefficient::r, 0.0, Side::left);
        CHECK(o.order == 0.5);
        CHECK(o.g1_at_point == doctest::Approx(-1.0));
    }
    SUBCASE("p = 2 + x at -1")
    {
        auto m = signed_power(1.0);
        m.p.pieces = {piece(-1, 1, 0, 0, {2, 1})};
        const auto o = order_at(m, Coefficient::p, -1.0, Side::right);
        CHECK(o.order == 0.0);
        CHECK(o.g1_at_point == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(order_at(signed_power(1.0), Coefficient::r, 0.5, Side::left), Error);
}

TEST_CASE("validation of coefficient models")
{
    signed_power(1.0).validate();
    auto gap = signed_power(1.0);
    gap.r.pieces[1].lo = 0.1;
    CHECK_THROWS_AS(gap.validate(), Error);

    auto wrong_sign = signed_power(1.0);
    wrong_sign.r.pieces[0].factor = SmoothFactor::polynomial({1});
    CHECK_THROWS_AS(wrong_sign.validate(), Error);

    CoefficientModel definite;
    definite.p = definite.q = CoefficientFunction::constant(1.0);
    definite.r = CoefficientFunction::constant(1.0);
    CHECK_THROWS_AS(definite.validate(), Error);
    definite.definite_weight = true;
    definite.validate();
    CHECK_THROWS_AS(check_condition_at(definite, 0.0), Error);

    auto bad_p = signed_power(1.0);
    bad_p.p = CoefficientFunction::constant(-1.0);
    CHECK_THROWS_AS(bad_p.validate(), Error);
}

TEST_CASE("smooth connection across the turning point with c = 2")
{
    const auto m = signed_power(1.0);
    const auto c = build_smooth_connection(m, {0.0, Side::left}, {0.0, Side::right}, 2.0);
    CHECK(c.alpha_prime == -1.0);
    CHECK(c.beta_prime == 2.0);
    CHECK(c.rho0 == doctest::Approx(2.0));
    for (double t : {0.01, 0.05, 0.1}) {
        CHECK(c.rho(t) == doctest::Approx(2.0));
        CHECK(c.varpi(t) == doctest::Approx(1.0));
    }
    CHECK(c.eps == doctest::Approx(0.125));
    CHECK(c.transfer_gain() == doctest::Approx(4.0));
}

TEST_CASE("identity connection has unit parameters")
{
    const auto c = build_smooth_connection(signed_power(1.0), {0.0, Side::right}, {0.0, Side::right}, 1.0);
    CHECK(c.alpha_prime == 1.0);
    CHECK(c.beta_prime == 1.0);
    CHECK(c.rho0 == doctest::Approx(1.0));
    CHECK(std::abs(c.alpha_prime) - c.transfer_gain() == doctest::Approx(0.0));
}

TEST_CASE("a jump connected to a linear zero gives rho(0) = 0")
{
    // r = -1 on (-1, 0), r = x on (0, 1): order 0 at 0- and order 1 at 0+.
    CoefficientModel m = signed_power(1.0);
    m.r.pieces[0] = piece(-1, 0, 0, 0, {-1});
    const auto c = build_smooth_connection(m, {0.0, Side::left}, {0.0, Side::right}, 2.0);
    CHECK(c.order_gap == 1.0);
    CHECK(c.rho0 == 0.0);
    // rho(t) = 2t, rho' constant.
    CHECK(c.rho(0.05) == doctest::Approx(0.1));
    CHECK(c.rho_prime(0.02) == doctest::Approx(c.rho_prime(0.08)));
    // The reverse direction makes rho blow up.
    CHECK_THROWS_AS(build_smooth_connection(m, {0.0, Side::right}, {0.0, Side::left}, 2.0), Error);
}

TEST_CASE("condition at 0 for signed powers: margin 2^(nu+1) - 1")
{
    for (double nu : {0.5, 1.0, 2.0}) {
        const auto rep = check_condition_at(signed_power(nu), 0.0);
        REQUIRE(rep.holds);
        CHECK(rep.inequality_margin == doctest::Approx(std::pow(2.0, nu + 1.0) - 1.0).epsilon(1e-10));
        CHECK(rep.connection->scale != 1.0);
    }
}

TEST_CASE("condition at the endpoints")
{
    // r = x |x + 1| on (-1, 0) and x |x - 1| on (0, 1): order 1 at both ends.
    CoefficientModel m = signed_power(1.0);
    m.r.pieces = {piece(-1, 0, -1, 1, {0, 1}), piece(0, 1, 1, 1, {0, 1})};
    m.validate();
    const auto rep = check_condition_at(m, -1.0);
    REQUIRE(rep.holds);
    CHECK(rep.connection->transfer_gain() == doctest::Approx(4.0));
    CHECK(rep.inequality_margin == doctest::Approx(3.0));
    CHECK_FALSE(check_condition_at(m, 0.5).holds);
}
