#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "indefsl/error.hpp"
#include "indefsl/riesz_diag.hpp"
#include "indefsl/spectral.hpp"

using namespace indefsl;

namespace {

Row4 row(cplx a, cplx b, cplx c, cplx d)
{
    Row4 r;
    r << a, b, c, d;
    return r;
}

CoefficientModel definite()
{
    CoefficientModel m;
    m.p = CoefficientFunction::constant(1.0);
    m.q = CoefficientFunction::constant(0.0);
    m.r = CoefficientFunction::constant(1.0);
    m.definite_weight = true;
    return m;
}

CoefficientModel signed_power(double nu)
{
    CoefficientModel m = definite();
    m.definite_weight = false;
    CoefficientPiece l, r;
    l.lo = -1, l.hi = 0, l.order = nu, l.factor = SmoothFactor::polynomial({-1});
    r.lo = 0, r.hi = 1, r.order = nu, r.factor = SmoothFactor::polynomial({1});
    m.r.pieces = {l, r};
    return m;
}

BoundaryTriple dirichlet_eigen()
{
    return validate_triple(row(1, 0, 0, 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
}

// kappa solving -2k + tanh 2k + 2k sech^2 2k = 0: the Robin parameter m1 = k tanh 2k - k^2
// at which lambda = -k^2 is a double eigenvalue of u'' = -lambda u, u'(1) = 0,
// u'(-1) + m1 u(-1) = lambda u(-1).
double double_root_kappa()
{
    auto g = [](double k) {
        const double s = 1.0 / std::cosh(2 * k);
        return -2 * k + std::tanh(2 * k) + 2 * k * s * s;
    };
    double a = 0.3, b = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if ((g(a) > 0) == (g(m) > 0)) a = m; else b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("fundamental system in closed form")
{
    const auto m = definite();
    const FundamentalData f0 = integrate_fundamental(m, 0.0);
    const Col4 u2 = f0.B.col(1);
    CHECK(std::abs(u2(0)) < 1e-13);
    CHECK(std::abs(u2(1) - 2.0) < 1e-11);
    CHECK(std::abs(u2(2) - 1.0) < 1e-13);
    CHECK(std::abs(u2(3) - 1.0) < 1e-11);

    const double w = std::acos(-1.0) / 2;
    const FundamentalData f1 = integrate_fundamental(m, w * w);
    const Col4 u1 = f1.B.col(0);
    CHECK(std::abs(u1(0) - 1.0) < 1e-13);
    CHECK(std::abs(u1(1) + 1.0) < 1e-10);
    CHECK(std::abs(u1(2)) < 1e-13);
    CHECK(std::abs(u1(3)) < 1e-10);
}

TEST_CASE("sampled fundamental system")
{
    const auto m = definite();
    const auto grid = make_spectral_grid(m, 8);
    const double w = 1.3;
    const FundamentalData f = integrate_fundamental(m, w * w, grid);
    REQUIRE(f.u1);
    double worst = 0.0;
    for (int i = 0; i < grid->size(); ++i) {
        const double x = grid->x[i];
        worst = std::max(worst, std::abs(f.u1->values(i) - std::cos(w * (x + 1))));
        worst = std::max(worst, std::abs(f.pu2->values(i) - std::cos(w * (x + 1))));
        worst = std::max(worst, std::abs(f.u2->values(i) - std::sin(w * (x + 1)) / w));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("characteristic determinant against cos 2w - w sin 2w")
{
    const auto m = definite();
    const auto t = dirichlet_eigen();
    for (cplx lam : {cplx(0.7), cplx(25.0), cplx(-9.0), cplx(3.0, 2.0), cplx(400.0, -15.0)}) {
        const cplx w = std::sqrt(lam);
        const cplx ref = std::cos(2.0 * w) - w * std::sin(2.0 * w);
        CHECK(std::abs(char_det(m, t, lam) - ref) <= 1e-9 * std::abs(ref));
    }
    for (double lam : {0.5, 7.0, 111.0}) {
        const cplx d = char_det(m, t, lam);
        CHECK(std::abs(d.imag()) <= 1e-12 * std::max(1.0, std::abs(d)));
    }
}

TEST_CASE("eigenvalues of the definite problem match the scalar root finder")
{
    const auto m = definite();
    const auto t = dirichlet_eigen();
    const double top = std::pow(oracle::cot_root(5) + 0.3, 2.0);
    const auto ev = find_eigenvalues(m, t, {-4.0, top, -2.0, 2.0});
    REQUIRE(ev.size() == 6);
    for (int k = 0; k < 6; ++k) {
        const double ref = std::pow(oracle::cot_root(k), 2.0);
        CHECK(ev[k].alg_mult == 1);
        CHECK(ev[k].lambda.imag() == 0.0);
        CHECK(std::abs(ev[k].lambda.real() - ref) <= 1e-8 * ref);
    }
    CHECK(winding_number(m, t, {-10.0, -1.0, -3.0, 3.0}) == 0);
    CHECK(find_eigenvalues(m, t, {-10.0, -1.0, -3.0, 3.0}).empty());
}

TEST_CASE("Weyl rectangle holds about the requested number of eigenvalues")
{
    const auto m = definite();
    const Rect r = weyl_region(m, 10);
    CHECK(r.re_hi > std::pow(oracle::cot_root(9), 2.0));
    CHECK(r.re_lo == -r.re_hi);
    CHECK(r.im_hi == doctest::Approx(std::sqrt(r.re_hi)));
}

TEST_CASE("non-real eigenvalues of the indefinite problem come in conjugate pairs")
{
    const auto m = signed_power(1.0);
    const auto t = validate_triple(row(1, 0, 1, 0), row(0, 0, 0, 1), row(0, 1, 0, 0));
    const auto ev = find_eigenvalues(m, t, {-30.0, 30.0, -5.0, 5.0});
    int nonreal = 0;
    for (const auto& e : ev) {
        if (e.lambda.imag() == 0.0) continue;
        ++nonreal;
        const auto partner = std::find_if(ev.begin(), ev.end(), [&](const FoundEigenvalue& o) {
            return o.lambda == std::conj(e.lambda) && o.alg_mult == e.alg_mult;
        });
        CHECK(partner != ev.end());
        CHECK(std::abs(char_det(m, t, e.lambda)) < 1e-6);
    }
    CHECK(nonreal >= 2);
    CHECK(nonreal % 2 == 0);
}

TEST_CASE("simple eigenvalue: one chain of length one satisfying the boundary rows")
{
    const auto m = signed_power(1.0);
    const auto t = dirichlet_eigen();
    const auto ev = find_eigenvalues(m, t, {-10.0, 10.0, -1.0, 1.0});
    REQUIRE(!ev.empty());
    const auto grid = make_spectral_grid(m, 24);
    for (const auto& e : ev) {
        const SpectralDatum d = root_subspace(m, t, e.lambda, e.alg_mult, grid);
        REQUIRE(d.chains.size() == 1);
        CHECK(d.chains[0].size() == 1);
        CHECK(d.geo_mult == 1);
        CHECK(d.boundary_residual < 1e-8);
        CHECK(std::abs(hilbert_inner(d.chains[0][0], d.chains[0][0], t) - 1.0) < 1e-10);
        CHECK(d.krein_sign != 0);
    }
}

TEST_CASE("double eigenvalue tuned by the Robin parameter")
{
    const double k = double_root_kappa();
    const double m1 = k * std::tanh(2 * k) - k * k;
    const double lam = -k * k;
    const auto m = definite();
    const auto t = validate_triple(row(0, 0, 0, 1), row(m1, 0, 1, 0), row(1, 0, 0, 0));
    CHECK(t.delta == doctest::Approx(-1.0));

    const auto ev = find_eigenvalues(m, t, {-1.0, 0.0, -0.5, 0.5});
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].alg_mult == 2);
    CHECK(std::abs(ev[0].lambda - lam) <= 1e-6 * std::abs(lam));

    const SpectralDatum d = root_subspace(m, t, ev[0].lambda, 2, make_spectral_grid(m, 24));
    CHECK(d.geo_mult == 1);
    REQUIRE(d.chains.size() == 1);
    CHECK(d.chains[0].size() == 2);
    CHECK(d.krein_sign == 0);

    // The discretized pencil splits the double root into a close pair around it.
    const auto fe = fem_cross_check(m, t, 512);
    std::vector<cplx> near;
    for (const auto& v : fe)
        if (std::abs(v - lam) < 0.01) near.push_back(v);
    REQUIRE(near.size() == 2);
    CHECK(std::abs(0.5 * (near[0] + near[1]) - lam) < 1e-4);
}

TEST_CASE("finite element cross-check")
{
    const auto m = definite();
    const auto t = dirichlet_eigen();
    const auto fe = fem_cross_check(m, t, 256);
    const double l1 = std::pow(oracle::cot_root(0), 2.0);
    REQUIRE(!fe.empty());
    CHECK(std::abs(fe[0] - l1) <= 1e-4 * l1);
    CHECK_THROWS_AS(fem_cross_check(m, t, 4), Error);
}
