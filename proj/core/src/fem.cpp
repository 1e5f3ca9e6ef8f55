#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "indefsl/error.hpp"
#include "indefsl/spectral.hpp"
#include "quad.hpp"

namespace indefsl {

// Piecewise-linear Galerkin pencil. Unknowns: nodal values f_0..f_n, then
// the end quasi-derivatives v- = (pf')(-1) and v+ = (pf')(1), so that
// b(f) = (f_0, f_n, v-, v+). Integrating -(pf')' against a hat g leaves
// v- g(-1) - v+ g(1); the two extra rows are L b = 0 and M b = lambda N b.
// The scalar component z = N b(f) is eliminated by the last row.
std::vector<cplx> fem_cross_check(const CoefficientModel& m, const BoundaryTriple& t, int n_elements)
{
    if (n_elements < 8) throw Error(ErrorKind::GridMismatch, "finite element check needs at least 8 elements");
    const int n = n_elements;
    const int dim = n + 3;
    const int vm = n + 1, vp = n + 2;
    const double h = 2.0 / n;
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(dim, dim);

    for (int e = 0; e < n; ++e) {
        const double a = -1.0 + e * h, b = (e + 1 == n) ? 1.0 : -1.0 + (e + 1) * h;
        const double len = b - a;
        auto left_hat = [&](double x) { return (b - x) / len; };
        auto right_hat = [&](double x) { return (x - a) / len; };
        const double pint = detail::integrate_piecewise(m.p, a, b, [](double) { return 1.0; }, false);
        const double q00 = detail::integrate_piecewise(m.q, a, b, [&](double x) { return left_hat(x) * left_hat(x); }, false);
        const double q01 = detail::integrate_piecewise(m.q, a, b, [&](double x) { return left_hat(x) * right_hat(x); }, false);
        const double q11 = detail::integrate_piecewise(m.q, a, b, [&](double x) { return right_hat(x) * right_hat(x); }, false);
        const double r00 = detail::integrate_piecewise(m.r, a, b, [&](double x) { return left_hat(x) * left_hat(x); }, false);
        const double r01 = detail::integrate_piecewise(m.r, a, b, [&](double x) { return left_hat(x) * right_hat(x); }, false);
        const double r11 = detail::integrate_piecewise(m.r, a, b, [&](double x) { return right_hat(x) * right_hat(x); }, false);
        const double s = pint / (len * len);
        K(e, e) += s + q00;
        K(e, e + 1) += -s + q01;
        K(e + 1, e) += -s + q01;
        K(e + 1, e + 1) += s + q11;
        B(e, e) += r00;
        B(e, e + 1) += r01;
        B(e + 1, e) += r01;
        B(e + 1, e + 1) += r11;
    }
    K(0, vm) += 1.0;
    K(n, vp) -= 1.0;

    const int cols[4] = {0, n, vm, vp};
    for (int k = 0; k < 4; ++k) {
        K(n + 1, cols[k]) += t.L(k);
        K(n + 2, cols[k]) += t.M(k);
        B(n + 2, cols[k]) += t.N(k);
    }

    // Shift-invert: (K - sigma B)^{-1} B x = mu x with lambda = sigma + 1/mu.
    // The shift is small and generic, away from typical spectra. Real data
    // take the cheaper real path.
    std::vector<cplx> out;
    const bool real = K.imag().isZero(0.0) && B.imag().isZero(0.0);
    auto collect = [&](const auto& mus, cplx sigma) {
        const double mu_max = mus.cwiseAbs().maxCoeff();
        if (!(mu_max > 0.0)) throw Error(ErrorKind::SingularPencil, "pencil has no finite eigenvalues");
        for (Eigen::Index k = 0; k < mus.size(); ++k) {
            const cplx mu = mus(k);
            if (std::abs(mu) <= 1e-12 * mu_max) continue;  // infinite eigenvalue of the pencil
            out.push_back(sigma + 1.0 / mu);
        }
    };
    if (real) {
        const double sigma = 0.0123;
        const Eigen::MatrixXd Kr = K.real(), Br = B.real();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Kr - sigma * Br);
        if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::SingularPencil, "shifted pencil is singular");
        Eigen::EigenSolver<Eigen::MatrixXd> es(lu.solve(Br), false);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::SingularPencil, "eigenvalue iteration did not converge");
        collect(es.eigenvalues(), sigma);
        // Restore exact conjugate symmetry and real axis values.
        for (auto& v : out)
            if (std::abs(v.imag()) <= 1e-10 * (1.0 + std::abs(v))) v.imag(0.0);
    } else {
        const cplx sigma(0.0123, 0.0371);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K - sigma * B);
        if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::SingularPencil, "shifted pencil is singular");
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(lu.solve(B), false);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::SingularPencil, "eigenvalue iteration did not converge");
        collect(es.eigenvalues(), sigma);
    }
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma < mb;
        return std::arg(a) < std::arg(b);
    });
    return out;
}

}  // namespace indefsl
