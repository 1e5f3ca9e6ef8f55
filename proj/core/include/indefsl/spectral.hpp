#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "indefsl/bc_algebra.hpp"
#include "indefsl/coefficients.hpp"
#include "indefsl/kernel_ops.hpp"

namespace indefsl {

struct IntegratorOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
};

/// Fundamental system u1 (u(-1) = 1, (pu')(-1) = 0), u2 (u(-1) = 0, (pu')(-1) = 1).
struct FundamentalData {
    cplx lambda{0.0, 0.0};
    Mat42 B = Mat42::Zero();  // columns b(u1), b(u2)
    // Sampled on the grid passed to integrate_fundamental, if any.
    std::optional<GridFunction> u1, u2, pu1, pu2;
};

FundamentalData integrate_fundamental(const CoefficientModel& m, cplx lambda,
                                      std::shared_ptr<const Grid> sample_grid = nullptr,
                                      const IntegratorOptions& opt = {});

/// 2x2 matrix [L B; (M - lambda N) B].
Mat2 char_matrix(const BoundaryTriple& t, const Mat42& B, cplx lambda);

/// D(lambda) = det char_matrix.
cplx char_det(const CoefficientModel& m, const BoundaryTriple& t, cplx lambda,
              const IntegratorOptions& opt = {});

struct Rect {
    double re_lo = 0.0;
    double re_hi = 0.0;
    double im_lo = 0.0;
    double im_hi = 0.0;
};

struct FoundEigenvalue {
    cplx lambda;
    int alg_mult = 1;
};

struct SearchOptions {
    int max_count = 200;
    double cluster_rel = 1e-5;
    IntegratorOptions integrator;
};

/// Zeros of D inside `region` with multiplicities, conjugate-closed for
/// real data, sorted by |lambda| then argument.
std::vector<FoundEigenvalue> find_eigenvalues(const CoefficientModel& m, const BoundaryTriple& t,
                                              const Rect& region, const SearchOptions& opt = {});

/// Winding number of D around the boundary of `region`.
int winding_number(const CoefficientModel& m, const BoundaryTriple& t, const Rect& region,
                   const IntegratorOptions& opt = {});

struct SpectralDatum {
    cplx lambda;
    int alg_mult = 1;
    int geo_mult = 1;
    std::vector<std::vector<KreinVector>> chains;
    int krein_sign = 0;  // sign of [x0, x0] for the leading eigenvector, 0 if neutral
    double boundary_residual = 0.0;
};

/// Root vectors sampled on `grid` (typically a spectral grid).
SpectralDatum root_subspace(const CoefficientModel& m, const BoundaryTriple& t, cplx lambda, int alg_mult,
                            std::shared_ptr<const Grid> grid, const IntegratorOptions& opt = {});

/// Eigenvalues of the P1 finite-element pencil for A, sorted by |lambda|.
std::vector<cplx> fem_cross_check(const CoefficientModel& m, const BoundaryTriple& t, int n_elements = 1024);

/// Weyl-type guess for a rectangle holding roughly `count` eigenvalues.
Rect weyl_region(const CoefficientModel& m, int count);

}  // namespace indefsl
