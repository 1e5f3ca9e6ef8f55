#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Sparse>

#include "indefsl/bc_algebra.hpp"
#include "indefsl/coefficients.hpp"
#include "indefsl/grid.hpp"

namespace indefsl {

using SparseMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct GridFunction {
    std::shared_ptr<const Grid> grid;
    Eigen::VectorXcd values;

    static GridFunction zeros(std::shared_ptr<const Grid> g);
    template <class F>
    static GridFunction sample(std::shared_ptr<const Grid> g, F f)
    {
        GridFunction out = zeros(g);
        for (int i = 0; i < g->size(); ++i) out.values(i) = f(g->x[i]);
        return out;
    }
};

struct KreinVector {
    GridFunction f;
    cplx z{0.0, 0.0};
};

/// Weighted inner product sum_i w_i f_i conj(g_i), i.e. int f conj(g) |r|.
cplx hilbert_inner(const GridFunction& f, const GridFunction& g);

/// Discrete int p |f'|^2 from first differences, slots included.
double energy_p(const CoefficientModel& m, const GridFunction& f);

enum class CutoffKind { phi, phi0, phi1 };

double smoothstep(double u);
/// 1 on [0, eps/2], 0 on [eps, 1].
double cutoff_phi(double t, double eps);
/// Even, 1 at 0, 0 for |x| >= 1/2.
double cutoff_phi0(double x);
/// Even, 0 for |x| <= 1/2, 1 for |x| >= 3/4.
double cutoff_phi1(double x);

/// Cutoff sampled on the grid; phi is evaluated at t = |x|.
GridFunction make_cutoff(std::shared_ptr<const Grid> g, CutoffKind kind, double eps = 0.125);

enum class PKind { P0minus, P0plus, P1minus, P1plus };

struct OperatorRep {
    std::shared_ptr<const Grid> grid;
    SparseMat mat;                  // grid DOFs, plus one trailing row/column if scalar_block
    bool scalar_block = false;
    std::string recipe;
    // Provenance used by the combinators.
    std::optional<double> endpoint;  // -1 or +1 for endpoint operators
    cplx mu{0.0, 0.0};
    double gamma_residual = 0.0;

    int dofs() const { return static_cast<int>(mat.rows()); }
    GridFunction apply(const GridFunction& f) const;
    KreinVector apply(const KreinVector& v) const;
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(mat); }
};

/// Multiplication by phi0 or phi1 on one half, zero elsewhere.
GridFunction apply_P(PKind which, const GridFunction& f);

/// S (adjoint = false) or S* (adjoint = true) of a connection on an
/// operator grid. Raises UnsupportedScale unless the scale is a power of two
/// whose images fit the ladders.
GridFunction apply_transfer(const SmoothConnection& conn, const GridFunction& f, bool adjoint);

/// Matrices of S and of its adjoint on the full DOF space.
std::pair<SparseMat, SparseMat> transfer_matrices(const OperatorGrid& g, const SmoothConnection& conn);

enum class X0Case { MM, MP, PM, PP };

const char* to_string(X0Case c) noexcept;
X0Case case_of(const SmoothConnection& conn);

struct GammaPair {
    cplx g1;
    cplx g2;
    double residual = 0.0;
};

/// gamma1 |a'| + gamma2 = 1, conj(gamma1) B + conj(gamma2) = target, B = |b'| rho(0).
GammaPair solve_gamma(double alpha_abs, double gain, cplx target);

struct XPair {
    OperatorRep X;
    OperatorRep Xstar;
    GammaPair gamma;
};

XPair build_X0(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn, X0Case c);
OperatorRep build_W0(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn);

XPair build_X_endpoint(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn, cplx mu);
OperatorRep build_W_endpoint(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn,
                             cplx mu);

enum class W01Side { minus, plus };

OperatorRep build_W01(const OperatorRep& w0, const OperatorRep& w_end, W01Side side);

struct WParts {
    std::optional<SmoothConnection> at0;
    std::optional<SmoothConnection> at_minus1;
    std::optional<SmoothConnection> at_plus1;
};

OperatorRep build_full_W(std::shared_ptr<const OperatorGrid> g, const ClassificationReport& report,
                         const BoundaryTriple& t, const WParts& parts);

struct WVerification {
    int samples = 0;
    double min_krein_ratio = 0.0;   // min [Wx,x] / ||x||^2 over samples
    bool krein_positive = false;
    double condition_number = 0.0;
    double min_psd_eigenvalue = 0.0;  // of the symmetric part of J W - I
    double form_domain_residual = 0.0;
    double continuity_residual = 0.0;  // |(Wf)(0+) - (Wf)(0-)| relative
    bool passed = false;
};

struct WSpectrum {
    double min_psd_eigenvalue = 0.0;  // smallest eigenvalue of the symmetric part of J W - I
    double condition_number = 0.0;    // ||W|| ||W^-1|| in the weighted norm, scalar block included
};

/// Both quantities come from one Hermitian eigen-solve of the symmetrized
/// W^{1/2} (J W) W^{-1/2} restricted to positive-weight DOFs.
WSpectrum w_spectrum(const OperatorRep& w);

WVerification verify_W(const OperatorRep& w, const EchelonSplit& split, const BoundaryTriple& t,
                       int samples = 16, std::uint64_t seed = 1);

}  // namespace indefsl
