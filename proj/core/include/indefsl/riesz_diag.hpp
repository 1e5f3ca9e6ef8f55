#pragma once

#include <string>
#include <vector>

#include "indefsl/bc_algebra.hpp"
#include "indefsl/kernel_ops.hpp"
#include "indefsl/spectral.hpp"

namespace indefsl {

/// [x, y] = int f conj(g) r + Delta x.z conj(y.z).
cplx krein_inner(const KreinVector& x, const KreinVector& y, const BoundaryTriple& t);

/// Same with |r| and |Delta|; the Hilbert structure behind the Riesz tests.
cplx hilbert_inner(const KreinVector& x, const KreinVector& y, const BoundaryTriple& t);

/// Fundamental symmetry: sgn(r) on functions, sgn(Delta) on the scalar.
KreinVector apply_J(const KreinVector& x, const BoundaryTriple& t);

struct GramAnalysis {
    std::vector<int> n_list;
    std::vector<double> kappa;
    std::vector<double> min_eig;
    std::vector<double> max_eig;
    /// Largest kappa_{2n} / kappa_n over listed pairs (n, 2n); falls back to
    /// kappa_last / kappa_first when the list holds no such pair.
    double growth_ratio = 1.0;
    bool bounded = false;  // kappa_last < 100 and growth_ratio < 1.5
    std::string verdict;
};

/// Hilbert Gram matrices of the leading n vectors for each n in n_list.
/// Throws SingularGram when a section is numerically rank deficient.
GramAnalysis gram_analysis(const std::vector<KreinVector>& vectors, const BoundaryTriple& t, std::vector<int> n_list);

/// Root vectors in diagnostic order: by |lambda| (ties by argument), each
/// chain in chain order after its eigenvector, each normalized in the
/// Hilbert norm.
std::vector<KreinVector> root_sequence(std::vector<SpectralDatum> data, const BoundaryTriple& t);

struct OrthogonalityReport {
    double max_offblock_pairing = 0.0;
    int pairs_checked = 0;
    int nonreal_count = 0;
    std::vector<int> krein_signs;  // real eigenvalues, in input order
    int positive = 0;
    int negative = 0;
    int neutral = 0;
};

OrthogonalityReport orthogonality_report(const std::vector<SpectralDatum>& data, const BoundaryTriple& t);

}  // namespace indefsl
