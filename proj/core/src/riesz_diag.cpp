#include "indefsl/riesz_diag.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "indefsl/error.hpp"

namespace indefsl {

namespace {

void check_grids(const KreinVector& x, const KreinVector& y)
{
    if (x.f.grid != y.f.grid && (!x.f.grid || !y.f.grid || x.f.grid->x != y.f.grid->x))
        throw Error(ErrorKind::GridMismatch, "vectors live on different grids");
}

cplx weighted(const KreinVector& x, const KreinVector& y, bool krein)
{
    const Grid& g = *x.f.grid;
    cplx s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const double w = krein ? g.w[i] * g.sgn[i] : g.w[i];
        s += w * x.f.values(i) * std::conj(y.f.values(i));
    }
    return s;
}

bool is_real(cplx l)
{
    return l.imag() == 0.0;
}

}  // namespace

cplx krein_inner(const KreinVector& x, const KreinVector& y, const BoundaryTriple& t)
{
    check_grids(x, y);
    return weighted(x, y, true) + t.delta * x.z * std::conj(y.z);
}

cplx hilbert_inner(const KreinVector& x, const KreinVector& y, const BoundaryTriple& t)
{
    check_grids(x, y);
    return weighted(x, y, false) + std::abs(t.delta) * x.z * std::conj(y.z);
}

KreinVector apply_J(const KreinVector& x, const BoundaryTriple& t)
{
    KreinVector out = x;
    const Grid& g = *x.f.grid;
    for (int i = 0; i < g.size(); ++i) out.f.values(i) *= g.sgn[i];
    out.z *= t.delta < 0.0 ? -1.0 : 1.0;
    return out;
}

GramAnalysis gram_analysis(const std::vector<KreinVector>& vectors, const BoundaryTriple& t, std::vector<int> n_list)
{
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    n_list.erase(std::remove_if(n_list.begin(), n_list.end(),
                                [&](int n) { return n < 1 || n > static_cast<int>(vectors.size()); }),
                 n_list.end());

    GramAnalysis ga;
    if (n_list.empty()) {
        ga.verdict = "no sections";
        return ga;
    }
    const int nmax = n_list.back();
    Eigen::MatrixXcd G(nmax, nmax);
    for (int i = 0; i < nmax; ++i)
        for (int j = 0; j <= i; ++j) {
            G(i, j) = hilbert_inner(vectors[j], vectors[i], t);
            G(j, i) = std::conj(G(i, j));
        }

    for (int n : n_list) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G.topLeftCorner(n, n), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 1e-12 * hi))
            throw Error(ErrorKind::SingularGram, "Gram section of size " + std::to_string(n) + " is singular");
        ga.n_list.push_back(n);
        ga.min_eig.push_back(lo);
        ga.max_eig.push_back(hi);
        ga.kappa.push_back(hi / lo);
    }

    bool paired = false;
    double ratio = 0.0;
    for (size_t a = 0; a < ga.n_list.size(); ++a)
        for (size_t b = a + 1; b < ga.n_list.size(); ++b)
            if (ga.n_list[b] == 2 * ga.n_list[a]) {
                ratio = std::max(ratio, ga.kappa[b] / ga.kappa[a]);
                paired = true;
            }
    ga.growth_ratio = paired ? ratio : ga.kappa.back() / ga.kappa.front();
    ga.bounded = ga.kappa.back() < 100.0 && ga.growth_ratio < 1.5;
    ga.verdict = ga.bounded ? "consistent with Riesz basis (necessary condition only)" : "inconclusive/degrading";
    return ga;
}

std::vector<KreinVector> root_sequence(std::vector<SpectralDatum> data, const BoundaryTriple& t)
{
    std::stable_sort(data.begin(), data.end(), [](const SpectralDatum& a, const SpectralDatum& b) {
        const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
        if (std::abs(ma - mb) > 1e-12 * (1.0 + ma)) return ma < mb;
        return std::arg(a.lambda) < std::arg(b.lambda);
    });
    std::vector<KreinVector> out;
    for (const auto& d : data)
        for (const auto& chain : d.chains)
            for (const auto& v : chain) {
                KreinVector u = v;
                const double n = std::sqrt(hilbert_inner(u, u, t).real());
                if (n > 0.0) {
                    u.f.values /= n;
                    u.z /= n;
                }
                out.push_back(std::move(u));
            }
    return out;
}

OrthogonalityReport orthogonality_report(const std::vector<SpectralDatum>& data, const BoundaryTriple& t)
{
    OrthogonalityReport rep;
    for (const auto& d : data) {
        if (!is_real(d.lambda)) {
            rep.nonreal_count += d.alg_mult;
            continue;
        }
        rep.krein_signs.push_back(d.krein_sign);
        if (d.krein_sign > 0) ++rep.positive;
        else if (d.krein_sign < 0) ++rep.negative;
        else ++rep.neutral;
    }
    for (size_t j = 0; j < data.size(); ++j) {
        if (!is_real(data[j].lambda)) continue;
        for (size_t k = j + 1; k < data.size(); ++k) {
            if (!is_real(data[k].lambda) || data[k].lambda == data[j].lambda) continue;
            for (const auto& cj : data[j].chains)
                for (const auto& x : cj)
                    for (const auto& ck : data[k].chains)
                        for (const auto& y : ck) {
                            const double nx = std::sqrt(hilbert_inner(x, x, t).real());
                            const double ny = std::sqrt(hilbert_inner(y, y, t).real());
                            const double v = std::abs(krein_inner(x, y, t)) / (nx * ny);
                            rep.max_offblock_pairing = std::max(rep.max_offblock_pairing, v);
                            ++rep.pairs_checked;
                        }
        }
    }
    return rep;
}

}  // namespace indefsl
