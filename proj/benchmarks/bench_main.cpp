#include <benchmark/benchmark.h>

#include "indefsl/bc_algebra.hpp"
#include "indefsl/kernel_ops.hpp"
#include "indefsl/riesz_diag.hpp"
#include "indefsl/spectral.hpp"

using namespace indefsl;

namespace {

CoefficientModel signed_weight(double nu)
{
    CoefficientModel m;
    m.p = CoefficientFunction::constant(1.0);
    m.q = CoefficientFunction::constant(0.0);
    CoefficientPiece l, r;
    l.lo = -1, l.hi = 0, l.order = nu, l.factor = SmoothFactor::polynomial({-1});
    r.lo = 0, r.hi = 1, r.order = nu, r.factor = SmoothFactor::polynomial({1});
    m.r.pieces = {l, r};
    return m;
}

BoundaryTriple triple()
{
    Row4 L, M, N;
    L << 1, 0, 0, 0;
    M << 0, 0, 0, 1;
    N << 0, 1, 0, 0;
    return validate_triple(L, M, N);
}

void BM_ValidateAndClassify(benchmark::State& s)
{
    Row4 L, M, N;
    L << 1, 0, 1, 0;
    M << 0, 0, 0, 1;
    N << 0, 1, 0, 0;
    for (auto _ : s) {
        const auto t = validate_triple(L, M, N);
        benchmark::DoNotOptimize(classify_theorem(reduce_and_split(t), t));
    }
}
BENCHMARK(BM_ValidateAndClassify);

void BM_CharDet(benchmark::State& s)
{
    const auto m = signed_weight(0.0);
    const auto t = triple();
    const double lam = static_cast<double>(s.range(0));
    for (auto _ : s) benchmark::DoNotOptimize(char_det(m, t, cplx(lam, 0.5)));
}
BENCHMARK(BM_CharDet)->Arg(10)->Arg(1000)->Arg(-1000)->Unit(benchmark::kMillisecond);

void BM_FindEigenvalues(benchmark::State& s)
{
    const auto m = signed_weight(0.0);
    const auto t = triple();
    const Rect r = weyl_region(m, static_cast<int>(s.range(0)));
    for (auto _ : s) benchmark::DoNotOptimize(find_eigenvalues(m, t, r));
}
BENCHMARK(BM_FindEigenvalues)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_RootSubspace(benchmark::State& s)
{
    const auto m = signed_weight(0.0);
    const auto t = triple();
    const auto ev = find_eigenvalues(m, t, weyl_region(m, 10));
    const auto grid = make_spectral_grid(m, 48);
    for (auto _ : s) benchmark::DoNotOptimize(root_subspace(m, t, ev.back().lambda, 1, grid));
}
BENCHMARK(BM_RootSubspace)->Unit(benchmark::kMillisecond);

void BM_BuildW0(benchmark::State& s)
{
    const auto m = signed_weight(1.0);
    const auto g = make_operator_grid(m, static_cast<int>(s.range(0)));
    const auto conn = *check_condition_at(m, 0.0).connection;
    for (auto _ : s) benchmark::DoNotOptimize(build_W0(g, conn));
}
BENCHMARK(BM_BuildW0)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_FemCrossCheck(benchmark::State& s)
{
    auto m = signed_weight(0.0);
    const auto t = triple();
    for (auto _ : s) benchmark::DoNotOptimize(fem_cross_check(m, t, static_cast<int>(s.range(0))));
}
BENCHMARK(BM_FemCrossCheck)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
