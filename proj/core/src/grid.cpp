#include "indefsl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "indefsl/error.hpp"
#include "quad.hpp"

namespace indefsl {

Anchor anchor_of(double point, Side side)
{
    if (point == -1.0 && side == Side::right) return Anchor::minus1;
    if (point == 1.0 && side == Side::left) return Anchor::plus1;
    if (point == 0.0) return side == Side::left ? Anchor::zero_minus : Anchor::zero_plus;
    throw Error(ErrorKind::DomainMismatch, "no ladder for this half-neighborhood");
}

double Ladder::distance(int k, int j) const
{
    return smax * std::ldexp(1.0, -k - 1) * (1.0 + static_cast<double>(j) / M);
}

namespace {

struct AnchorGeom {
    double point;
    double dir;  // +1 if the ladder grows to the right of the anchor
};

AnchorGeom geometry(Anchor a)
{
    switch (a) {
    case Anchor::minus1: return {-1.0, 1.0};
    case Anchor::zero_minus: return {0.0, -1.0};
    case Anchor::zero_plus: return {0.0, 1.0};
    case Anchor::plus1: return {1.0, -1.0};
    }
    return {0.0, 1.0};
}

// Hat-function shares of int |r| over [xl, xr]: first to the node at xl,
// second to the node at xr.
std::pair<double, double> element_shares(const CoefficientFunction& r, double xl, double xr)
{
    const double h = xr - xl;
    const double right = detail::integrate_abs(r, xl, xr, [&](double x) { return (x - xl) / h; });
    const double left = detail::integrate_abs(r, xl, xr, [&](double x) { return (xr - x) / h; });
    return {left, right};
}

}  // namespace

std::shared_ptr<const OperatorGrid> make_operator_grid(const CoefficientModel& m, int n_half)
{
    if (n_half < 64) throw Error(ErrorKind::GridMismatch, "operator grid needs at least 64 nodes per half");

    auto g = std::make_shared<OperatorGrid>();
    Ladder& lad = g->ladder;
    lad.M = std::max(2, static_cast<int>(0.75 * n_half / (2 * 24)));
    lad.K = std::min(24, static_cast<int>(0.75 * n_half / (2 * lad.M)));
    const int ladder_nodes = lad.K * lad.M + 1;
    const int n_mid = n_half - 2 - 2 * ladder_nodes;
    if (n_mid < 4) throw Error(ErrorKind::GridMismatch, "too few nodes for the middle region");

    g->n_half = n_half;
    const int total = 2 * n_half;
    g->x.assign(total, 0.0);
    g->w.assign(total, 0.0);
    g->sgn.assign(total, 0.0);
    for (auto& v : lad.index) v.assign(lad.K * lad.M, -1);

    // Places the ladder of anchor a starting at index `pos`, walking either
    // outward from the anchor (ascending distance) or inward.
    auto place_ladder = [&](Anchor a, int pos, bool outward) {
        const AnchorGeom ge = geometry(a);
        const int ai = static_cast<int>(a);
        std::vector<std::pair<int, int>> keys;
        for (int k = lad.K - 1; k >= 0; --k)
            for (int j = 0; j < lad.M; ++j) keys.emplace_back(k, j);
        if (!outward) std::reverse(keys.begin(), keys.end());
        auto put_top = [&] {
            g->x[pos] = ge.point + ge.dir * lad.smax;
            lad.top_index[ai] = pos++;
        };
        if (!outward) put_top();
        for (const auto& [k, j] : keys) {
            g->x[pos] = ge.point + ge.dir * lad.distance(k, j);
            lad.index[ai][k * lad.M + j] = pos++;
        }
        if (outward) put_top();
        return pos;
    };

    auto place_middle = [&](double lo, double hi, int pos) {
        const double h = (hi - lo) / (n_mid + 1);
        for (int i = 0; i < n_mid; ++i) g->x[pos++] = lo + (i + 1) * h;
        return pos;
    };

    // Left half.
    int pos = 0;
    g->x[pos] = -1.0;
    lad.slot_index[static_cast<int>(Anchor::minus1)] = pos++;
    pos = place_ladder(Anchor::minus1, pos, true);
    pos = place_middle(-1.0 + lad.smax, -lad.smax, pos);
    pos = place_ladder(Anchor::zero_minus, pos, false);
    g->x[pos] = 0.0;
    lad.slot_index[static_cast<int>(Anchor::zero_minus)] = pos++;
    // Right half.
    g->x[pos] = 0.0;
    lad.slot_index[static_cast<int>(Anchor::zero_plus)] = pos++;
    pos = place_ladder(Anchor::zero_plus, pos, true);
    pos = place_middle(lad.smax, 1.0 - lad.smax, pos);
    pos = place_ladder(Anchor::plus1, pos, false);
    g->x[pos] = 1.0;
    lad.slot_index[static_cast<int>(Anchor::plus1)] = pos++;

    for (int i = 0; i < total; ++i) g->sgn[i] = g->is_left(i) ? -1.0 : 1.0;

    // P1 hat weights over elements not touching a slot.
    for (int half = 0; half < 2; ++half) {
        const int first = half * n_half + 1, last = half * n_half + n_half - 2;
        for (int i = first; i < last; ++i) {
            const auto [wl, wr] = element_shares(m.r, g->x[i], g->x[i + 1]);
            g->w[i] += wl;
            g->w[i + 1] += wr;
        }
    }

    // The ladder is continued by one virtual node below its innermost node;
    // whatever |r| mass lies below is spread over the ladder by a common
    // factor so that weight ratios between ladder nodes stay self-similar.
    for (int ai = 0; ai < 4; ++ai) {
        const Anchor a = static_cast<Anchor>(ai);
        const AnchorGeom ge = geometry(a);
        const double d_in = lad.distance(lad.K - 1, 0);
        const double d_virtual = lad.distance(lad.K, lad.M - 1);
        const double xa = ge.point + ge.dir * d_virtual, xb = ge.point + ge.dir * d_in;
        const double lo = std::min(xa, xb), hi = std::max(xa, xb);
        const auto [sl, sr] = element_shares(m.r, lo, hi);
        const double share = ge.dir > 0 ? sr : sl;
        const int inner = lad.node(a, lad.K - 1, 0);
        g->w[inner] += share;

        const double near = std::min(ge.point, ge.point + ge.dir * d_in);
        const double far = std::max(ge.point, ge.point + ge.dir * d_in);
        const double below = detail::integrate_abs(m.r, near, far, [](double) { return 1.0; });
        const double lost = below - share;

        double sum = 0.0;
        for (int idx : lad.index[ai]) sum += g->w[idx];
        const double factor = 1.0 + lost / sum;
        for (int idx : lad.index[ai]) g->w[idx] *= factor;
    }
    return g;
}

// ---- spectral grid --------------------------------------------------------

namespace {

// Golub-Welsch nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        weights[k] = 2.0 * v * v;
    }
}

std::vector<double> half_breaks(const CoefficientModel& m, double lo, double hi, int panels)
{
    constexpr int kGraded = 12;
    std::vector<double> br{lo, hi};
    const double len = hi - lo;
    for (int k = 0; k < kGraded; ++k) {
        const double d = 0.5 * len * std::ldexp(1.0, -k);
        br.push_back(lo + d);
        br.push_back(hi - d);
    }
    for (const auto* f : {&m.p, &m.q, &m.r})
        for (double b : f->breakpoints())
            if (b > lo && b < hi) br.push_back(b);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    while (static_cast<int>(br.size()) - 1 < panels) {
        size_t widest = 0;
        for (size_t k = 1; k + 1 < br.size(); ++k)
            if (br[k + 1] - br[k] > br[widest + 1] - br[widest]) widest = k;
        br.insert(br.begin() + widest + 1, 0.5 * (br[widest] + br[widest + 1]));
    }
    return br;
}

}  // namespace

std::shared_ptr<const Grid> make_spectral_grid(const CoefficientModel& m, int panels, int order)
{
    if (panels < 4 || order < 2) throw Error(ErrorKind::GridMismatch, "spectral grid too small");
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);

    auto g = std::make_shared<Grid>();
    auto brl = half_breaks(m, -1.0, 0.0, panels);
    auto brr = half_breaks(m, 0.0, 1.0, panels);
    const int count = static_cast<int>(std::max(brl.size(), brr.size())) - 1;
    brl = half_breaks(m, -1.0, 0.0, count);
    brr = half_breaks(m, 0.0, 1.0, count);
    if (brl.size() != brr.size()) {
        const int more = static_cast<int>(std::max(brl.size(), brr.size())) - 1;
        brl = half_breaks(m, -1.0, 0.0, more);
        brr = half_breaks(m, 0.0, 1.0, more);
    }

    auto fill_half = [&](const std::vector<double>& br, Side side) {
        const double lo = br.front(), hi = br.back();
        const double sign = m.r(0.5 * (lo + hi), side) < 0.0 ? -1.0 : 1.0;
        g->x.push_back(lo);
        g->w.push_back(0.0);
        g->sgn.push_back(sign);
        for (size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], b = br[p + 1];
            for (int k = 0; k < order; ++k) {
                const double x = 0.5 * (a + b) + 0.5 * (b - a) * gx[k];
                g->x.push_back(x);
                const double rv = m.r(x, side);
                g->w.push_back(0.5 * (b - a) * gw[k] * std::abs(rv));
                g->sgn.push_back(rv < 0.0 ? -1.0 : 1.0);
            }
        }
        g->x.push_back(hi);
        g->w.push_back(0.0);
        g->sgn.push_back(sign);
    };
    fill_half(brl, Side::left);
    const int left = static_cast<int>(g->x.size());
    fill_half(brr, Side::right);
    if (static_cast<int>(g->x.size()) != 2 * left)
        throw Error(ErrorKind::GridMismatch, "spectral halves differ in size");
    g->n_half = left;
    return g;
}

}  // namespace indefsl
