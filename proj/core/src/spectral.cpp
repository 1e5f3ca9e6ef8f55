#include "indefsl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "indefsl/error.hpp"
#include "quad.hpp"

namespace indefsl {

namespace odeint = boost::numeric::odeint;
using State = std::vector<cplx>;

namespace {

// ---- segments and substitutions -------------------------------------------

// One piece-homogeneous stretch of [-1, 1]. Near a singular end the variable
// x = s0 + h tau^m (or its mirror) flattens |x - e|^nu enough that the
// right-hand side times dx/dtau stays smooth.
struct Segment {
    double s0 = 0.0, s1 = 0.0;
    int m_left = 1, m_right = 1;
    const CoefficientPiece* p = nullptr;
    const CoefficientPiece* q = nullptr;
    const CoefficientPiece* r = nullptr;

    double h() const { return s1 - s0; }

    void map(double tau, double& x, double& jac) const
    {
        const double L = h();
        if (m_left > 1) {
            x = s0 + L * std::pow(tau, m_left);
            jac = m_left * L * std::pow(tau, m_left - 1);
        } else if (m_right > 1) {
            const double u = 1.0 - tau;
            x = s1 - L * std::pow(u, m_right);
            jac = m_right * L * std::pow(u, m_right - 1);
        } else {
            x = s0 + L * tau;
            jac = L;
        }
    }

    double tau_of(double x) const
    {
        const double L = h();
        if (m_left > 1) return std::pow(std::clamp((x - s0) / L, 0.0, 1.0), 1.0 / m_left);
        if (m_right > 1) return 1.0 - std::pow(std::clamp((s1 - x) / L, 0.0, 1.0), 1.0 / m_right);
        return std::clamp((x - s0) / L, 0.0, 1.0);
    }
};

// Worst local exponent at endpoint e among the coefficient pieces; the
// exponent of 1/p enters with a minus sign.
double end_exponent(const Segment& s, double e)
{
    double worst = 1.0;
    auto consider = [&](const CoefficientPiece* pc, double sign) {
        if (pc->anchor != e || pc->order == 0.0) return;
        const double v = sign * pc->order;
        if (v < 0.0 || !detail::is_integer(v)) worst = std::min(worst, v);
    };
    consider(s.r, 1.0);
    consider(s.q, 1.0);
    consider(s.p, -1.0);
    return worst;
}

int substitution_power(double exponent)
{
    if (exponent >= 1.0) return 1;
    int m = 2;
    while (m * (1.0 + exponent) < 2.0 - 1e-12) ++m;
    return m;
}

std::vector<Segment> make_segments(const CoefficientModel& m)
{
    std::vector<double> br{-1.0, 0.0, 1.0};
    for (const auto* f : {&m.p, &m.q, &m.r})
        for (double b : f->breakpoints()) br.push_back(b);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());

    std::vector<Segment> out;
    for (size_t k = 0; k + 1 < br.size(); ++k) {
        Segment s;
        s.s0 = br[k];
        s.s1 = br[k + 1];
        const double mid = 0.5 * (s.s0 + s.s1);
        s.p = &m.p.piece_at(mid, Side::right);
        s.q = &m.q.piece_at(mid, Side::right);
        s.r = &m.r.piece_at(mid, Side::right);
        const int ml = substitution_power(end_exponent(s, s.s0));
        const int mr = substitution_power(end_exponent(s, s.s1));
        if (ml > 1 && mr > 1) {
            Segment a = s, b = s;
            a.s1 = b.s0 = mid;
            a.m_left = ml;
            b.m_right = mr;
            out.push_back(a);
            out.push_back(b);
        } else {
            s.m_left = ml;
            s.m_right = mr;
            out.push_back(s);
        }
    }
    return out;
}

// ---- the integrated system --------------------------------------------------

// State: (u1, v1, u2, v2) followed by one (y, w) pair per chain level. Level
// l solves -(p y')' + q y - lambda r y = r g_{l-1} with zero data at -1,
// where g_0 = c_0 . (u1, u2) and g_l = y_l + c_l . (u1, u2).
struct System {
    const Segment* seg = nullptr;
    cplx lambda;
    const std::vector<Eigen::Vector2cd>* coeffs = nullptr;

    void operator()(const State& s, State& ds, double tau) const
    {
        double x, jac;
        seg->map(tau, x, jac);
        std::fill(ds.begin(), ds.end(), cplx(0.0));
        if (jac == 0.0) return;
        const double jp = jac / seg->p->value(x);
        const double jq = jac * seg->q->value(x);
        const double jr = jac * seg->r->value(x);
        const cplx pot = jq - lambda * jr;
        ds[0] = jp * s[1];
        ds[1] = pot * s[0];
        ds[2] = jp * s[3];
        ds[3] = pot * s[2];
        const size_t levels = (s.size() - 4) / 2;
        if (levels == 0) return;
        cplx prev = (*coeffs)[0](0) * s[0] + (*coeffs)[0](1) * s[2];
        for (size_t l = 1; l <= levels; ++l) {
            const size_t k = 2 + 2 * l;
            ds[k] = jp * s[k + 1];
            ds[k + 1] = pot * s[k] - jr * prev;
            if (l < levels) prev = s[k] + (*coeffs)[l](0) * s[0] + (*coeffs)[l](1) * s[2];
        }
    }
};

// ---- multiple shooting -------------------------------------------------------

// Each segment is cut into subintervals of bounded Liouville length
// int sqrt(|q|/p) + sqrt(|lambda| |r|/p), so no fundamental matrix grows by
// more than a modest factor and both solution modes stay resolved.
struct Sub {
    size_t seg = 0;
    double ta = 0.0, tb = 1.0;
    double xa = 0.0, xb = 0.0;
};

struct Mesh {
    std::vector<Segment> segments;
    std::vector<Sub> subs;
    size_t nodes() const { return subs.size() + 1; }
};

Mesh make_mesh(const CoefficientModel& m, cplx lambda)
{
    constexpr double kLength = 1.5;
    constexpr int kSamples = 64;
    Mesh mesh;
    mesh.segments = make_segments(m);
    const double sl = std::sqrt(std::abs(lambda));
    for (size_t s = 0; s < mesh.segments.size(); ++s) {
        const Segment& seg = mesh.segments[s];
        std::vector<double> cum(kSamples + 1, 0.0);
        for (int i = 0; i < kSamples; ++i) {
            double x, jac;
            seg.map((i + 0.5) / kSamples, x, jac);
            const double pv = seg.p->value(x);
            double dens = (std::sqrt(std::abs(seg.q->value(x)) / pv) + sl * std::sqrt(std::abs(seg.r->value(x)) / pv)) * jac;
            if (!std::isfinite(dens)) dens = 0.0;
            cum[i + 1] = cum[i] + dens / kSamples;
        }
        const int n = std::max(1, static_cast<int>(std::ceil(cum.back() / kLength)));
        double ta = 0.0;
        for (int k = 1; k <= n; ++k) {
            double tb = 1.0;
            if (k < n) {
                const double target = cum.back() * k / n;
                const size_t i = std::lower_bound(cum.begin(), cum.end(), target) - cum.begin();
                const double frac = (target - cum[i - 1]) / std::max(cum[i] - cum[i - 1], 1e-300);
                tb = (double(i - 1) + frac) / kSamples;
            }
            Sub sub;
            sub.seg = s;
            sub.ta = ta;
            sub.tb = tb;
            double jac;
            seg.map(ta, sub.xa, jac);
            seg.map(tb, sub.xb, jac);
            if (k == 1) sub.xa = seg.s0;
            if (k == n) sub.xb = seg.s1;
            mesh.subs.push_back(sub);
            ta = tb;
        }
    }
    return mesh;
}

// Grid nodes per subinterval as (tau, node index), sorted by tau. Left-half
// nodes at a shared boundary go to the subinterval on their left.
std::vector<std::vector<std::pair<double, int>>> assign_samples(const Mesh& mesh, const Grid* grid)
{
    std::vector<std::vector<std::pair<double, int>>> out(mesh.subs.size());
    if (!grid) return out;
    for (int i = 0; i < grid->size(); ++i) {
        const double x = grid->x[i];
        const bool left = grid->is_left(i);
        size_t pick = mesh.subs.size();
        for (size_t k = 0; k < mesh.subs.size(); ++k) {
            const Sub& s = mesh.subs[k];
            const bool in = left ? (x > s.xa || k == 0) && x <= s.xb : x >= s.xa && (x < s.xb || k + 1 == mesh.subs.size());
            if (in) {
                pick = k;
                break;
            }
        }
        if (pick == mesh.subs.size()) continue;
        const Sub& s = mesh.subs[pick];
        const double tau = std::clamp(mesh.segments[s.seg].tau_of(x), s.ta, s.tb);
        out[pick].emplace_back(tau, i);
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

struct SubRun {
    State end;
    std::vector<State> samples;  // aligned with the requested sample list
};

// Integrates one subinterval from unit fundamental data and zero chain data.
// coeffs[l] is the homogeneous coefficient vector of chain level l at the
// subinterval start; coeffs.size() chain levels are integrated.
SubRun run_sub(const Mesh& mesh, size_t k, cplx lambda, const std::vector<Eigen::Vector2cd>& coeffs,
               const std::vector<std::pair<double, int>>& wanted, const IntegratorOptions& opt)
{
    const Sub& sub = mesh.subs[k];
    const Segment& seg = mesh.segments[sub.seg];
    State s(4 + 2 * coeffs.size(), cplx(0.0));
    s[0] = 1.0;
    s[3] = 1.0;
    System sys{&seg, lambda, &coeffs};

    std::vector<double> times{sub.ta};
    for (const auto& w : wanted) times.push_back(w.first);
    times.push_back(sub.tb);
    std::vector<State> obs;
    using Stepper = odeint::runge_kutta_fehlberg78<State>;
    auto stepper = odeint::make_controlled<Stepper>(opt.abs_tol, opt.rel_tol);
    try {
        odeint::integrate_times(stepper, std::ref(sys), s, times.begin(), times.end(),
                                std::max(1e-3 * (sub.tb - sub.ta), 1e-12),
                                [&](const State& st, double) { obs.push_back(st); });
    } catch (const std::exception& e) {
        throw Error(ErrorKind::IntegratorFailure, e.what());
    }
    for (const auto& v : s)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::IntegratorFailure, "non-finite state");
    SubRun run;
    run.end = s;
    for (size_t i = 0; i < wanted.size(); ++i) run.samples.push_back(i + 1 < obs.size() ? obs[i + 1] : s);
    return run;
}

// Columns are the (u, pu') values of the two fundamental solutions.
Mat2 fundamental_matrix(const State& s)
{
    Mat2 y;
    y << s[0], s[2], s[1], s[3];
    return y;
}

std::vector<Mat2> transfer_steps(const Mesh& mesh, cplx lambda, const IntegratorOptions& opt)
{
    std::vector<Mat2> phi;
    for (size_t k = 0; k < mesh.subs.size(); ++k) phi.push_back(fundamental_matrix(run_sub(mesh, k, lambda, {}, {}, opt).end));
    return phi;
}

// Unknowns are the node values (u, pu') at x_0 = -1, ..., x_N = 1. Rows:
// y_{k+1} - Phi_k y_k = 0 for each subinterval, then L and M - lambda N
// applied to b = (y_0[0], y_N[0], y_0[1], y_N[1]). Block elimination with
// unit Wronskians shows det equals D(lambda) exactly.
Eigen::MatrixXcd shooting_matrix(const BoundaryTriple& t, const std::vector<Mat2>& phi, cplx lambda)
{
    const int n = static_cast<int>(phi.size());
    const int dim = 2 * (n + 1);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < n; ++k) {
        a.block(2 * k, 2 * k, 2, 2) = -phi[k];
        a.block(2 * k, 2 * k + 2, 2, 2) = Mat2::Identity();
    }
    const Row4 rows[2] = {t.L, t.M - lambda * t.N};
    for (int r = 0; r < 2; ++r) {
        a(2 * n + r, 0) = rows[r](0);
        a(2 * n + r, 1) = rows[r](2);
        a(2 * n + r, 2 * n) = rows[r](1);
        a(2 * n + r, 2 * n + 1) = rows[r](3);
    }
    return a;
}

Col4 boundary_of_nodes(const Eigen::VectorXcd& y)
{
    const Eigen::Index n = y.size() - 2;
    Col4 b;
    b << y(0), y(n), y(1), y(n + 1);
    return b;
}

}  // namespace

// ---- fundamental data and determinant --------------------------------------

FundamentalData integrate_fundamental(const CoefficientModel& m, cplx lambda, std::shared_ptr<const Grid> sample_grid,
                                      const IntegratorOptions& opt)
{
    const Mesh mesh = make_mesh(m, lambda);
    const auto wanted = assign_samples(mesh, sample_grid.get());
    FundamentalData fd;
    fd.lambda = lambda;
    if (sample_grid) {
        fd.u1 = GridFunction::zeros(sample_grid);
        fd.u2 = GridFunction::zeros(sample_grid);
        fd.pu1 = GridFunction::zeros(sample_grid);
        fd.pu2 = GridFunction::zeros(sample_grid);
    }
    Mat2 acc = Mat2::Identity();  // maps data at -1 to data at the current node
    for (size_t k = 0; k < mesh.subs.size(); ++k) {
        const SubRun run = run_sub(mesh, k, lambda, {}, wanted[k], opt);
        for (size_t j = 0; j < wanted[k].size(); ++j) {
            const Mat2 y = fundamental_matrix(run.samples[j]) * acc;
            const int i = wanted[k][j].second;
            fd.u1->values(i) = y(0, 0);
            fd.u2->values(i) = y(0, 1);
            fd.pu1->values(i) = y(1, 0);
            fd.pu2->values(i) = y(1, 1);
        }
        acc = fundamental_matrix(run.end) * acc;
    }
    for (int k = 0; k < 2; ++k) fd.B.col(k) << (k == 0 ? 1.0 : 0.0), acc(0, k), (k == 1 ? 1.0 : 0.0), acc(1, k);
    return fd;
}

Mat2 char_matrix(const BoundaryTriple& t, const Mat42& B, cplx lambda)
{
    Mat2 phi;
    phi.row(0) = t.L * B;
    phi.row(1) = (t.M - lambda * t.N) * B;
    return phi;
}

cplx char_det(const CoefficientModel& m, const BoundaryTriple& t, cplx lambda, const IntegratorOptions& opt)
{
    const Mesh mesh = make_mesh(m, lambda);
    return shooting_matrix(t, transfer_steps(mesh, lambda, opt), lambda).partialPivLu().determinant();
}


// ---- argument principle -----------------------------------------------------

namespace {

struct EdgeHit {};

// Integral of sqrt(|r|/p) over [-1, 1]; sets the oscillation rate of D in sqrt(lambda).
double liouville_length(const CoefficientModel& m)
{
    double len = 0.0;
    for (const auto& pc : m.r.pieces) {
        auto f = [&](double x) { return std::sqrt(std::abs(pc.value(x)) / m.p(x, Side::right)); };
        boost::math::quadrature::tanh_sinh<double> ts;
        len += ts.integrate(f, pc.lo, pc.hi);
    }
    return len;
}

// Pieces for one contour edge so that sqrt(z) moves by at most ~0.5/T per piece.
// Either branch of the root will do, which keeps edges crossing the cut cheap.
int edge_pieces(cplx a, cplx b, double T)
{
    constexpr int kProbe = 64;
    double travel = 0.0;
    cplx prev = std::sqrt(a);
    for (int k = 1; k <= kProbe; ++k) {
        const cplx cur = std::sqrt(a + (b - a) * (double(k) / kProbe));
        travel += std::min(std::abs(cur - prev), std::abs(cur + prev));
        prev = cur;
    }
    return std::clamp(static_cast<int>(std::ceil(2.0 * T * travel)), 8, 4096);
}

bool real_data(const BoundaryTriple& t)
{
    return t.L.imag().isZero(0.0) && t.M.imag().isZero(0.0) && t.N.imag().isZero(0.0);
}

class Searcher {
public:
    Searcher(const CoefficientModel& m, const BoundaryTriple& t, const SearchOptions& opt)
        : m_(m), t_(t), opt_(opt), T_(liouville_length(m))
    {
    }

    cplx D(cplx z)
    {
        const auto key = std::make_pair(z.real(), z.imag());
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const cplx v = char_det(m_, t_, z, opt_.integrator);
        cache_.emplace(key, v);
        return v;
    }

    int winding(const Rect& r)
    {
        const cplx c[4] = {{r.re_lo, r.im_lo}, {r.re_hi, r.im_lo}, {r.re_hi, r.im_hi}, {r.re_lo, r.im_hi}};
        double total = 0.0;
        for (int e = 0; e < 4; ++e) {
            const cplx a = c[e], b = c[(e + 1) % 4];
            const int kPieces = edge_pieces(a, b, T_);
            cplx za = a, Da = D(a);
            for (int k = 1; k <= kPieces; ++k) {
                const cplx zb = a + (b - a) * (double(k) / kPieces);
                const cplx Db = D(zb);
                total += phase(za, zb, Da, Db, 0);
                za = zb;
                Da = Db;
            }
        }
        const double w = total / (2.0 * std::acos(-1.0));
        const double rounded = std::round(w);
        if (std::abs(w - rounded) > 1e-3) throw EdgeHit{};
        return static_cast<int>(rounded);
    }

    // Winding with perturbed retries when the boundary passes too close to a zero.
    int robust_winding(Rect& r, bool may_grow)
    {
        for (int attempt = 0; attempt < 6; ++attempt) {
            try {
                return winding(r);
            } catch (const EdgeHit&) {
                const double dx = 1e-3 * (r.re_hi - r.re_lo) * (attempt + 1);
                const double dy = 1e-3 * (r.im_hi - r.im_lo) * (attempt + 1);
                if (may_grow) {
                    r.re_lo -= dx;
                    r.re_hi += 0.7 * dx;
                    r.im_lo -= 0.9 * dy;
                    r.im_hi += 0.8 * dy;
                } else {
                    throw;
                }
            }
        }
        throw Error(ErrorKind::CountMismatch, "winding number unstable under boundary perturbation");
    }

    cplx newton(cplx z, bool& ok)
    {
        ok = false;
        for (int it = 0; it < 60; ++it) {
            const double h = 1e-7 * (1.0 + std::abs(z));
            const cplx d = (D(z + h) - D(z - h)) / (2.0 * h);
            if (d == cplx(0.0)) return z;
            const cplx step = D(z) / d;
            z -= step;
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return z;
            if (std::abs(step) <= 1e-13 * (1.0 + std::abs(z))) {
                ok = true;
                return z;
            }
        }
        ok = true;  // limited by the accuracy of D; caller checks location
        return z;
    }

    // Zero of D' near z, used to polish a double root.
    cplx newton_derivative(cplx z)
    {
        for (int it = 0; it < 40; ++it) {
            const double h = 1e-4 * (1.0 + std::abs(z));
            const cplx dp = D(z + h), d0 = D(z), dm = D(z - h);
            const cplx d1 = (dp - dm) / (2.0 * h);
            const cplx d2 = (dp - 2.0 * d0 + dm) / (h * h);
            if (d2 == cplx(0.0)) break;
            const cplx step = d1 / d2;
            z -= step;
            if (std::abs(step) <= 1e-12 * (1.0 + std::abs(z))) break;
        }
        return z;
    }

    void search(const Rect& box, int w, int depth, std::vector<FoundEigenvalue>& out)
    {
        if (w <= 0) return;
        const cplx center(0.5 * (box.re_lo + box.re_hi), 0.5 * (box.im_lo + box.im_hi));
        const double width = box.re_hi - box.re_lo, height = box.im_hi - box.im_lo;
        const double size = std::max(width, height);
        const double tiny = opt_.cluster_rel * (1.0 + std::abs(center));

        if (w == 1 || size < tiny || depth > 80) {
            if (w == 1) {
                bool ok = false;
                const cplx z = newton(center, ok);
                const double sx = 0.05 * width + 1e-14, sy = 0.05 * height + 1e-14;
                const bool inside = z.real() >= box.re_lo - sx && z.real() <= box.re_hi + sx &&
                                    z.imag() >= box.im_lo - sy && z.imag() <= box.im_hi + sy;
                if ((ok && inside) || size < tiny || depth > 80) {
                    out.push_back({ok && inside ? z : center, 1});
                    return;
                }
            } else {
                out.push_back({w == 2 ? newton_derivative(center) : center, w});
                return;
            }
        }

        for (int attempt = 0; attempt < 4; ++attempt) {
            const double frac = 0.5 + 0.0137 * attempt;
            Rect a = box, b = box;
            if (width >= height) {
                a.re_hi = b.re_lo = box.re_lo + frac * width;
            } else {
                a.im_hi = b.im_lo = box.im_lo + frac * height;
            }
            int wa = 0, wb = 0;
            try {
                wa = winding(a);
                wb = winding(b);
            } catch (const EdgeHit&) {
                continue;
            }
            if (wa + wb != w) continue;
            search(a, wa, depth + 1, out);
            search(b, wb, depth + 1, out);
            return;
        }
        if (size < 1e3 * tiny) {
            out.push_back({center, w});
            return;
        }
        throw Error(ErrorKind::CountMismatch, "children windings do not add up to the parent");
    }

private:
    double phase(cplx z0, cplx z1, cplx D0, cplx D1, int depth)
    {
        if (D0 == cplx(0.0) || D1 == cplx(0.0)) throw EdgeHit{};
        const cplx zm = 0.5 * (z0 + z1);
        const cplx Dm = D(zm);
        if (Dm == cplx(0.0)) throw EdgeHit{};
        const double full = std::arg(D1 / D0);
        const double h1 = std::arg(Dm / D0), h2 = std::arg(D1 / Dm);
        const double quarter = std::acos(-1.0) / 4.0;
        if (std::abs(h1) < quarter && std::abs(h2) < quarter && std::abs(full - (h1 + h2)) < 1e-3) return h1 + h2;
        if (std::abs(z1 - z0) < 1e-11 * (1.0 + std::abs(zm)) || depth > 48) throw EdgeHit{};
        return phase(z0, zm, D0, Dm, depth + 1) + phase(zm, z1, Dm, D1, depth + 1);
    }

    const CoefficientModel& m_;
    const BoundaryTriple& t_;
    SearchOptions opt_;
    double T_;
    std::map<std::pair<double, double>, cplx> cache_;
};

bool by_modulus(const FoundEigenvalue& a, const FoundEigenvalue& b)
{
    const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
    if (std::abs(ma - mb) > 1e-12 * (1.0 + ma)) return ma < mb;
    return std::arg(a.lambda) < std::arg(b.lambda);
}

}  // namespace

int winding_number(const CoefficientModel& m, const BoundaryTriple& t, const Rect& region,
                   const IntegratorOptions& opt)
{
    SearchOptions so;
    so.integrator = opt;
    Searcher s(m, t, so);
    Rect r = region;
    return s.robust_winding(r, false);
}

std::vector<FoundEigenvalue> find_eigenvalues(const CoefficientModel& m, const BoundaryTriple& t, const Rect& region,
                                              const SearchOptions& opt)
{
    Searcher s(m, t, opt);
    Rect r = region;
    const int w = s.robust_winding(r, true);
    if (w > opt.max_count)
        throw Error(ErrorKind::Budget, "region holds " + std::to_string(w) + " eigenvalues, more than max_count");
    std::vector<FoundEigenvalue> raw;
    s.search(r, w, 0, raw);

    // Merge near-coincident zeros into clusters.
    std::sort(raw.begin(), raw.end(), by_modulus);
    std::vector<FoundEigenvalue> merged;
    for (const auto& e : raw) {
        bool joined = false;
        for (auto& g : merged)
            if (std::abs(g.lambda - e.lambda) <= opt.cluster_rel * (1.0 + std::abs(e.lambda))) {
                g.lambda = (g.lambda * double(g.alg_mult) + e.lambda * double(e.alg_mult)) / double(g.alg_mult + e.alg_mult);
                g.alg_mult += e.alg_mult;
                joined = true;
                break;
            }
        if (!joined) merged.push_back(e);
    }
    for (auto& g : merged)
        if (g.alg_mult == 2) g.lambda = s.newton_derivative(g.lambda);

    if (real_data(t)) {
        for (auto& g : merged)
            if (std::abs(g.lambda.imag()) <= 1e-7 * (1.0 + std::abs(g.lambda))) g.lambda.imag(0.0);
        std::vector<FoundEigenvalue> extra;
        for (const auto& g : merged) {
            if (g.lambda.imag() == 0.0) continue;
            const cplx c = std::conj(g.lambda);
            const bool present = std::any_of(merged.begin(), merged.end(), [&](const FoundEigenvalue& h) {
                return std::abs(h.lambda - c) <= 1e-6 * (1.0 + std::abs(c));
            });
            if (!present) extra.push_back({c, g.alg_mult});
        }
        merged.insert(merged.end(), extra.begin(), extra.end());
        // Make conjugate pairs exact mirror images.
        for (auto& g : merged) {
            if (g.lambda.imag() <= 0.0) continue;
            for (auto& h : merged)
                if (h.lambda.imag() < 0.0 && std::abs(h.lambda - std::conj(g.lambda)) <= 1e-6 * (1.0 + std::abs(g.lambda)))
                    h.lambda = std::conj(g.lambda);
        }
    }
    std::sort(merged.begin(), merged.end(), by_modulus);
    return merged;
}

Rect weyl_region(const CoefficientModel& m, int count)
{
    const double pi = std::acos(-1.0);
    const double lam = 1.2 * std::pow(pi * std::max(count, 1) / liouville_length(m), 2.0) + 1.0;
    return {-lam, lam, -std::sqrt(lam), std::sqrt(lam)};
}

// ---- root subspaces ---------------------------------------------------------

namespace {

double hilbert_norm(const KreinVector& v, const BoundaryTriple& t)
{
    return std::sqrt(hilbert_inner(v.f, v.f).real() + std::abs(t.delta) * std::norm(v.z));
}

Eigen::Vector2cd node_value(const Eigen::VectorXcd& y, size_t k)
{
    return Eigen::Vector2cd(y(2 * k), y(2 * k + 1));
}

// Chain coefficients per subinterval start, one entry per level.
std::vector<Eigen::Vector2cd> level_coeffs(const std::vector<Eigen::VectorXcd>& levels, size_t k)
{
    std::vector<Eigen::Vector2cd> c;
    for (const auto& y : levels) c.push_back(node_value(y, k));
    return c;
}

}  // namespace

SpectralDatum root_subspace(const CoefficientModel& m, const BoundaryTriple& t, cplx lambda, int alg_mult,
                            std::shared_ptr<const Grid> grid, const IntegratorOptions& opt)
{
    SpectralDatum sd;
    sd.lambda = lambda;
    sd.alg_mult = alg_mult;

    const Mesh mesh = make_mesh(m, lambda);
    const size_t nsub = mesh.subs.size();
    const Eigen::MatrixXcd a = shooting_matrix(t, transfer_steps(mesh, lambda, opt), lambda);
    const Eigen::Index dim = a.rows();

    // Row and column equilibration keep the rank decision scale free.
    Eigen::VectorXd rs = Eigen::VectorXd::Ones(dim), cs = Eigen::VectorXd::Ones(dim);
    Eigen::MatrixXcd as = a;
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double n = as.row(k).norm();
            if (n > 0.0) {
                as.row(k) /= n;
                rs(k) /= n;
            }
        }
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double n = as.col(k).norm();
            if (n > 0.0) {
                as.col(k) /= n;
                cs(k) /= n;
            }
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(as, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-6);
    sd.geo_mult = std::clamp(static_cast<int>(dim - svd.rank()), 1, 2);

    std::vector<Eigen::VectorXcd> heads;
    for (int k = 0; k < sd.geo_mult; ++k) {
        Eigen::VectorXcd v = cs.cast<cplx>().cwiseProduct(svd.matrixV().col(dim - 1 - k));
        heads.push_back(v / v.norm());
    }

    int remaining = alg_mult;
    for (size_t h = 0; h < heads.size() && remaining > 0; ++h) {
        const int heads_left = static_cast<int>(heads.size() - h);
        const int target_len = std::max(1, remaining - (heads_left - 1));
        std::vector<Eigen::VectorXcd> levels{heads[h]};
        for (int level = 1; level < target_len; ++level) {
            // Particular parts with zero data at every subinterval start.
            Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
            for (size_t k = 0; k < nsub; ++k) {
                const State end = run_sub(mesh, k, lambda, level_coeffs(levels, k), {}, opt).end;
                const size_t j = 2 + 2 * level;
                rhs(2 * k) = end[j];
                rhs(2 * k + 1) = end[j + 1];
            }
            rhs(dim - 1) = (t.N * boundary_of_nodes(levels.back()))(0);
            const Eigen::VectorXcd rhss = rs.cast<cplx>().cwiseProduct(rhs);
            const Eigen::VectorXcd sol = svd.solve(rhss);
            const double resid = (as * sol - rhss).norm() / std::max(rhss.norm(), 1e-300);
            if (resid > 1e-4) {
                if (sd.geo_mult == 1)
                    throw Error(ErrorKind::ChainInconsistency,
                                "associated vector equation is not solvable at the expected chain length");
                break;
            }
            levels.push_back(cs.cast<cplx>().cwiseProduct(sol));
        }

        // Sample every level on the grid.
        const auto wanted = assign_samples(mesh, grid.get());
        std::vector<GridFunction> fs(levels.size(), GridFunction::zeros(grid));
        for (size_t k = 0; k < nsub; ++k) {
            const auto coeffs = level_coeffs(levels, k);
            const SubRun run = run_sub(mesh, k, lambda, coeffs, wanted[k], opt);
            for (size_t j = 0; j < wanted[k].size(); ++j) {
                const State& st = run.samples[j];
                for (size_t l = 0; l < levels.size(); ++l) {
                    cplx v = coeffs[l](0) * st[0] + coeffs[l](1) * st[2];
                    if (l > 0) v += st[2 + 2 * l];
                    fs[l].values(wanted[k][j].second) = v;
                }
            }
        }
        std::vector<Col4> bs;
        for (const auto& y : levels) bs.push_back(boundary_of_nodes(y));

        // Hilbert norm 1 for the head; first nonzero entry of b(f) real positive.
        std::vector<KreinVector> chain;
        for (size_t l = 0; l < levels.size(); ++l) chain.push_back({fs[l], (t.N * bs[l])(0)});
        const double nrm = hilbert_norm(chain[0], t);
        cplx phase = 1.0;
        for (int k = 0; k < 4; ++k)
            if (std::abs(bs[0](k)) > 1e-10 * bs[0].norm()) {
                phase = std::abs(bs[0](k)) / bs[0](k);
                break;
            }
        const cplx s = phase / nrm;
        for (auto& v : chain) {
            v.f.values *= s;
            v.z *= s;
        }
        for (auto& b : bs) b *= s;

        for (size_t l = 0; l < bs.size(); ++l) {
            const double bn = std::max(bs[l].norm(), 1e-300);
            cplx rel = ((t.M - lambda * t.N) * bs[l])(0);
            if (l > 0) rel -= (t.N * bs[l - 1])(0);
            const double r = std::max(std::abs((t.L * bs[l])(0)), std::abs(rel)) / (bn * (1.0 + std::abs(lambda)));
            sd.boundary_residual = std::max(sd.boundary_residual, r);
        }
        remaining -= static_cast<int>(chain.size());
        sd.chains.push_back(std::move(chain));
    }
    if (remaining != 0)
        throw Error(ErrorKind::ChainInconsistency, "chain lengths do not add up to the algebraic multiplicity");

    const KreinVector& x0 = sd.chains.front().front();
    cplx k = t.delta * std::norm(x0.z);
    for (int i = 0; i < grid->size(); ++i) k += grid->w[i] * grid->sgn[i] * std::norm(x0.f.values(i));
    const double tol = 1e-7;
    sd.krein_sign = k.real() > tol ? 1 : (k.real() < -tol ? -1 : 0);
    return sd;
}

}  // namespace indefsl
