#include "indefsl/kernel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "indefsl/error.hpp"

namespace indefsl {

using Triplet = Eigen::Triplet<cplx>;

// ---- grid functions -------------------------------------------------------

GridFunction GridFunction::zeros(std::shared_ptr<const Grid> g)
{
    GridFunction f;
    f.values = Eigen::VectorXcd::Zero(g->size());
    f.grid = std::move(g);
    return f;
}

cplx hilbert_inner(const GridFunction& f, const GridFunction& g)
{
    if (f.grid != g.grid) throw Error(ErrorKind::GridMismatch, "inner product across grids");
    cplx acc = 0.0;
    for (int i = 0; i < f.grid->size(); ++i) acc += f.grid->w[i] * f.values(i) * std::conj(g.values(i));
    return acc;
}

double energy_p(const CoefficientModel& m, const GridFunction& f)
{
    const Grid& g = *f.grid;
    double acc = 0.0;
    for (int half = 0; half < 2; ++half) {
        const Side side = half == 0 ? Side::left : Side::right;
        for (int i = half * g.n_half; i + 1 < (half + 1) * g.n_half; ++i) {
            const double h = g.x[i + 1] - g.x[i];
            if (!(h > 0.0)) continue;
            const double xm = 0.5 * (g.x[i] + g.x[i + 1]);
            acc += m.p(xm, side) * std::norm(f.values(i + 1) - f.values(i)) / h;
        }
    }
    return acc;
}

// ---- cutoffs --------------------------------------------------------------

double smoothstep(double u)
{
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

double cutoff_phi(double t, double eps)
{
    return 1.0 - smoothstep((t - 0.5 * eps) / (0.5 * eps));
}

double cutoff_phi0(double x) { return 1.0 - smoothstep(std::abs(x) / 0.5); }

double cutoff_phi1(double x) { return smoothstep((std::abs(x) - 0.5) / 0.25); }

GridFunction make_cutoff(std::shared_ptr<const Grid> g, CutoffKind kind, double eps)
{
    if (kind == CutoffKind::phi && !(eps > 0.0 && eps <= 0.125))
        throw Error(ErrorKind::BadEps, "phi needs 0 < eps <= 1/8");
    return GridFunction::sample(std::move(g), [&](double x) -> cplx {
        switch (kind) {
        case CutoffKind::phi: return cutoff_phi(std::abs(x), eps);
        case CutoffKind::phi0: return cutoff_phi0(x);
        case CutoffKind::phi1: return cutoff_phi1(x);
        }
        return 0.0;
    });
}

// ---- operator application -------------------------------------------------

GridFunction OperatorRep::apply(const GridFunction& f) const
{
    if (f.grid != grid) throw Error(ErrorKind::GridMismatch, "operator and function live on different grids");
    GridFunction out = GridFunction::zeros(grid);
    if (scalar_block) {
        Eigen::VectorXcd ext = Eigen::VectorXcd::Zero(mat.cols());
        ext.head(f.values.size()) = f.values;
        out.values = (mat * ext).head(f.values.size());
    } else {
        out.values = mat * f.values;
    }
    return out;
}

KreinVector OperatorRep::apply(const KreinVector& v) const
{
    if (v.f.grid != grid) throw Error(ErrorKind::GridMismatch, "operator and vector live on different grids");
    const int n = static_cast<int>(v.f.values.size());
    KreinVector out;
    out.f = GridFunction::zeros(grid);
    if (!scalar_block) {
        out.f.values = mat * v.f.values;
        out.z = v.z;
        return out;
    }
    Eigen::VectorXcd ext(n + 1);
    ext.head(n) = v.f.values;
    ext(n) = v.z;
    const Eigen::VectorXcd r = mat * ext;
    out.f.values = r.head(n);
    out.z = r(n);
    return out;
}

namespace {

const OperatorGrid& operator_grid(const std::shared_ptr<const Grid>& g)
{
    const auto* og = dynamic_cast<const OperatorGrid*>(g.get());
    if (!og) throw Error(ErrorKind::GridMismatch, "an operator grid is required");
    return *og;
}

bool on_left(PKind k) { return k == PKind::P0minus || k == PKind::P1minus; }

SparseMat p_matrix(const Grid& g, PKind which)
{
    std::vector<Triplet> trip;
    const bool left = on_left(which);
    const bool zero_cut = which == PKind::P0minus || which == PKind::P0plus;
    for (int i = 0; i < g.size(); ++i) {
        if (g.is_left(i) != left) continue;
        const double v = zero_cut ? cutoff_phi0(g.x[i]) : cutoff_phi1(g.x[i]);
        if (v != 0.0) trip.emplace_back(i, i, v);
    }
    SparseMat m(g.size(), g.size());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SparseMat identity(int n)
{
    SparseMat m(n, n);
    m.setIdentity();
    return m;
}

SparseMat j_matrix(const Grid& g)
{
    std::vector<Triplet> trip;
    for (int i = 0; i < g.size(); ++i) trip.emplace_back(i, i, g.sgn[i]);
    SparseMat m(g.size(), g.size());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void require_support(const GridFunction& f, bool left, const char* what)
{
    const Grid& g = *f.grid;
    for (int i = 0; i < g.size(); ++i)
        if (g.is_left(i) != left && f.values(i) != cplx(0.0))
            throw Error(ErrorKind::DomainMismatch, std::string(what) + ": input not supported on the required half");
}

bool half_is_left(double point, Side side)
{
    return point < 0.0 || (point == 0.0 && side == Side::left);
}

}  // namespace

GridFunction apply_P(PKind which, const GridFunction& f)
{
    require_support(f, on_left(which), "apply_P");
    GridFunction out = GridFunction::zeros(f.grid);
    out.values = p_matrix(*f.grid, which) * f.values;
    return out;
}

std::pair<SparseMat, SparseMat> transfer_matrices(const OperatorGrid& g, const SmoothConnection& conn)
{
    const Ladder& lad = g.ladder;
    const double c = conn.scale;
    const int m = static_cast<int>(std::lround(std::log2(c)));
    if (std::abs(std::ldexp(1.0, m) - c) > 1e-12 * c)
        throw Error(ErrorKind::UnsupportedScale, "transfer scale must be a power of two");
    if (conn.eps > lad.smax || c * conn.eps > lad.smax * (1.0 + 1e-12))
        throw Error(ErrorKind::UnsupportedScale, "connection images exceed the ladder");

    const Anchor A = anchor_of(conn.a, conn.side_a);
    const Anchor B = anchor_of(conn.b, conn.side_b);
    const int slot_a = lad.slot_index[static_cast<int>(A)];
    const int slot_b = lad.slot_index[static_cast<int>(B)];
    const double alpha_abs = std::abs(conn.alpha_prime);
    const double beta_abs = std::abs(conn.beta_prime);

    std::vector<Triplet> s_trip, t_trip;
    s_trip.emplace_back(slot_b, slot_a, alpha_abs);
    t_trip.emplace_back(slot_a, slot_b, beta_abs * conn.rho0);

    // Forward: every target ladder node with t = d / c < eps.
    for (int ky = 0; ky < lad.K; ++ky) {
        const int ks = ky + m;
        if (ks < 0) continue;  // source beyond smax, phi vanishes there
        for (int j = 0; j < lad.M; ++j) {
            const double t = ks < lad.K ? lad.distance(ks, j) : lad.distance(ky, j) / c;
            if (t >= conn.eps) continue;
            const int y = lad.node(B, ky, j);
            const double v = alpha_abs * cutoff_phi(t, conn.eps);
            if (ks < lad.K) {
                const int x = lad.node(A, ks, j);
                s_trip.emplace_back(y, x, v);
                // Weighted adjoint row for the positive-weight source x.
                t_trip.emplace_back(x, y, v * g.w[y] / g.w[x]);
            } else {
                s_trip.emplace_back(y, slot_a, v);
            }
        }
    }
    // Sources whose partner would fall below the target ladder take the
    // trace at the target anchor.
    for (int kx = 0; kx < lad.K; ++kx) {
        if (kx - m < lad.K) continue;
        for (int j = 0; j < lad.M; ++j) {
            const double t = lad.distance(kx, j);
            if (t >= conn.eps) continue;
            const int x = lad.node(A, kx, j);
            t_trip.emplace_back(x, slot_b, beta_abs * conn.rho(t) * cutoff_phi(t, conn.eps));
        }
    }

    SparseMat S(g.size(), g.size()), T(g.size(), g.size());
    S.setFromTriplets(s_trip.begin(), s_trip.end());
    T.setFromTriplets(t_trip.begin(), t_trip.end());
    return {S, T};
}

GridFunction apply_transfer(const SmoothConnection& conn, const GridFunction& f, bool adjoint)
{
    const OperatorGrid& g = operator_grid(f.grid);
    const bool src_left = half_is_left(adjoint ? conn.b : conn.a, adjoint ? conn.side_b : conn.side_a);
    require_support(f, src_left, "apply_transfer");
    const auto [S, T] = transfer_matrices(g, conn);
    GridFunction out = GridFunction::zeros(f.grid);
    out.values = (adjoint ? T : S) * f.values;
    return out;
}

// ---- X0 and W0 ------------------------------------------------------------

const char* to_string(X0Case c) noexcept
{
    switch (c) {
    case X0Case::MM: return "MM";
    case X0Case::MP: return "MP";
    case X0Case::PM: return "PM";
    case X0Case::PP: return "PP";
    }
    return "?";
}

X0Case case_of(const SmoothConnection& conn)
{
    if (conn.a != 0.0 || conn.b != 0.0)
        throw Error(ErrorKind::SideMismatch, "X0 needs a connection of half-neighborhoods of 0");
    const bool am = conn.side_a == Side::left, bm = conn.side_b == Side::left;
    if (am && bm) return X0Case::MM;
    if (am) return X0Case::MP;
    if (bm) return X0Case::PM;
    return X0Case::PP;
}

GammaPair solve_gamma(double alpha_abs, double gain, cplx target)
{
    const double diff = alpha_abs - gain;
    if (std::abs(diff) <= 1e-12 * std::max(alpha_abs, gain))
        throw Error(ErrorKind::DegenerateParameters, "|alpha'| equals |beta'| rho(0)");
    GammaPair g;
    g.g1 = (1.0 - std::conj(target)) / diff;
    g.g2 = 1.0 - g.g1 * alpha_abs;
    g.residual = std::max(std::abs(g.g1 * alpha_abs + g.g2 - 1.0),
                          std::abs(std::conj(g.g1) * gain + std::conj(g.g2) - target));
    return g;
}

namespace {

// X = gamma1 S + gamma2 P_target + P_other (the other term is dropped when
// `other` is false); X* replaces S by its adjoint and conjugates gammas.
XPair assemble_x(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn, const GammaPair& gm,
                 PKind p_target, std::optional<PKind> p_other, const std::string& label)
{
    const auto [S, T] = transfer_matrices(*g, conn);
    const SparseMat Pt = p_matrix(*g, p_target);
    SparseMat X = gm.g1 * S + gm.g2 * Pt;
    SparseMat Xs = std::conj(gm.g1) * T + std::conj(gm.g2) * Pt;
    if (p_other) {
        const SparseMat Po = p_matrix(*g, *p_other);
        X += Po;
        Xs += Po;
    }
    XPair out;
    out.gamma = gm;
    out.X.grid = g;
    out.X.mat = X;
    out.X.recipe = label;
    out.X.gamma_residual = gm.residual;
    out.Xstar = out.X;
    out.Xstar.mat = Xs;
    out.Xstar.recipe = label + "*";
    return out;
}

OperatorRep w_from_x(const XPair& xp, const std::string& label)
{
    const Grid& g = *xp.X.grid;
    OperatorRep w = xp.X;
    SparseMat xsx = xp.Xstar.mat * xp.X.mat;
    xsx += identity(g.size());
    w.mat = j_matrix(g) * xsx;
    w.mat.prune(cplx(0.0));
    w.recipe = label;
    return w;
}

}  // namespace

XPair build_X0(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn, X0Case c)
{
    if (case_of(conn) != c) throw Error(ErrorKind::SideMismatch, "X0 case does not match the connection");
    const GammaPair gm = solve_gamma(std::abs(conn.alpha_prime), conn.transfer_gain(), -3.0);
    const bool target_left = conn.side_b == Side::left;
    return assemble_x(std::move(g), conn, gm, target_left ? PKind::P0minus : PKind::P0plus,
                      target_left ? PKind::P0plus : PKind::P0minus,
                      std::string("X0[") + to_string(c) + "]");
}

OperatorRep build_W0(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn)
{
    const XPair xp = build_X0(std::move(g), conn, case_of(conn));
    return w_from_x(xp, "W0[" + std::string(to_string(case_of(conn))) + "]");
}

XPair build_X_endpoint(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn, cplx mu)
{
    const bool minus = conn.a == -1.0 && conn.b == -1.0 && conn.side_a == Side::right &&
                       conn.side_b == Side::right;
    const bool plus = conn.a == 1.0 && conn.b == 1.0 && conn.side_a == Side::left &&
                      conn.side_b == Side::left;
    if (!minus && !plus)
        throw Error(ErrorKind::SideMismatch, "endpoint operators need a same-side connection at -1 or 1");
    // J is -1 near -1 and +1 near 1, which fixes the target trace of X*.
    const cplx target = minus ? -mu - 1.0 : mu - 1.0;
    const GammaPair gm = solve_gamma(std::abs(conn.alpha_prime), conn.transfer_gain(), target);
    XPair xp = assemble_x(std::move(g), conn, gm, minus ? PKind::P1minus : PKind::P1plus, std::nullopt,
                          minus ? "X-1" : "X+1");
    xp.X.endpoint = xp.Xstar.endpoint = minus ? -1.0 : 1.0;
    xp.X.mu = xp.Xstar.mu = mu;
    return xp;
}

OperatorRep build_W_endpoint(std::shared_ptr<const OperatorGrid> g, const SmoothConnection& conn, cplx mu)
{
    const XPair xp = build_X_endpoint(std::move(g), conn, mu);
    return w_from_x(xp, *xp.X.endpoint < 0 ? "W-1" : "W+1");
}

OperatorRep build_W01(const OperatorRep& w0, const OperatorRep& w_end, W01Side side)
{
    if (w0.grid != w_end.grid) throw Error(ErrorKind::GridMismatch, "W0 and the endpoint operator differ in grid");
    if (!w_end.endpoint) throw Error(ErrorKind::SideMismatch, "second operand is not an endpoint operator");
    const bool minus = side == W01Side::minus;
    if ((minus && (*w_end.endpoint != -1.0 || w_end.mu != cplx(1.0))) ||
        (!minus && (*w_end.endpoint != 1.0 || w_end.mu != cplx(-1.0))))
        throw Error(ErrorKind::SideMismatch, "side minus needs W-1 with mu = 1, side plus W+1 with mu = -1");

    const Grid& g = *w0.grid;
    std::vector<Triplet> trip;
    for (int i = 0; i < g.size(); ++i) {
        const SparseMat& src = std::abs(g.x[i]) <= 0.5 ? w0.mat : w_end.mat;
        for (SparseMat::InnerIterator it(src, i); it; ++it) trip.emplace_back(i, it.col(), it.value());
    }
    OperatorRep out;
    out.grid = w0.grid;
    out.mat = SparseMat(g.size(), g.size());
    out.mat.setFromTriplets(trip.begin(), trip.end());
    out.recipe = std::string("W01[") + (minus ? "minus" : "plus") + "]";
    out.gamma_residual = std::max(w0.gamma_residual, w_end.gamma_residual);
    return out;
}

namespace {

OperatorRep with_scalar(const OperatorRep& w, cplx s, const std::string& label)
{
    const int n = w.dofs();
    std::vector<Triplet> trip;
    for (int i = 0; i < n; ++i)
        for (SparseMat::InnerIterator it(w.mat, i); it; ++it) trip.emplace_back(i, it.col(), it.value());
    trip.emplace_back(n, n, s);
    OperatorRep out = w;
    out.mat = SparseMat(n + 1, n + 1);
    out.mat.setFromTriplets(trip.begin(), trip.end());
    out.scalar_block = true;
    out.recipe = label;
    return out;
}

[[noreturn]] void missing(const std::string& what) { throw Error(ErrorKind::MissingCondition, what); }

}  // namespace

OperatorRep build_full_W(std::shared_ptr<const OperatorGrid> g, const ClassificationReport& report,
                         const BoundaryTriple& t, const WParts& parts)
{
    const double sgn = t.delta > 0.0 ? 1.0 : -1.0;
    switch (report.theorem) {
    case Theorem::Thm6_1: {
        if (!parts.at0) missing("Thm6_1 needs the condition at 0");
        return with_scalar(build_W0(g, *parts.at0), sgn, "W[Thm6_1] = W0 + sgn(Delta)");
    }
    case Theorem::Thm6_2: {
        if (!parts.at0) missing("Thm6_2 needs the condition at 0");
        if (!parts.at_minus1 && !parts.at_plus1) missing("Thm6_2 needs the condition at -1 or at 1");
        const OperatorRep w0 = build_W0(g, *parts.at0);
        const OperatorRep w01 =
            parts.at_minus1 ? build_W01(w0, build_W_endpoint(g, *parts.at_minus1, 1.0), W01Side::minus)
                            : build_W01(w0, build_W_endpoint(g, *parts.at_plus1, -1.0), W01Side::plus);
        return with_scalar(w01, t.delta, "W[Thm6_2] = " + w01.recipe + " + Delta");
    }
    case Theorem::Thm6_3: {
        if (!parts.at0) missing("Thm6_3 needs the condition at 0");
        const OperatorRep w0 = build_W0(g, *parts.at0);
        if (t.delta > 0.0) {
            if (!parts.at_minus1) missing("Thm6_3 with Delta > 0 needs the condition at -1");
            const OperatorRep w01 = build_W01(w0, build_W_endpoint(g, *parts.at_minus1, 1.0), W01Side::minus);
            return with_scalar(w01, sgn, "W[Thm6_3] = " + w01.recipe + " + sgn(Delta)");
        }
        if (!parts.at_plus1) missing("Thm6_3 with Delta < 0 needs the condition at 1");
        const OperatorRep w01 = build_W01(w0, build_W_endpoint(g, *parts.at_plus1, -1.0), W01Side::plus);
        return with_scalar(w01, sgn, "W[Thm6_3] = " + w01.recipe + " + sgn(Delta)");
    }
    case Theorem::None: break;
    }
    missing("no theorem applies to this boundary triple");
}

// ---- verification ---------------------------------------------------------

WSpectrum w_spectrum(const OperatorRep& w)
{
    const Grid& g = *w.grid;
    std::vector<int> pos;
    for (int i = 0; i < g.size(); ++i)
        if (g.w[i] > 0.0) pos.push_back(i);
    const int np = static_cast<int>(pos.size());

    // Dense J W restricted to positive-weight DOFs, similarity-scaled by W^{1/2}.
    std::vector<int> where(g.size(), -1);
    for (int k = 0; k < np; ++k) where[pos[k]] = k;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(np, np);
    for (int k = 0; k < np; ++k) {
        const int i = pos[k];
        for (SparseMat::InnerIterator it(w.mat, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (j >= g.size() || where[j] < 0) continue;
            A(k, where[j]) = g.sgn[i] * it.value() * std::sqrt(g.w[i] / g.w[j]);
        }
    }
    const Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();

    WSpectrum out;
    out.min_psd_eigenvalue = lo - 1.0;
    if (w.scalar_block) {
        const double s = std::abs(w.mat.coeff(g.size(), g.size()));
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    return out;
}

namespace {

GridFunction random_smooth(std::shared_ptr<const Grid> g, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    constexpr int kModes = 5;
    std::array<cplx, kModes> a{}, b{};
    for (int k = 0; k < kModes; ++k) {
        a[k] = cplx(nd(rng), nd(rng)) / double(1 + k);
        b[k] = cplx(nd(rng), nd(rng)) / double(1 + k);
    }
    const double pi = std::acos(-1.0);
    return GridFunction::sample(std::move(g), [&](double x) {
        cplx v = 0.0;
        for (int k = 0; k < kModes; ++k)
            v += a[k] * std::cos(k * pi * (x + 1.0) / 2.0) + b[k] * std::sin((k + 1) * pi * (x + 1.0) / 3.0);
        return v;
    });
}

}  // namespace

WVerification verify_W(const OperatorRep& w, const EchelonSplit& split, const BoundaryTriple& t, int samples,
                       std::uint64_t seed)
{
    WVerification rep;
    const auto& g = w.grid;
    const bool constrain_l = split.form_domain_case == FormDomainCase::FD2 ||
                             split.form_domain_case == FormDomainCase::FD4;
    const bool tie_z = split.form_domain_case == FormDomainCase::FD3 ||
                       split.form_domain_case == FormDomainCase::FD4;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;

    rep.min_krein_ratio = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        KreinVector x;
        x.f = random_smooth(g, rng);
        x.z = cplx(nd(rng), nd(rng));
        auto be = [&](const GridFunction& f) {
            return Eigen::Vector2cd(f.values(g->slot_minus1()), f.values(g->slot_plus1()));
        };
        if (constrain_l) {
            const Eigen::RowVector2cd le = split.L_e;
            const cplx r = (le * be(x.f))(0);
            const Eigen::Vector2cd corr = -r * le.adjoint() / le.squaredNorm();
            for (int i = 0; i < g->size(); ++i)
                x.f.values(i) += corr(0) * (1.0 - g->x[i]) / 2.0 + corr(1) * (1.0 + g->x[i]) / 2.0;
        }
        if (tie_z) x.z = (Eigen::RowVector2cd(split.N_e) * be(x.f))(0);

        const KreinVector y = w.apply(x);
        cplx krein = t.delta * y.z * std::conj(x.z);
        for (int i = 0; i < g->size(); ++i) krein += g->w[i] * g->sgn[i] * y.f.values(i) * std::conj(x.f.values(i));
        const double norm2 = hilbert_inner(x.f, x.f).real() + std::abs(t.delta) * std::norm(x.z);
        if (norm2 > 0.0) rep.min_krein_ratio = std::min(rep.min_krein_ratio, krein.real() / norm2);

        const double scale = 1.0 + be(x.f).norm() + std::abs(x.z);
        if (constrain_l) {
            const cplx r = (Eigen::RowVector2cd(split.L_e) * be(y.f))(0);
            rep.form_domain_residual = std::max(rep.form_domain_residual, std::abs(r) / scale);
        }
        if (tie_z) {
            const cplx r = y.z - (Eigen::RowVector2cd(split.N_e) * be(y.f))(0);
            rep.form_domain_residual = std::max(rep.form_domain_residual, std::abs(r) / scale);
        }
        const cplx jump = y.f.values(g->slot_zero_plus()) - y.f.values(g->slot_zero_minus());
        rep.continuity_residual = std::max(rep.continuity_residual, std::abs(jump) / scale);
        ++rep.samples;
    }
    rep.krein_positive = rep.samples > 0 && rep.min_krein_ratio > 0.0;

    const WSpectrum sp = w_spectrum(w);
    rep.condition_number = sp.condition_number;
    rep.min_psd_eigenvalue = sp.min_psd_eigenvalue;
    rep.passed = rep.krein_positive && rep.form_domain_residual <= 1e-10 && rep.continuity_residual <= 1e-10 &&
                 rep.min_psd_eigenvalue >= -1e-8;
    return rep;
}

}  // namespace indefsl
