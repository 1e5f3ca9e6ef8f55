#include "indefsl/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "indefsl/error.hpp"

namespace indefsl {

// ---- SmoothFactor ---------------------------------------------------------

SmoothFactor::SmoothFactor() : coeffs_{1.0} {}

SmoothFactor SmoothFactor::polynomial(std::vector<double> coeffs)
{
    SmoothFactor s;
    s.coeffs_ = coeffs.empty() ? std::vector<double>{0.0} : std::move(coeffs);
    return s;
}

SmoothFactor SmoothFactor::callable(std::function<double(double)> f,
                                    std::function<double(double)> df)
{
    SmoothFactor s;
    s.coeffs_.clear();
    s.fn_ = std::move(f);
    s.dfn_ = std::move(df);
    return s;
}

double SmoothFactor::operator()(double x) const
{
    if (fn_) return fn_(x);
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double SmoothFactor::derivative(double x) const
{
    if (fn_) {
        if (dfn_) return dfn_(x);
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        return (fn_(x + h) - fn_(x - h)) / (2.0 * h);
    }
    double acc = 0.0;
    for (size_t k = coeffs_.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * coeffs_[k];
    return acc;
}

// ---- pieces ---------------------------------------------------------------

double CoefficientPiece::value(double x) const
{
    if (order == 0.0) return factor(x);
    return std::pow(std::abs(x - anchor), order) * factor(x);
}

double CoefficientPiece::derivative(double x) const
{
    if (order == 0.0) return factor.derivative(x);
    const double d = x - anchor;
    const double ad = std::abs(d);
    const double sg = d > 0 ? 1.0 : -1.0;
    return order * sg * std::pow(ad, order - 1.0) * factor(x) + std::pow(ad, order) * factor.derivative(x);
}

const CoefficientPiece& CoefficientFunction::piece_at(double x, Side side) const
{
    if (pieces.empty()) throw Error(ErrorKind::InvalidModel, "coefficient has no pieces");
    for (const auto& pc : pieces) {
        if (side == Side::right && pc.lo <= x && x < pc.hi) return pc;
        if (side == Side::left && pc.lo < x && x <= pc.hi) return pc;
    }
    if (x <= pieces.front().lo) return pieces.front();
    if (x >= pieces.back().hi) return pieces.back();
    throw Error(ErrorKind::InvalidModel, "no piece covers x = " + std::to_string(x));
}

double CoefficientFunction::operator()(double x, Side side) const
{
    return piece_at(x, side).value(x);
}

std::vector<double> CoefficientFunction::breakpoints() const
{
    std::vector<double> out;
    for (size_t k = 1; k < pieces.size(); ++k) out.push_back(pieces[k].lo);
    return out;
}

CoefficientFunction CoefficientFunction::constant(double v)
{
    CoefficientFunction f;
    CoefficientPiece pc;
    pc.factor = SmoothFactor::polynomial({v});
    f.pieces.push_back(pc);
    return f;
}

const char* to_string(Coefficient c) noexcept
{
    switch (c) {
    case Coefficient::p: return "p";
    case Coefficient::q: return "q";
    case Coefficient::r: return "r";
    }
    return "?";
}

const CoefficientFunction& CoefficientModel::get(Coefficient c) const
{
    switch (c) {
    case Coefficient::p: return p;
    case Coefficient::q: return q;
    case Coefficient::r: return r;
    }
    return r;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidModel, what); }

bool anchor_touches(const CoefficientPiece& pc) { return pc.lo <= pc.anchor && pc.anchor <= pc.hi; }

void check_layout(const CoefficientFunction& f, const char* name)
{
    if (f.pieces.empty()) invalid(std::string(name) + " has no pieces");
    const double tol = 1e-14;
    if (std::abs(f.pieces.front().lo + 1.0) > tol || std::abs(f.pieces.back().hi - 1.0) > tol)
        invalid(std::string(name) + " pieces must cover [-1, 1]");
    for (size_t k = 0; k < f.pieces.size(); ++k) {
        const auto& pc = f.pieces[k];
        if (!(pc.lo < pc.hi)) invalid(std::string(name) + " has an empty piece");
        if (k > 0 && std::abs(pc.lo - f.pieces[k - 1].hi) > tol)
            invalid(std::string(name) + " pieces leave a gap or overlap");
        if (!std::isfinite(pc.order)) invalid(std::string(name) + " has a non-finite order");
    }
}

constexpr int kSamples = 64;

double sample(const CoefficientPiece& pc, int j)
{
    return pc.lo + (pc.hi - pc.lo) * (j + 0.5) / kSamples;
}

}  // namespace

void CoefficientModel::validate() const
{
    check_layout(p, "p");
    check_layout(q, "q");
    check_layout(r, "r");

    for (const auto& pc : r.pieces) {
        if (anchor_touches(pc) && pc.order <= -1.0) invalid("r is not integrable near its anchor");
        for (int j = 0; j < kSamples; ++j) {
            const double x = sample(pc, j);
            const double v = pc.value(x);
            const double signed_v = definite_weight ? v : x * v;
            if (!std::isfinite(v) || !(signed_v > 0.0)) {
                std::ostringstream os;
                os << (definite_weight ? "r(x) > 0" : "x r(x) > 0") << " fails at x = " << x;
                invalid(os.str());
            }
        }
    }
    for (const auto& pc : p.pieces) {
        if (anchor_touches(pc) && pc.order >= 1.0) invalid("1/p is not integrable near its anchor");
        if (pc.order != 0.0 && !allow_p_order)
            invalid("p must have order 0 unless allow_p_order is set");
        for (int j = 0; j < kSamples; ++j) {
            const double x = sample(pc, j);
            const double v = pc.value(x);
            if (!std::isfinite(v) || !(v > 0.0)) {
                std::ostringstream os;
                os << "p > 0 fails at x = " << x;
                invalid(os.str());
            }
        }
    }
    for (const auto& pc : q.pieces) {
        if (anchor_touches(pc) && pc.order <= -1.0) invalid("q is not integrable near its anchor");
        for (int j = 0; j < kSamples; ++j)
            if (!std::isfinite(pc.value(sample(pc, j)))) invalid("q is not finite at a sample point");
    }
}

// ---- orders ---------------------------------------------------------------

namespace {

// Local order description of a coefficient in one half-neighborhood:
// g(x) = |x - point|^order * h(x) with h smooth and nonzero near point.
struct LocalOrder {
    double order = 0.0;
    const CoefficientPiece* piece = nullptr;
    bool anchored = false;  // piece anchor coincides with point

    double h(double x) const { return anchored ? piece->factor(x) : piece->value(x); }
    double dh(double x) const { return anchored ? piece->factor.derivative(x) : piece->derivative(x); }
};

LocalOrder local_order(const CoefficientFunction& f, double point, Side side, const char* name)
{
    LocalOrder lo;
    lo.piece = &f.piece_at(point, side);
    if (lo.piece->order == 0.0 || lo.piece->anchor == point) {
        lo.order = lo.piece->order;
        lo.anchored = true;
        return lo;
    }
    const double v = lo.piece->value(point);
    if (!(std::abs(v) > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " is not in order form at " << point;
        throw Error(ErrorKind::NoOrderModel, os.str());
    }
    lo.order = 0.0;
    lo.anchored = false;
    return lo;
}

// Distance from point to the far end of the piece in the direction of side.
double room(const CoefficientPiece& pc, double point, Side side)
{
    return side == Side::right ? pc.hi - point : point - pc.lo;
}

}  // namespace

OrderInfo order_at(const CoefficientModel& m, Coefficient coeff, double point, Side side)
{
    if (point != -1.0 && point != 0.0 && point != 1.0)
        throw Error(ErrorKind::NoOrderModel, "order_at is defined at -1, 0 and 1 only");
    if ((point == -1.0 && side == Side::left) || (point == 1.0 && side == Side::right))
        throw Error(ErrorKind::NoOrderModel, "half-neighborhood leaves [-1, 1]");
    const LocalOrder lo = local_order(m.get(coeff), point, side, to_string(coeff));
    return {lo.order, lo.h(point)};
}

// ---- smooth connections ---------------------------------------------------

namespace {

struct ConnectionParts {
    LocalOrder ra, rb, pa, pb;
};

ConnectionParts parts_of(const SmoothConnection& c)
{
    const auto& m = *c.model;
    return {local_order(m.r, c.a, c.side_a, "r"), local_order(m.r, c.b, c.side_b, "r"),
            local_order(m.p, c.a, c.side_a, "p"), local_order(m.p, c.b, c.side_b, "p")};
}

[[noreturn]] void not_connectable(const std::string& what)
{
    throw Error(ErrorKind::NotConnectable, what);
}

}  // namespace

double SmoothConnection::rho(double t) const
{
    const auto pr = parts_of(*this);
    const double ga = std::abs(pr.ra.h(alpha(t)));
    const double gb = std::abs(pr.rb.h(beta(t)));
    const double power = order_gap == 0.0 ? 1.0 : std::pow(t, order_gap);
    return std::pow(scale, pr.rb.order) * power * gb / ga;
}

double SmoothConnection::rho_prime(double t) const
{
    const auto pr = parts_of(*this);
    const double xa = alpha(t), xb = beta(t);
    const double la = alpha_prime * pr.ra.dh(xa) / pr.ra.h(xa);
    const double lb = beta_prime * pr.rb.dh(xb) / pr.rb.h(xb);
    const double gap_term = order_gap == 0.0 ? 0.0 : order_gap / t;
    return rho(t) * (gap_term + lb - la);
}

double SmoothConnection::varpi(double t) const
{
    const auto pr = parts_of(*this);
    const double ga = pr.pa.h(alpha(t));
    const double gb = pr.pb.h(beta(t));
    return std::pow(scale, pr.pb.order) * gb / ga;
}

SmoothConnection build_smooth_connection(const CoefficientModel& m, HalfNeighborhood from,
                                         HalfNeighborhood to, double scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) not_connectable("scale must be positive");
    for (const auto& h : {from, to})
        if ((h.point <= -1.0 && h.side == Side::left) || (h.point >= 1.0 && h.side == Side::right))
            not_connectable("half-neighborhood leaves [-1, 1]");

    SmoothConnection c;
    c.model = std::make_shared<const CoefficientModel>(m);
    c.a = from.point;
    c.b = to.point;
    c.side_a = from.side;
    c.side_b = to.side;
    c.scale = scale;
    c.alpha_prime = from.side == Side::right ? 1.0 : -1.0;
    c.beta_prime = (to.side == Side::right ? 1.0 : -1.0) * scale;

    const auto pr = parts_of(c);
    if (pr.pa.order != 0.0 || pr.pb.order != 0.0) {
        if (!m.allow_p_order) not_connectable("p has a nonzero order and allow_p_order is off");
        if (pr.pa.order != pr.pb.order) not_connectable("p orders differ between the two ends");
    }

    const double gap = pr.rb.order - pr.ra.order;
    if (gap < 0.0) not_connectable("order at b is below the order at a, rho is unbounded");
    if (gap > 0.0 && gap <= 0.5) not_connectable("order gap in (0, 1/2], rho' is not square integrable");
    c.order_gap = gap;

    double eps = std::min(0.125, 0.49 / scale);
    eps = std::min(eps, room(*pr.ra.piece, c.a, c.side_a));
    eps = std::min(eps, room(*pr.pa.piece, c.a, c.side_a));
    eps = std::min(eps, room(*pr.rb.piece, c.b, c.side_b) / scale);
    eps = std::min(eps, room(*pr.pb.piece, c.b, c.side_b) / scale);
    if (!(eps > 0.0)) not_connectable("no room for a half-neighborhood");
    c.eps = eps;

    const double ga0 = std::abs(pr.ra.h(c.a));
    const double gb0 = std::abs(pr.rb.h(c.b));
    if (!(ga0 > 0.0) || !std::isfinite(ga0) || !std::isfinite(gb0))
        not_connectable("smooth factor of r vanishes at the anchor");
    c.rho0 = gap > 0.0 ? 0.0 : std::pow(scale, pr.rb.order) * gb0 / ga0;

    // Sampled bound on varpi, including the limit at t = 0.
    constexpr int kVarpiSamples = 257;
    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kVarpiSamples; ++j) {
        const double v = c.varpi(eps * j / (kVarpiSamples - 1));
        if (!(v > 0.0) || !std::isfinite(v)) not_connectable("varpi is not positive and finite");
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    c.tau = 1.01 * std::max(vmax, 1.0 / vmin);

    // Absolute continuity needs int |rho'|^2 p(alpha) dt < infinity.
    boost::math::quadrature::tanh_sinh<double> integrator;
    const auto integrand = [&](double t) {
        if (t <= 0.0) return 0.0;
        const double d = c.rho_prime(t);
        return d * d * m.p(c.alpha(t), c.side_a);
    };
    double energy = 0.0;
    try {
        energy = integrator.integrate(integrand, 0.0, eps);
    } catch (const std::exception& e) {
        not_connectable(std::string("rho' energy integral failed: ") + e.what());
    }
    if (!std::isfinite(energy)) not_connectable("rho' is not square integrable");
    c.rho_energy = energy;
    return c;
}

// ---- conditions -----------------------------------------------------------

ConditionReport check_condition_at(const CoefficientModel& m, double point)
{
    if (m.definite_weight)
        throw Error(ErrorKind::InvalidModel, "smooth connections need the sign condition x r(x) > 0");
    ConditionReport rep;
    rep.point = point;

    std::vector<std::pair<HalfNeighborhood, HalfNeighborhood>> pairs;
    if (point == 0.0) {
        const HalfNeighborhood minus{0.0, Side::left}, plus{0.0, Side::right};
        pairs = {{minus, minus}, {minus, plus}, {plus, minus}, {plus, plus}};
    } else if (point == -1.0) {
        pairs = {{{-1.0, Side::right}, {-1.0, Side::right}}};
    } else if (point == 1.0) {
        pairs = {{{1.0, Side::left}, {1.0, Side::left}}};
    } else {
        rep.diagnostics.push_back("conditions are defined at -1, 0 and 1 only");
        return rep;
    }

    constexpr double kMarginFloor = 1e-12;
    for (const auto& [from, to] : pairs) {
        for (double c : {2.0, 0.5}) {
            std::ostringstream label;
            label << "(" << from.point << (from.side == Side::left ? "-" : "+") << ", " << to.point
                  << (to.side == Side::left ? "-" : "+") << "), c = " << c << ": ";
            try {
                SmoothConnection conn = build_smooth_connection(m, from, to, c);
                const double margin = std::abs(std::abs(conn.alpha_prime) - conn.transfer_gain());
                if (margin > kMarginFloor) {
                    rep.holds = true;
                    rep.inequality_margin = margin;
                    rep.connection = std::move(conn);
                    rep.diagnostics.push_back(label.str() + "accepted");
                    return rep;
                }
                rep.diagnostics.push_back(label.str() + "parameters coincide");
            } catch (const Error& e) {
                rep.diagnostics.push_back(label.str() + e.what());
            }
        }
    }
    return rep;
}

}  // namespace indefsl
