#include "indefsl/bc_algebra.hpp"

#include <algorithm>
#include <cmath>

#include "indefsl/error.hpp"

namespace indefsl {

namespace {

const cplx I{0.0, 1.0};

bool negligible(const Row2& part, double scale, double tol)
{
    return part.norm() <= tol * scale;
}

// True when `row` is a nonzero multiple of the k-th unit vector.
bool proportional_to_unit(const Row4& row, int k, double tol)
{
    const double n = row.norm();
    if (n == 0.0 || std::abs(row(k)) <= tol * n) return false;
    for (int j = 0; j < 4; ++j)
        if (j != k && std::abs(row(j)) > tol * n) return false;
    return true;
}

int last_nonzero(const Row4& row, double tol)
{
    const double n = row.norm();
    for (int j = 3; j >= 0; --j)
        if (std::abs(row(j)) > tol * n) return j;
    return -1;
}

// Replace entries below tol relative to the row norm by exact zeros, so that
// zero patterns read off the reduced rows are stable.
Row4 clean(Row4 row, double tol)
{
    const double n = row.norm();
    for (int j = 0; j < 4; ++j)
        if (std::abs(row(j)) <= tol * n) row(j) = 0.0;
    return row;
}

}  // namespace

double QFormResiduals::max() const
{
    return std::max({LQL, MQM, NQN, LQM, LQN});
}

const char* to_string(FormDomainCase c) noexcept
{
    switch (c) {
    case FormDomainCase::FD1: return "FD1";
    case FormDomainCase::FD2: return "FD2";
    case FormDomainCase::FD3: return "FD3";
    case FormDomainCase::FD4: return "FD4";
    }
    return "?";
}

const char* to_string(Theorem t) noexcept
{
    switch (t) {
    case Theorem::Thm6_1: return "Thm6_1";
    case Theorem::Thm6_2: return "Thm6_2";
    case Theorem::Thm6_3: return "Thm6_3";
    case Theorem::None: return "None";
    }
    return "?";
}

const char* to_string(RequiredCondition c) noexcept
{
    switch (c) {
    case RequiredCondition::At0: return "At0";
    case RequiredCondition::AtMinus1: return "AtMinus1";
    case RequiredCondition::AtPlus1: return "AtPlus1";
    case RequiredCondition::AtMinus1_or_AtPlus1: return "AtMinus1_or_AtPlus1";
    }
    return "?";
}

Mat4 concomitant_matrix()
{
    Mat4 q = Mat4::Zero();
    q(0, 2) = -I;
    q(1, 3) = I;
    q(2, 0) = I;
    q(3, 1) = -I;
    return q;
}

cplx q_form(const Row4& x, const Row4& y)
{
    // x Q y^* written out; avoids building Q for a hot path.
    return I * (-x(0) * std::conj(y(2)) + x(1) * std::conj(y(3)) + x(2) * std::conj(y(0)) -
                x(3) * std::conj(y(1)));
}

int numerical_rank(const Eigen::Matrix<cplx, 3, 4>& a, double tol)
{
    Eigen::JacobiSVD<Eigen::Matrix<cplx, 3, 4>> svd(a);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    int r = 0;
    for (int k = 0; k < s.size(); ++k)
        if (s(k) > tol * s(0)) ++r;
    return r;
}

BoundaryTriple validate_triple(const Row4& L, const Row4& M, const Row4& N, double tol)
{
    const double nl = L.norm(), nm = M.norm(), nn = N.norm();
    if (nl == 0.0 || nm == 0.0 || nn == 0.0)
        throw Error(ErrorKind::RankDeficient, "a boundary row is identically zero");

    Eigen::Matrix<cplx, 3, 4> stacked;
    stacked << L, M, N;
    const int rank = numerical_rank(stacked, tol);
    if (rank < 3)
        throw Error(ErrorKind::RankDeficient, "[L; M; N] has rank " + std::to_string(rank));

    BoundaryTriple t;
    t.L = L;
    t.M = M;
    t.N = N;
    t.residuals.LQL = std::abs(q_form(L, L)) / (nl * nl);
    t.residuals.MQM = std::abs(q_form(M, M)) / (nm * nm);
    t.residuals.NQN = std::abs(q_form(N, N)) / (nn * nn);
    t.residuals.LQM = std::abs(q_form(L, M)) / (nl * nm);
    t.residuals.LQN = std::abs(q_form(L, N)) / (nl * nn);

    const std::pair<const char*, double> checks[] = {
        {"LQL*", t.residuals.LQL}, {"MQM*", t.residuals.MQM}, {"NQN*", t.residuals.NQN},
        {"LQM*", t.residuals.LQM}, {"LQN*", t.residuals.LQN}};
    for (const auto& [name, res] : checks)
        if (!(res <= tol)) throw QFormViolation(name, res);

    // Q^{-1} = Q, so M Q^{-1} N^* is the plain Q-form.
    const cplx s = q_form(M, N);
    const double scale = nm * nn;
    if (std::abs(s) <= tol * scale)
        throw Error(ErrorKind::DeltaNotRealNonzero, "M Q N* vanishes");
    if (std::abs(s.real()) > tol * scale)
        throw Error(ErrorKind::DeltaNotRealNonzero, "i M Q N* is not real");
    t.delta = (-I / cplx(0.0, s.imag())).real();
    t.validated = true;
    return t;
}

EchelonSplit reduce_and_split(const BoundaryTriple& t, double tol)
{
    EchelonSplit out;
    Row4 L = t.L, M = t.M, N = t.N;

    const int jn = last_nonzero(N, tol);
    if (jn >= 0) {
        const cplx c = 1.0 / N(jn);
        N *= c;
        M *= c;
    }
    const int jl = last_nonzero(L, tol);
    if (jl >= 0) {
        L /= L(jl);
        M -= M(jl) * L;
        M(jl) = 0.0;
    }

    out.L = clean(L, tol);
    out.M = clean(M, tol);
    out.N = clean(N, tol);
    out.L_e = out.L.head<2>();
    out.L_n = out.L.tail<2>();
    out.N_e = out.N.head<2>();
    out.N_n = out.N.tail<2>();

    const bool ln = !negligible(out.L_n, out.L.norm(), tol);
    const bool nn = !negligible(out.N_n, out.N.norm(), tol);
    if (ln && nn)
        out.form_domain_case = FormDomainCase::FD1;
    else if (nn)
        out.form_domain_case = FormDomainCase::FD2;
    else if (ln)
        out.form_domain_case = FormDomainCase::FD3;
    else
        out.form_domain_case = FormDomainCase::FD4;
    return out;
}

ClassificationReport classify_theorem(const EchelonSplit& split, const BoundaryTriple& t,
                                      double tol)
{
    ClassificationReport rep;
    rep.sign_delta = t.delta > 0.0 ? 1 : -1;
    const bool pos = t.delta > 0.0;

    const bool ln = !negligible(split.L_n, split.L.norm(), tol);
    const bool nn = !negligible(split.N_n, split.N.norm(), tol);

    const char* b = nullptr;
    if (ln)
        b = "b-i";
    else if (proportional_to_unit(split.L, 0, tol))
        b = "b-ii";
    else if (proportional_to_unit(split.L, 1, tol))
        b = "b-iii";

    const char* c = nullptr;
    if (nn)
        c = "c-i";
    else if (proportional_to_unit(split.N, 0, tol) && !pos)
        c = "c-ii";
    else if (proportional_to_unit(split.N, 1, tol) && pos)
        c = "c-iii";

    if (b && c) {
        rep.theorem = Theorem::Thm6_1;
        rep.matched_case = std::string("(") + b + ")+(" + c + ")";
        rep.required_conditions = {RequiredCondition::At0};
        return rep;
    }

    const double nl = split.L.norm();
    const bool l_is_uv00 = !ln && std::abs(split.L(0)) > tol * nl && std::abs(split.L(1)) > tol * nl;
    if (nn && l_is_uv00) {
        rep.theorem = Theorem::Thm6_2;
        rep.matched_case = "L=[u v 0 0], uv!=0, N_n!=0";
        rep.required_conditions = {RequiredCondition::At0, RequiredCondition::AtMinus1_or_AtPlus1};
        return rep;
    }

    if (!nn) {
        rep.theorem = Theorem::Thm6_3;
        if (pos) {
            rep.matched_case = "N_n=0, Delta>0";
            rep.required_conditions = {RequiredCondition::At0, RequiredCondition::AtMinus1};
        } else {
            rep.matched_case = "N_n=0, Delta<0";
            rep.required_conditions = {RequiredCondition::At0, RequiredCondition::AtPlus1};
        }
        return rep;
    }

    rep.theorem = Theorem::None;
    rep.matched_case = "none";
    return rep;
}

}  // namespace indefsl
