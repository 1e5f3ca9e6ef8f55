#pragma once

#include <array>
#include <set>
#include <string>

#include "indefsl/types.hpp"

namespace indefsl {

/// Residuals of the self-adjointness identities, each relative to the
/// product of the row norms involved.
struct QFormResiduals {
    double LQL = 0.0;
    double MQM = 0.0;
    double NQN = 0.0;
    double LQM = 0.0;
    double LQN = 0.0;

    double max() const;
};

/// The boundary rows of  L b(f) = 0,  M b(f) = lambda N b(f)  where
/// b(f) = (f(-1), f(1), (pf')(-1), (pf')(1))^T.
struct BoundaryTriple {
    Row4 L = Row4::Zero();
    Row4 M = Row4::Zero();
    Row4 N = Row4::Zero();
    double delta = 0.0;
    bool validated = false;
    bool exact = false;  // validated in rational arithmetic
    QFormResiduals residuals;
};

enum class FormDomainCase { FD1, FD2, FD3, FD4 };

const char* to_string(FormDomainCase c) noexcept;

struct EchelonSplit {
    Row4 L = Row4::Zero();
    Row4 M = Row4::Zero();
    Row4 N = Row4::Zero();
    Row2 L_e = Row2::Zero();
    Row2 L_n = Row2::Zero();
    Row2 N_e = Row2::Zero();
    Row2 N_n = Row2::Zero();
    FormDomainCase form_domain_case = FormDomainCase::FD1;
};

enum class Theorem { Thm6_1, Thm6_2, Thm6_3, None };

enum class RequiredCondition { At0, AtMinus1, AtPlus1, AtMinus1_or_AtPlus1 };

const char* to_string(Theorem t) noexcept;
const char* to_string(RequiredCondition c) noexcept;

struct ClassificationReport {
    Theorem theorem = Theorem::None;
    std::string matched_case;
    std::set<RequiredCondition> required_conditions;
    int sign_delta = 1;
};

/// Q = i [[0,0,-1,0],[0,0,0,1],[1,0,0,0],[0,-1,0,0]].
Mat4 concomitant_matrix();

/// x Q y^*.
cplx q_form(const Row4& x, const Row4& y);

/// Rank of a 3x4 complex matrix, singular values below tol * sigma_max count as zero.
int numerical_rank(const Eigen::Matrix<cplx, 3, 4>& a, double tol);

BoundaryTriple validate_triple(const Row4& L, const Row4& M, const Row4& N, double tol = 1e-10);

EchelonSplit reduce_and_split(const BoundaryTriple& t, double tol = 1e-10);

ClassificationReport classify_theorem(const EchelonSplit& split, const BoundaryTriple& t,
                                      double tol = 1e-10);

}  // namespace indefsl
