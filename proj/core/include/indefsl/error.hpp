#pragma once

#include <stdexcept>
#include <string>

namespace indefsl {

enum class ErrorKind {
    RankDeficient,
    QFormViolation,
    DeltaNotRealNonzero,
    InvalidModel,
    NoOrderModel,
    NotConnectable,
    BadEps,
    DomainMismatch,
    DegenerateParameters,
    SideMismatch,
    MissingCondition,
    UnsupportedScale,
    GridMismatch,
    IntegratorFailure,
    CountMismatch,
    Budget,
    ChainInconsistency,
    SingularPencil,
    SingularGram,
    ConfigError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by boundary validation when one of the five Q-form identities fails.
class QFormViolation : public Error {
public:
    QFormViolation(std::string identity, double residual);

    const std::string& identity() const noexcept { return identity_; }
    double residual() const noexcept { return residual_; }

private:
    std::string identity_;
    double residual_;
};

}  // namespace indefsl
