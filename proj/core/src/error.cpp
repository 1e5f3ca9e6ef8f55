#include "indefsl/error.hpp"

#include <sstream>

namespace indefsl {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::QFormViolation: return "QFormViolation";
    case ErrorKind::DeltaNotRealNonzero: return "DeltaNotRealNonzero";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::NoOrderModel: return "NoOrderModel";
    case ErrorKind::NotConnectable: return "NotConnectable";
    case ErrorKind::BadEps: return "BadEps";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::DegenerateParameters: return "DegenerateParameters";
    case ErrorKind::SideMismatch: return "SideMismatch";
    case ErrorKind::MissingCondition: return "MissingCondition";
    case ErrorKind::UnsupportedScale: return "UnsupportedScale";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::IntegratorFailure: return "IntegratorFailure";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::Budget: return "Budget";
    case ErrorKind::ChainInconsistency: return "ChainInconsistency";
    case ErrorKind::SingularPencil: return "SingularPencil";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

namespace {
std::string describe(const std::string& identity, double residual)
{
    std::ostringstream os;
    os.precision(3);
    os << identity << " = " << std::scientific << residual << " (relative)";
    return os.str();
}
}  // namespace

QFormViolation::QFormViolation(std::string identity, double residual)
    : Error(ErrorKind::QFormViolation, describe(identity, residual)),
      identity_(std::move(identity)),
      residual_(residual)
{
}

}  // namespace indefsl
