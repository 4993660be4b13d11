#include "qhyp/types.hpp"

#include <cmath>
#include <sstream>

namespace qhyp {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::TraceNotOne: return "TraceNotOne";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionCap: return "DimensionCap";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularSigma: return "SingularSigma";
    case ErrorCode::SingularInput: return "SingularInput";
    case ErrorCode::InvalidTest: return "InvalidTest";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::NonpositiveL: return "NonpositiveL";
    case ErrorCode::AtomExplosion: return "AtomExplosion";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BranchFault: return "BranchFault";
    case ErrorCode::QuadratureBudget: return "QuadratureBudget";
    case ErrorCode::FockCap: return "FockCap";
    case ErrorCode::InvalidSymbol: return "InvalidSymbol";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool Error::is_cap() const noexcept
{
    switch (code_) {
    case ErrorCode::DimensionCap:
    case ErrorCode::FockCap:
    case ErrorCode::QuadratureBudget:
    case ErrorCode::AtomExplosion:
        return true;
    default:
        return false;
    }
}

double ExtReal::value() const
{
    if (kind_ != Kind::Finite) throw Error(ErrorCode::DomainError, "value() on " + str());
    return value_;
}

double ExtReal::as_double() const
{
    switch (kind_) {
    case Kind::PlusInfinity: return std::numeric_limits<double>::infinity();
    case Kind::MinusInfinity: return -std::numeric_limits<double>::infinity();
    default: return value_;
    }
}

std::string ExtReal::str() const
{
    if (kind_ == Kind::PlusInfinity) return "+inf";
    if (kind_ == Kind::MinusInfinity) return "-inf";
    std::ostringstream os;
    os.precision(12);
    os << value_;
    return os.str();
}

}  // namespace qhyp
