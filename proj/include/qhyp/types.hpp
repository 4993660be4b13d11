#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace qhyp {

using cplx = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = Matrix<cplx>;
using RMatrix = Matrix<double>;
using CVector = Vector<cplx>;
using RVector = Vector<double>;
using Index = Eigen::Index;

inline constexpr Index kMaxDim = 4096;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kSupportTol = 1e-12;
inline constexpr double kClusterTol = 1e-10;

enum class ErrorCode {
    NotHermitian,
    NotPSD,
    TraceNotOne,
    DimensionMismatch,
    DimensionCap,
    EigenSolverFailure,
    DomainError,
    SingularSigma,
    SingularInput,
    InvalidTest,
    EpsilonOutOfRange,
    NonpositiveL,
    AtomExplosion,
    NotNormalized,
    BranchFault,
    QuadratureBudget,
    FockCap,
    InvalidSymbol,
    Unsupported,
    ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // true for the resource caps (dimension, Fock, quadrature, atom count)
    bool is_cap() const noexcept;

private:
    ErrorCode code_;
};

// A real number that may also be one of the two infinities; reports carry
// the kind explicitly instead of storing a floating infinity.
class ExtReal {
public:
    enum class Kind { Finite, PlusInfinity, MinusInfinity };

    ExtReal() = default;
    ExtReal(double v) : value_(v) {}

    static ExtReal plus_infinity() { return ExtReal(Kind::PlusInfinity); }
    static ExtReal minus_infinity() { return ExtReal(Kind::MinusInfinity); }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_plus_infinity() const { return kind_ == Kind::PlusInfinity; }
    bool is_minus_infinity() const { return kind_ == Kind::MinusInfinity; }

    // throws DomainError on a sentinel
    double value() const;
    // IEEE value, infinities included; for arithmetic only
    double as_double() const;

    std::string str() const;

private:
    explicit ExtReal(Kind k) : kind_(k) {}
    Kind kind_ = Kind::Finite;
    double value_ = 0.0;
};

}  // namespace qhyp
