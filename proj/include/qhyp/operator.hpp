#pragma once

#include "qhyp/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace qhyp {

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = kHermitianTol)
{
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <typename A, typename B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
    using Scalar = typename A::Scalar;
    Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

class HermitianOperator {
public:
    HermitianOperator() = default;
    // Symmetrizes after checking |M - M^dag| <= tol entrywise.
    explicit HermitianOperator(const CMatrix& m, double tol = kHermitianTol);

    static HermitianOperator from_real(const RMatrix& m);
    static HermitianOperator diagonal(const RVector& d);
    static HermitianOperator identity(Index n);
    static HermitianOperator zero(Index n);

    Index dim() const { return m_.rows(); }
    const CMatrix& matrix() const { return m_; }
    bool is_real() const { return real_; }
    double trace() const { return m_.trace().real(); }

    HermitianOperator operator-() const;
    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b);
    friend HermitianOperator operator*(double c, const HermitianOperator& a);

private:
    struct Trusted {};
    HermitianOperator(CMatrix m, Trusted);
    friend HermitianOperator trusted_hermitian(CMatrix m);

    CMatrix m_;
    bool real_ = true;
};

// Wraps a matrix already known to be Hermitian up to rounding; symmetrizes
// without the tolerance check.
HermitianOperator trusted_hermitian(CMatrix m);

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);
HermitianOperator kron_power(const HermitianOperator& a, int n, Index max_dim = kMaxDim);

// Raw eigenpairs, ascending.
struct Eigensystem {
    RVector values;
    CMatrix vectors;
};

Eigensystem eigh(const HermitianOperator& h);

// a * b, in real arithmetic when both factors have zero imaginary part
CMatrix product(const CMatrix& a, const CMatrix& b);
// a^dag * b * a
CMatrix congruence(const CMatrix& a, const CMatrix& b);

class SpectralDecomposition {
public:
    // distinct clustered eigenvalues, ascending
    std::vector<double> eigenvalues;
    std::vector<Index> multiplicities;
    // eigenvectors, cluster k occupying columns [offsets[k], offsets[k] + multiplicities[k])
    CMatrix basis;
    std::vector<Index> offsets;

    std::size_t size() const { return eigenvalues.size(); }
    Index dim() const { return basis.rows(); }
    auto block(std::size_t k) const { return basis.middleCols(offsets[k], multiplicities[k]); }
    HermitianOperator projector(std::size_t k) const;
    HermitianOperator reconstruct() const;
    double norm() const;
};

SpectralDecomposition spectral_decompose(const HermitianOperator& h,
                                         double cluster_tol = kClusterTol);
SpectralDecomposition cluster(const Eigensystem& es, double cluster_tol = kClusterTol);

class DensityMatrix {
public:
    const HermitianOperator& op() const { return op_; }
    operator const HermitianOperator&() const { return op_; }
    Index dim() const { return op_.dim(); }
    bool faithful() const { return faithful_; }
    double min_eig() const { return min_eig_; }
    const SpectralDecomposition& spectrum() const { return *spectrum_; }

private:
    friend DensityMatrix validate_density(const HermitianOperator& m, double faithfulness_tol);
    DensityMatrix() = default;

    HermitianOperator op_;
    bool faithful_ = false;
    double min_eig_ = 0.0;
    std::shared_ptr<const SpectralDecomposition> spectrum_;
};

DensityMatrix validate_density(const HermitianOperator& m, double faithfulness_tol = 1e-12);
DensityMatrix density(const CMatrix& m);
DensityMatrix density_diag(const RVector& p);

enum class TestKind { Projector, General };

class TestOperator {
public:
    TestOperator() = default;
    // throws InvalidTest unless the spectrum lies in [-1e-12, 1 + 1e-12]
    TestOperator(HermitianOperator op, TestKind kind = TestKind::General);

    // T = V V^dag for orthonormal columns V; no spectral check needed
    static TestOperator projector_onto(const CMatrix& orthonormal_cols, Index dim);
    // P + t Q for orthogonal projectors P, Q and t in [0, 1]
    static TestOperator mix(const TestOperator& p, const TestOperator& q, double t);

    const HermitianOperator& op() const { return op_; }
    TestKind kind() const { return kind_; }
    Index dim() const { return op_.dim(); }

private:
    struct Trusted {};
    TestOperator(HermitianOperator op, TestKind kind, Trusted) : op_(std::move(op)), kind_(kind) {}
    HermitianOperator op_;
    TestKind kind_ = TestKind::Projector;
};

HermitianOperator positive_part(const HermitianOperator& h);
TestOperator positive_support_projector(const HermitianOperator& h);
HermitianOperator matrix_function(const HermitianOperator& h, const std::function<double(double)>& f);
HermitianOperator matrix_function(const SpectralDecomposition& sd, const std::function<double(double)>& f);
double trace_norm(const HermitianOperator& h);

// operator norm of a Hermitian operator (largest |eigenvalue|)
double op_norm(const HermitianOperator& h);
bool commutes(const HermitianOperator& a, const HermitianOperator& b, double tol = 1e-12);

}  // namespace qhyp
