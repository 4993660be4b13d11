#include "qhyp/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qhyp {

namespace {

void check_dim(Index n)
{
    if (n > kMaxDim)
        throw Error(ErrorCode::DimensionCap,
                    "dimension " + std::to_string(n) + " exceeds " + std::to_string(kMaxDim));
}

bool imag_is_zero(const CMatrix& m)
{
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (m(i, j).imag() != 0.0) return false;
    return true;
}

}  // namespace

HermitianOperator::HermitianOperator(const CMatrix& m, double tol)
{
    if (m.rows() != m.cols())
        throw Error(ErrorCode::DimensionMismatch, "operator must be square");
    check_dim(m.rows());
    if (m.size() > 0 && !is_hermitian(m, tol))
        throw Error(ErrorCode::NotHermitian, "entries differ from their conjugate transpose");
    m_ = 0.5 * (m + m.adjoint());
    real_ = imag_is_zero(m_);
}

HermitianOperator::HermitianOperator(CMatrix m, Trusted) : m_(std::move(m))
{
    check_dim(m_.rows());
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
    real_ = imag_is_zero(m_);
}

HermitianOperator trusted_hermitian(CMatrix m)
{
    return HermitianOperator(std::move(m), HermitianOperator::Trusted{});
}

HermitianOperator HermitianOperator::from_real(const RMatrix& m)
{
    return HermitianOperator(CMatrix(m.cast<cplx>()));
}

HermitianOperator HermitianOperator::diagonal(const RVector& d)
{
    return trusted_hermitian(d.cast<cplx>().asDiagonal().toDenseMatrix());
}

HermitianOperator HermitianOperator::identity(Index n)
{
    return trusted_hermitian(CMatrix::Identity(n, n));
}

HermitianOperator HermitianOperator::zero(Index n)
{
    return trusted_hermitian(CMatrix::Zero(n, n));
}

HermitianOperator HermitianOperator::operator-() const
{
    return trusted_hermitian(-m_);
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b)
{
    if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "operator sum");
    return trusted_hermitian(a.m_ + b.m_);
}

HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b)
{
    if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "operator difference");
    return trusted_hermitian(a.m_ - b.m_);
}

HermitianOperator operator*(double c, const HermitianOperator& a)
{
    return trusted_hermitian(c * a.m_);
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b)
{
    check_dim(a.dim() * b.dim());
    return trusted_hermitian(kron(a.matrix(), b.matrix()));
}

HermitianOperator kron_power(const HermitianOperator& a, int n, Index max_dim)
{
    if (n < 1) throw Error(ErrorCode::DomainError, "tensor power needs n >= 1");
    double d = std::pow(static_cast<double>(a.dim()), n);
    if (d > static_cast<double>(std::min(max_dim, kMaxDim)))
        throw Error(ErrorCode::DimensionCap,
                    "tensor power dimension " + std::to_string(static_cast<long long>(d)) +
                        " exceeds cap");
    CMatrix out = a.matrix();
    for (int k = 1; k < n; ++k) out = kron(out, a.matrix());
    return trusted_hermitian(std::move(out));
}

CMatrix product(const CMatrix& a, const CMatrix& b)
{
    if (a.imag().isZero(0.0) && b.imag().isZero(0.0)) {
        RMatrix r = a.real() * b.real();
        return r.cast<cplx>();
    }
    return a * b;
}

CMatrix congruence(const CMatrix& a, const CMatrix& b)
{
    return product(a.adjoint(), product(b, a));
}

Eigensystem eigh(const HermitianOperator& h)
{
    Eigensystem es;
    if (h.dim() == 0) return es;
    if (h.is_real()) {
        Eigen::SelfAdjointEigenSolver<RMatrix> solver(h.matrix().real());
        if (solver.info() != Eigen::Success)
            throw Error(ErrorCode::EigenSolverFailure, "real symmetric eigensolver");
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
        if (solver.info() != Eigen::Success)
            throw Error(ErrorCode::EigenSolverFailure, "Hermitian eigensolver");
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors();
    }
    return es;
}

SpectralDecomposition cluster(const Eigensystem& es, double cluster_tol)
{
    SpectralDecomposition sd;
    sd.basis = es.vectors;
    const Index n = es.values.size();
    if (n == 0) return sd;
    double norm = es.values.cwiseAbs().maxCoeff();
    double scale = cluster_tol * std::max(1.0, norm);

    Index start = 0;
    for (Index i = 1; i <= n; ++i) {
        if (i == n || es.values(i) - es.values(i - 1) > scale) {
            double mean = es.values.segment(start, i - start).mean();
            // a cluster that would merge with 0 is 0
            if (std::abs(mean) <= scale) mean = 0.0;
            sd.eigenvalues.push_back(mean);
            sd.multiplicities.push_back(i - start);
            sd.offsets.push_back(start);
            start = i;
        }
    }
    return sd;
}

SpectralDecomposition spectral_decompose(const HermitianOperator& h, double cluster_tol)
{
    return cluster(eigh(h), cluster_tol);
}

HermitianOperator SpectralDecomposition::projector(std::size_t k) const
{
    CMatrix v = block(k);
    return trusted_hermitian(product(v, v.adjoint()));
}

HermitianOperator SpectralDecomposition::reconstruct() const
{
    return matrix_function(*this, [](double x) { return x; });
}

double SpectralDecomposition::norm() const
{
    if (eigenvalues.empty()) return 0.0;
    return std::max(std::abs(eigenvalues.front()), std::abs(eigenvalues.back()));
}

DensityMatrix validate_density(const HermitianOperator& m, double faithfulness_tol)
{
    auto sd = std::make_shared<SpectralDecomposition>(spectral_decompose(m));
    double min_eig = sd->eigenvalues.empty() ? 0.0 : sd->eigenvalues.front();
    if (min_eig < -1e-12)
        throw Error(ErrorCode::NotPSD, "minimum eigenvalue " + std::to_string(min_eig));
    double tr = m.trace();
    if (std::abs(tr - 1.0) > 1e-12)
        throw Error(ErrorCode::TraceNotOne, "trace " + std::to_string(tr));
    DensityMatrix out;
    out.op_ = m;
    out.min_eig_ = min_eig;
    out.faithful_ = min_eig > faithfulness_tol;
    out.spectrum_ = std::move(sd);
    return out;
}

DensityMatrix density(const CMatrix& m)
{
    return validate_density(HermitianOperator(m));
}

DensityMatrix density_diag(const RVector& p)
{
    return validate_density(HermitianOperator::diagonal(p));
}

TestOperator::TestOperator(HermitianOperator op, TestKind kind) : op_(std::move(op)), kind_(kind)
{
    auto es = eigh(op_);
    if (es.values.size() > 0 &&
        (es.values.minCoeff() < -1e-12 || es.values.maxCoeff() > 1.0 + 1e-12))
        throw Error(ErrorCode::InvalidTest, "test spectrum outside [0, 1]");
}

TestOperator TestOperator::projector_onto(const CMatrix& cols, Index dim)
{
    if (cols.cols() == 0) return TestOperator(HermitianOperator::zero(dim), TestKind::Projector, Trusted{});
    return TestOperator(trusted_hermitian(product(cols, cols.adjoint())), TestKind::Projector, Trusted{});
}

TestOperator TestOperator::mix(const TestOperator& p, const TestOperator& q, double t)
{
    t = std::clamp(t, 0.0, 1.0);
    TestKind kind = (t == 0.0 || (t == 1.0 && q.kind() == TestKind::Projector)) ? p.kind()
                                                                                 : TestKind::General;
    return TestOperator(trusted_hermitian(p.op().matrix() + t * q.op().matrix()), kind, Trusted{});
}

HermitianOperator matrix_function(const SpectralDecomposition& sd,
                                  const std::function<double(double)>& f)
{
    const Index n = sd.dim();
    std::vector<Index> live;
    std::vector<double> fx;
    for (std::size_t k = 0; k < sd.size(); ++k) {
        double v = f(sd.eigenvalues[k]);
        if (!std::isfinite(v))
            throw Error(ErrorCode::DomainError,
                        "function undefined at eigenvalue " + std::to_string(sd.eigenvalues[k]));
        if (v == 0.0) continue;
        for (Index j = 0; j < sd.multiplicities[k]; ++j) {
            live.push_back(sd.offsets[k] + j);
            fx.push_back(v);
        }
    }
    if (live.empty()) return HermitianOperator::zero(n);
    const Index m = static_cast<Index>(live.size());
    CMatrix v(n, m), fv(n, m);
    for (Index k = 0; k < m; ++k) {
        v.col(k) = sd.basis.col(live[static_cast<std::size_t>(k)]);
        fv.col(k) = fx[static_cast<std::size_t>(k)] * v.col(k);
    }
    return trusted_hermitian(product(fv, v.adjoint()));
}

HermitianOperator matrix_function(const HermitianOperator& h, const std::function<double(double)>& f)
{
    return matrix_function(spectral_decompose(h), f);
}

HermitianOperator positive_part(const HermitianOperator& h)
{
    return matrix_function(h, [](double x) { return x > 0.0 ? x : 0.0; });
}

TestOperator positive_support_projector(const HermitianOperator& h)
{
    auto sd = spectral_decompose(h);
    Index first = h.dim();
    for (std::size_t k = 0; k < sd.size(); ++k) {
        if (sd.eigenvalues[k] > 0.0) {
            first = sd.offsets[k];
            break;
        }
    }
    return TestOperator::projector_onto(sd.basis.rightCols(h.dim() - first), h.dim());
}

double trace_norm(const HermitianOperator& h)
{
    auto sd = spectral_decompose(h);
    double sum = 0.0;
    for (std::size_t k = 0; k < sd.size(); ++k)
        sum += std::abs(sd.eigenvalues[k]) * static_cast<double>(sd.multiplicities[k]);
    return sum;
}

double op_norm(const HermitianOperator& h)
{
    if (h.dim() == 0) return 0.0;
    return eigh(h).values.cwiseAbs().maxCoeff();
}

bool commutes(const HermitianOperator& a, const HermitianOperator& b, double tol)
{
    const CMatrix& x = a.matrix();
    const CMatrix& y = b.matrix();
    return (x * y - y * x).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qhyp
