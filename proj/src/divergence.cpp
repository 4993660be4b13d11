#include "qhyp/divergence.hpp"

#include <cmath>
#include <limits>

namespace qhyp {

namespace {

bool faithful(const SpectralDecomposition& sd)
{
    return sd.size() == 0 || sd.eigenvalues.front() > kSupportTol;
}

// x^p on the support, 0 off it
HermitianOperator support_power(const SpectralDecomposition& sd, double p)
{
    return matrix_function(sd, [p](double x) {
        if (x <= kSupportTol) return 0.0;
        return p == 0.0 ? 1.0 : std::pow(x, p);
    });
}

HermitianOperator support_log(const SpectralDecomposition& sd)
{
    return matrix_function(sd, [](double x) { return x > kSupportTol ? std::log(x) : 0.0; });
}

double trace_product(const CMatrix& x, const CMatrix& y)
{
    return x.transpose().cwiseProduct(y).sum().real();
}

double support_leak(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    const auto& sd = sigma.spectrum();
    double leak = 0.0;
    for (std::size_t k = 0; k < sd.size(); ++k) {
        if (sd.eigenvalues[k] > kSupportTol) continue;
        auto v = sd.block(k);
        leak += congruence(v, rho.op().matrix()).trace().real();
    }
    return leak;
}

}  // namespace

ExtReal psi_s(const SpectralDecomposition& a, const SpectralDecomposition& b, double s)
{
    if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "psi_s");
    if (s < 0.0 && !faithful(a))
        throw Error(ErrorCode::DomainError, "negative power of a singular first argument");
    if (s > 1.0 && !faithful(b))
        throw Error(ErrorCode::DomainError, "negative power of a singular second argument");

    CMatrix x = support_power(a, s).matrix();
    CMatrix y = support_power(b, 1.0 - s).matrix();
    double tr = trace_product(x, y);
    double noise = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(a.dim()) *
                   x.norm() * y.norm();
    if (tr <= noise || tr <= std::numeric_limits<double>::min()) return ExtReal::minus_infinity();
    return std::log(tr);
}

ExtReal psi_s(const HermitianOperator& a, const HermitianOperator& b, double s)
{
    return psi_s(spectral_decompose(a), spectral_decompose(b), s);
}

ExtReal psi_s(const DensityMatrix& rho, const DensityMatrix& sigma, double s)
{
    return psi_s(rho.spectrum(), sigma.spectrum(), s);
}

ExtReal relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    if (rho.dim() != sigma.dim()) throw Error(ErrorCode::DimensionMismatch, "relative_entropy");
    if (support_leak(rho, sigma) > kSupportTol) return ExtReal::plus_infinity();
    const auto& sr = rho.spectrum();
    double ent = 0.0;
    for (std::size_t k = 0; k < sr.size(); ++k) {
        double l = sr.eigenvalues[k];
        if (l > kSupportTol) ent += static_cast<double>(sr.multiplicities[k]) * l * std::log(l);
    }
    double cross = trace_product(rho.op().matrix(), support_log(sigma.spectrum()).matrix());
    return ent - cross;
}

ExtReal info_variance(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    if (rho.dim() != sigma.dim()) throw Error(ErrorCode::DimensionMismatch, "info_variance");
    if (support_leak(rho, sigma) > kSupportTol) return ExtReal::plus_infinity();
    CMatrix l = support_log(rho.spectrum()).matrix() - support_log(sigma.spectrum()).matrix();
    CMatrix rl = rho.op().matrix() * l;
    double first = rl.trace().real();
    double second = trace_product(rl, l);
    return second - first * first;
}

ExtReal renyi_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, double s)
{
    if (!(s >= 0.0 && s < 1.0)) throw Error(ErrorCode::DomainError, "Renyi order must lie in [0, 1)");
    ExtReal psi = psi_s(rho, sigma, s);
    if (psi.is_minus_infinity()) return ExtReal::plus_infinity();
    return psi.value() / (s - 1.0);
}

Derivatives fd_derivatives(const std::function<double(double)>& f, double s, double h)
{
    double f0 = f(s);
    auto d1 = [&](double k) { return (f(s + k) - f(s - k)) / (2.0 * k); };
    auto d2 = [&](double k) { return (f(s + k) - 2.0 * f0 + f(s - k)) / (k * k); };
    Derivatives d;
    d.first = (4.0 * d1(h / 2) - d1(h)) / 3.0;
    d.second = (4.0 * d2(h / 2) - d2(h)) / 3.0;
    return d;
}

DivergenceReport lemma1_check(const DensityMatrix& rho, const DensityMatrix& sigma, double h)
{
    if (!rho.faithful() || !sigma.faithful())
        throw Error(ErrorCode::DomainError, "derivative identities need faithful states");
    if (!(h > 0.0)) throw Error(ErrorCode::DomainError, "step must be positive");

    DivergenceReport r;
    r.D = relative_entropy(rho, sigma).value();
    r.V = info_variance(rho, sigma).value();
    r.D_sigma_rho = relative_entropy(sigma, rho).value();

    auto psi = [&](double s) { return psi_s(rho, sigma, s).value(); };
    Derivatives at1 = fd_derivatives(psi, 1.0, h);
    Derivatives at0 = fd_derivatives(psi, 0.0, h);
    r.dpsi_1 = at1.first;
    r.d2psi_1 = at1.second;
    r.dpsi_0 = at0.first;
    r.residual_D = r.dpsi_1 - r.D;
    r.residual_V = r.d2psi_1 - r.V;
    r.residual_D_sigma_rho = r.dpsi_0 + r.D_sigma_rho;

    constexpr int kGrid = 21;
    for (int k = 0; k < kGrid; ++k) {
        double s = static_cast<double>(k) / (kGrid - 1);
        r.psi_grid.emplace_back(s, psi(s));
    }
    r.min_second_difference = std::numeric_limits<double>::infinity();
    for (int k = 1; k + 1 < kGrid; ++k) {
        double dd = r.psi_grid[k - 1].second - 2.0 * r.psi_grid[k].second + r.psi_grid[k + 1].second;
        r.min_second_difference = std::min(r.min_second_difference, dd);
    }
    r.convex = r.min_second_difference >= -1e-8;
    return r;
}

}  // namespace qhyp
