#include "qhyp/modular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace qhyp {

ModularRatioTable modular_ratio_table(const SpectralDecomposition& a, const SpectralDecomposition& b)
{
    if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "modular_ratio_table");
    RMatrix w = product(a.basis.adjoint(), b.basis).cwiseAbs2();

    ModularRatioTable table;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            double ov = w.block(a.offsets[i], b.offsets[j], a.multiplicities[i], b.multiplicities[j]).sum();
            if (ov <= kOverlapTol) continue;
            double lambda = a.eigenvalues[i];
            double mu = b.eigenvalues[j];
            if (mu <= kSupportTol) {
                if (lambda <= kSupportTol) continue;
                throw Error(ErrorCode::SingularSigma,
                            "second argument vanishes on the support of the first");
            }
            table.entries.push_back({lambda, mu, ov, lambda / mu});
        }
    }
    return table;
}

ModularRatioTable modular_ratio_table(const HermitianOperator& a, const HermitianOperator& b)
{
    return modular_ratio_table(spectral_decompose(a), spectral_decompose(b));
}

ModularRatioTable modular_ratio_table(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    return modular_ratio_table(rho.spectrum(), sigma.spectrum());
}

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms)
{
    std::erase_if(atoms, [](const Atom& a) { return !(a.p > 0.0); });
    std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
    for (std::size_t i = 0; i < atoms.size();) {
        std::size_t j = i + 1;
        double mass = atoms[i].p;
        double moment = atoms[i].p * atoms[i].x;
        while (j < atoms.size() && atoms[j].x - atoms[j - 1].x < kAtomMergeTol) {
            mass += atoms[j].p;
            moment += atoms[j].p * atoms[j].x;
            ++j;
        }
        double x = (j == i + 1) ? atoms[i].x : moment / mass;
        atoms_.push_back({x, mass});
        total_ += mass;
        i = j;
    }
}

SpectralMeasure SpectralMeasure::point_mass(double x, double p)
{
    return SpectralMeasure({{x, p}});
}

double SpectralMeasure::mean() const
{
    double m = 0.0;
    for (const auto& a : atoms_) m += a.p * a.x;
    return m / total_;
}

double SpectralMeasure::variance() const
{
    double mu = mean();
    double v = 0.0;
    for (const auto& a : atoms_) v += a.p * (a.x - mu) * (a.x - mu);
    return v / total_;
}

SpectralMeasure ns_spectral_measure(const ModularRatioTable& table)
{
    std::vector<Atom> atoms;
    atoms.reserve(table.entries.size());
    for (const auto& e : table.entries) {
        if (e.lambda <= kSupportTol) continue;
        atoms.push_back({-std::log(e.ratio), e.mu * e.overlap});
    }
    return SpectralMeasure(std::move(atoms));
}

SpectralMeasure ns_spectral_measure(const HermitianOperator& a, const HermitianOperator& b)
{
    return ns_spectral_measure(modular_ratio_table(a, b));
}

SpectralMeasure ns_spectral_measure(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    return ns_spectral_measure(modular_ratio_table(rho, sigma));
}

cplx cgf(const SpectralMeasure& m, cplx z)
{
    if (m.size() == 0) throw Error(ErrorCode::DomainError, "cgf of the zero measure");
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& a : m.atoms()) shift = std::max(shift, (-z * a.x).real());
    cplx sum = 0.0;
    for (const auto& a : m.atoms()) sum += a.p * std::exp(-z * a.x - shift);
    return std::log(sum) + shift;
}

double cgf(const SpectralMeasure& m, double s)
{
    if (m.size() == 0) throw Error(ErrorCode::DomainError, "cgf of the zero measure");
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& a : m.atoms()) shift = std::max(shift, -s * a.x);
    double sum = 0.0;
    for (const auto& a : m.atoms()) sum += a.p * std::exp(-s * a.x - shift);
    return std::log(sum) + shift;
}

double measure_cdf(const SpectralMeasure& m, double x)
{
    double c = 0.0;
    for (const auto& a : m.atoms()) {
        if (a.x > x) break;
        c += a.p;
    }
    return c;
}

SpectralMeasure convolve(const SpectralMeasure& m1, const SpectralMeasure& m2)
{
    double count = static_cast<double>(m1.size()) * static_cast<double>(m2.size());
    if (count > static_cast<double>(kMaxAtoms))
        throw Error(ErrorCode::AtomExplosion,
                    std::to_string(static_cast<long long>(count)) + " atoms before merging");
    std::vector<Atom> atoms;
    atoms.reserve(m1.size() * m2.size());
    for (const auto& a : m1.atoms())
        for (const auto& b : m2.atoms()) atoms.push_back({a.x + b.x, a.p * b.p});
    return SpectralMeasure(std::move(atoms));
}

SpectralMeasure convolve_power(const SpectralMeasure& m, int n)
{
    if (n < 1) throw Error(ErrorCode::DomainError, "convolution power needs n >= 1");
    SpectralMeasure out = m;
    for (int k = 1; k < n; ++k) out = convolve(out, m);
    return out;
}

std::vector<double> sample(const SpectralMeasure& m, std::size_t count, std::uint64_t seed)
{
    if (std::abs(m.total() - 1.0) > 1e-10)
        throw Error(ErrorCode::NotNormalized, "total mass " + std::to_string(m.total()));
    std::vector<double> cdf;
    cdf.reserve(m.size());
    double c = 0.0;
    for (const auto& a : m.atoms()) cdf.push_back(c += a.p);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, m.total());
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double u = unif(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t k = std::min<std::size_t>(it - cdf.begin(), m.size() - 1);
        out.push_back(m.atoms()[k].x);
    }
    return out;
}

}  // namespace qhyp
