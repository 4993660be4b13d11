#pragma once

#include "qhyp/operator.hpp"

#include <cstdint>
#include <vector>

namespace qhyp {

inline constexpr double kOverlapTol = 1e-14;
inline constexpr double kAtomMergeTol = 1e-10;
inline constexpr std::size_t kMaxAtoms = 10'000'000;

struct RatioEntry {
    double lambda = 0.0;
    double mu = 0.0;
    double overlap = 0.0;  // Tr(P_lambda(A) P_mu(B))
    double ratio = 0.0;    // lambda / mu
};

struct ModularRatioTable {
    std::vector<RatioEntry> entries;
};

// Rows with mu = 0 are dropped when lambda = 0 as well; a row with mu = 0 and
// lambda > 0 means supp(A) is not inside supp(B) and raises SingularSigma.
ModularRatioTable modular_ratio_table(const SpectralDecomposition& a, const SpectralDecomposition& b);
ModularRatioTable modular_ratio_table(const HermitianOperator& a, const HermitianOperator& b);
ModularRatioTable modular_ratio_table(const DensityMatrix& rho, const DensityMatrix& sigma);

struct Atom {
    double x = 0.0;
    double p = 0.0;
};

class SpectralMeasure {
public:
    SpectralMeasure() = default;
    // sorts, drops zero masses, merges atoms closer than 1e-10
    explicit SpectralMeasure(std::vector<Atom> atoms);
    static SpectralMeasure point_mass(double x, double p = 1.0);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double total() const { return total_; }
    double mean() const;
    double variance() const;

private:
    std::vector<Atom> atoms_;
    double total_ = 0.0;
};

// Law of -log of the relative modular operator of (A, B) with respect to
// B^(1/2): atoms -log(lambda/mu) with mass mu * overlap. Rows with lambda = 0
// sit at +infinity and are omitted.
SpectralMeasure ns_spectral_measure(const ModularRatioTable& table);
SpectralMeasure ns_spectral_measure(const HermitianOperator& a, const HermitianOperator& b);
SpectralMeasure ns_spectral_measure(const DensityMatrix& rho, const DensityMatrix& sigma);

cplx cgf(const SpectralMeasure& m, cplx z);
double cgf(const SpectralMeasure& m, double s);
double measure_cdf(const SpectralMeasure& m, double x);
SpectralMeasure convolve(const SpectralMeasure& m1, const SpectralMeasure& m2);
SpectralMeasure convolve_power(const SpectralMeasure& m, int n);
std::vector<double> sample(const SpectralMeasure& m, std::size_t count, std::uint64_t seed);

}  // namespace qhyp
