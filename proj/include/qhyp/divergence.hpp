#pragma once

#include "qhyp/operator.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace qhyp {

// log Tr(A^s B^(1-s)); powers are taken on the support (eigenvalue > 1e-12),
// so A^0 is the support projector of A. Returns the minus-infinity sentinel
// when the trace vanishes.
ExtReal psi_s(const HermitianOperator& a, const HermitianOperator& b, double s);
ExtReal psi_s(const SpectralDecomposition& a, const SpectralDecomposition& b, double s);
ExtReal psi_s(const DensityMatrix& rho, const DensityMatrix& sigma, double s);

ExtReal relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
ExtReal info_variance(const DensityMatrix& rho, const DensityMatrix& sigma);
// s in [0, 1)
ExtReal renyi_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, double s);

struct Derivatives {
    double first = 0.0;
    double second = 0.0;
};

// Central differences at s with step h, one Richardson level (h and h/2).
Derivatives fd_derivatives(const std::function<double(double)>& f, double s, double h);

struct DivergenceReport {
    double D = 0.0;
    double V = 0.0;
    double D_sigma_rho = 0.0;
    std::vector<std::pair<double, double>> psi_grid;

    double dpsi_1 = 0.0;   // finite-difference psi'(1)
    double d2psi_1 = 0.0;  // finite-difference psi''(1)
    double dpsi_0 = 0.0;   // finite-difference psi'(0)
    double residual_D = 0.0;
    double residual_V = 0.0;
    double residual_D_sigma_rho = 0.0;
    double min_second_difference = 0.0;
    bool convex = true;
};

DivergenceReport lemma1_check(const DensityMatrix& rho, const DensityMatrix& sigma, double h = 1e-4);

}  // namespace qhyp
