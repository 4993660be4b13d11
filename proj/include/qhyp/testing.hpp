#pragma once

#include "qhyp/modular.hpp"
#include "qhyp/operator.hpp"

#include <optional>
#include <vector>

namespace qhyp {

struct ErrorPair {
    double alpha = 0.0;
    double beta = 0.0;
};

ErrorPair error_pair(const HermitianOperator& rho, const HermitianOperator& sigma, const TestOperator& t);

// projector onto the strictly positive part of A - e^gamma B
TestOperator np_test(const HermitianOperator& a, const HermitianOperator& b, double gamma);

double esym_star(const HermitianOperator& a, const HermitianOperator& b);

struct EsymBounds {
    double lower = 0.0;
    double upper = 0.0;
};

EsymBounds esym_bounds(const HermitianOperator& a, const HermitianOperator& b, double s);

double markov_lower_bound(const DensityMatrix& rho, const DensityMatrix& sigma, double theta,
                          double upsilon);

struct OptimalTestResult {
    double beta_star = 0.0;
    TestOperator test;
    // log of the threshold c in rho - c sigma; +inf when the test lives on ker(sigma)
    ExtReal gamma_star;
    double mix_weight = 0.0;
    double achieved_alpha = 0.0;
};

// The optimal trade-off curve between the two errors. Thresholds c at which
// rho - c sigma changes rank are the generalized eigenvalues of the pencil;
// between them the Neyman-Pearson projector moves continuously.
class NeymanPearsonFrontier {
public:
    NeymanPearsonFrontier(const DensityMatrix& rho, const DensityMatrix& sigma);

    // min beta subject to alpha <= eps
    OptimalTestResult min_beta(double eps) const;
    // min alpha subject to beta <= beta_max
    OptimalTestResult min_alpha(double beta_max) const;

    // rank-change thresholds c, ascending
    const std::vector<double>& breakpoints() const { return thresholds_; }
    // Neyman-Pearson projector at threshold e^gamma
    TestOperator projector_at(double gamma) const;

private:
    struct Eval {
        CMatrix plus;  // columns spanning the positive eigenspace (restricted frame)
        CMatrix zero;  // columns spanning the kernel
        double alpha_plus, alpha_full, beta_plus, beta_full;
    };
    enum class Constraint { Alpha, Beta };

    Eval evaluate(double c, Index kernel_dim) const;
    OptimalTestResult solve(Constraint kind, double target) const;
    TestOperator lift(const CMatrix& cols) const;
    TestOperator lift_mix(const CMatrix& plus, const CMatrix& zero, double t) const;

    Index dim_ = 0;
    CMatrix frame_;  // orthonormal basis of supp(rho + sigma)
    CMatrix rho_, sigma_;
    std::vector<double> thresholds_;
    std::vector<Index> multiplicity_;
    CMatrix ker_sigma_;  // basis of ker(sigma)
    CMatrix supp_rho_;   // basis of supp(rho)
    double rho_trace_ = 1.0;
};

OptimalTestResult beta_opt(const DensityMatrix& rho, const DensityMatrix& sigma, double eps);

// Exact optimum for commuting pairs from the law of the log-likelihood ratio
// X = log(lambda/mu) under rho (that is, the measure of (sigma|rho)); the
// sigma-mass of an atom is p e^(-x).
double beta_opt_classical(const SpectralMeasure& law_sigma_given_rho, double eps);
// min alpha subject to beta <= beta_max, same inputs
double alpha_opt_classical(const SpectralMeasure& law_sigma_given_rho, double beta_max);

struct LiTestResult {
    TestOperator test;
    double alpha_bound = 0.0;
    double beta_bound = 0.0;
    double alpha_actual = 0.0;
    double beta_actual = 0.0;
};

// Projector onto the span of Q_lambda P_lambda(rho) over the eigenvalues
// lambda of rho, where Q_lambda projects onto the eigenspaces of sigma with
// L mu <= lambda.
LiTestResult li_test(const DensityMatrix& rho, const DensityMatrix& sigma, double L);

}  // namespace qhyp
