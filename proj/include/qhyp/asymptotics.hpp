#pragma once

#include "qhyp/models.hpp"
#include "qhyp/testing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qhyp {

double normal_cdf(double x);
double normal_quantile(double p);

// D_n, V_n from the model's fast path if it has one, otherwise from the dense states
Divergences model_divergences(const ModelSequence& model, int n);
// law of X_n (the measure of (sigma_n | rho_n)), fast path first
SpectralMeasure model_law(const ModelSequence& model, int n);
// E_n(z) = log Tr(rho_n^(1-z) sigma_n^z)
cplx model_log_mgf(const ModelSequence& model, int n, cplx z);

struct RateEstimate {
    struct Row {
        int n = 0;
        double w = 0.0;
        double D = 0.0;
        double V = 0.0;
        double d = 0.0;  // D_n / w_n
        double v = 0.0;  // V_n / w_n
    };
    double d_hat = 0.0;
    double v_hat = 0.0;
    std::vector<Row> per_n;
    // (n, D_n - w_n d_hat)
    std::vector<std::pair<int, double>> delta_D;
    // |d_n - d_m| and |v_n - v_m| between successive entries of n_list
    std::vector<double> cauchy_d;
    std::vector<double> cauchy_v;
};

RateEstimate rate_estimates(const ModelSequence& model, const std::vector<int>& n_list);

double second_order_prediction(double d, double v, double w_n, double eps);

struct ExpansionOptions {
    // true: first order is D_n; false: w_n d with d the rate
    bool per_n_divergence = true;
    std::optional<double> d_override;
    std::optional<double> v_override;
};

struct ExpansionRow {
    int n = 0;
    double w = 0.0;
    ExtReal exact;  // -log beta_n(eps)
    double first_order = 0.0;
    double second_order_pred = 0.0;
    double residual = 0.0;
    double residual_over_sqrt_wn = 0.0;
    double residual_over_log_wn = 0.0;  // NaN where log w_n = 0
};

struct ExpansionReport {
    double eps = 0.0;
    double d = 0.0;
    double v = 0.0;
    std::vector<ExpansionRow> rows;
};

// beta_n(eps), classical when the model commutes and has a measure fast path
double model_beta_opt(const ModelSequence& model, int n, double eps);

ExpansionReport expansion_experiment(const ModelSequence& model, double eps, const std::vector<int>& n_list,
                                     const ExpansionOptions& options = {});

struct BrycReport {
    double r = 0.0;
    std::vector<cplx> grid;
    double sup_bound = 0.0;
    // (n, max over the grid of |E_n / w_n - E_m / w_m|), m the previous n
    std::vector<std::pair<int, double>> cauchy_decay;
    bool analytic_ok = true;
    std::string fault;
};

// grid: the origin plus grid_size points on each of the circles |z| = r/2 and |z| = r
std::vector<cplx> bryc_grid(double r, int grid_size);
BrycReport bryc_check(const ModelSequence& model, double r, const std::vector<int>& n_list, int grid_size);

// Kolmogorov distance between Y_n = (X_n - D_n)/sqrt(w_n) and N(0, v), with
// v = V_n / w_n unless overridden; exact over all t.
double clt_diagnostic(const ModelSequence& model, int n, std::optional<double> v_override = std::nullopt);
double kolmogorov_to_normal(const SpectralMeasure& law, double w, double v);

struct AlphaCurvePoint {
    double t2 = 0.0;
    double alpha_proxy = 0.0;
    double phi_prediction = 0.0;
};

// smallest type-I error among tests with -log beta >= D_n + sqrt(w_n) t2
std::vector<AlphaCurvePoint> alpha_curve(const ModelSequence& model, int n, const std::vector<double>& t2_grid);

}  // namespace qhyp
