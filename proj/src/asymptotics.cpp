#include "qhyp/asymptotics.hpp"

#include "qhyp/divergence.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace qhyp {

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "quantile needs p in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

Divergences model_divergences(const ModelSequence& model, int n)
{
    if (model.fast_divergences) return model.fast_divergences(n);
    auto pair = model.state_pair_fn(n);
    return Divergences{relative_entropy(pair.rho, pair.sigma).value(), info_variance(pair.rho, pair.sigma).value()};
}

SpectralMeasure model_law(const ModelSequence& model, int n)
{
    if (model.fast_measure) return model.fast_measure(n);
    auto pair = model.state_pair_fn(n);
    return ns_spectral_measure(pair.sigma, pair.rho);
}

cplx model_log_mgf(const ModelSequence& model, int n, cplx z)
{
    if (model.fast_psi) return model.fast_psi(n, z);
    return cgf(model_law(model, n), z);
}

RateEstimate rate_estimates(const ModelSequence& model, const std::vector<int>& n_list)
{
    RateEstimate out;
    for (int n : n_list) {
        auto dv = model_divergences(model, n);
        double w = model.weight_fn(n);
        out.per_n.push_back({n, w, dv.D, dv.V, dv.D / w, dv.V / w});
    }
    if (out.per_n.empty()) return out;
    out.d_hat = out.per_n.back().d;
    out.v_hat = out.per_n.back().v;
    for (std::size_t i = 0; i < out.per_n.size(); ++i) {
        const auto& r = out.per_n[i];
        out.delta_D.emplace_back(r.n, r.D - r.w * out.d_hat);
        if (i > 0) {
            out.cauchy_d.push_back(std::abs(r.d - out.per_n[i - 1].d));
            out.cauchy_v.push_back(std::abs(r.v - out.per_n[i - 1].v));
        }
    }
    return out;
}

double second_order_prediction(double d, double v, double w_n, double eps)
{
    if (v < 0.0) throw Error(ErrorCode::DomainError, "variance must be nonnegative");
    if (v == 0.0) return w_n * d;
    return w_n * d + std::sqrt(w_n * v) * normal_quantile(eps);
}

double model_beta_opt(const ModelSequence& model, int n, double eps)
{
    if (model.commuting && model.fast_measure) return beta_opt_classical(model.fast_measure(n), eps);
    auto pair = model.state_pair_fn(n);
    return beta_opt(pair.rho, pair.sigma, eps).beta_star;
}

ExpansionReport expansion_experiment(const ModelSequence& model, double eps, const std::vector<int>& n_list,
                                     const ExpansionOptions& options)
{
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1)");
    ExpansionReport rep;
    rep.eps = eps;
    if (n_list.empty()) return rep;
    auto rates = rate_estimates(model, n_list);
    rep.d = options.d_override.value_or(rates.d_hat);
    rep.v = options.v_override.value_or(rates.v_hat);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const auto& pr = rates.per_n[i];
        ExpansionRow row;
        row.n = pr.n;
        row.w = pr.w;
        double beta = model_beta_opt(model, pr.n, eps);
        row.exact = beta > 0.0 ? ExtReal(-std::log(beta)) : ExtReal::plus_infinity();
        row.first_order = options.per_n_divergence ? pr.D : pr.w * rep.d;
        row.second_order_pred = row.first_order + (rep.v > 0.0 ? std::sqrt(pr.w * rep.v) * normal_quantile(eps) : 0.0);
        if (row.exact.is_finite()) {
            row.residual = row.exact.value() - row.second_order_pred;
            row.residual_over_sqrt_wn = row.residual / std::sqrt(pr.w);
            double lw = std::log(pr.w);
            row.residual_over_log_wn = lw > 0.0 ? row.residual / lw : nan;
        } else {
            row.residual = row.residual_over_sqrt_wn = row.residual_over_log_wn = nan;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<cplx> bryc_grid(double r, int grid_size)
{
    std::vector<cplx> g{0.0};
    for (double radius : {0.5 * r, r})
        for (int k = 0; k < grid_size; ++k)
            g.push_back(std::polar(radius, 2.0 * std::numbers::pi * k / grid_size));
    return g;
}

BrycReport bryc_check(const ModelSequence& model, double r, const std::vector<int>& n_list, int grid_size)
{
    if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "radius must be positive");
    BrycReport rep;
    rep.r = r;
    rep.grid = bryc_grid(r, grid_size);
    std::vector<cplx> prev;
    for (int n : n_list) {
        const double w = model.weight_fn(n);
        std::vector<cplx> vals;
        try {
            std::optional<SpectralMeasure> law;
            if (!model.fast_psi) law = model_law(model, n);
            for (cplx z : rep.grid) {
                cplx e = law ? cgf(*law, z) : model.fast_psi(n, z);
                vals.push_back(e / w);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BranchFault) throw;
            rep.analytic_ok = false;
            rep.fault = e.what();
            prev.clear();
            continue;
        }
        double diff = 0.0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
            if (!std::isfinite(vals[k].real()) || !std::isfinite(vals[k].imag())) rep.analytic_ok = false;
            rep.sup_bound = std::max(rep.sup_bound, std::abs(vals[k]));
            if (!prev.empty()) diff = std::max(diff, std::abs(vals[k] - prev[k]));
        }
        if (!prev.empty()) rep.cauchy_decay.emplace_back(n, diff);
        prev = std::move(vals);
    }
    return rep;
}

double kolmogorov_to_normal(const SpectralMeasure& law, double w, double v)
{
    const double mean = law.mean();
    const double total = law.total();
    const double scale = std::sqrt(w);
    double dist = 0.0;
    if (v <= 1e-14) {
        // point mass at 0: distance to the unit step
        double below = 0.0, above = 0.0;
        for (const auto& a : law.atoms()) {
            double y = (a.x - mean) / scale;
            if (y < -1e-9) below += a.p;
            if (y > 1e-9) above += a.p;
        }
        return std::max(below, above) / total;
    }
    const double sd = std::sqrt(v);
    double F = 0.0;
    for (const auto& a : law.atoms()) {
        double G = normal_cdf((a.x - mean) / scale / sd);
        dist = std::max(dist, std::abs(F - G));
        F += a.p / total;
        dist = std::max(dist, std::abs(F - G));
    }
    return dist;
}

double clt_diagnostic(const ModelSequence& model, int n, std::optional<double> v_override)
{
    auto law = model_law(model, n);
    const double w = model.weight_fn(n);
    double v = v_override.value_or(law.variance() / w);
    return kolmogorov_to_normal(law, w, v);
}

std::vector<AlphaCurvePoint> alpha_curve(const ModelSequence& model, int n, const std::vector<double>& t2_grid)
{
    const double w = model.weight_fn(n);
    const auto dv = model_divergences(model, n);
    const double v = dv.V / w;
    const bool classical = model.commuting && static_cast<bool>(model.fast_measure);

    std::optional<SpectralMeasure> law;
    std::optional<NeymanPearsonFrontier> frontier;
    if (classical) {
        law = model.fast_measure(n);
    } else {
        auto pair = model.state_pair_fn(n);
        frontier.emplace(pair.rho, pair.sigma);
    }
    std::vector<AlphaCurvePoint> out;
    for (double t2 : t2_grid) {
        double budget = std::exp(-(dv.D + std::sqrt(w) * t2));
        AlphaCurvePoint p;
        p.t2 = t2;
        p.alpha_proxy = classical ? alpha_opt_classical(*law, budget) : frontier->min_alpha(budget).achieved_alpha;
        if (v > 0.0)
            p.phi_prediction = normal_cdf(t2 / std::sqrt(v));
        else
            p.phi_prediction = t2 < 0.0 ? 0.0 : (t2 > 0.0 ? 1.0 : 0.5);
        out.push_back(p);
    }
    return out;
}

}  // namespace qhyp
