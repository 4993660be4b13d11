#include "qhyp/testing.hpp"

#include "qhyp/divergence.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace qhyp {

namespace {

double trace_product(const CMatrix& x, const CMatrix& y)
{
    return x.transpose().cwiseProduct(y).sum().real();
}

// v_j^dag M v_j for every column
RVector column_expectations(const CMatrix& m, const CMatrix& v)
{
    if (v.cols() == 0) return RVector();
    return (v.conjugate().cwiseProduct(product(m, v))).colwise().sum().real().transpose();
}

double logistic_neg(double x)
{
    // 1 / (1 + e^x) without overflow
    if (x > 0) {
        double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

CMatrix select_columns(const CMatrix& v, const std::vector<Index>& idx)
{
    CMatrix out(v.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = v.col(idx[k]);
    return out;
}

CMatrix clusters_where(const SpectralDecomposition& sd, bool (*keep)(double))
{
    std::vector<Index> idx;
    for (std::size_t k = 0; k < sd.size(); ++k)
        if (keep(sd.eigenvalues[k]))
            for (Index j = 0; j < sd.multiplicities[k]; ++j) idx.push_back(sd.offsets[k] + j);
    return select_columns(sd.basis, idx);
}

}  // namespace

ErrorPair error_pair(const HermitianOperator& rho, const HermitianOperator& sigma, const TestOperator& t)
{
    if (rho.dim() != sigma.dim() || rho.dim() != t.dim())
        throw Error(ErrorCode::DimensionMismatch, "error_pair");
    const CMatrix& tm = t.op().matrix();
    ErrorPair e;
    e.alpha = rho.trace() - trace_product(tm, rho.matrix());
    e.beta = trace_product(tm, sigma.matrix());
    return e;
}

TestOperator np_test(const HermitianOperator& a, const HermitianOperator& b, double gamma)
{
    return positive_support_projector(a - std::exp(gamma) * b);
}

double esym_star(const HermitianOperator& a, const HermitianOperator& b)
{
    return 0.5 * (a.trace() + b.trace() - trace_norm(a - b));
}

EsymBounds esym_bounds(const HermitianOperator& a, const HermitianOperator& b, double s)
{
    if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::DomainError, "s must lie in [0, 1]");
    auto sa = spectral_decompose(a);
    auto sb = spectral_decompose(b);
    if (sa.eigenvalues.front() <= kSupportTol || sb.eigenvalues.front() <= kSupportTol)
        throw Error(ErrorCode::SingularInput, "symmetric-error bounds need strictly positive operators");
    auto m = ns_spectral_measure(modular_ratio_table(sa, sb));
    EsymBounds out;
    for (const auto& atom : m.atoms()) out.lower += atom.p * logistic_neg(atom.x);
    out.upper = std::exp(psi_s(sa, sb, s).as_double());
    return out;
}

double markov_lower_bound(const DensityMatrix& rho, const DensityMatrix& sigma, double theta,
                          double upsilon)
{
    if (!rho.faithful() || !sigma.faithful())
        throw Error(ErrorCode::SingularInput, "Markov bound needs faithful states");
    auto law = ns_spectral_measure(sigma, rho);
    return std::exp(-theta) * logistic_neg(upsilon - theta) * measure_cdf(law, upsilon);
}

NeymanPearsonFrontier::NeymanPearsonFrontier(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    if (rho.dim() != sigma.dim()) throw Error(ErrorCode::DimensionMismatch, "beta_opt");
    dim_ = rho.dim();
    rho_trace_ = rho.op().trace();

    auto omega = eigh(rho.op() + sigma.op());
    std::vector<Index> keep;
    for (Index i = 0; i < omega.values.size(); ++i)
        if (omega.values(i) > kSupportTol) keep.push_back(i);
    frame_ = select_columns(omega.vectors, keep);
    RVector inv_sqrt(static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        inv_sqrt(static_cast<Index>(k)) = 1.0 / std::sqrt(omega.values(keep[k]));

    rho_ = congruence(frame_, rho.op().matrix());
    sigma_ = congruence(frame_, sigma.op().matrix());
    CMatrix k = inv_sqrt.asDiagonal() * rho_ * inv_sqrt.asDiagonal();
    auto kappa = cluster(eigh(trusted_hermitian(k)));
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        double x = kappa.eigenvalues[i];
        if (x <= kClusterTol || x >= 1.0 - kClusterTol) continue;
        thresholds_.push_back(x / (1.0 - x));
        multiplicity_.push_back(kappa.multiplicities[i]);
    }

    ker_sigma_ = clusters_where(sigma.spectrum(), [](double x) { return x <= kSupportTol; });
    supp_rho_ = clusters_where(rho.spectrum(), [](double x) { return x > kSupportTol; });
}

NeymanPearsonFrontier::Eval NeymanPearsonFrontier::evaluate(double c, Index kernel_dim) const
{
    auto es = eigh(trusted_hermitian(rho_ - c * sigma_));
    const Index r = es.values.size();
    std::vector<Index> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), Index{0});
    std::vector<bool> in_kernel(static_cast<std::size_t>(r), false);
    if (kernel_dim > 0) {
        std::partial_sort(order.begin(), order.begin() + kernel_dim, order.end(),
                          [&](Index a, Index b) { return std::abs(es.values(a)) < std::abs(es.values(b)); });
        for (Index k = 0; k < kernel_dim; ++k) in_kernel[static_cast<std::size_t>(order[k])] = true;
    }
    std::vector<Index> plus, zero;
    for (Index i = 0; i < r; ++i) {
        if (in_kernel[static_cast<std::size_t>(i)])
            zero.push_back(i);
        else if (es.values(i) > 0.0)
            plus.push_back(i);
    }
    Eval e;
    e.plus = select_columns(es.vectors, plus);
    e.zero = select_columns(es.vectors, zero);
    // on an eigenvector, <rho> - c <sigma> is the eigenvalue; compute the
    // better-conditioned side directly and the other from it
    auto sums = [&](const std::vector<Index>& idx, const CMatrix& v) {
        double lam = 0.0;
        for (Index i : idx) lam += es.values(i);
        if (c <= 1.0) {
            double s = column_expectations(sigma_, v).sum();
            return std::pair{lam + c * s, s};
        }
        double r = column_expectations(rho_, v).sum();
        return std::pair{r, (r - lam) / c};
    };
    auto [rp, sp] = sums(plus, e.plus);
    auto [rz, sz] = sums(zero, e.zero);
    e.alpha_plus = rho_trace_ - rp;
    e.alpha_full = e.alpha_plus - rz;
    e.beta_plus = sp;
    e.beta_full = sp + sz;
    return e;
}

TestOperator NeymanPearsonFrontier::lift(const CMatrix& cols) const
{
    return TestOperator::projector_onto(product(frame_, cols), dim_);
}

TestOperator NeymanPearsonFrontier::lift_mix(const CMatrix& plus, const CMatrix& zero, double t) const
{
    if (t == 0.0 || zero.cols() == 0) return lift(plus);
    return TestOperator::mix(lift(plus), lift(zero), t);
}

TestOperator NeymanPearsonFrontier::projector_at(double gamma) const
{
    return lift(evaluate(std::exp(gamma), 0).plus);
}

OptimalTestResult NeymanPearsonFrontier::solve(Constraint kind, double target) const
{
    const bool on_alpha = kind == Constraint::Alpha;
    auto score_plus = [&](const Eval& e) { return on_alpha ? e.alpha_plus : -e.beta_plus; };
    auto score_full = [&](const Eval& e) { return on_alpha ? e.alpha_full : -e.beta_full; };
    const double goal = on_alpha ? target : -target;

    auto finish = [&](TestOperator t, ExtReal gamma, double weight, double alpha, double beta) {
        OptimalTestResult r;
        r.test = std::move(t);
        r.gamma_star = gamma;
        r.mix_weight = weight;
        r.achieved_alpha = std::max(alpha, 0.0);
        r.beta_star = std::max(beta, 0.0);
        return r;
    };

    // the two limits c -> infinity (test on ker sigma) and c -> 0 (test on supp rho)
    {
        TestOperator high = TestOperator::projector_onto(ker_sigma_, dim_);
        CMatrix f = product(frame_.adjoint(), ker_sigma_);
        double a_high = rho_trace_ - column_expectations(rho_, f).sum();
        if (on_alpha && target >= a_high) return finish(high, ExtReal::plus_infinity(), 0.0, a_high, 0.0);
        CMatrix g = product(frame_.adjoint(), supp_rho_);
        double b_low = column_expectations(sigma_, g).sum();
        if (!on_alpha && target >= b_low)
            return finish(TestOperator::projector_onto(supp_rho_, dim_), ExtReal::minus_infinity(), 0.0, 0.0,
                          b_low);
    }

    const std::size_t nb = thresholds_.size();
    std::map<std::size_t, Eval> memo;
    auto at = [&](std::size_t k) -> const Eval& {
        auto it = memo.find(k);
        if (it == memo.end()) it = memo.emplace(k, evaluate(thresholds_[k], multiplicity_[k])).first;
        return it->second;
    };

    std::size_t lo = 0, hi = nb;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (score_plus(at(mid)) >= goal)
            hi = mid;
        else
            lo = mid + 1;
    }
    const std::size_t ks = lo;

    if (ks < nb) {
        const Eval& e = at(ks);
        if (score_full(e) <= goal) {
            double span = score_plus(e) - score_full(e);
            double t = span > 0.0 ? std::clamp((score_plus(e) - goal) / span, 0.0, 1.0) : 0.0;
            double alpha = e.alpha_plus - t * (e.alpha_plus - e.alpha_full);
            double beta = e.beta_plus + t * (e.beta_full - e.beta_plus);
            return finish(lift_mix(e.plus, e.zero, t), std::log(thresholds_[ks]), t, alpha, beta);
        }
    }

    // the crossing lies strictly between breakpoints, where the projector
    // moves continuously with the threshold
    std::map<double, Eval> between;
    auto eval_at = [&](double g) -> const Eval& {
        auto it = between.find(g);
        if (it == between.end()) it = between.emplace(g, evaluate(std::exp(g), 0)).first;
        return it->second;
    };
    auto f = [&](double g) { return score_plus(eval_at(g)) - goal; };
    double ga, gb, fa, fb;
    if (ks > 0) {
        ga = std::log(thresholds_[ks - 1]);
        fa = score_plus(at(ks - 1)) - goal;
    } else {
        ga = nb > 0 ? std::log(thresholds_[0]) : 0.0;
        double step = 1.0;
        fa = f(ga -= step);
        while (fa >= 0.0 && ga > -700.0) fa = f(ga -= (step *= 2.0));
    }
    if (ks < nb) {
        gb = std::log(thresholds_[ks]);
        fb = score_full(at(ks)) - goal;
    } else {
        gb = nb > 0 ? std::log(thresholds_[nb - 1]) : ga;
        double step = 1.0;
        fb = f(gb += step);
        while (fb < 0.0 && gb < 700.0) fb = f(gb += (step *= 2.0));
        if (fb < 0.0) {
            // never reached at finite threshold: the kernel of sigma is the answer
            TestOperator high = TestOperator::projector_onto(ker_sigma_, dim_);
            CMatrix fk = product(frame_.adjoint(), ker_sigma_);
            double a_high = rho_trace_ - column_expectations(rho_, fk).sum();
            return finish(high, ExtReal::plus_infinity(), 0.0, a_high, 0.0);
        }
    }

    if (fa < 0.0 && fb > 0.0) {
        boost::uintmax_t iters = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
        auto bracket = boost::math::tools::toms748_solve(f, ga, gb, fa, fb, tol, iters);
        ga = bracket.first;
        gb = bracket.second;
    }
    // feasible side of the bracket
    double g = on_alpha ? ga : gb;
    const Eval& e = eval_at(g);
    return finish(lift(e.plus), g, 0.0, e.alpha_plus, e.beta_plus);
}

OptimalTestResult NeymanPearsonFrontier::min_beta(double eps) const
{
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1)");
    return solve(Constraint::Alpha, eps);
}

OptimalTestResult NeymanPearsonFrontier::min_alpha(double beta_max) const
{
    if (!(beta_max >= 0.0)) throw Error(ErrorCode::DomainError, "type-II budget must be nonnegative");
    return solve(Constraint::Beta, beta_max);
}

OptimalTestResult beta_opt(const DensityMatrix& rho, const DensityMatrix& sigma, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1)");
    return NeymanPearsonFrontier(rho, sigma).min_beta(eps);
}

double beta_opt_classical(const SpectralMeasure& law, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1)");
    const double need = law.total() - eps;
    double acc = 0.0, beta = 0.0;
    const auto& atoms = law.atoms();
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
        if (acc >= need) break;
        double q = it->p * std::exp(-it->x);
        if (acc + it->p <= need) {
            acc += it->p;
            beta += q;
        } else {
            beta += (need - acc) / it->p * q;
            acc = need;
        }
    }
    return beta;
}

double alpha_opt_classical(const SpectralMeasure& law, double beta_max)
{
    double used = 0.0, kept = 0.0;
    const auto& atoms = law.atoms();
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
        double q = it->p * std::exp(-it->x);
        if (used + q <= beta_max) {
            used += q;
            kept += it->p;
        } else {
            kept += (beta_max - used) / q * it->p;
            break;
        }
    }
    return std::max(law.total() - kept, 0.0);
}

LiTestResult li_test(const DensityMatrix& rho, const DensityMatrix& sigma, double L)
{
    if (!(L > 0.0)) throw Error(ErrorCode::NonpositiveL, "L must be positive");
    if (rho.dim() != sigma.dim()) throw Error(ErrorCode::DimensionMismatch, "li_test");
    const auto& sr = rho.spectrum();
    const auto& ss = sigma.spectrum();
    const Index d = rho.dim();

    // C(j, i) = <v_j, u_i>, masked to the sigma clusters admitted by the rho cluster of column i
    CMatrix c = product(ss.basis.adjoint(), sr.basis);
    RMatrix w = c.cwiseAbs2();
    LiTestResult out;
    for (std::size_t i = 0; i < sr.size(); ++i) {
        double lambda = sr.eigenvalues[i];
        for (std::size_t j = 0; j < ss.size(); ++j) {
            double mu = ss.eigenvalues[j];
            auto blk = c.block(ss.offsets[j], sr.offsets[i], ss.multiplicities[j], sr.multiplicities[i]);
            if (L * mu <= lambda) continue;
            blk.setZero();
            double ov = w.block(ss.offsets[j], sr.offsets[i], ss.multiplicities[j], sr.multiplicities[i]).sum();
            out.alpha_bound += lambda * ov;
        }
    }
    CMatrix g = ss.basis * c;
    auto es = eigh(trusted_hermitian(g * g.adjoint()));
    double top = es.values.size() > 0 ? es.values.cwiseAbs().maxCoeff() : 0.0;
    std::vector<Index> keep;
    for (Index k = 0; k < es.values.size(); ++k)
        if (es.values(k) > 1e-12 * top) keep.push_back(k);
    out.test = TestOperator::projector_onto(select_columns(es.vectors, keep), d);
    auto e = error_pair(rho, sigma, out.test);
    out.alpha_actual = e.alpha;
    out.beta_actual = e.beta;
    out.beta_bound = 1.0 / L;
    return out;
}

}  // namespace qhyp
