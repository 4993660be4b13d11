#include <doctest.h>

#include "qhyp/divergence.hpp"
#include "qhyp/testing.hpp"
#include "support.hpp"

#include <cmath>

using namespace qhyp;

namespace {

DensityMatrix diag2(double a, double b)
{
    RVector v(2);
    v << a, b;
    return density_diag(v);
}

const DensityMatrix rho_ex = diag2(0.75, 0.25);
const DensityMatrix sigma_ex = diag2(0.5, 0.5);

double dist(const HermitianOperator& a, const HermitianOperator& b)
{
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

TestOperator random_test(Index d, test::Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RVector t(d);
    for (Index i = 0; i < d; ++i) t(i) = u(rng);
    CMatrix q = test::random_unitary(d, rng);
    return TestOperator(trusted_hermitian(q * t.cast<cplx>().asDiagonal() * q.adjoint()));
}

// direct evaluation of the pairwise-sandwich support projector
double literal_sandwich_beta(const DensityMatrix& rho, const DensityMatrix& sigma, double L)
{
    auto pr = spectral_decompose(rho.op());
    auto ps = spectral_decompose(sigma.op());
    Index d = rho.dim();
    CMatrix sum = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < pr.size(); ++i)
        for (std::size_t j = 0; j < ps.size(); ++j)
            if (pr.eigenvalues[i] >= L * ps.eigenvalues[j]) {
                CMatrix pm = ps.projector(j).matrix();
                sum += pm * pr.projector(i).matrix() * pm;
            }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sum);
    double cut = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    CMatrix t = CMatrix::Zero(d, d);
    for (Index k = 0; k < d; ++k)
        if (es.eigenvalues()(k) > cut) t += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    return (t * sigma.op().matrix()).trace().real();
}

}  // namespace

TEST_CASE("error_pair examples")
{
    auto e = error_pair(rho_ex, sigma_ex, TestOperator(HermitianOperator::identity(2)));
    CHECK(e.alpha == doctest::Approx(0.0));
    CHECK(e.beta == doctest::Approx(1.0));
    e = error_pair(rho_ex, sigma_ex, TestOperator(HermitianOperator::zero(2)));
    CHECK(e.alpha == doctest::Approx(1.0));
    CHECK(e.beta == doctest::Approx(0.0));
    RVector t(2);
    t << 1.0, 0.0;
    e = error_pair(rho_ex, sigma_ex, TestOperator(HermitianOperator::diagonal(t)));
    CHECK(e.alpha == doctest::Approx(0.25));
    CHECK(e.beta == doctest::Approx(0.5));
}

TEST_CASE("np_test examples")
{
    RVector t(2);
    t << 1.0, 0.0;
    CHECK(dist(np_test(rho_ex, sigma_ex, 0.0).op(), HermitianOperator::diagonal(t)) < 1e-14);
    CHECK(dist(np_test(rho_ex, sigma_ex, -50.0).op(), HermitianOperator::identity(2)) < 1e-14);
    CHECK(dist(np_test(rho_ex, rho_ex, 0.0).op(), HermitianOperator::zero(2)) == 0.0);
    CHECK(np_test(rho_ex, sigma_ex, 0.0).kind() == TestKind::Projector);
}

TEST_CASE("esym_star examples and identities")
{
    CHECK(esym_star(rho_ex, rho_ex) == doctest::Approx(1.0));
    CHECK(esym_star(diag2(1, 0), diag2(0, 1)) == doctest::Approx(0.0));
    CHECK(esym_star(rho_ex, sigma_ex) == doctest::Approx(0.75));

    test::Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        Index d = 2 + trial % 5;
        auto a = test::random_density(d, rng);
        auto b = test::random_density(d, rng);
        double e = esym_star(a, b);
        CHECK(std::abs(e - esym_star(b, a)) < 1e-12);
        for (double c : {0.1, 3.0})
            CHECK(std::abs(esym_star(c * a.op(), c * b.op()) - c * e) < 1e-12);
        // value at the Neyman-Pearson projector of a - b
        auto err = error_pair(a, b, positive_support_projector(a.op() - b.op()));
        CHECK(std::abs(err.alpha + err.beta - e) < 1e-10);
    }
}

TEST_CASE("esym_bounds")
{
    auto same = esym_bounds(rho_ex, rho_ex, 0.5);
    CHECK(same.lower == doctest::Approx(0.5));
    CHECK(same.upper == doctest::Approx(1.0));

    auto ex = esym_bounds(rho_ex, sigma_ex, 0.5);
    CHECK(ex.upper == doctest::Approx(std::sqrt(3.0 / 8.0) + std::sqrt(1.0 / 8.0)).epsilon(1e-13));
    CHECK(ex.upper == doctest::Approx(0.965926).epsilon(1e-6));
    CHECK(ex.lower <= 0.75);
    CHECK(0.75 <= ex.upper);

    try {
        esym_bounds(diag2(1, 0), sigma_ex, 0.5);
        FAIL("expected SingularInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularInput);
    }

    test::Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        Index d = 2 + trial % 5;
        auto a = test::random_density(d, rng);
        auto b = test::random_density(d, rng);
        double e = esym_star(a, b);
        for (int k = 1; k <= 9; ++k) {
            auto bd = esym_bounds(a, b, 0.1 * k);
            CHECK(bd.lower <= e + 1e-10);
            CHECK(e <= bd.upper + 1e-10);
        }
    }
}

TEST_CASE("markov_lower_bound")
{
    CHECK(markov_lower_bound(rho_ex, rho_ex, 0.0, 0.0) == doctest::Approx(0.5));
    CHECK(markov_lower_bound(rho_ex, sigma_ex, 60.0, 0.0) < 1e-20);

    double D = relative_entropy(rho_ex, sigma_ex).value();
    double bound = markov_lower_bound(rho_ex, sigma_ex, 1.0, D);
    double target = esym_star(sigma_ex, std::exp(-1.0) * rho_ex.op());
    CHECK(bound > 0.0);
    CHECK(bound <= target + 1e-12);

    test::Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        auto r = test::random_density(3, rng), s = test::random_density(3, rng);
        for (double theta : {-1.0, 0.0, 0.5, 2.0})
            for (double ups : {-0.5, 0.0, 1.0}) {
                double b = markov_lower_bound(r, s, theta, ups);
                CHECK(b <= esym_star(s, std::exp(-theta) * r.op()) + 1e-10);
            }
    }
}

TEST_CASE("beta_opt examples")
{
    for (double eps : {0.1, 0.5, 0.9}) {
        auto res = beta_opt(rho_ex, rho_ex, eps);
        CHECK(res.beta_star == doctest::Approx(1.0 - eps).epsilon(1e-12));
        CHECK(res.achieved_alpha <= eps + 1e-10);
    }
    auto orth = beta_opt(diag2(1, 0), diag2(0, 1), 0.1);
    CHECK(orth.beta_star == doctest::Approx(0.0));

    auto ex = beta_opt(rho_ex, sigma_ex, 0.25);
    CHECK(ex.beta_star == doctest::Approx(0.5).epsilon(1e-12));
    RVector t(2);
    t << 1.0, 0.0;
    CHECK(dist(ex.test.op(), HermitianOperator::diagonal(t)) < 1e-10);
    CHECK(ex.achieved_alpha == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(beta_opt(rho_ex, sigma_ex, 0.0), Error);
    CHECK_THROWS_AS(beta_opt(rho_ex, sigma_ex, 1.0), Error);
}

TEST_CASE("beta_opt matches the classical randomized oracle on commuting pairs")
{
    test::Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        Index d = 2 + trial % 9;
        RVector p = test::random_probability(d, rng), q = test::random_probability(d, rng);
        CMatrix u = test::random_unitary(d, rng);
        auto rho = test::rotate(density_diag(p), u);
        auto sigma = test::rotate(density_diag(q), u);
        auto law = ns_spectral_measure(sigma, rho);
        for (double eps : {0.01, 0.1, 0.37, 0.8}) {
            double oracle = test::classical_np_beta(p, q, eps);
            auto res = beta_opt(rho, sigma, eps);
            CHECK(std::abs(res.beta_star - oracle) < 1e-10);
            CHECK(std::abs(beta_opt_classical(law, eps) - oracle) < 1e-10);
            auto err = error_pair(rho, sigma, res.test);
            CHECK(err.alpha <= eps + 1e-10);
            CHECK(std::abs(err.beta - res.beta_star) < 1e-10);
        }
    }
}

TEST_CASE("beta_opt handles non-faithful commuting pairs")
{
    RVector p(4), q(4);
    p << 0.5, 0.3, 0.2, 0.0;
    q << 0.0, 0.4, 0.1, 0.5;
    auto rho = density_diag(p), sigma = density_diag(q);
    for (double eps : {0.05, 0.3, 0.5, 0.6, 0.95})
        CHECK(std::abs(beta_opt(rho, sigma, eps).beta_star - test::classical_np_beta(p, q, eps)) < 1e-10);
}

TEST_CASE("beta_opt matches Bloch-sphere brute force on qubits")
{
    test::Rng rng(13);
    for (int trial = 0; trial < 8; ++trial) {
        auto rho = test::random_density(2, rng);
        auto sigma = test::random_density(2, rng);
        for (double eps : {0.05, 0.3}) {
            double brute = test::bloch_brute_force_beta(rho.op().matrix(), sigma.op().matrix(), eps);
            auto res = beta_opt(rho, sigma, eps);
            CHECK(std::abs(res.beta_star - brute) < 1e-6);
            CHECK(res.beta_star <= brute + 1e-10);
            CHECK(error_pair(rho, sigma, res.test).alpha <= eps + 1e-10);
        }
    }
}

TEST_CASE("beta_opt is monotone and dominates explicit tests")
{
    test::Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        Index d = 2 + trial % 4;
        auto rho = test::random_density(d, rng);
        auto sigma = test::random_density(d, rng);
        double prev = 2.0;
        for (int k = 1; k < 20; ++k) {
            double eps = 0.05 * k;
            double b = beta_opt(rho, sigma, eps).beta_star;
            CHECK(b <= prev + 1e-12);
            prev = b;
        }
        for (double L : {0.5, 1.0, 2.0, 10.0}) {
            auto li = li_test(rho, sigma, L);
            if (li.alpha_actual > 0.0 && li.alpha_actual < 1.0)
                CHECK(beta_opt(rho, sigma, li.alpha_actual).beta_star <= li.beta_actual + 1e-10);
        }
        for (int k = 0; k < 20; ++k) {
            auto t = random_test(d, rng);
            auto err = error_pair(rho, sigma, t);
            if (err.alpha > 1e-6 && err.alpha < 1.0 - 1e-6)
                CHECK(beta_opt(rho, sigma, err.alpha).beta_star <= err.beta + 1e-10);
        }
    }
}

TEST_CASE("Neyman-Pearson projectors at breakpoints are optimal")
{
    test::Rng rng(61);
    for (int trial = 0; trial < 5; ++trial) {
        Index d = 3;
        auto rho = test::random_density(d, rng);
        auto sigma = test::random_density(d, rng);
        NeymanPearsonFrontier frontier(rho, sigma);
        CHECK(frontier.breakpoints().size() == static_cast<std::size_t>(d));
        std::vector<TestOperator> samples;
        for (int k = 0; k < 100; ++k) samples.push_back(random_test(d, rng));
        for (double c : frontier.breakpoints()) {
            auto tg = frontier.projector_at(std::log(c));
            auto ref = error_pair(rho, sigma, tg);
            for (const auto& t : samples) {
                auto e = error_pair(rho, sigma, t);
                if (e.alpha <= ref.alpha) CHECK(e.beta >= ref.beta - 1e-10);
            }
        }
    }
}

TEST_CASE("min_alpha inverts min_beta")
{
    test::Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        auto rho = test::random_density(3, rng);
        auto sigma = test::random_density(3, rng);
        NeymanPearsonFrontier frontier(rho, sigma);
        for (double eps : {0.1, 0.4}) {
            auto b = frontier.min_beta(eps);
            auto a = frontier.min_alpha(b.beta_star);
            CHECK(a.achieved_alpha == doctest::Approx(eps).epsilon(1e-8));
            auto err = error_pair(rho, sigma, a.test);
            CHECK(err.beta <= b.beta_star + 1e-10);
        }
    }
}

TEST_CASE("li_test examples")
{
    auto ex = li_test(rho_ex, sigma_ex, 1.0);
    RVector t(2);
    t << 1.0, 0.0;
    CHECK(dist(ex.test.op(), HermitianOperator::diagonal(t)) < 1e-12);
    CHECK(ex.alpha_actual == doctest::Approx(0.25));
    CHECK(ex.alpha_bound == doctest::Approx(0.25));
    CHECK(ex.beta_actual == doctest::Approx(0.5));
    CHECK(ex.beta_bound == doctest::Approx(1.0));

    auto low = li_test(rho_ex, sigma_ex, 0.4);
    CHECK(dist(low.test.op(), HermitianOperator::identity(2)) < 1e-12);
    CHECK(low.beta_actual <= low.beta_bound + 1e-10);

    auto high = li_test(rho_ex, sigma_ex, 2.0);
    CHECK(dist(high.test.op(), HermitianOperator::zero(2)) < 1e-12);
    CHECK(high.alpha_bound == doctest::Approx(1.0));

    try {
        li_test(rho_ex, sigma_ex, 0.0);
        FAIL("expected NonpositiveL");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonpositiveL);
    }
}

TEST_CASE("li_test guarantees on random pairs")
{
    test::Rng rng(83);
    for (int trial = 0; trial < 40; ++trial) {
        Index d = 2 + trial % 5;
        auto rho = test::random_density(d, rng);
        auto sigma = test::random_density(d, rng);
        for (double L : {0.5, 1.0, 2.0, 10.0, 100.0}) {
            auto r = li_test(rho, sigma, L);
            CHECK(r.alpha_actual <= r.alpha_bound + 1e-10);
            CHECK(r.beta_actual <= 1.0 / L + 1e-10);
            CHECK(r.test.kind() == TestKind::Projector);
        }
    }
}

TEST_CASE("pairwise sandwich support can exceed the type-II bound")
{
    // rho has eigenvectors |+>, |-> with eigenvalues 0.9, 0.1; sigma = diag(0.4, 0.6)
    CMatrix r(2, 2);
    r << 0.5, 0.4, 0.4, 0.5;
    auto rho = density(r);
    auto sigma = diag2(0.4, 0.6);
    const double L = 1.4;
    CHECK(literal_sandwich_beta(rho, sigma, L) == doctest::Approx(1.0));
    CHECK(literal_sandwich_beta(rho, sigma, L) > 1.0 / L);
    auto li = li_test(rho, sigma, L);
    CHECK(li.beta_actual <= 1.0 / L + 1e-10);
    CHECK(li.alpha_actual <= li.alpha_bound + 1e-10);
}
