#include <doctest.h>

#include "qhyp/operator.hpp"
#include "support.hpp"

#include <cmath>

using namespace qhyp;

namespace {

RVector vec(std::initializer_list<double> xs)
{
    RVector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

double dist(const HermitianOperator& a, const HermitianOperator& b)
{
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("Hermitian construction rejects non-Hermitian input")
{
    CMatrix m(2, 2);
    m << 1, 2, 0, 1;
    CHECK_THROWS_AS(HermitianOperator{m}, Error);
    m << 1, cplx(0, 1), cplx(0, -1), 1;
    CHECK_NOTHROW(HermitianOperator{m});
    CHECK_THROWS_AS(HermitianOperator(CMatrix(2, 3)), Error);
}

TEST_CASE("validate_density")
{
    auto half = validate_density(HermitianOperator::diagonal(vec({0.5, 0.5})));
    CHECK(half.faithful());
    CHECK(half.min_eig() == doctest::Approx(0.5).epsilon(1e-14));

    auto pure = validate_density(HermitianOperator::diagonal(vec({1.0, 0.0})));
    CHECK_FALSE(pure.faithful());

    try {
        validate_density(HermitianOperator::diagonal(vec({0.6, 0.6})));
        FAIL("expected TraceNotOne");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TraceNotOne);
    }
    try {
        validate_density(HermitianOperator::diagonal(vec({1.1, -0.1})));
        FAIL("expected NotPSD");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotPSD);
    }
}

TEST_CASE("spectral_decompose clusters and reconstructs")
{
    auto sd = spectral_decompose(HermitianOperator::diagonal(vec({0.75, 0.25})));
    REQUIRE(sd.size() == 2);
    CHECK(sd.eigenvalues[0] == doctest::Approx(0.25));
    CHECK(sd.eigenvalues[1] == doctest::Approx(0.75));
    CHECK(sd.multiplicities[0] == 1);

    auto id = spectral_decompose(HermitianOperator::identity(3));
    REQUIRE(id.size() == 1);
    CHECK(id.multiplicities[0] == 3);
    CHECK(dist(id.projector(0), HermitianOperator::identity(3)) < 1e-14);

    // Pauli X: eigenvalues -1, 1 with projectors (I -+ X)/2
    auto x = HermitianOperator::from_real((RMatrix(2, 2) << 0, 1, 1, 0).finished());
    auto sx = spectral_decompose(x);
    REQUIRE(sx.size() == 2);
    CHECK(sx.eigenvalues[0] == doctest::Approx(-1.0));
    auto minus = 0.5 * (HermitianOperator::identity(2) - x);
    auto plus = 0.5 * (HermitianOperator::identity(2) + x);
    CHECK(dist(sx.projector(0), minus) < 1e-14);
    CHECK(dist(sx.projector(1), plus) < 1e-14);

    // near-degenerate eigenvalues merge, distinct ones stay apart
    auto near = spectral_decompose(HermitianOperator::diagonal(vec({1.0, 1.0 + 1e-12, 2.0})));
    CHECK(near.size() == 2);
    CHECK(near.multiplicities[0] == 2);
}

TEST_CASE("spectral decomposition invariants on random operators")
{
    test::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Index d = 2 + trial % 5;
        auto h = test::random_hermitian(d, rng);
        auto sd = spectral_decompose(h);
        CMatrix sum = CMatrix::Zero(d, d);
        for (std::size_t k = 0; k < sd.size(); ++k) {
            sum += sd.projector(k).matrix();
            for (std::size_t l = k + 1; l < sd.size(); ++l)
                CHECK((sd.projector(k).matrix() * sd.projector(l).matrix()).cwiseAbs().maxCoeff() < 1e-12);
        }
        CHECK((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(dist(sd.reconstruct(), h) < 1e-10);
    }
}

TEST_CASE("positive part and positive support projector")
{
    auto h = HermitianOperator::diagonal(vec({1.0, -1.0}));
    CHECK(dist(positive_part(h), HermitianOperator::diagonal(vec({1.0, 0.0}))) < 1e-15);
    CHECK(dist(positive_support_projector(h).op(), HermitianOperator::diagonal(vec({1.0, 0.0}))) < 1e-15);
    CHECK(dist(positive_part(-HermitianOperator::identity(2)), HermitianOperator::zero(2)) < 1e-15);
    auto diff = HermitianOperator::diagonal(vec({0.25, -0.25}));
    CHECK(dist(positive_part(diff), HermitianOperator::diagonal(vec({0.25, 0.0}))) < 1e-15);

    CHECK(dist(positive_support_projector(HermitianOperator::zero(2)).op(), HermitianOperator::zero(2)) == 0.0);
    auto p = positive_support_projector(HermitianOperator::diagonal(vec({2.0, 1.0, -1.0})));
    CHECK(p.kind() == TestKind::Projector);
    CHECK(dist(p.op(), HermitianOperator::diagonal(vec({1.0, 1.0, 0.0}))) < 1e-15);
}

TEST_CASE("positive part identities hold on random operators")
{
    test::Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        Index d = 2 + trial % 6;
        auto h = test::random_hermitian(d, rng);
        CHECK(dist(h, positive_part(h) - positive_part(-h)) < 1e-10);
        CMatrix p = positive_support_projector(h).op().matrix();
        CMatrix php = p * h.matrix() * p;
        CHECK((php - positive_part(h).matrix()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("matrix_function")
{
    auto e = matrix_function(HermitianOperator::zero(3), [](double x) { return std::exp(x); });
    CHECK(dist(e, HermitianOperator::identity(3)) < 1e-15);
    auto s = matrix_function(HermitianOperator::diagonal(vec({0.25, 1.0})), [](double x) { return std::sqrt(x); });
    CHECK(dist(s, HermitianOperator::diagonal(vec({0.5, 1.0}))) < 1e-15);
    auto l = matrix_function(HermitianOperator::diagonal(vec({0.5})), [](double x) { return std::log(x); });
    CHECK(l.matrix()(0, 0).real() == doctest::Approx(std::log(0.5)));
    CHECK(l.matrix()(0, 0).real() == doctest::Approx(-0.693147).epsilon(1e-6));

    try {
        matrix_function(HermitianOperator::diagonal(vec({1.0, -1.0})), [](double x) { return std::log(x); });
        FAIL("expected DomainError");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::DomainError);
    }
}

TEST_CASE("matrix_function respects composition")
{
    test::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto rho = test::random_density(2 + trial % 4, rng);
        auto f = [](double x) { return std::exp(0.5 * x); };
        auto g = [](double x) { return std::log(x); };
        auto once = matrix_function(rho.op(), [&](double x) { return f(g(x)); });
        auto twice = matrix_function(matrix_function(rho.op(), g), f);
        CHECK(dist(once, twice) < 1e-10);
    }
}

TEST_CASE("trace_norm")
{
    CHECK(trace_norm(HermitianOperator::diagonal(vec({1.0, -1.0}))) == doctest::Approx(2.0));
    auto rho = HermitianOperator::diagonal(vec({0.75, 0.25}));
    CHECK(trace_norm(rho - rho) == 0.0);
    CHECK(trace_norm(rho - 0.5 * HermitianOperator::identity(2)) == doctest::Approx(0.5).epsilon(1e-14));

    test::Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto h = test::random_hermitian(3, rng);
        CHECK(trace_norm(h) >= std::abs(h.trace()) - 1e-12);
        auto psd = positive_part(h);
        CHECK(trace_norm(psd) == doctest::Approx(psd.trace()).epsilon(1e-12));
        CHECK(trace_norm(-psd) == doctest::Approx(psd.trace()).epsilon(1e-12));
    }
}

TEST_CASE("dimension cap")
{
    auto q = HermitianOperator::identity(2);
    CHECK_NOTHROW(kron_power(q, 12));
    try {
        kron_power(q, 13);
        FAIL("expected DimensionCap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionCap);
        CHECK(e.is_cap());
    }
}

TEST_CASE("test operators are validated")
{
    CHECK_THROWS_AS(TestOperator(HermitianOperator::diagonal(vec({1.5, 0.0}))), Error);
    CHECK_NOTHROW(TestOperator(HermitianOperator::diagonal(vec({1.0, 0.3}))));
}
