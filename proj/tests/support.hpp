#pragma once

#include "qhyp/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>
#include <vector>

namespace qhyp::test {

using Rng = std::mt19937_64;

inline CMatrix ginibre(Index d, Rng& rng, bool complex = true)
{
    std::normal_distribution<double> g;
    CMatrix m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = cplx(g(rng), complex ? g(rng) : 0.0);
    return m;
}

inline DensityMatrix random_density(Index d, Rng& rng, bool complex = true)
{
    CMatrix g = ginibre(d, rng, complex);
    CMatrix r = g * g.adjoint();
    r /= r.trace();
    return validate_density(trusted_hermitian(r));
}

inline RVector random_probability(Index d, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.05, 1.0);
    RVector p(d);
    for (Index i = 0; i < d; ++i) p(i) = u(rng);
    return p / p.sum();
}

inline CMatrix random_unitary(Index d, Rng& rng)
{
    Eigen::HouseholderQR<CMatrix> qr(ginibre(d, rng));
    return qr.householderQ() * CMatrix::Identity(d, d);
}

inline HermitianOperator random_hermitian(Index d, Rng& rng)
{
    CMatrix g = ginibre(d, rng);
    return trusted_hermitian(g + g.adjoint());
}

inline DensityMatrix rotate(const DensityMatrix& rho, const CMatrix& u)
{
    return validate_density(trusted_hermitian(u * rho.op().matrix() * u.adjoint()));
}

// Classical Neyman-Pearson optimum: min sum T_i q_i subject to sum T_i p_i >= 1 - eps,
// T_i in [0, 1]. Outcomes enter in order of decreasing p_i / q_i.
inline double classical_np_beta(const RVector& p, const RVector& q, double eps)
{
    std::vector<Index> idx(static_cast<std::size_t>(p.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return p(a) * q(b) > p(b) * q(a); });
    double need = 1.0 - eps, got = 0.0, beta = 0.0;
    for (Index i : idx) {
        if (got >= need) break;
        if (p(i) == 0.0) continue;
        double take = std::min(1.0, (need - got) / p(i));
        got += take * p(i);
        beta += take * q(i);
    }
    return beta;
}

// Best beta over qubit tests diagonal in the basis with Bloch angles
// (theta, phi), for alpha <= eps.
inline double qubit_basis_beta(const CMatrix& rho, const CMatrix& sigma, double theta, double phi, double eps)
{
    CVector a(2), b(2);
    a << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
    b << -std::conj(a(1)), std::conj(a(0));
    RVector p(2), q(2);
    p << (a.adjoint() * rho * a)(0).real(), (b.adjoint() * rho * b)(0).real();
    q << (a.adjoint() * sigma * a)(0).real(), (b.adjoint() * sigma * b)(0).real();
    return classical_np_beta(p, q, eps);
}

inline Eigen::Vector3d bloch_vector(const CMatrix& m)
{
    return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

// Rank-one tests with alpha exactly eps: directions n on the circle r.n = 1 - 2 eps,
// scanned by angle with successive zooming.
inline double saturating_projector_beta(const CMatrix& rho, const CMatrix& sigma, double eps)
{
    Eigen::Vector3d r = bloch_vector(rho), s = bloch_vector(sigma);
    double c = (1.0 - 2.0 * eps) / r.norm();
    if (r.norm() == 0.0 || std::abs(c) > 1.0) return 2.0;
    Eigen::Vector3d u = r.normalized();
    Eigen::Vector3d e1 = u.unitOrthogonal(), e2 = u.cross(e1);
    double h = std::sqrt(1.0 - c * c);
    auto beta = [&](double phi) {
        Eigen::Vector3d n = c * u + h * (std::cos(phi) * e1 + std::sin(phi) * e2);
        return 0.5 * (1.0 + s.dot(n));
    };
    const double pi = std::acos(-1.0);
    double best = 2.0, at = 0.0;
    for (int k = 0; k < 3600; ++k) {
        double phi = 2.0 * pi * k / 3600;
        if (beta(phi) < best) best = beta(phi), at = phi;
    }
    for (double span = 2.0 * pi / 3600; span > 1e-12; span /= 4) {
        double centre = at;
        for (int k = -8; k <= 8; ++k) {
            double phi = centre + span * k / 8;
            if (beta(phi) < best) best = beta(phi), at = phi;
        }
    }
    return best;
}

// Grid search over the Bloch sphere, then local pattern search from the
// best few grid cells; combined with the saturating rank-one family, where
// the objective has a kink that grid searches approach slowly.
inline double bloch_brute_force_beta(const CMatrix& rho, const CMatrix& sigma, double eps)
{
    const double pi = std::acos(-1.0);
    const int G = 120;
    std::vector<std::tuple<double, double, double>> cells;
    for (int i = 0; i <= G; ++i)
        for (int j = 0; j < 2 * G; ++j) {
            double t = pi * i / G, f = pi * j / G;
            cells.emplace_back(qubit_basis_beta(rho, sigma, t, f, eps), t, f);
        }
    std::partial_sort(cells.begin(), cells.begin() + 16, cells.end());
    double best = std::get<0>(cells.front());
    for (int start = 0; start < 16; ++start) {
        auto [local, bt, bp] = cells[static_cast<std::size_t>(start)];
        // pattern search: keep the step while it improves, halve it otherwise
        double span = pi / G;
        for (int iter = 0; iter < 2000 && span > 1e-10; ++iter) {
            double ct = bt, cp = bp;
            for (int i = -5; i <= 5; ++i)
                for (int j = -5; j <= 5; ++j) {
                    double t = ct + span * i / 5, f = cp + span * j / 5;
                    double v = qubit_basis_beta(rho, sigma, t, f, eps);
                    if (v < local) local = v, bt = t, bp = f;
                }
            if (bt == ct && bp == cp) span /= 2;
        }
        best = std::min(best, local);
    }
    return std::min(best, saturating_projector_beta(rho, sigma, eps));
}

}  // namespace qhyp::test
