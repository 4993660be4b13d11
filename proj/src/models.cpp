#include "qhyp/models.hpp"

#include "qhyp/divergence.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace qhyp {

namespace {

std::mutex fftw_planner_mutex;

long long ipow(long long b, int e)
{
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

double ipow_checked(double b, int e)
{
    return std::pow(b, static_cast<double>(e));
}

// evaluates f at every point of the N^d periodic grid, row-major
template <typename F>
void for_grid(int N, int d, F&& f)
{
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    std::vector<int> j(static_cast<std::size_t>(d), 0);
    const long long total = ipow(N, d);
    const double h = 2.0 * std::numbers::pi / N;
    for (long long idx = 0; idx < total; ++idx) {
        long long rem = idx;
        for (int a = d - 1; a >= 0; --a) {
            j[static_cast<std::size_t>(a)] = static_cast<int>(rem % N);
            rem /= N;
            x[static_cast<std::size_t>(a)] = h * j[static_cast<std::size_t>(a)];
        }
        f(idx, std::span<const double>(x));
    }
}

void check_budget(int N, int d)
{
    if (N < 1 || ipow_checked(N, d) > static_cast<double>(1 << 24))
        throw Error(ErrorCode::QuadratureBudget,
                    std::to_string(N) + " points per axis in dimension " + std::to_string(d));
}

// Fourier coefficients c_k = (2 pi)^-d int e^(-i k.x) q(x) dx on the N^d grid,
// indexed by k mod N per axis
std::vector<cplx> fourier_coefficients(const FermionSymbol& s, int N, int d)
{
    check_budget(N, d);
    const long long total = ipow(N, d);
    fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(total));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(total));
    double qmax = 0.0;
    for_grid(N, d, [&](long long idx, std::span<const double> x) {
        double v = s.q_hat(x);
        in[idx][0] = v;
        in[idx][1] = 0.0;
        qmax = std::max(qmax, std::abs(v));
    });
    std::vector<int> dims(static_cast<std::size_t>(d), N);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        plan = fftw_plan_dft(d, dims.data(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<cplx> c(static_cast<std::size_t>(total));
    // coefficients at the rounding level of the transform are set to zero
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * qmax;
    for (long long k = 0; k < total; ++k) {
        cplx v(out[k][0] / static_cast<double>(total), out[k][1] / static_cast<double>(total));
        c[static_cast<std::size_t>(k)] = std::abs(v) <= noise ? cplx(0.0) : v;
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return c;
}

// lattice multi-index of a flat index in {0..n-1}^d
std::vector<int> unflatten(long long idx, int n, int d)
{
    std::vector<int> j(static_cast<std::size_t>(d));
    for (int a = d - 1; a >= 0; --a) {
        j[static_cast<std::size_t>(a)] = static_cast<int>(idx % n);
        idx /= n;
    }
    return j;
}

double grid_mean(const std::function<double(std::span<const double>)>& f, int N, int d)
{
    check_budget(N, d);
    double sum = 0.0;
    for_grid(N, d, [&](long long, std::span<const double> x) { sum += f(x); });
    return sum / ipow_checked(N, d);
}

}  // namespace

// --- i.i.d. ---------------------------------------------------------------

ModelSequence iid_model(const DensityMatrix& rho, const DensityMatrix& sigma, Index max_dim)
{
    ModelSequence m;
    m.name = "iid";
    m.weight_fn = [](int n) { return static_cast<double>(n); };
    m.state_pair_fn = [rho, sigma, max_dim](int n) {
        return StatePair{validate_density(kron_power(rho.op(), n, max_dim)),
                         validate_density(kron_power(sigma.op(), n, max_dim))};
    };
    m.commuting = commutes(rho.op(), sigma.op());

    std::shared_ptr<const SpectralMeasure> law;
    try {
        law = std::make_shared<const SpectralMeasure>(ns_spectral_measure(sigma, rho));
    } catch (const Error&) {
        // supp(sigma) not inside supp(rho): no classical fast path
    }
    if (law) {
        m.fast_psi = [law](int n, cplx z) { return static_cast<double>(n) * cgf(*law, z); };
        m.fast_measure = [law](int n) { return convolve_power(*law, n); };
    }
    ExtReal D = relative_entropy(rho, sigma);
    ExtReal V = info_variance(rho, sigma);
    if (D.is_finite() && V.is_finite()) {
        double d = D.value(), v = V.value();
        m.fast_divergences = [d, v](int n) { return Divergences{n * d, n * v}; };
        m.d_rate = d;
        m.v_rate = v;
    }
    return m;
}

// --- spin chains --------------------------------------------------------

Interaction::Interaction(int local_dim, std::vector<InteractionTerm> terms) : local_dim_(local_dim)
{
    if (local_dim < 1) throw Error(ErrorCode::DomainError, "local dimension must be positive");
    std::map<std::vector<int>, CMatrix> merged;
    for (auto& t : terms) {
        if (t.sites.empty()) throw Error(ErrorCode::DomainError, "interaction term on an empty set");
        std::vector<int> s = t.sites;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw Error(ErrorCode::DomainError, "repeated site in interaction term");
        // the operator acts on the sites in the order given; reorder to ascending
        if (s != t.sites)
            throw Error(ErrorCode::DomainError, "interaction sites must be listed in ascending order");
        int lo = s.front();
        for (int& x : s) x -= lo;
        long long want = ipow(local_dim, static_cast<int>(s.size()));
        if (t.op.dim() != want)
            throw Error(ErrorCode::DimensionMismatch,
                        "term on " + std::to_string(s.size()) + " sites needs dimension " + std::to_string(want));
        auto it = merged.find(s);
        if (it == merged.end())
            merged.emplace(s, t.op.matrix());
        else
            it->second += t.op.matrix();
        range_ = std::max(range_, s.back() + 1);
    }
    for (auto& [s, op] : merged) terms_.push_back({s, trusted_hermitian(op)});
}

double Interaction::norm() const
{
    double sum = 0.0;
    for (const auto& t : terms_) sum += static_cast<double>(t.sites.size()) * op_norm(t.op);
    return sum;
}

HermitianOperator pauli(char c)
{
    CMatrix m(2, 2);
    switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw Error(ErrorCode::DomainError, std::string("unknown Pauli '") + c + "'");
    }
    return HermitianOperator(m);
}

HermitianOperator pauli_string(const std::string& s)
{
    if (s.empty()) throw Error(ErrorCode::DomainError, "empty Pauli string");
    HermitianOperator out = pauli(s[0]);
    for (std::size_t i = 1; i < s.size(); ++i) out = kron(out, pauli(s[i]));
    return out;
}

HermitianOperator chain_hamiltonian(const Interaction& phi, int sites, Index max_dim)
{
    const int ld = phi.local_dim();
    double dim = ipow_checked(ld, sites);
    if (dim > static_cast<double>(std::min(max_dim, kMaxDim)))
        throw Error(ErrorCode::DimensionCap, std::to_string(sites) + " sites of dimension " + std::to_string(ld));
    const Index D = static_cast<Index>(dim);
    std::vector<long long> pw(static_cast<std::size_t>(sites));
    for (int s = 0; s < sites; ++s) pw[static_cast<std::size_t>(s)] = ipow(ld, sites - 1 - s);

    CMatrix h = CMatrix::Zero(D, D);
    for (const auto& term : phi.terms()) {
        const int k = static_cast<int>(term.sites.size());
        const Index dsub = term.op.dim();
        const CMatrix& op = term.op.matrix();
        for (int x = 0; x + term.sites.back() < sites; ++x) {
            std::vector<long long> place(static_cast<std::size_t>(k));
            for (int t = 0; t < k; ++t) place[static_cast<std::size_t>(t)] = pw[static_cast<std::size_t>(term.sites[static_cast<std::size_t>(t)] + x)];
            std::vector<long long> offset(static_cast<std::size_t>(dsub), 0);
            for (Index a = 0; a < dsub; ++a) {
                Index rem = a;
                for (int t = k - 1; t >= 0; --t) {
                    offset[static_cast<std::size_t>(a)] += (rem % ld) * place[static_cast<std::size_t>(t)];
                    rem /= ld;
                }
            }
            for (Index i = 0; i < D; ++i) {
                Index a = 0;
                long long rest = i;
                for (int t = 0; t < k; ++t) {
                    long long digit = (i / place[static_cast<std::size_t>(t)]) % ld;
                    a = a * ld + digit;
                    rest -= digit * place[static_cast<std::size_t>(t)];
                }
                for (Index b = 0; b < dsub; ++b) {
                    cplx v = op(b, a);
                    if (v != 0.0) h(rest + offset[static_cast<std::size_t>(b)], i) += v;
                }
            }
        }
    }
    return trusted_hermitian(std::move(h));
}

DensityMatrix gibbs_state(const HermitianOperator& h, double beta)
{
    auto es = eigh(h);
    const double e0 = es.values.minCoeff();
    RVector w = (-beta * (es.values.array() - e0)).exp().matrix();
    w /= w.sum();
    CMatrix rho = es.vectors * w.cast<cplx>().asDiagonal() * es.vectors.adjoint();
    return validate_density(trusted_hermitian(std::move(rho)));
}

ModelSequence spin_gibbs_model(const Interaction& phi, const Interaction& psi, double beta1, double beta2,
                               int d, Index max_dim)
{
    if (d != 1) throw Error(ErrorCode::Unsupported, "spin chains are implemented for d = 1 only");
    if (!(beta1 > 0.0 && beta2 > 0.0)) throw Error(ErrorCode::DomainError, "inverse temperatures must be positive");
    if (phi.local_dim() != psi.local_dim())
        throw Error(ErrorCode::DimensionMismatch, "interactions on different local spaces");
    ModelSequence m;
    m.name = "spin";
    m.weight_fn = [](int n) { return 2.0 * n + 1.0; };
    m.state_pair_fn = [phi, psi, beta1, beta2, max_dim](int n) {
        const int sites = 2 * n + 1;
        return StatePair{gibbs_state(chain_hamiltonian(phi, sites, max_dim), beta1),
                         gibbs_state(chain_hamiltonian(psi, sites, max_dim), beta2)};
    };
    return m;
}

HighTempCheck high_temp_condition(const Interaction& phi, const Interaction& psi, double beta1, double beta2,
                                  double a, double delta)
{
    std::map<std::vector<int>, std::pair<double, double>> norms;
    for (const auto& t : phi.terms()) norms[t.sites].first += op_norm(t.op);
    for (const auto& t : psi.terms()) norms[t.sites].second += op_norm(t.op);
    HighTempCheck out;
    for (const auto& [sites, nrm] : norms) {
        // each translation class contributes one set per site it can place on 0
        double size = static_cast<double>(sites.size());
        out.lhs += size * std::exp(2.0 * a * size) * std::expm1(delta * (beta1 * nrm.first + beta2 * nrm.second));
    }
    out.holds = out.lhs <= a;
    return out;
}

// --- quasi-free fermions ------------------------------------------------

int default_quad_points(int d)
{
    switch (d) {
    case 1: return 4096;
    case 2: return 256;
    default: return 64;
    }
}

FermionSymbol make_symbol(std::function<double(std::span<const double>)> q, double delta, int d, bool smooth)
{
    if (d < 1) throw Error(ErrorCode::InvalidSymbol, "dimension must be positive");
    if (!(delta > 0.0 && delta <= 0.5)) throw Error(ErrorCode::InvalidSymbol, "delta must lie in (0, 1/2]");
    const int N = default_quad_points(d);
    for_grid(N, d, [&](long long, std::span<const double> x) {
        double v = q(x);
        if (!(v >= delta - 1e-15 && v <= 1.0 - delta + 1e-15))
            throw Error(ErrorCode::InvalidSymbol, "symbol value " + std::to_string(v) + " outside [delta, 1 - delta]");
    });
    return FermionSymbol{std::move(q), delta, d, smooth};
}

FermionSymbol constant_symbol(double q, int d)
{
    return make_symbol([q](std::span<const double>) { return q; }, std::min(q, 1.0 - q), d, true);
}

FermionSymbol cosine_symbol(double a, double b, int d)
{
    return make_symbol([a, b](std::span<const double> x) { return a + b * std::cos(x[0]); },
                       std::min(a - std::abs(b), 1.0 - a - std::abs(b)), d, true);
}

FermionSymbol fermi_symbol(double beta, double mu, double t, int d)
{
    auto occ = [beta, mu](double e) { return 1.0 / (1.0 + std::exp(beta * (e - mu))); };
    auto q = [occ, t](std::span<const double> x) {
        double e = 0.0;
        for (double xi : x) e -= 2.0 * t * std::cos(xi);
        return occ(e);
    };
    double lo = occ(2.0 * std::abs(t) * d), hi = occ(-2.0 * std::abs(t) * d);
    return make_symbol(q, std::min(lo, 1.0 - hi), d, true);
}

FermionSymbol step_symbol(double lo, double hi, int d)
{
    return make_symbol([lo, hi](std::span<const double> x) { return x[0] < std::numbers::pi ? lo : hi; },
                       std::min({lo, hi, 1.0 - lo, 1.0 - hi}), d, false);
}

HermitianOperator toeplitz_truncation(const FermionSymbol& symbol, int n, int d, int quad_points)
{
    if (d != symbol.dim) throw Error(ErrorCode::DimensionMismatch, "symbol dimension differs from d");
    if (n < 1) throw Error(ErrorCode::DomainError, "n must be positive");
    double m = ipow_checked(n, d);
    if (m > static_cast<double>(kMaxDim)) throw Error(ErrorCode::DimensionCap, "n^d exceeds the dimension cap");
    int N = quad_points;
    if (N == 0) {
        N = default_quad_points(d);
        while (N < 2 * n) N *= 2;
    } else if (N < 2 * n - 1) {
        throw Error(ErrorCode::QuadratureBudget,
                    std::to_string(N) + " points cannot resolve " + std::to_string(2 * n - 1) + " coefficients");
    }
    auto c = fourier_coefficients(symbol, N, d);
    const Index M = static_cast<Index>(m);
    std::vector<std::vector<int>> site(static_cast<std::size_t>(M));
    for (Index i = 0; i < M; ++i) site[static_cast<std::size_t>(i)] = unflatten(i, n, d);
    CMatrix q(M, M);
    for (Index j = 0; j < M; ++j) {
        for (Index k = 0; k < M; ++k) {
            long long idx = 0;
            for (int a = 0; a < d; ++a) {
                int diff = site[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] -
                           site[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
                idx = idx * N + ((diff % N) + N) % N;
            }
            q(j, k) = c[static_cast<std::size_t>(idx)];
        }
    }
    return trusted_hermitian(std::move(q));
}

namespace {

// eigenvalues strictly inside (0, 1)
Eigensystem one_particle_spectrum(const HermitianOperator& q, const char* what)
{
    auto es = eigh(q);
    if (es.values.size() > 0 && (es.values.minCoeff() <= 0.0 || es.values.maxCoeff() >= 1.0))
        throw Error(ErrorCode::DomainError, std::string(what) + " must have spectrum inside (0, 1)");
    return es;
}

CMatrix complex_power(const Eigensystem& es, cplx p)
{
    CVector w(es.values.size());
    for (Index i = 0; i < w.size(); ++i) {
        double a = es.values(i) / (1.0 - es.values(i));
        w(i) = std::exp(p * std::log(a));
    }
    return es.vectors * w.asDiagonal() * es.vectors.adjoint();
}

}  // namespace

cplx fermion_psi_s(const HermitianOperator& q, const HermitianOperator& r, cplx s)
{
    if (q.dim() != r.dim()) throw Error(ErrorCode::DimensionMismatch, "fermion_psi_s");
    auto eq = one_particle_spectrum(q, "Q");
    auto er = one_particle_spectrum(r, "R");
    cplx out = 0.0;
    for (Index i = 0; i < eq.values.size(); ++i) out += s * std::log(1.0 - eq.values(i));
    for (Index i = 0; i < er.values.size(); ++i) out += (1.0 - s) * std::log(1.0 - er.values(i));

    CMatrix half = complex_power(eq, s / 2.0);
    CMatrix w = half * complex_power(er, 1.0 - s) * half;
    if (s.imag() == 0.0) {
        auto ew = eigh(trusted_hermitian(std::move(w)));
        for (Index i = 0; i < ew.values.size(); ++i) {
            if (1.0 + ew.values(i) <= 1e-10) throw Error(ErrorCode::BranchFault, "I + W not in the right half-plane");
            out += std::log(1.0 + ew.values(i));
        }
    } else {
        Eigen::ComplexEigenSolver<CMatrix> solver(w, false);
        if (solver.info() != Eigen::Success) throw Error(ErrorCode::EigenSolverFailure, "spectrum of W");
        for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
            cplx v = 1.0 + solver.eigenvalues()(i);
            if (v.real() <= 1e-10) throw Error(ErrorCode::BranchFault, "I + W not in the right half-plane");
            out += std::log(v);
        }
    }
    return out;
}

double fermion_relative_entropy(const HermitianOperator& q, const HermitianOperator& r)
{
    if (q.dim() != r.dim()) throw Error(ErrorCode::DimensionMismatch, "fermion_relative_entropy");
    auto eq = one_particle_spectrum(q, "Q");
    auto er = one_particle_spectrum(r, "R");
    double out = 0.0;
    for (Index i = 0; i < eq.values.size(); ++i) {
        double x = eq.values(i);
        out += x * std::log(x) + (1.0 - x) * std::log(1.0 - x);
    }
    // -Tr Q log R - Tr (I - Q) log(I - R), in the eigenbasis of R
    RVector diag = congruence(er.vectors, q.matrix()).diagonal().real();
    for (Index i = 0; i < er.values.size(); ++i) {
        double y = er.values(i);
        out -= diag(i) * std::log(y) + (1.0 - diag(i)) * std::log(1.0 - y);
    }
    return out;
}

double szego_rate(const FermionSymbol& q, const FermionSymbol& r, int d, SzegoMode mode, double s, int quad_points)
{
    if (q.dim != d || r.dim != d) throw Error(ErrorCode::DimensionMismatch, "symbol dimension differs from d");
    const int N = quad_points > 0 ? quad_points : default_quad_points(d);
    auto integrand = [&](std::span<const double> x) {
        double a = q.q_hat(x), b = r.q_hat(x);
        double l1 = std::log(a / b), l0 = std::log((1.0 - a) / (1.0 - b));
        switch (mode) {
        case SzegoMode::Entropy: return a * l1 + (1.0 - a) * l0;
        case SzegoMode::Psi:
            return std::log(std::pow(a, s) * std::pow(b, 1.0 - s) + std::pow(1.0 - a, s) * std::pow(1.0 - b, 1.0 - s));
        case SzegoMode::Variance: {
            double mean = a * l1 + (1.0 - a) * l0;
            return a * l1 * l1 + (1.0 - a) * l0 * l0 - mean * mean;
        }
        }
        return 0.0;
    };
    return grid_mean(integrand, N, d);
}

DecayReport decay_check(const FermionSymbol& q, int d, int K)
{
    if (q.dim != d) throw Error(ErrorCode::DimensionMismatch, "symbol dimension differs from d");
    if (K < 1) throw Error(ErrorCode::DomainError, "K must be positive");
    int N = default_quad_points(d);
    while (N < 4 * K) N *= 2;
    auto c = fourier_coefficients(q, N, d);
    DecayReport out;
    out.shells.assign(static_cast<std::size_t>(K) + 1, 0.0);
    const int side = 2 * K + 1;
    const long long count = ipow(side, d);
    for (long long idx = 0; idx < count; ++idx) {
        auto j = unflatten(idx, side, d);
        long long flat = 0;
        double norm2 = 0.0;
        int shell = 0;
        for (int a = 0; a < d; ++a) {
            int k = j[static_cast<std::size_t>(a)] - K;
            shell = std::max(shell, std::abs(k));
            norm2 += static_cast<double>(k) * k;
            flat = flat * N + ((k % N) + N) % N;
        }
        double term = std::pow(std::sqrt(norm2), d) * std::abs(c[static_cast<std::size_t>(flat)]);
        out.shells[static_cast<std::size_t>(shell)] += term;
        out.partial_sum += term;
    }
    for (int m = 1; m < K; ++m) {
        double a = out.shells[static_cast<std::size_t>(m)];
        out.ratios.push_back(a > 0.0 ? out.shells[static_cast<std::size_t>(m) + 1] / a : 0.0);
    }
    // non-decaying: the outer tenth of the shells still carries a tenth of the peak
    double peak = *std::max_element(out.shells.begin(), out.shells.end());
    int tail_from = std::max(1, K - std::max(1, K / 10) + 1);
    double tail = 0.0;
    int count_tail = 0;
    for (int m = tail_from; m <= K; ++m, ++count_tail) tail += out.shells[static_cast<std::size_t>(m)];
    tail /= std::max(1, count_tail);
    out.nondecaying = peak > 0.0 && tail > 0.1 * peak;
    return out;
}

DensityMatrix fock_density(const HermitianOperator& q, int max_modes)
{
    const int m = static_cast<int>(q.dim());
    if (m > max_modes || m > kMaxFockModes)
        throw Error(ErrorCode::FockCap, std::to_string(m) + " modes exceed the Fock cap");
    auto es = eigh(q);
    const Index F = Index{1} << m;

    // columns of the Fock lift: ordered products of eigenmode creation operators on the vacuum
    CMatrix gamma = CMatrix::Zero(F, F);
    gamma(0, 0) = 1.0;
    for (Index S = 1; S < F; ++S) {
        int k = std::countr_zero(static_cast<unsigned long long>(S));
        Index prev = S & (S - 1);
        auto src = gamma.col(prev);
        auto dst = gamma.col(S);
        for (int i = 0; i < m; ++i) {
            cplx u = es.vectors(i, k);
            if (u == 0.0) continue;
            const Index bit = Index{1} << i;
            for (Index b = 0; b < F; ++b) {
                if ((b & bit) || src(b) == 0.0) continue;
                int below = std::popcount(static_cast<unsigned long long>(b & (bit - 1)));
                dst(b | bit) += (below % 2 ? -u : u) * src(b);
            }
        }
    }
    RVector weight(F);
    for (Index S = 0; S < F; ++S) {
        double w = 1.0;
        for (int k = 0; k < m; ++k) w *= (S >> k & 1) ? es.values(k) : 1.0 - es.values(k);
        weight(S) = w;
    }
    CMatrix rho = gamma * weight.cast<cplx>().asDiagonal() * gamma.adjoint();
    return validate_density(trusted_hermitian(std::move(rho)));
}

ModelSequence fermion_model(const FermionSymbol& q, const FermionSymbol& r, int d, int max_modes, int quad_points)
{
    if (q.dim != d || r.dim != d) throw Error(ErrorCode::DimensionMismatch, "symbol dimension differs from d");
    ModelSequence m;
    m.name = "fermion";
    m.weight_fn = [d](int n) { return ipow_checked(n, d); };
    auto pair = [q, r, d, quad_points](int n) {
        return std::pair{toeplitz_truncation(q, n, d, quad_points), toeplitz_truncation(r, n, d, quad_points)};
    };
    m.state_pair_fn = [pair, d, max_modes](int n) {
        if (ipow_checked(n, d) > max_modes)
            throw Error(ErrorCode::FockCap, std::to_string(n) + "^" + std::to_string(d) + " modes exceed the Fock cap");
        auto [Q, R] = pair(n);
        return StatePair{fock_density(Q, max_modes), fock_density(R, max_modes)};
    };
    m.fast_psi = [pair](int n, cplx z) {
        auto [Q, R] = pair(n);
        return fermion_psi_s(Q, R, 1.0 - z);
    };
    m.fast_divergences = [pair](int n) {
        auto [Q, R] = pair(n);
        auto psi = [&](double s) { return fermion_psi_s(Q, R, s).real(); };
        return Divergences{fermion_relative_entropy(Q, R), fd_derivatives(psi, 1.0, 1e-3).second};
    };
    m.d_rate = szego_rate(q, r, d, SzegoMode::Entropy, 0.5, quad_points);
    m.v_rate = szego_rate(q, r, d, SzegoMode::Variance, 0.5, quad_points);
    return m;
}

}  // namespace qhyp
