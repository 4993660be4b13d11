#pragma once

#include "qhyp/modular.hpp"
#include "qhyp/operator.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qhyp {

struct StatePair {
    DensityMatrix rho;
    DensityMatrix sigma;
};

struct Divergences {
    double D = 0.0;
    double V = 0.0;
};

// A sequence of state pairs (rho_n, sigma_n) with weights w_n. Empty
// callables mean the fast path is not available.
struct ModelSequence {
    std::string name;
    std::function<double(int)> weight_fn;
    std::function<StatePair(int)> state_pair_fn;
    // n, z -> log Tr(rho_n^(1-z) sigma_n^z)
    std::function<cplx(int, cplx)> fast_psi;
    // n -> law of X_n, the measure of (sigma_n | rho_n)
    std::function<SpectralMeasure(int)> fast_measure;
    std::function<Divergences(int)> fast_divergences;
    // rho_n and sigma_n commute for every n
    bool commuting = false;
    // limits of D_n / w_n and V_n / w_n when known in closed form
    std::optional<double> d_rate;
    std::optional<double> v_rate;
};

ModelSequence iid_model(const DensityMatrix& rho, const DensityMatrix& sigma, Index max_dim = kMaxDim);

struct InteractionTerm {
    std::vector<int> sites;
    HermitianOperator op;
};

// Translation-invariant finite-range interaction on a chain, one term per
// translation class. Sites are shifted so that the smallest is 0; terms on
// the same set are summed.
class Interaction {
public:
    Interaction(int local_dim, std::vector<InteractionTerm> terms);
    static Interaction zero(int local_dim) { return Interaction(local_dim, {}); }

    int local_dim() const { return local_dim_; }
    int range() const { return range_; }
    const std::vector<InteractionTerm>& terms() const { return terms_; }
    // sum over sets X containing 0 of ||Phi_X||
    double norm() const;

private:
    int local_dim_;
    int range_ = 1;
    std::vector<InteractionTerm> terms_;
};

HermitianOperator pauli(char c);
// tensor product of single-site Paulis, e.g. "ZZ"
HermitianOperator pauli_string(const std::string& s);

// open-boundary Hamiltonian on `sites` consecutive sites
HermitianOperator chain_hamiltonian(const Interaction& phi, int sites, Index max_dim = kMaxDim);
DensityMatrix gibbs_state(const HermitianOperator& h, double beta);

ModelSequence spin_gibbs_model(const Interaction& phi, const Interaction& psi, double beta1, double beta2,
                               int d = 1, Index max_dim = kMaxDim);

struct HighTempCheck {
    double lhs = 0.0;
    bool holds = true;
};

HighTempCheck high_temp_condition(const Interaction& phi, const Interaction& psi, double beta1, double beta2,
                                  double a, double delta);

struct FermionSymbol {
    std::function<double(std::span<const double>)> q_hat;
    double delta = 0.0;
    int dim = 1;
    bool smooth = true;
};

// checks delta <= q <= 1 - delta on a grid
FermionSymbol make_symbol(std::function<double(std::span<const double>)> q, double delta, int d = 1,
                          bool smooth = true);
FermionSymbol constant_symbol(double q, int d = 1);
// a + b cos(x_1)
FermionSymbol cosine_symbol(double a, double b, int d = 1);
// Fermi-Dirac occupation 1 / (1 + e^(beta (e(x) - mu))) of e(x) = -2 t sum cos(x_i)
FermionSymbol fermi_symbol(double beta, double mu, double t, int d = 1);
// lo on [0, pi), hi on [pi, 2 pi) in the first coordinate
FermionSymbol step_symbol(double lo, double hi, int d = 1);

int default_quad_points(int d);

HermitianOperator toeplitz_truncation(const FermionSymbol& symbol, int n, int d = 1, int quad_points = 0);
cplx fermion_psi_s(const HermitianOperator& q, const HermitianOperator& r, cplx s);
double fermion_relative_entropy(const HermitianOperator& q, const HermitianOperator& r);

enum class SzegoMode { Entropy, Psi, Variance };

// Variance mode integrates the Bernoulli variance of the log-likelihood
// ratio, the second s-derivative of the psi integrand at s = 1.
double szego_rate(const FermionSymbol& q, const FermionSymbol& r, int d, SzegoMode mode, double s = 0.5,
                  int quad_points = 0);

struct DecayReport {
    double partial_sum = 0.0;
    std::vector<double> shells;   // shell m: sum over max-norm m of |k|^d |c_k|
    std::vector<double> ratios;   // shells[m+1] / shells[m] where defined
    bool nondecaying = false;
};

DecayReport decay_check(const FermionSymbol& q, int d, int K);

inline constexpr int kMaxFockModes = 12;

DensityMatrix fock_density(const HermitianOperator& q, int max_modes = kMaxFockModes);

ModelSequence fermion_model(const FermionSymbol& q, const FermionSymbol& r, int d = 1,
                            int max_modes = kMaxFockModes, int quad_points = 0);

}  // namespace qhyp
