#pragma once

#include "qhyp/models.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qhyp {

enum class Pipeline { Divergences, Beta, Expansion, Bryc, Clt, FermionRates, AlphaCurve };

const char* to_string(Pipeline p);
std::optional<Pipeline> pipeline_from_string(const std::string& name);

struct ModelSpec {
    std::string kind;  // iid | spin | fermion
    // iid
    CMatrix rho, sigma;
    // spin
    int local_dim = 2;
    struct Term {
        std::vector<int> sites;
        std::string paulis;
        double coeff = 1.0;
    };
    std::vector<Term> phi, psi;
    double beta1 = 0.0, beta2 = 0.0;
    double high_temp_a = 0.25, high_temp_delta = 1.0;
    // fermion
    struct Symbol {
        std::string type;  // constant | cosine | fermi | step
        std::vector<double> params;
    };
    Symbol q, r;
    int d = 1;
    int quad_points = 0;
};

struct ExperimentConfig {
    ModelSpec model;
    std::vector<Pipeline> pipelines;
    std::vector<double> eps{0.05, 0.25, 0.5, 0.75};
    std::vector<int> n;
    double bryc_r = 0.5;
    int bryc_grid = 8;
    int alpha_n = 0;  // 0: largest entry of n
    std::vector<double> alpha_t2{-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0};
    std::string output_dir;
    std::uint64_t seed = 0;
    double faithfulness_tol = 1e-12;
    Index max_dim = kMaxDim;
    int max_fock = kMaxFockModes;
    int jobs = 1;
};

// Throws Error(ConfigError) naming the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// canonical form used for hashing
std::string canonical_config(const ExperimentConfig& config);

ModelSequence build_model(const ExperimentConfig& config);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    struct File {
        std::string name;
        std::uintmax_t bytes = 0;
        std::string hash;
    };
    std::vector<File> files;
    std::vector<std::pair<std::string, double>> stage_seconds;
};

// Raised by run() when a pipeline fails; the message names the stage.
class StageError : public Error {
public:
    StageError(const std::string& stage, const Error& cause)
        : Error(cause.code(), "stage " + stage + ": " + cause.what()), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Runs the configured pipelines and writes CSV files plus manifest.json
// under config.output_dir.
RunManifest run(const ExperimentConfig& config);

std::string format_number(double x);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace qhyp
