#include "qhyp/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<qhyp::Index> max_dim;
    std::optional<int> max_fock;
};

void add_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "experiment config (JSON)")->required();
    cmd->add_option("--out", f.out, "output directory (default: config output_dir, then $QHYP_OUT_DIR)");
    cmd->add_option("--seed", f.seed, "seed recorded in the manifest");
    cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--max-dim", f.max_dim, "dense dimension cap")->check(CLI::Range(1, static_cast<int>(qhyp::kMaxDim)));
    cmd->add_option("--max-fock", f.max_fock, "Fock mode cap")->check(CLI::Range(1, qhyp::kMaxFockModes));
}

int execute(const Flags& f, std::optional<qhyp::Pipeline> only)
{
    using namespace qhyp;
    try {
        auto config = load_config(f.config);
        if (!f.out.empty())
            config.output_dir = f.out;
        else if (config.output_dir.empty())
            if (const char* env = std::getenv("QHYP_OUT_DIR")) config.output_dir = env;
        if (f.seed) config.seed = *f.seed;
        if (f.jobs) config.jobs = *f.jobs;
        if (f.max_dim) config.max_dim = *f.max_dim;
        if (f.max_fock) config.max_fock = *f.max_fock;
        if (only) {
            if (*only == Pipeline::FermionRates && config.model.kind != "fermion")
                throw Error(ErrorCode::ConfigError, "model.kind: fermion-rates needs a fermion model");
            config.pipelines = {*only};
        }
        auto manifest = run(config);
        std::printf("config %s, %zu files\n", manifest.config_hash.c_str(), manifest.files.size());
        for (const auto& [stage, secs] : manifest.stage_seconds) std::printf("  %-14s %8.3fs\n", stage.c_str(), secs);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "qhyp: %s\n", e.what());
        if (e.code() == ErrorCode::ConfigError) return 2;
        return e.is_cap() ? 4 : 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qhyp: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app("hypothesis testing experiments");
    app.require_subcommand(1);
    Flags flags;
    std::optional<qhyp::Pipeline> only;

    auto* run = app.add_subcommand("run", "run every pipeline listed in the config");
    add_flags(run, flags);
    for (const char* name : {"divergences", "beta", "expansion", "bryc", "clt", "fermion-rates", "alpha-curve"}) {
        auto* cmd = app.add_subcommand(name, std::string("run only the ") + name + " pipeline");
        add_flags(cmd, flags);
        cmd->callback([&only, name] { only = qhyp::pipeline_from_string(name); });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return execute(flags, only);
}
