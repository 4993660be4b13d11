#include "qhyp/harness.hpp"

#include "qhyp/asymptotics.hpp"

#include <boost/version.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace qhyp {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& msg)
{
    throw Error(ErrorCode::ConfigError, field + ": " + msg);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) config_error(where.empty() ? "config" : where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) config_error(where.empty() ? key : where + "." + key, "unknown key");
}

double get_number(const json& j, const std::string& field)
{
    if (!j.is_number()) config_error(field, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) config_error(field, "must be finite");
    return v;
}

int get_int(const json& j, const std::string& field)
{
    if (!j.is_number_integer()) config_error(field, "expected an integer");
    return j.get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& field)
{
    if (!j.is_array()) config_error(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

RMatrix get_real_matrix(const json& j, const std::string& field)
{
    if (!j.is_array() || j.empty()) config_error(field, "expected a nonempty array of rows");
    const std::size_t n = j.size();
    RMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string row = field + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != n) config_error(row, "rows must have length " + std::to_string(n));
        for (std::size_t k = 0; k < n; ++k) m(i, k) = get_number(j[i][k], row + "[" + std::to_string(k) + "]");
    }
    return m;
}

// [[..]] for a real matrix, {"diag": [..]} or {"re": [[..]], "im": [[..]]}
CMatrix get_matrix(const json& j, const std::string& field)
{
    if (j.is_array()) return get_real_matrix(j, field).cast<cplx>();
    if (!j.is_object()) config_error(field, "expected a matrix");
    if (j.contains("diag")) {
        check_keys(j, field, {"diag"});
        auto d = get_numbers(j["diag"], field + ".diag");
        if (d.empty()) config_error(field + ".diag", "must be nonempty");
        RVector v = Eigen::Map<RVector>(d.data(), static_cast<Index>(d.size()));
        return v.cast<cplx>().asDiagonal().toDenseMatrix();
    }
    check_keys(j, field, {"re", "im"});
    if (!j.contains("re")) config_error(field + ".re", "missing");
    RMatrix re = get_real_matrix(j["re"], field + ".re");
    RMatrix im = RMatrix::Zero(re.rows(), re.cols());
    if (j.contains("im")) {
        im = get_real_matrix(j["im"], field + ".im");
        if (im.rows() != re.rows()) config_error(field + ".im", "shape differs from re");
    }
    CMatrix m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return m;
}

std::vector<ModelSpec::Term> get_terms(const json& j, const std::string& field)
{
    if (!j.is_array()) config_error(field, "expected an array of terms");
    std::vector<ModelSpec::Term> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        check_keys(j[i], f, {"sites", "op", "coeff"});
        ModelSpec::Term t;
        if (!j[i].contains("sites") || !j[i]["sites"].is_array() || j[i]["sites"].empty())
            config_error(f + ".sites", "expected a nonempty array of sites");
        for (std::size_t k = 0; k < j[i]["sites"].size(); ++k) {
            int s = get_int(j[i]["sites"][k], f + ".sites[" + std::to_string(k) + "]");
            if (s < 0) config_error(f + ".sites", "sites must be nonnegative");
            t.sites.push_back(s);
        }
        if (!j[i].contains("op") || !j[i]["op"].is_string()) config_error(f + ".op", "expected a Pauli string");
        t.paulis = j[i]["op"].get<std::string>();
        if (t.paulis.size() != t.sites.size()) config_error(f + ".op", "needs one Pauli per site");
        if (t.paulis.find_first_not_of("IXYZ") != std::string::npos)
            config_error(f + ".op", "letters must be I, X, Y or Z");
        if (j[i].contains("coeff")) t.coeff = get_number(j[i]["coeff"], f + ".coeff");
        out.push_back(std::move(t));
    }
    return out;
}

ModelSpec::Symbol get_symbol(const json& j, const std::string& field)
{
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        config_error(field + ".type", "expected one of constant, cosine, fermi, step");
    ModelSpec::Symbol s;
    s.type = j["type"].get<std::string>();
    std::vector<const char*> names;
    if (s.type == "constant") {
        check_keys(j, field, {"type", "value"});
        names = {"value"};
    } else if (s.type == "cosine") {
        check_keys(j, field, {"type", "a", "b"});
        names = {"a", "b"};
    } else if (s.type == "fermi") {
        check_keys(j, field, {"type", "beta", "mu", "t"});
        names = {"beta", "mu", "t"};
    } else if (s.type == "step") {
        check_keys(j, field, {"type", "lo", "hi"});
        names = {"lo", "hi"};
    } else {
        config_error(field + ".type", "unknown symbol type '" + s.type + "'");
    }
    for (const char* name : names) {
        if (!j.contains(name)) config_error(field + "." + name, "missing");
        s.params.push_back(get_number(j[name], field + "." + name));
    }
    return s;
}

ModelSpec get_model(const json& j)
{
    ModelSpec m;
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        config_error("model.kind", "expected one of iid, spin, fermion");
    m.kind = j["kind"].get<std::string>();
    if (m.kind == "iid") {
        check_keys(j, "model", {"kind", "rho", "sigma"});
        if (!j.contains("rho")) config_error("model.rho", "missing");
        if (!j.contains("sigma")) config_error("model.sigma", "missing");
        m.rho = get_matrix(j["rho"], "model.rho");
        m.sigma = get_matrix(j["sigma"], "model.sigma");
        if (m.rho.rows() != m.sigma.rows()) config_error("model.sigma", "dimension differs from model.rho");
    } else if (m.kind == "spin") {
        check_keys(j, "model", {"kind", "local_dim", "phi", "psi", "beta1", "beta2", "a", "delta"});
        if (j.contains("local_dim")) m.local_dim = get_int(j["local_dim"], "model.local_dim");
        if (m.local_dim != 2) config_error("model.local_dim", "Pauli terms need local dimension 2");
        if (j.contains("phi")) m.phi = get_terms(j["phi"], "model.phi");
        if (j.contains("psi")) m.psi = get_terms(j["psi"], "model.psi");
        for (const char* key : {"beta1", "beta2"})
            if (!j.contains(key)) config_error(std::string("model.") + key, "missing");
        m.beta1 = get_number(j["beta1"], "model.beta1");
        m.beta2 = get_number(j["beta2"], "model.beta2");
        if (!(m.beta1 > 0.0)) config_error("model.beta1", "must be positive");
        if (!(m.beta2 > 0.0)) config_error("model.beta2", "must be positive");
        if (j.contains("a")) m.high_temp_a = get_number(j["a"], "model.a");
        if (j.contains("delta")) m.high_temp_delta = get_number(j["delta"], "model.delta");
    } else if (m.kind == "fermion") {
        check_keys(j, "model", {"kind", "q", "r", "d", "quad_points"});
        if (!j.contains("q")) config_error("model.q", "missing");
        if (!j.contains("r")) config_error("model.r", "missing");
        m.q = get_symbol(j["q"], "model.q");
        m.r = get_symbol(j["r"], "model.r");
        if (j.contains("d")) m.d = get_int(j["d"], "model.d");
        if (m.d < 1 || m.d > 3) config_error("model.d", "must be 1, 2 or 3");
        if (j.contains("quad_points")) m.quad_points = get_int(j["quad_points"], "model.quad_points");
        if (m.quad_points < 0) config_error("model.quad_points", "must be nonnegative");
    } else {
        config_error("model.kind", "unknown kind '" + m.kind + "'");
    }
    return m;
}

FermionSymbol make(const ModelSpec::Symbol& s, int d, const std::string& field)
{
    try {
        if (s.type == "constant") return constant_symbol(s.params[0], d);
        if (s.type == "cosine") return cosine_symbol(s.params[0], s.params[1], d);
        if (s.type == "fermi") return fermi_symbol(s.params[0], s.params[1], s.params[2], d);
        return step_symbol(s.params[0], s.params[1], d);
    } catch (const Error& e) {
        config_error(field, e.what());
    }
}

Interaction make(const std::vector<ModelSpec::Term>& terms, int local_dim)
{
    std::vector<InteractionTerm> out;
    for (const auto& t : terms) out.push_back({t.sites, t.coeff * pauli_string(t.paulis)});
    return Interaction(local_dim, std::move(out));
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    // first failure in task order, so reruns report the same error
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<std::string>& cells) { rows_.push_back(cells); }

    void write(const fs::path& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::ConfigError, "output: cannot write " + path.string());
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string num(double x) { return format_number(x); }
std::string num(int x) { return std::to_string(x); }

std::string num(const ExtReal& x)
{
    if (x.is_plus_infinity()) return "inf";
    if (x.is_minus_infinity()) return "-inf";
    return format_number(x.value());
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const char* to_string(Pipeline p)
{
    switch (p) {
    case Pipeline::Divergences: return "divergences";
    case Pipeline::Beta: return "beta";
    case Pipeline::Expansion: return "expansion";
    case Pipeline::Bryc: return "bryc";
    case Pipeline::Clt: return "clt";
    case Pipeline::FermionRates: return "fermion_rates";
    case Pipeline::AlphaCurve: return "alpha_curve";
    }
    return "?";
}

std::optional<Pipeline> pipeline_from_string(const std::string& name)
{
    for (auto p : {Pipeline::Divergences, Pipeline::Beta, Pipeline::Expansion, Pipeline::Bryc, Pipeline::Clt,
                   Pipeline::FermionRates, Pipeline::AlphaCurve}) {
        std::string s = to_string(p);
        if (name == s) return p;
        std::replace(s.begin(), s.end(), '_', '-');
        if (name == s) return p;
    }
    return std::nullopt;
}

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error("config", std::string("not valid JSON: ") + e.what());
    }
    check_keys(j, "", {"model", "pipelines", "eps", "n", "bryc", "alpha_curve", "output_dir", "seed", "tolerances",
                       "caps", "jobs"});
    ExperimentConfig c;
    if (!j.contains("model")) config_error("model", "missing");
    c.model = get_model(j["model"]);

    if (j.contains("eps")) c.eps = get_numbers(j["eps"], "eps");
    for (std::size_t i = 0; i < c.eps.size(); ++i)
        if (!(c.eps[i] > 0.0 && c.eps[i] < 1.0)) config_error("eps[" + std::to_string(i) + "]", "must lie in (0, 1)");

    if (!j.contains("n") || !j["n"].is_array() || j["n"].empty()) config_error("n", "expected a nonempty array");
    for (std::size_t i = 0; i < j["n"].size(); ++i) {
        const std::string f = "n[" + std::to_string(i) + "]";
        int n = get_int(j["n"][i], f);
        int lowest = c.model.kind == "spin" ? 0 : 1;
        if (n < lowest) config_error(f, "must be at least " + std::to_string(lowest));
        if (!c.n.empty() && n <= c.n.back()) config_error(f, "n must be strictly increasing");
        c.n.push_back(n);
    }

    if (j.contains("pipelines")) {
        if (!j["pipelines"].is_array()) config_error("pipelines", "expected an array of names");
        for (std::size_t i = 0; i < j["pipelines"].size(); ++i) {
            const std::string f = "pipelines[" + std::to_string(i) + "]";
            if (!j["pipelines"][i].is_string()) config_error(f, "expected a name");
            auto p = pipeline_from_string(j["pipelines"][i].get<std::string>());
            if (!p) config_error(f, "unknown pipeline '" + j["pipelines"][i].get<std::string>() + "'");
            if (std::find(c.pipelines.begin(), c.pipelines.end(), *p) == c.pipelines.end()) c.pipelines.push_back(*p);
        }
    } else {
        c.pipelines = {Pipeline::Divergences, Pipeline::Beta, Pipeline::Expansion, Pipeline::Bryc, Pipeline::Clt,
                       Pipeline::AlphaCurve};
        if (c.model.kind == "fermion") c.pipelines.push_back(Pipeline::FermionRates);
    }
    if (c.model.kind != "fermion" &&
        std::find(c.pipelines.begin(), c.pipelines.end(), Pipeline::FermionRates) != c.pipelines.end())
        config_error("pipelines", "fermion_rates needs a fermion model");

    if (j.contains("bryc")) {
        check_keys(j["bryc"], "bryc", {"r", "grid"});
        if (j["bryc"].contains("r")) c.bryc_r = get_number(j["bryc"]["r"], "bryc.r");
        if (j["bryc"].contains("grid")) c.bryc_grid = get_int(j["bryc"]["grid"], "bryc.grid");
        if (!(c.bryc_r > 0.0)) config_error("bryc.r", "must be positive");
        if (c.bryc_grid < 1) config_error("bryc.grid", "must be positive");
    }
    if (j.contains("alpha_curve")) {
        check_keys(j["alpha_curve"], "alpha_curve", {"n", "t2"});
        if (j["alpha_curve"].contains("n")) c.alpha_n = get_int(j["alpha_curve"]["n"], "alpha_curve.n");
        if (c.alpha_n < 0) config_error("alpha_curve.n", "must be positive");
        if (j["alpha_curve"].contains("t2")) c.alpha_t2 = get_numbers(j["alpha_curve"]["t2"], "alpha_curve.t2");
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) config_error("output_dir", "expected a path");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) config_error("seed", "expected a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tolerances")) {
        check_keys(j["tolerances"], "tolerances", {"faithfulness"});
        if (j["tolerances"].contains("faithfulness"))
            c.faithfulness_tol = get_number(j["tolerances"]["faithfulness"], "tolerances.faithfulness");
        if (c.faithfulness_tol < 0.0) config_error("tolerances.faithfulness", "must be nonnegative");
    }
    if (j.contains("caps")) {
        check_keys(j["caps"], "caps", {"max_dim", "max_fock"});
        if (j["caps"].contains("max_dim")) c.max_dim = get_int(j["caps"]["max_dim"], "caps.max_dim");
        if (j["caps"].contains("max_fock")) c.max_fock = get_int(j["caps"]["max_fock"], "caps.max_fock");
        if (c.max_dim < 1 || c.max_dim > kMaxDim)
            config_error("caps.max_dim", "must lie in [1, " + std::to_string(kMaxDim) + "]");
        if (c.max_fock < 1 || c.max_fock > kMaxFockModes)
            config_error("caps.max_fock", "must lie in [1, " + std::to_string(kMaxFockModes) + "]");
    }
    if (j.contains("jobs")) c.jobs = get_int(j["jobs"], "jobs");
    if (c.jobs < 1) config_error("jobs", "must be positive");
    return c;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) config_error("config", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& c)
{
    auto matrix = [](const CMatrix& m) {
        json rows = json::array();
        for (Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Index k = 0; k < m.cols(); ++k) row.push_back({format_number(m(i, k).real()), format_number(m(i, k).imag())});
            rows.push_back(row);
        }
        return rows;
    };
    auto terms = [](const std::vector<ModelSpec::Term>& ts) {
        json out = json::array();
        for (const auto& t : ts) out.push_back({{"sites", t.sites}, {"op", t.paulis}, {"coeff", format_number(t.coeff)}});
        return out;
    };
    auto symbol = [](const ModelSpec::Symbol& s) {
        json p = json::array();
        for (double x : s.params) p.push_back(format_number(x));
        return json{{"type", s.type}, {"params", p}};
    };
    json model{{"kind", c.model.kind}};
    if (c.model.kind == "iid") {
        model["rho"] = matrix(c.model.rho);
        model["sigma"] = matrix(c.model.sigma);
    } else if (c.model.kind == "spin") {
        model["phi"] = terms(c.model.phi);
        model["psi"] = terms(c.model.psi);
        model["beta"] = {format_number(c.model.beta1), format_number(c.model.beta2)};
        model["high_temp"] = {format_number(c.model.high_temp_a), format_number(c.model.high_temp_delta)};
    } else {
        model["q"] = symbol(c.model.q);
        model["r"] = symbol(c.model.r);
        model["d"] = c.model.d;
        model["quad_points"] = c.model.quad_points;
    }
    json pipelines = json::array();
    for (auto p : c.pipelines) pipelines.push_back(to_string(p));
    json eps = json::array(), t2 = json::array();
    for (double e : c.eps) eps.push_back(format_number(e));
    for (double t : c.alpha_t2) t2.push_back(format_number(t));
    json j{{"model", model},
           {"pipelines", pipelines},
           {"eps", eps},
           {"n", c.n},
           {"bryc", {format_number(c.bryc_r), c.bryc_grid}},
           {"alpha_curve", {{"n", c.alpha_n}, {"t2", t2}}},
           {"seed", c.seed},
           {"faithfulness", format_number(c.faithfulness_tol)},
           {"caps", {c.max_dim, c.max_fock}}};
    return j.dump();
}

ModelSequence build_model(const ExperimentConfig& c)
{
    const auto& m = c.model;
    if (m.kind == "iid") {
        auto state = [&](const CMatrix& x, const std::string& field) {
            try {
                return validate_density(HermitianOperator(x), c.faithfulness_tol);
            } catch (const Error& e) {
                config_error(field, e.what());
            }
        };
        return iid_model(state(m.rho, "model.rho"), state(m.sigma, "model.sigma"), c.max_dim);
    }
    if (m.kind == "spin")
        return spin_gibbs_model(make(m.phi, m.local_dim), make(m.psi, m.local_dim), m.beta1, m.beta2, 1, c.max_dim);
    return fermion_model(make(m.q, m.d, "model.q"), make(m.r, m.d, "model.r"), m.d, c.max_fock, m.quad_points);
}

RunManifest run(const ExperimentConfig& c)
{
    RunManifest manifest;
    manifest.seed = c.seed;
    manifest.config_hash = fnv1a_hex(canonical_config(c));
    const fs::path dir = c.output_dir.empty() ? fs::path("qhyp_out") : fs::path(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) config_error("output_dir", "cannot create " + dir.string() + ": " + ec.message());

    auto stage = [&](const std::string& name, const std::function<void()>& body) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const StageError&) {
            throw;
        } catch (const Error& e) {
            throw StageError(name, e);
        }
        manifest.stage_seconds.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };

    ModelSequence model;
    stage("model", [&] { model = build_model(c); });
    const std::size_t nn = c.n.size();

    for (Pipeline p : c.pipelines) {
        switch (p) {
        case Pipeline::Divergences:
            stage("divergences", [&] {
                std::vector<Divergences> dv(nn);
                parallel_for(nn, c.jobs, [&](std::size_t i) { dv[i] = model_divergences(model, c.n[i]); });
                const double w_last = model.weight_fn(c.n.back());
                const double d_hat = dv.back().D / w_last, v_hat = dv.back().V / w_last;
                Csv per_n({"n", "w", "D", "V", "d", "v", "D_minus_w_d_hat"});
                for (std::size_t i = 0; i < nn; ++i) {
                    double w = model.weight_fn(c.n[i]);
                    per_n.row({num(c.n[i]), num(w), num(dv[i].D), num(dv[i].V), num(dv[i].D / w), num(dv[i].V / w),
                               num(dv[i].D - w * d_hat)});
                }
                per_n.write(dir / "divergences.csv");
                Csv rates({"quantity", "value"});
                rates.row({"d_hat", num(d_hat)});
                rates.row({"v_hat", num(v_hat)});
                if (model.d_rate) rates.row({"d_rate", num(*model.d_rate)});
                if (model.v_rate) rates.row({"v_rate", num(*model.v_rate)});
                rates.write(dir / "rates.csv");
            });
            break;
        case Pipeline::Beta:
            stage("beta", [&] {
                const std::size_t ne = c.eps.size();
                std::vector<double> beta(nn * ne);
                parallel_for(nn * ne, c.jobs,
                             [&](std::size_t k) { beta[k] = model_beta_opt(model, c.n[k / ne], c.eps[k % ne]); });
                Csv out({"n", "eps", "beta", "neg_log_beta"});
                for (std::size_t k = 0; k < beta.size(); ++k)
                    out.row({num(c.n[k / ne]), num(c.eps[k % ne]), num(beta[k]), num(-std::log(beta[k]))});
                out.write(dir / "beta.csv");
            });
            break;
        case Pipeline::Expansion:
            stage("expansion", [&] {
                std::vector<ExpansionReport> reps(c.eps.size());
                parallel_for(c.eps.size(), c.jobs,
                             [&](std::size_t i) { reps[i] = expansion_experiment(model, c.eps[i], c.n); });
                Csv out({"eps", "n", "w", "neg_log_beta", "first_order", "second_order", "residual",
                         "residual_over_sqrt_w", "residual_over_log_w"});
                for (const auto& rep : reps)
                    for (const auto& r : rep.rows)
                        out.row({num(rep.eps), num(r.n), num(r.w), num(r.exact), num(r.first_order),
                                 num(r.second_order_pred), num(r.residual), num(r.residual_over_sqrt_wn),
                                 num(r.residual_over_log_wn)});
                out.write(dir / "expansion.csv");
            });
            break;
        case Pipeline::Bryc:
            stage("bryc", [&] {
                auto rep = bryc_check(model, c.bryc_r, c.n, c.bryc_grid);
                Csv out({"n", "max_cauchy_difference"});
                for (const auto& [n, diff] : rep.cauchy_decay) out.row({num(n), num(diff)});
                out.write(dir / "bryc.csv");
                Csv summary({"quantity", "value"});
                summary.row({"r", num(rep.r)});
                summary.row({"grid_points", num(static_cast<int>(rep.grid.size()))});
                summary.row({"sup_bound", num(rep.sup_bound)});
                summary.row({"analytic", rep.analytic_ok ? "1" : "0"});
                if (c.model.kind == "spin") {
                    auto hc = high_temp_condition(make(c.model.phi, c.model.local_dim),
                                                  make(c.model.psi, c.model.local_dim), c.model.beta1, c.model.beta2,
                                                  c.model.high_temp_a, c.model.high_temp_delta);
                    summary.row({"high_temp_lhs", num(hc.lhs)});
                    summary.row({"high_temp_a", num(c.model.high_temp_a)});
                    summary.row({"high_temp_holds", hc.holds ? "1" : "0"});
                }
                summary.write(dir / "bryc_summary.csv");
            });
            break;
        case Pipeline::Clt:
            stage("clt", [&] {
                std::vector<double> dist(nn);
                parallel_for(nn, c.jobs, [&](std::size_t i) { dist[i] = clt_diagnostic(model, c.n[i]); });
                Csv out({"n", "w", "kolmogorov_distance"});
                for (std::size_t i = 0; i < nn; ++i) out.row({num(c.n[i]), num(model.weight_fn(c.n[i])), num(dist[i])});
                out.write(dir / "clt.csv");
            });
            break;
        case Pipeline::FermionRates:
            stage("fermion_rates", [&] {
                auto q = make(c.model.q, c.model.d, "model.q"), r = make(c.model.r, c.model.d, "model.r");
                const int d = c.model.d, qp = c.model.quad_points;
                double entropy = szego_rate(q, r, d, SzegoMode::Entropy, 0.5, qp);
                Csv rates({"quantity", "value"});
                rates.row({"entropy_rate", num(entropy)});
                rates.row({"variance_rate", num(szego_rate(q, r, d, SzegoMode::Variance, 0.5, qp))});
                for (double s : {0.25, 0.5, 0.75})
                    rates.row({"psi_rate_s" + format_number(s), num(szego_rate(q, r, d, SzegoMode::Psi, s, qp))});
                rates.write(dir / "fermion_rates.csv");
                std::vector<double> D(nn);
                parallel_for(nn, c.jobs, [&](std::size_t i) { D[i] = model_divergences(model, c.n[i]).D; });
                Csv res({"n", "w", "D", "w_times_rate", "residual"});
                for (std::size_t i = 0; i < nn; ++i) {
                    double w = model.weight_fn(c.n[i]);
                    res.row({num(c.n[i]), num(w), num(D[i]), num(w * entropy), num(D[i] - w * entropy)});
                }
                res.write(dir / "fermion_residuals.csv");
            });
            break;
        case Pipeline::AlphaCurve:
            stage("alpha_curve", [&] {
                int n = c.alpha_n > 0 ? c.alpha_n : c.n.back();
                auto curve = alpha_curve(model, n, c.alpha_t2);
                Csv out({"t2", "alpha_proxy", "phi_prediction"});
                for (const auto& p : curve) out.row({num(p.t2), num(p.alpha_proxy), num(p.phi_prediction)});
                out.write(dir / "alpha_curve.csv");
            });
            break;
        }
    }

    // every file under the output directory, including ones left by earlier runs
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().lexically_relative(dir) != "manifest.json")
            paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        std::string bytes = read_file(p);
        manifest.files.push_back({p.lexically_relative(dir).generic_string(), bytes.size(), fnv1a_hex(bytes)});
    }

    json files = json::array();
    for (const auto& f : manifest.files) files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a", f.hash}});
    files.push_back({{"name", "manifest.json"}});
    json stages = json::array();
    for (const auto& [name, secs] : manifest.stage_seconds) stages.push_back({{"stage", name}, {"seconds", secs}});
    json versions{{"qhyp", "0.1.0"},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"boost", BOOST_LIB_VERSION},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    json out{{"config_hash", manifest.config_hash},
             {"seed", manifest.seed},
             {"model", model.name},
             {"files", files},
             {"versions", versions},
             {"stages", stages}};
    std::ofstream(dir / "manifest.json") << out.dump(2) << '\n';
    return manifest;
}

}  // namespace qhyp
