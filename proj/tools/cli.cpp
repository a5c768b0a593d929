#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string_view>

#include "spsd/errors.hpp"
#include "spsd/lyapunov.hpp"
#include "spsd/models.hpp"
#include "spsd/montecarlo.hpp"
#include "spsd/plna.hpp"
#include "spsd/pnoa.hpp"
#include "spsd/report_io.hpp"

namespace spsd::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitCheck = 5;

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::config:
        case ErrorKind::dimension:
        case ErrorKind::domain:
        case ErrorKind::not_hessenberg:
            return kExitConfig;
        case ErrorKind::spectrum:
        case ErrorKind::assumption:
        case ErrorKind::positivity:
            return kExitAssumption;
        default:
            return kExitNumerical;
    }
}

// ---- config file ----------------------------------------------------------

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::config, where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            fail(ErrorKind::config, "unknown key '" + key + "' in " + where);
}

double get_real(const Json& j, const char* key, const std::string& where) {
    const Json& v = j.at(key);
    if (!v.is_number()) fail(ErrorKind::config, where + "." + key + " must be a number");
    return v.get<double>();
}

std::size_t get_count(const Json& j, const char* key, const std::string& where) {
    const Json& v = j.at(key);
    if (!v.is_number_unsigned()) fail(ErrorKind::config, where + "." + key + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

bool get_bool(const Json& j, const char* key, const std::string& where) {
    const Json& v = j.at(key);
    if (!v.is_boolean()) fail(ErrorKind::config, where + "." + key + " must be true or false");
    return v.get<bool>();
}

std::string get_string(const Json& j, const char* key, const std::string& where) {
    const Json& v = j.at(key);
    if (!v.is_string()) fail(ErrorKind::config, where + "." + key + " must be a string");
    return v.get<std::string>();
}

struct OutputSettings {
    std::string dir;
    bool json = true;
    bool csv = true;
    std::size_t stride = 10;
    bool deterministic = false;
};

struct Settings {
    std::optional<Json> model;
    PipelineOptions solver;
    SimConfig sim;
    OutputSettings out;
};

void set_formats(OutputSettings& out, const std::vector<std::string>& formats) {
    out.json = out.csv = false;
    for (const auto& f : formats) {
        if (f == "json") out.json = true;
        else if (f == "csv") out.csv = true;
        else fail(ErrorKind::config, "unknown output format '" + f + "' (expected json or csv)");
    }
}

void load_config(const std::string& path, Settings& s) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::config, "cannot open config file '" + path + "'");
    Json root;
    try {
        root = Json::parse(f);
    } catch (const Json::exception& e) {
        fail(ErrorKind::config, path + ": " + e.what());
    }
    check_keys(root, {"model", "solver", "simulation", "output"}, "config");
    if (root.contains("model")) s.model = root["model"];
    if (root.contains("solver")) {
        const Json& j = root["solver"];
        check_keys(j, {"steps", "orbit_tol", "max_newton_iterations", "use_closed_form_orbit"}, "solver");
        if (j.contains("steps")) s.solver.steps = get_count(j, "steps", "solver");
        if (j.contains("orbit_tol")) s.solver.orbit_tol = get_real(j, "orbit_tol", "solver");
        if (j.contains("max_newton_iterations"))
            s.solver.max_newton_iterations = get_count(j, "max_newton_iterations", "solver");
        if (j.contains("use_closed_form_orbit"))
            s.solver.use_closed_form_orbit = get_bool(j, "use_closed_form_orbit", "solver");
    }
    if (root.contains("simulation")) {
        const Json& j = root["simulation"];
        const std::string w = "simulation";
        check_keys(j, {"dt", "horizon", "num", "seed", "scheme", "ks_times", "ks_alpha", "threads"}, w);
        if (j.contains("dt")) s.sim.dt = get_real(j, "dt", w);
        if (j.contains("horizon")) s.sim.horizon = get_count(j, "horizon", w);
        if (j.contains("num")) s.sim.replicas = get_count(j, "num", w);
        if (j.contains("seed")) s.sim.seed = get_count(j, "seed", w);
        if (j.contains("scheme")) s.sim.scheme = parse_scheme(get_string(j, "scheme", w));
        if (j.contains("ks_alpha")) s.sim.ks_alpha = get_real(j, "ks_alpha", w);
        if (j.contains("threads")) s.sim.threads = get_count(j, "threads", w);
        if (j.contains("ks_times")) {
            if (!j["ks_times"].is_array()) fail(ErrorKind::config, "simulation.ks_times must be an array");
            s.sim.ks_times.clear();
            for (const Json& t : j["ks_times"]) {
                if (!t.is_number_unsigned()) fail(ErrorKind::config, "simulation.ks_times entries must be integers");
                s.sim.ks_times.push_back(t.get<std::size_t>());
            }
        }
    }
    if (root.contains("output")) {
        const Json& j = root["output"];
        check_keys(j, {"dir", "formats", "stride", "deterministic"}, "output");
        if (j.contains("dir")) s.out.dir = get_string(j, "dir", "output");
        if (j.contains("stride")) s.out.stride = get_count(j, "stride", "output");
        if (j.contains("deterministic")) s.out.deterministic = get_bool(j, "deterministic", "output");
        if (j.contains("formats")) {
            if (!j["formats"].is_array()) fail(ErrorKind::config, "output.formats must be an array");
            std::vector<std::string> fm;
            for (const Json& v : j["formats"]) {
                if (!v.is_string()) fail(ErrorKind::config, "output.formats entries must be strings");
                fm.push_back(v.get<std::string>());
            }
            set_formats(s.out, fm);
        }
    }
}

// ---- models ---------------------------------------------------------------

struct ModelChoice {
    PeriodicModel model;
    Vector guess;
    std::optional<LogisticOuParams> logistic;
};

ModelChoice logistic_choice(const LogisticOuParams& p) {
    return {logistic_ou_model(p), {1.05 * p.r_bar / p.b, 0.95 * p.r_bar}, p};
}

ModelChoice scalar_choice(const ScalarLogisticParams& p) { return {scalar_logistic_model(p), {p.r_bar / p.b}, {}}; }

ModelChoice builtin_model(const std::string& name) {
    if (name == "logistic-ou") return logistic_choice(logistic_ou_case(1));
    const std::string prefix = "logistic-ou-case";
    if (name.rfind(prefix, 0) == 0) return logistic_choice(logistic_ou_case(parse_case(name.substr(prefix.size()))));
    if (name == "scalar-logistic") return scalar_choice(ScalarLogisticParams{});
    fail(ErrorKind::config, "unknown model '" + name +
                                "' (builtins: logistic-ou, logistic-ou-case1..4, scalar-logistic, or a .json config)");
}

ModelChoice model_from_block(const Json& j) {
    check_keys(j, {"name", "case", "params", "orbit_guess"}, "model");
    if (!j.contains("name")) fail(ErrorKind::config, "model.name is required");
    const std::string name = get_string(j, "name", "model");
    const Json params = j.contains("params") ? j["params"] : Json::object();
    ModelChoice out;
    if (name == "logistic-ou") {
        LogisticOuParams p = j.contains("case") ? logistic_ou_case(parse_case(get_string(j, "case", "model")))
                                                : LogisticOuParams{};
        const std::string w = "model.params";
        check_keys(params, {"r_bar", "b", "m0", "sigma0", "epsilon", "period", "profile"}, w);
        if (params.contains("r_bar")) p.r_bar = get_real(params, "r_bar", w);
        if (params.contains("b")) p.b = get_real(params, "b", w);
        if (params.contains("m0")) p.m0 = get_real(params, "m0", w);
        if (params.contains("sigma0")) p.sigma0 = get_real(params, "sigma0", w);
        if (params.contains("epsilon")) p.epsilon = get_real(params, "epsilon", w);
        if (params.contains("period")) p.period = get_real(params, "period", w);
        if (params.contains("profile")) {
            const std::string prof = get_string(params, "profile", w);
            if (prof == "sine") p.profile = SigmaProfile::sine;
            else if (prof == "constant") p.profile = SigmaProfile::constant;
            else fail(ErrorKind::config, "model.params.profile must be 'sine' or 'constant'");
        }
        out = logistic_choice(p);
    } else if (name == "scalar-logistic") {
        if (j.contains("case")) fail(ErrorKind::config, "model.case applies to logistic-ou only");
        ScalarLogisticParams p;
        const std::string w = "model.params";
        check_keys(params, {"r_bar", "b", "sigma", "epsilon", "period"}, w);
        if (params.contains("r_bar")) p.r_bar = get_real(params, "r_bar", w);
        if (params.contains("b")) p.b = get_real(params, "b", w);
        if (params.contains("sigma")) p.sigma = get_real(params, "sigma", w);
        if (params.contains("epsilon")) p.epsilon = get_real(params, "epsilon", w);
        if (params.contains("period")) p.period = get_real(params, "period", w);
        out = scalar_choice(p);
    } else {
        fail(ErrorKind::config, "unknown model.name '" + name + "'");
    }
    if (j.contains("orbit_guess")) {
        const Json& g = j["orbit_guess"];
        if (!g.is_array() || g.size() != out.model.dim)
            fail(ErrorKind::config, "model.orbit_guess must be an array of length " + std::to_string(out.model.dim));
        out.guess.clear();
        for (const Json& v : g) {
            if (!v.is_number()) fail(ErrorKind::config, "model.orbit_guess entries must be numbers");
            out.guess.push_back(v.get<double>());
        }
    }
    return out;
}

bool looks_like_file(const std::string& s) {
    return s.size() > 5 && s.substr(s.size() - 5) == ".json";
}

ModelChoice resolve_model(const std::string& model_arg, Settings& s) {
    if (!model_arg.empty() && !looks_like_file(model_arg)) return builtin_model(model_arg);
    if (!model_arg.empty()) load_config(model_arg, s);
    if (!s.model) return builtin_model("logistic-ou");
    return model_from_block(*s.model);
}

// ---- output ---------------------------------------------------------------

void emit(const OutputSettings& out, const std::string& stem, const Json& doc,
          const std::function<void(std::ostream&)>& csv) {
    if (out.dir.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    fs::create_directories(out.dir);
    if (out.json) {
        std::ofstream f(fs::path(out.dir) / (stem + ".json"));
        f << doc.dump(2) << '\n';
        if (!f) fail(ErrorKind::config, "cannot write into '" + out.dir + "'");
    }
    if (out.csv && csv) {
        std::ofstream f(fs::path(out.dir) / (stem + ".csv"));
        csv(f);
        if (!f) fail(ErrorKind::config, "cannot write into '" + out.dir + "'");
    }
}

Json closed_form_json(const SpsdApproximation& approx, const LogisticOuParams& p) {
    if (p.profile != SigmaProfile::sine || std::abs(p.r_bar - p.m0) < 1e-8) return nullptr;
    const LogisticOuClosedForms cf(p);
    const Matrix s0 = cf.sigma0();
    return {{"sigma0", to_json(s0)}, {"relative_difference", relative_difference(approx.covariance.initial, s0)}};
}

// ---- commands -------------------------------------------------------------

struct LyapArgs {
    std::string matrix, rhs, oracle = "both";
    double scale = 1.0;
};

int cmd_lyap(const LyapArgs& a, const OutputSettings& out) {
    const LyapunovProblem prob(read_matrix_csv(a.matrix), read_matrix_csv(a.rhs), a.scale);
    const LyapunovSolution sol = solve_discrete_lyapunov(prob);
    const PdCertificate cert = pd_certificate(prob, sol);
    Json doc = report_envelope("lyap", out.deterministic);
    doc["dim"] = prob.dim();
    doc["scale"] = prob.scale;
    doc["solution"] = to_json(sol.solution);
    doc["residual"] = sol.residual;
    doc["relative_residual"] = sol.residual / (1.0 + frobenius_norm(sol.solution));
    doc["rhs_rank"] = sol.split.rank();
    Json chains = Json::array();
    for (const auto& c : sol.chains) chains.push_back(to_json(c));
    doc["chains"] = std::move(chains);
    doc["certificate"] = to_json(cert);
    Json oracles = Json::object();
    if (a.oracle == "series" || a.oracle == "both") {
        const Matrix s = series_oracle(prob, 1e-15);
        oracles["series"] = {{"solution", to_json(s)}, {"relative_difference", relative_difference(sol.solution, s)}};
    }
    if (a.oracle == "vec" || a.oracle == "both") {
        const Matrix s = vectorization_oracle(prob);
        oracles["vec"] = {{"solution", to_json(s)}, {"relative_difference", relative_difference(sol.solution, s)}};
    }
    doc["oracles"] = std::move(oracles);
    emit(out, "lyap", doc, [&](std::ostream& os) { write_matrix_csv(os, sol.solution); });
    return kExitOk;
}

int cmd_approx(bool log_normal, const ModelChoice& mc, const Settings& s) {
    const SpsdApproximation approx =
        log_normal ? plna_approximate(mc.model, mc.guess, s.solver) : pnoa_approximate(mc.model, mc.guess, s.solver);
    Json doc = report_envelope("approximation", s.out.deterministic);
    doc["command"] = log_normal ? "plna run" : "pnoa run";
    doc["model"] = mc.model.name;
    doc["grid_steps"] = s.solver.steps;
    doc["approximation"] = approximation_json(approx, s.out.stride);
    doc["closed_form"] = !log_normal && mc.logistic ? closed_form_json(approx, *mc.logistic) : Json(nullptr);
    emit(s.out, log_normal ? "plna" : "pnoa", doc,
         [&](std::ostream& os) { write_path_csv(os, approx, s.out.stride); });
    return kExitOk;
}

Json approximation_summary(const SpsdApproximation& approx) {
    return {{"family", to_string(approx.family)},
            {"sigma0", to_json(approx.covariance.initial)},
            {"verdict", to_string(approx.certificate.verdict)},
            {"periodicity_defect", approx.covariance.periodicity_defect}};
}

int cmd_mc(bool log_normal, const ModelChoice& mc, const Settings& s) {
    const SpsdApproximation approx =
        log_normal ? plna_approximate(mc.model, mc.guess, s.solver) : pnoa_approximate(mc.model, mc.guess, s.solver);
    const SimulationReport rep = simulate_statistics(mc.model, approx, s.sim);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    Json doc = report_envelope("simulation", s.out.deterministic);
    doc["model"] = mc.model.name;
    doc["approximation"] = approximation_summary(approx);
    doc["simulation"] = simulation_json(rep);
    emit(s.out, "simulation", doc, [&](std::ostream& os) { write_statistics_csv(os, rep); });
    return kExitOk;
}

struct ReproArgs {
    std::string case_label = "I";
    bool check = false;
};

// Sigma0 entries reported in the worked example, where available.
std::optional<Vector> published_sigma0(int c) {
    if (c == 1) return Vector{1.04524e-4, 0.34123e-4, 0.12439e-4};
    if (c == 2) return Vector{3.17278e-5, 0.99841e-5, 0.35018e-5};
    return std::nullopt;
}

std::string published_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f%%", 100.0 * v);
    return buf;
}

int cmd_repro(const ReproArgs& a, Settings s) {
    const int c = parse_case(a.case_label);
    const LogisticOuParams p = logistic_ou_case(c);
    const ModelChoice mc = logistic_choice(p);
    const SpsdApproximation approx = pnoa_approximate(mc.model, mc.guess, s.solver);
    const Matrix cf = LogisticOuClosedForms(p).sigma0();
    const Matrix& s0 = approx.covariance.initial;

    if (s.sim.ks_times.empty()) s.sim.ks_times = default_ks_times(p.period, s.sim.horizon);
    // the worked example tests at theta/2, theta and 2 theta only
    if (s.sim.ks_times.size() > 3) s.sim.ks_times.resize(3);
    const SimulationReport rep = simulate_statistics(mc.model, approx, s.sim);

    const std::size_t num = s.sim.replicas;
    const double mean_tol = num >= 10000 ? 5e-4 : 1.5e-3;
    const double cov_tol = num >= 100000 ? 5e-3 : num >= 10000 ? 3e-2 : 8e-2;
    const double sigma_tol = 1e-3;
    const double sigma_diff = relative_difference(s0, cf);
    std::size_t rejections = 0;
    for (const auto& k : rep.ks) rejections += k.reject ? 1 : 0;

    std::ostringstream o;
    o << "logistic-OU worked example, case (" << case_label(c) << "): eps=" << p.epsilon << " theta=" << p.period << "\n\n";
    o << "Sigma0 entry   pipeline                 closed form              published\n";
    const auto pub = published_sigma0(c);
    const std::size_t idx[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int k = 0; k < 3; ++k) {
        char line[160];
        std::snprintf(line, sizeof line, "  (%zu,%zu)        %-24.17g %-24.17g %s\n", idx[k][0] + 1, idx[k][1] + 1,
                      s0(idx[k][0], idx[k][1]), cf(idx[k][0], idx[k][1]),
                      pub ? published_cell((*pub)[static_cast<std::size_t>(k)]).c_str() : "-");
        o << line;
    }
    o << "  relative difference to closed form: " << sigma_diff << "\n  certificate: "
      << to_string(approx.certificate.verdict) << " (" << to_string(approx.certificate.triggered) << ")\n\n";
    o << "Monte Carlo: Num=" << num << " T=" << s.sim.horizon << " dt=" << s.sim.dt << " seed=" << s.sim.seed
      << " scheme=" << to_string(rep.effective_scheme) << " blowups=" << rep.blowups << "\n";
    o << "  Aee_x        Aee_r        Aev_11       Aev_12       Aev_22\n";
    const double vals[5] = {rep.errors.mean[0], rep.errors.mean[1], rep.errors.cov(0, 0), rep.errors.cov(0, 1),
                            rep.errors.cov(1, 1)};
    o << " ";
    for (double v : vals) {
        char cell[32];
        std::snprintf(cell, sizeof cell, " %-12s", pct(v).c_str());
        o << cell;
    }
    o << "\n\nKS (alpha=" << s.sim.ks_alpha << "):\n";
    for (const auto& k : rep.ks) {
        char line[128];
        std::snprintf(line, sizeof line, "  t=%-5zu %s  D=%.6f  threshold=%.6f  %s\n", k.time,
                      k.coordinate == 0 ? "x" : "r", k.statistic, k.threshold, k.reject ? "reject" : "accept");
        o << line;
    }

    const bool ok_sigma = sigma_diff <= sigma_tol;
    const bool ok_mean = vals[0] < mean_tol && vals[1] < mean_tol;
    const bool ok_cov = vals[2] < cov_tol && vals[3] < cov_tol && vals[4] < cov_tol;
    const bool ok_ks = rejections <= 1;
    if (a.check) {
        o << "\nchecks:\n"
          << "  " << (ok_sigma ? "PASS" : "FAIL") << " Sigma0 within " << sigma_tol << " of closed form\n"
          << "  " << (ok_mean ? "PASS" : "FAIL") << " Aee below " << pct(mean_tol) << "\n"
          << "  " << (ok_cov ? "PASS" : "FAIL") << " Aev below " << pct(cov_tol) << "\n"
          << "  " << (ok_ks ? "PASS" : "FAIL") << " at most 1 KS rejection (" << rejections << ")\n";
    }
    std::cout << o.str();

    if (!s.out.dir.empty()) {
        Json doc = report_envelope("repro", s.out.deterministic);
        doc["case"] = case_label(c);
        doc["params"] = {{"r_bar", p.r_bar}, {"b", p.b},       {"m0", p.m0},
                         {"sigma0", p.sigma0}, {"epsilon", p.epsilon}, {"period", p.period}};
        doc["sigma0"] = {{"pipeline", to_json(s0)},
                         {"closed_form", to_json(cf)},
                         {"published", pub ? to_json(*pub) : Json(nullptr)},
                         {"relative_difference", sigma_diff}};
        doc["certificate"] = to_json(approx.certificate);
        doc["simulation"] = simulation_json(rep);
        doc["thresholds"] = {{"sigma0", sigma_tol}, {"aee", mean_tol}, {"aev", cov_tol}, {"ks_rejections", 1}};
        doc["checks"] = {{"sigma0", ok_sigma}, {"aee", ok_mean}, {"aev", ok_cov}, {"ks", ok_ks}};
        emit(s.out, "repro", doc, [&](std::ostream& os) { write_statistics_csv(os, rep); });
    }
    if (a.check && !(ok_sigma && ok_mean && ok_cov && ok_ks)) return kExitCheck;
    return kExitOk;
}

}  // namespace

int run_command(int argc, char** argv) {
    CLI::App app{"Periodic normal / log-normal approximations of stochastic Kolmogorov systems"};
    app.require_subcommand(1);

    std::string config_path, model_arg;
    std::string out_dir;
    std::vector<std::string> formats;
    bool deterministic = false;
    std::size_t grid = 0, stride = 0;

    auto add_output = [&](CLI::App* c) {
        c->add_option("--out", out_dir, "output directory (default: JSON on stdout)");
        c->add_option("--format", formats, "output formats: json, csv")->delimiter(',');
        c->add_flag("--deterministic", deterministic, "omit the timestamp field");
    };
    auto add_model = [&](CLI::App* c) {
        c->add_option("--model", model_arg, "builtin model name or a JSON config file");
        c->add_option("--config", config_path, "JSON config with model/solver/simulation/output blocks");
        c->add_option("--grid", grid, "RK4 / quadrature steps per period")->check(CLI::PositiveNumber);
        c->add_option("--stride", stride, "emit every k-th grid node")->check(CLI::PositiveNumber);
    };

    LyapArgs lyap;
    CLI::App* lyap_cmd = app.add_subcommand("lyap", "discrete Lyapunov (Stein) equations");
    lyap_cmd->require_subcommand(1);
    CLI::App* lyap_solve = lyap_cmd->add_subcommand("solve", "solve A S A^T - S + eps Q = 0");
    lyap_solve->add_option("--matrix", lyap.matrix, "CSV file with A")->required();
    lyap_solve->add_option("--rhs", lyap.rhs, "CSV file with Q")->required();
    lyap_solve->add_option("--scale", lyap.scale, "eps multiplying Q");
    lyap_solve->add_option("--oracle", lyap.oracle, "independent check")
        ->check(CLI::IsMember({"none", "series", "vec", "both"}));
    add_output(lyap_solve);

    CLI::App* pnoa_cmd = app.add_subcommand("pnoa", "periodic normal approximation");
    pnoa_cmd->require_subcommand(1);
    CLI::App* pnoa_run = pnoa_cmd->add_subcommand("run", "compute mean path, Sigma(t) and certificate");
    add_model(pnoa_run);
    add_output(pnoa_run);

    CLI::App* plna_cmd = app.add_subcommand("plna", "periodic log-normal approximation");
    plna_cmd->require_subcommand(1);
    CLI::App* plna_run = plna_cmd->add_subcommand("run", "compute log-mean path, Sigma^d(t) and certificate");
    add_model(plna_run);
    add_output(plna_run);

    SimConfig sim_cli;
    std::string scheme_name, approx_name = "pnoa";
    std::size_t threads = 0;
    std::vector<std::size_t> ks_times;
    auto add_sim = [&](CLI::App* c) {
        c->add_option("--num", sim_cli.replicas, "number of simulated paths");
        c->add_option("--seed", sim_cli.seed, "64-bit seed");
        c->add_option("--dt", sim_cli.dt, "step size (1/dt integer)");
        c->add_option("--horizon", sim_cli.horizon, "T, whole time units");
        c->add_option("--scheme", scheme_name, "milstein or euler_maruyama");
        c->add_option("--threads", threads, "worker threads (SPSD_THREADS caps this)");
        c->add_option("--ks-times", ks_times, "integer KS sampling times")->delimiter(',');
        c->add_option("--alpha", sim_cli.ks_alpha, "KS significance level");
    };
    CLI::App* mc_cmd = app.add_subcommand("mc", "Monte Carlo verification");
    mc_cmd->require_subcommand(1);
    CLI::App* mc_verify = mc_cmd->add_subcommand("verify", "simulate the SDE and compare with the approximation");
    add_model(mc_verify);
    add_sim(mc_verify);
    mc_verify->add_option("--approx", approx_name, "reference approximation")
        ->check(CLI::IsMember({"pnoa", "plna"}));
    add_output(mc_verify);

    ReproArgs repro;
    CLI::App* repro_cmd = app.add_subcommand("repro", "reproduce the worked examples");
    repro_cmd->require_subcommand(1);
    CLI::App* ex51 = repro_cmd->add_subcommand("example51", "logistic model with OU growth rate");
    ex51->add_option("--case", repro.case_label, "I, II, III or IV");
    add_sim(ex51);
    ex51->add_option("--grid", grid, "RK4 / quadrature steps per period")->check(CLI::PositiveNumber);
    ex51->add_flag("--check", repro.check, "exit 5 when a threshold is missed");
    add_output(ex51);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        Settings s;
        if (!config_path.empty()) load_config(config_path, s);
        auto apply_overrides = [&](CLI::App* c) {
            if (grid) s.solver.steps = grid;
            if (stride) s.out.stride = stride;
            if (!out_dir.empty()) s.out.dir = out_dir;
            if (!formats.empty()) set_formats(s.out, formats);
            if (deterministic) s.out.deterministic = true;
            auto given = [&](const char* name) { return c->get_option_no_throw(name) && c->count(name) > 0; };
            if (given("--num")) s.sim.replicas = sim_cli.replicas;
            if (given("--seed")) s.sim.seed = sim_cli.seed;
            if (given("--dt")) s.sim.dt = sim_cli.dt;
            if (given("--horizon")) s.sim.horizon = sim_cli.horizon;
            if (given("--alpha")) s.sim.ks_alpha = sim_cli.ks_alpha;
            if (given("--scheme")) s.sim.scheme = parse_scheme(scheme_name);
            if (given("--threads")) s.sim.threads = threads;
            if (given("--ks-times")) s.sim.ks_times = ks_times;
        };

        if (*lyap_solve) {
            apply_overrides(lyap_solve);
            return cmd_lyap(lyap, s.out);
        }
        if (*pnoa_run || *plna_run) {
            CLI::App* c = *pnoa_run ? pnoa_run : plna_run;
            const ModelChoice mc = resolve_model(model_arg, s);
            apply_overrides(c);
            return cmd_approx(c == plna_run, mc, s);
        }
        if (*mc_verify) {
            const ModelChoice mc = resolve_model(model_arg, s);
            apply_overrides(mc_verify);
            return cmd_mc(approx_name == "plna", mc, s);
        }
        if (*ex51) {
            s.sim.replicas = 10000;
            s.sim.seed = 42;
            apply_overrides(ex51);
            return cmd_repro(repro, s);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

}  // namespace spsd::cli
