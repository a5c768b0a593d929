#include "spsd/report_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

namespace {

std::vector<std::string> cov_labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) out.push_back(prefix + std::to_string(a + 1) + std::to_string(b + 1));
    return out;
}

void write_row(std::ostream& os, const std::vector<double>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_number(row[k]);
    os << '\n';
}

void append_upper(std::vector<double>& row, const Matrix& m) {
    for (std::size_t a = 0; a < m.rows(); ++a)
        for (std::size_t b = a; b < m.cols(); ++b) row.push_back(m(a, b));
}

// every stride-th node, always ending on the last one
std::vector<std::size_t> sampled_nodes(std::size_t size, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < size; j += stride) out.push_back(j);
    if (out.back() != size - 1) out.push_back(size - 1);
    return out;
}

Json index_list(const std::vector<std::size_t>& v) {
    Json out = Json::array();
    for (std::size_t i : v) out.push_back(i + 1);
    return out;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Matrix parse_matrix_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos)
                fail(ErrorKind::config, "line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorKind::dimension, "line " + std::to_string(lineno) + ": ragged matrix row");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) fail(ErrorKind::config, "empty matrix file");
    Matrix m(rows.size(), rows.front().size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (!std::isfinite(rows[i][j])) fail(ErrorKind::config, "non-finite matrix entry");
            m(i, j) = rows[i][j];
        }
    return m;
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::config, "cannot open matrix file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return parse_matrix_csv(ss.str());
    } catch (const Error& e) {
        fail(e.kind(), path + ": " + e.what());
    }
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_number(m(i, j));
        os << '\n';
    }
}

Json to_json(const Matrix& m) {
    Json out = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(x);
    return out;
}

Json to_json(const UnitDiscMembership& m) { return {{"in_unit_disc", m.is_member}, {"moduli", to_json(m.moduli)}}; }

Json to_json(const TransformChain& c) {
    return {{"target", c.target_index + 1},
            {"eta", c.terminal_rank},
            {"order", index_list(c.order)},
            {"pivots", index_list(c.pivots)},
            {"pivot_values", to_json(c.pivot_values)},
            {"pivot_products", c.pivot_products},
            {"standard_block", to_json(c.standard_block)}};
}

Json to_json(const PdCertificate& c) {
    Json out{{"verdict", to_string(c.verdict)},
             {"triggered", to_string(c.triggered)},
             {"xi", c.xi},
             {"eta", c.eta},
             {"xi_bar", c.xi_bar},
             {"eta_bar", c.eta_bar},
             {"minorant_indices", index_list(c.minorant_indices)},
             {"minorant_level", c.minorant_level}};
    out["rho"] = c.rho ? Json(*c.rho) : Json(nullptr);
    out["rho_bar"] = c.rho_bar ? Json(*c.rho_bar) : Json(nullptr);
    out["cholesky_success"] = c.cholesky_success;
    out["min_cholesky_pivot"] = c.min_cholesky_pivot;
    return out;
}

Json approximation_json(const SpsdApproximation& approx, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    Json out;
    out["family"] = to_string(approx.family);
    out["dim"] = approx.dim();
    out["period"] = approx.period();
    out["epsilon"] = approx.epsilon;
    out["sigma0"] = to_json(approx.covariance.initial);
    out["stein_residual"] = approx.lyapunov.residual;
    out["periodicity_defect"] = approx.covariance.periodicity_defect;
    out["orbit"] = {{"closure_defect", approx.mean.closure_defect},
                    {"midpoint_residual", approx.mean.midpoint_residual},
                    {"newton_iterations", approx.mean.newton_iterations}};
    out["monodromy"] = to_json(approx.fundamental.monodromy());
    out["monodromy_spectrum"] = to_json(approx.monodromy_spectrum);
    out["noise_gram"] = to_json(approx.gram.full);
    out["certificate"] = to_json(approx.certificate);
    Json path = Json::array();
    const auto& grid = approx.covariance.grid;
    for (std::size_t j : sampled_nodes(grid.size(), stride)) {
        path.push_back({{"t", grid[j]},
                        {"mean", to_json(approx.mean.states[j])},
                        {"cov", to_json(approx.covariance.values[j])}});
    }
    out["path"] = std::move(path);
    return out;
}

Json simulation_json(const SimulationReport& rep) {
    const SimConfig& c = rep.config;
    Json out;
    out["model"] = rep.model;
    out["family"] = to_string(rep.family);
    out["statistics_space"] = rep.family == Family::log_normal ? "log" : "state";
    out["config"] = {{"dt", c.dt},
                     {"horizon", c.horizon},
                     {"num", c.replicas},
                     {"seed", c.seed},
                     {"scheme", to_string(c.scheme)},
                     {"ks_times", c.ks_times},
                     {"ks_alpha", c.ks_alpha}};
    out["effective_scheme"] = to_string(rep.effective_scheme);
    out["included"] = rep.included;
    out["blowups"] = rep.blowups;
    out["warnings"] = rep.warnings;
    out["aee"] = to_json(rep.errors.mean);
    out["aev"] = to_json(rep.errors.cov);
    out["excluded_terms"] = rep.errors.excluded;
    Json ks = Json::array();
    for (const KsResult& r : rep.ks)
        ks.push_back({{"coordinate", r.coordinate + 1},
                      {"time", r.time},
                      {"samples", r.samples},
                      {"statistic", r.statistic},
                      {"threshold", r.threshold},
                      {"reject", r.reject}});
    out["ks"] = std::move(ks);
    return out;
}

void write_path_csv(std::ostream& os, const SpsdApproximation& approx, std::size_t stride) {
    stride = std::max<std::size_t>(stride, 1);
    const std::size_t n = approx.dim();
    os << "time";
    for (std::size_t i = 0; i < n; ++i) os << ",mean_" << i + 1;
    for (const auto& l : cov_labels("cov_", n)) os << ',' << l;
    os << '\n';
    const auto& grid = approx.covariance.grid;
    for (std::size_t j : sampled_nodes(grid.size(), stride)) {
        std::vector<double> row{grid[j]};
        row.insert(row.end(), approx.mean.states[j].begin(), approx.mean.states[j].end());
        append_upper(row, approx.covariance.values[j]);
        write_row(os, row);
    }
}

void write_statistics_csv(std::ostream& os, const SimulationReport& rep) {
    const std::size_t n = rep.sample_mean.empty() ? 0 : rep.sample_mean.front().size();
    os << "time";
    for (std::size_t i = 0; i < n; ++i) os << ",mean_" << i + 1;
    for (const auto& l : cov_labels("cov_", n)) os << ',' << l;
    for (std::size_t i = 0; i < n; ++i) os << ",ref_mean_" << i + 1;
    for (const auto& l : cov_labels("ref_cov_", n)) os << ',' << l;
    os << '\n';
    for (std::size_t j = 0; j < rep.sample_mean.size(); ++j) {
        std::vector<double> row{static_cast<double>(j)};
        row.insert(row.end(), rep.sample_mean[j].begin(), rep.sample_mean[j].end());
        append_upper(row, rep.sample_cov[j]);
        row.insert(row.end(), rep.ref_mean[j].begin(), rep.ref_mean[j].end());
        append_upper(row, rep.ref_cov[j]);
        write_row(os, row);
    }
}

Json report_envelope(const std::string& kind, bool deterministic) {
    Json out;
    out["schema"] = "spsd." + kind;
    out["schema_version"] = kSchemaVersion;
    if (!deterministic) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        out["timestamp"] = buf;
    }
    return out;
}

}  // namespace spsd
