// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: spsd_acceptance [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "spsd/errors.hpp"
#include "spsd/linalg.hpp"
#include "spsd/lyapunov.hpp"
#include "spsd/models.hpp"
#include "spsd/montecarlo.hpp"
#include "spsd/plna.hpp"
#include "spsd/pnoa.hpp"
#include "support.hpp"

using namespace spsd;

namespace {

// Tolerances and sizes, fixed here so the suite cannot drift.
namespace pin {
constexpr double sigma0_rel = 1e-3;
constexpr double pipeline_seconds = 5.0;
constexpr double path_rel = 1e-5;
constexpr int path_samples = 20;
constexpr std::size_t mc_full_num = 10000;
constexpr std::size_t mc_full_horizon = 200;
constexpr double mc_full_mean_pct = 0.05;
constexpr double mc_full_cov_pct = 3.0;
constexpr double mc_full_seconds = 600.0;
constexpr std::size_t mc_smoke_num = 1000;
constexpr std::size_t mc_smoke_horizon = 100;
constexpr double mc_smoke_mean_pct = 0.15;
constexpr double mc_smoke_cov_pct = 8.0;
constexpr double mc_smoke_seconds = 60.0;
constexpr double mc_dt = 1e-3;
constexpr std::uint64_t mc_seed = 42;
constexpr double ks_alpha = 0.02;
constexpr std::size_t ks_max_rejections = 1;
constexpr int oracle_problems = 200;
constexpr double oracle_rel = 1e-8;
constexpr double oracle_residual = 1e-9;
constexpr double oracle_seconds = 30.0;
constexpr int standard_problems = 100;
constexpr double standard_residual = 1e-12;
constexpr int hessenberg_problems = 100;
constexpr double hessenberg_det_rel = 1e-8;
constexpr double periodicity = 1e-7;
constexpr double continuous_residual = 1e-6;
constexpr double plna_rel = 1e-8;
constexpr double plna_residual = 1e-6;
}  // namespace pin

const Vector kGuess{1.05, 0.475};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

const Matrix kPublished1{{1.04524e-4, 0.34123e-4}, {0.34123e-4, 0.12439e-4}};
const Matrix kPublished2{{3.17278e-5, 0.99841e-5}, {0.99841e-5, 0.35018e-5}};

double worst_entry_rel(const Matrix& a, const Matrix& ref) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) w = std::max(w, std::abs(a(i, j) / ref(i, j) - 1.0));
    return w;
}

std::vector<SpsdApproximation>& case_runs() {
    static std::vector<SpsdApproximation> runs;
    if (runs.empty())
        for (int c = 1; c <= 4; ++c) runs.push_back(pnoa_approximate(logistic_ou_model(logistic_ou_case(c)), kGuess));
    return runs;
}

void published_sigma0(Outcome& o, int c, const Matrix& published) {
    const auto t0 = std::chrono::steady_clock::now();
    const SpsdApproximation a = pnoa_approximate(logistic_ou_model(logistic_ou_case(c)), kGuess);
    const double secs = seconds_since(t0);
    const double rel = worst_entry_rel(a.covariance.initial, published);
    o.detail << "max entry rel err " << rel << " (tol " << pin::sigma0_rel << "), " << secs << " s";
    o.require(rel <= pin::sigma0_rel, "Sigma0 tolerance");
    o.require(secs < pin::pipeline_seconds, "runtime");
}

void criterion3(Outcome& o) {
    double worst = 0.0;
    for (int c = 1; c <= 4; ++c) {
        const SpsdApproximation& a = case_runs()[static_cast<std::size_t>(c - 1)];
        const auto cf = logistic_ou_closed_forms(logistic_ou_case(c));
        for (int k = 0; k < pin::path_samples; ++k) {
            const double t = a.period() * k / (pin::path_samples - 1.0);
            worst = std::max(worst, relative_difference(a.covariance_at(t), cf.sigma(t)));
        }
    }
    o.detail << "max rel err " << worst << " over 4 cases x " << pin::path_samples << " times (tol " << pin::path_rel
             << ")";
    o.require(worst <= pin::path_rel, "path tolerance");
}

struct McRun {
    SimulationReport rep;
    double seconds = 0.0;
};

McRun run_mc(std::size_t num, std::size_t horizon, std::vector<std::size_t> ks_times) {
    const PeriodicModel m = logistic_ou_model(logistic_ou_case(1));
    SimConfig cfg;
    cfg.dt = pin::mc_dt;
    cfg.horizon = horizon;
    cfg.replicas = num;
    cfg.seed = pin::mc_seed;
    cfg.scheme = Scheme::milstein;
    cfg.ks_times = std::move(ks_times);
    cfg.ks_alpha = pin::ks_alpha;
    const auto t0 = std::chrono::steady_clock::now();
    McRun r{simulate_statistics(m, case_runs()[0], cfg), 0.0};
    r.seconds = seconds_since(t0);
    return r;
}

void check_mc(Outcome& o, const char* label, const McRun& r, double mean_pct, double cov_pct, double limit_s) {
    const auto& e = r.rep.errors;
    const double aee = 100.0 * std::max(e.mean[0], e.mean[1]);
    const double aev = 100.0 * std::max({e.cov(0, 0), e.cov(0, 1), e.cov(1, 1)});
    o.detail << label << ": Aee " << 100 * e.mean[0] << "%, " << 100 * e.mean[1] << "% (tol " << mean_pct
             << "%), Aev " << 100 * e.cov(0, 0) << "%, " << 100 * e.cov(0, 1) << "%, " << 100 * e.cov(1, 1)
             << "% (tol " << cov_pct << "%), " << r.seconds << " s, " << r.rep.blowups << " blow-ups; ";
    o.require(aee < mean_pct, std::string(label) + " Aee");
    o.require(aev < cov_pct, std::string(label) + " Aev");
    o.require(r.seconds < limit_s, std::string(label) + " runtime");
}

void criterion6(Outcome& o) {
    testing::Rng rng(20260601);
    const auto t0 = std::chrono::steady_clock::now();
    double worst_rel = 0.0, worst_res = 0.0;
    for (int k = 0; k < pin::oracle_problems; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(k % 5);
        const Matrix a = testing::random_cm_matrix(rng, n);
        const std::size_t rank = 1 + static_cast<std::size_t>(testing::uniform(rng, 0.0, static_cast<double>(n)));
        const LyapunovProblem p(a, testing::random_psd(rng, n, std::min(rank, n)));
        const LyapunovSolution s = solve_discrete_lyapunov(p);
        const Matrix ser = series_oracle(p, 1e-16);
        const Matrix vec = vectorization_oracle(p);
        worst_rel = std::max({worst_rel, relative_difference(s.solution, ser), relative_difference(s.solution, vec),
                              relative_difference(ser, vec)});
        worst_res = std::max(worst_res, s.residual / (1.0 + frobenius_norm(s.solution)));
    }
    const double secs = seconds_since(t0);
    o.detail << pin::oracle_problems << " problems: max pairwise rel diff " << worst_rel << " (tol " << pin::oracle_rel
             << "), max scaled residual " << worst_res << " (tol " << pin::oracle_residual << "), " << secs << " s";
    o.require(worst_rel <= pin::oracle_rel, "oracle agreement");
    o.require(worst_res <= pin::oracle_residual, "residual");
    o.require(secs < pin::oracle_seconds, "runtime");
}

void criterion7(Outcome& o) {
    testing::Rng rng(20260602);
    int toeplitz_bad = 0, chol_bad = 0;
    double worst = 0.0;
    for (int k = 0; k < pin::standard_problems; ++k) {
        const std::size_t l = 1 + static_cast<std::size_t>(k % 6);
        const CharPoly p = testing::random_cm_poly(rng, l);
        const Matrix xi = solve_standard_l0(p);
        bool toeplitz = true;
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j)
                if (xi(i, j) != xi(0, i > j ? i - j : j - i)) toeplitz = false;
        toeplitz_bad += toeplitz ? 0 : 1;
        chol_bad += cholesky(xi).success ? 0 : 1;
        Matrix e(l, l, 0.0);
        e(0, 0) = 1.0;
        worst = std::max(worst, stein_residual(p.companion(), xi, e) / (1.0 + frobenius_norm(xi)));
    }
    o.detail << pin::standard_problems << " problems: non-Toeplitz " << toeplitz_bad << ", Cholesky failures "
             << chol_bad << ", max scaled residual " << worst << " (tol " << pin::standard_residual << ")";
    o.require(toeplitz_bad == 0, "Toeplitz");
    o.require(chol_bad == 0, "Cholesky");
    o.require(worst <= pin::standard_residual, "residual");
}

void criterion8(Outcome& o) {
    testing::Rng rng(20260603);
    int not_upper = 0, not_standard = 0;
    double worst_det = 0.0, worst_coeff = 0.0;
    for (int k = 0; k < pin::hessenberg_problems; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(k % 5);
        const Matrix c = testing::random_hessenberg_cm(rng, n);
        const HessenbergStandardization hs = hessenberg_standardizer(c);
        const Matrix& d = hs.transform;
        bool upper = true;
        double det = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            det *= d(i, i);
            for (std::size_t j = 0; j < i; ++j)
                if (d(i, j) != 0.0) upper = false;
        }
        not_upper += upper ? 0 : 1;
        double expect = 1.0;
        for (std::size_t i = 1; i < n; ++i) expect *= std::pow(std::abs(c(i, i - 1)), static_cast<double>(i));
        worst_det = std::max(worst_det, std::abs(std::abs(det) / expect - 1.0));
        not_standard += is_standard_companion(hs.standard) ? 0 : 1;
        const CharPoly pc = char_poly(c);
        for (std::size_t j = 0; j < n; ++j)
            worst_coeff = std::max(worst_coeff, std::abs(-hs.standard(0, j) - pc.coeffs[j]) / (1.0 + std::abs(pc.coeffs[j])));
    }
    o.detail << pin::hessenberg_problems << " problems: non-triangular " << not_upper << ", max |det D| rel err "
             << worst_det << " (tol " << pin::hessenberg_det_rel << "), non-standard " << not_standard
             << ", max coefficient err " << worst_coeff;
    o.require(not_upper == 0, "triangular D");
    o.require(worst_det <= pin::hessenberg_det_rel, "determinant");
    o.require(not_standard == 0, "standard form");
    o.require(worst_coeff <= 1e-8, "characteristic coefficients");
}

void criterion9(Outcome& o) {
    double worst = 0.0;
    auto track = [&](const SpsdApproximation& a) {
        worst = std::max(worst, a.covariance.periodicity_defect / (1.0 + frobenius_norm(a.covariance.initial)));
    };
    for (const auto& a : case_runs()) track(a);
    LogisticOuParams p = logistic_ou_case(1);
    p.profile = SigmaProfile::constant;
    const PeriodicModel m = logistic_ou_model(p);
    const SpsdApproximation a = pnoa_approximate(m, kGuess);
    track(a);
    const ScalarLogisticParams sp;
    const SpsdApproximation s = plna_approximate(scalar_logistic_model(sp), Vector{1.0});
    track(s);

    const Matrix& s0 = a.covariance.initial;
    double drift = 0.0;
    for (const Matrix& v : a.covariance.values) drift = std::max(drift, relative_difference(v, s0));
    const Matrix c = logistic_ou_linearization(p);
    const Matrix g{{0.0}, {p.sigma0}};
    const double lyap = frobenius_norm(c * s0 + s0 * c.transpose() + p.epsilon * (g * g.transpose()));
    const double ode = autonomous_residual(m, a);
    o.detail << "max scaled periodicity defect " << worst << " over 6 runs (tol " << pin::periodicity
             << "); constant sigma: max rel variation " << drift << ", continuous Lyapunov residual " << lyap
             << ", ODE residual " << ode << " (tol " << pin::continuous_residual << ")";
    o.require(worst <= pin::periodicity, "periodicity");
    o.require(lyap <= pin::continuous_residual, "continuous Lyapunov residual");
    o.require(ode <= pin::continuous_residual, "ODE residual");
    o.require(drift <= 1e-6, "constant covariance");
}

void criterion10(Outcome& o) {
    const ScalarLogisticParams p;
    const PeriodicModel m = scalar_logistic_model(p);
    const SpsdApproximation a = plna_approximate(m, Vector{1.0});
    const double expect = scalar_logistic_log_variance(p);
    const double rel = std::abs(a.covariance.initial(0, 0) / expect - 1.0);
    const double res = autonomous_residual(m, a);
    o.detail << "Sigma^d(0) = " << a.covariance.initial(0, 0) << " vs " << expect << ", rel err " << rel << " (tol "
             << pin::plna_rel << "), residual " << res << " (tol " << pin::plna_residual << ")";
    o.require(rel <= pin::plna_rel, "variance");
    o.require(res <= pin::plna_residual, "residual");
}

bool selected(const std::vector<int>& only, int k) {
    return only.empty() || std::find(only.begin(), only.end(), k) != only.end();
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.push_back(std::stoi(tok));
        } else {
            std::fprintf(stderr, "usage: %s [--only N[,N...]]\n", argv[0]);
            return 2;
        }
    }

    int failed = 0;
    auto run = [&](int k, const char* title, const std::function<void(Outcome&)>& body) {
        if (!selected(only, k)) return;
        Outcome o;
        try {
            body(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2d %s: %s | %s\n", k, o.pass ? "PASS" : "FAIL", title, o.detail.str().c_str());
        std::fflush(stdout);
    };

    run(1, "case I Sigma0", [](Outcome& o) { published_sigma0(o, 1, kPublished1); });
    run(2, "case II Sigma0", [](Outcome& o) { published_sigma0(o, 2, kPublished2); });
    run(3, "closed-form path agreement", criterion3);

    McRun full;
    bool have_full = false;
    auto full_run = [&]() -> const McRun& {
        if (!have_full) {
            full = run_mc(pin::mc_full_num, pin::mc_full_horizon, {25, 50, 100});
            have_full = true;
        }
        return full;
    };
    run(4, "Monte Carlo error magnitudes", [&](Outcome& o) {
        check_mc(o, "full Num=1e4 T=200", full_run(), pin::mc_full_mean_pct, pin::mc_full_cov_pct, pin::mc_full_seconds);
        const McRun smoke = run_mc(pin::mc_smoke_num, pin::mc_smoke_horizon, {});
        check_mc(o, "smoke Num=1e3 T=100", smoke, pin::mc_smoke_mean_pct, pin::mc_smoke_cov_pct,
                 pin::mc_smoke_seconds);
    });
    run(5, "KS acceptance", [&](Outcome& o) {
        const auto& ks = full_run().rep.ks;
        std::size_t rejected = 0;
        for (const KsResult& k : ks) {
            rejected += k.reject ? 1 : 0;
            o.detail << "(x" << k.coordinate + 1 << ", t=" << k.time << ") D=" << k.statistic << (k.reject ? " reject; " : "; ");
        }
        o.detail << "threshold " << (ks.empty() ? 0.0 : ks.front().threshold) << ", " << rejected << " of " << ks.size()
                 << " rejected (max " << pin::ks_max_rejections << ")";
        o.require(ks.size() == 6, "six tests");
        o.require(rejected <= pin::ks_max_rejections, "rejections");
    });
    run(6, "Lyapunov triple oracle", criterion6);
    run(7, "standard L0 properties", criterion7);
    run(8, "Hessenberg standardizer", criterion8);
    run(9, "periodicity and autonomous degeneration", criterion9);
    run(10, "PLNA scalar oracle", criterion10);

    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
