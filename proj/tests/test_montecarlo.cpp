#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "spsd/errors.hpp"
#include "spsd/models.hpp"
#include "spsd/montecarlo.hpp"
#include "spsd/plna.hpp"
#include "spsd/pnoa.hpp"

using namespace spsd;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::config;
}

SimConfig small_config(std::size_t replicas, std::size_t horizon, double dt = 0.01) {
    SimConfig c;
    c.replicas = replicas;
    c.horizon = horizon;
    c.dt = dt;
    c.seed = 7;
    c.threads = 1;
    return c;
}

// Two decoupled logistic equations with multiplicative noise driven by g.
PeriodicModel two_species(Matrix g) {
    return kolmogorov_model(
        "two-species", 2, 2, 5.0, 0.05,
        [](double, std::span<const double> x, std::span<double> out) {
            out[0] = x[0] * (1.0 - x[0]);
            out[1] = x[1] * (0.8 - x[1]);
        },
        [g](double, std::span<const double>, std::span<double> out) {
            std::copy(g.data().begin(), g.data().end(), out.begin());
        },
        true);
}

struct EnvGuard {
    explicit EnvGuard(const char* v) {
        if (v) setenv("SPSD_THREADS", v, 1);
        else unsetenv("SPSD_THREADS");
    }
    ~EnvGuard() { unsetenv("SPSD_THREADS"); }
};

}  // namespace

TEST(Ks, StatisticExamples) {
    const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const std::size_t m = 1000;
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) q[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    EXPECT_NEAR(ks_statistic(q, uniform), 0.5 / m, 1e-15);
    const std::vector<double> three{0.9, 0.1, 0.5};
    EXPECT_NEAR(ks_statistic(three, uniform), 7.0 / 30.0, 1e-15);
    EXPECT_EQ(kind_of([&] { (void)ks_statistic(std::vector<double>{}, uniform); }), ErrorKind::domain);
}

TEST(Ks, Threshold) {
    EXPECT_NEAR(ks_threshold(100000, 0.02), 0.004800, 2e-6);
    EXPECT_NEAR(ks_threshold(1, 0.05), std::sqrt(-std::log(0.025) / 2), 1e-15);
    EXPECT_EQ(kind_of([] { (void)ks_threshold(0, 0.02); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { (void)ks_threshold(10, 1.0); }), ErrorKind::domain);
}

TEST(Ks, MarginalTestCalibration) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(2.0, 0.5);
    int rejections = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> s(500);
        for (double& v : s) v = normal(rng);
        rejections += ks_marginal_test(s, 2.0, 0.25, 0.02).reject ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / reps;
    EXPECT_GE(rate, 0.005);
    EXPECT_LE(rate, 0.05);

    std::vector<double> shifted(2000);
    for (double& v : shifted) v = normal(rng) + 0.2;
    EXPECT_TRUE(ks_marginal_test(shifted, 2.0, 0.25, 0.02).reject);
    EXPECT_EQ(kind_of([&] { (void)ks_marginal_test(shifted, 2.0, 0.0, 0.02); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([&] { (void)ks_marginal_test(std::vector<double>(5, 1.0), 2.0, 1.0, 0.02); }),
              ErrorKind::domain);
}

TEST(Stats, RelativeErrors) {
    const std::vector<Vector> sm{{0.0}, {1.01}, {1.01}};
    const std::vector<Vector> rm{{5.0}, {1.0}, {1.0}};
    const std::vector<Matrix> sc{Matrix{{9.0}}, Matrix{{2.0}}, Matrix{{0.0}}};
    const std::vector<Matrix> rc{Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}};
    const RelativeErrors e = relative_errors(sm, sc, rm, rc);
    EXPECT_NEAR(e.mean[0] * 100.0, 0.990099, 1e-6);
    EXPECT_NEAR(e.cov(0, 0), 0.5, 1e-15);  // j = 0 ignored, the zero denominator dropped
    EXPECT_EQ(e.excluded, 1u);
    const std::vector<Vector> neg{{0.0}, {-2.0}};
    const std::vector<Vector> negref{{0.0}, {-1.0}};
    const std::vector<Matrix> one{Matrix{{1.0}}, Matrix{{1.0}}};
    EXPECT_NEAR(relative_errors(neg, one, negref, one).mean[0], 0.5, 1e-15);
    EXPECT_EQ(kind_of([&] { (void)relative_errors(neg, one, negref, sc); }), ErrorKind::dimension);
}

TEST(Stats, Helpers) {
    EXPECT_EQ(normal_cdf(0.0, 0.0, 1.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.96, 0.0, 1.0), 0.9750021048517795, 1e-12);
    EXPECT_EQ(default_ks_times(50.0, 200), (std::vector<std::size_t>{25, 50, 100, 200}));
    EXPECT_EQ(default_ks_times(50.0, 30), (std::vector<std::size_t>{25, 30}));
    EXPECT_EQ(default_ks_times(100.0, 100), (std::vector<std::size_t>{50, 100}));
    EXPECT_NE(substream_seed(1, 0), substream_seed(1, 1));
    EXPECT_NE(substream_seed(1, 0), substream_seed(2, 0));
    EXPECT_EQ(substream_seed(5, 9), substream_seed(5, 9));
    EXPECT_EQ(parse_scheme("em"), Scheme::euler_maruyama);
    EXPECT_EQ(parse_scheme("milstein"), Scheme::milstein);
    EXPECT_EQ(kind_of([] { (void)parse_scheme("rk"); }), ErrorKind::config);
}

TEST(Config, Validation) {
    SimConfig c;
    c.validate();
    EXPECT_EQ(c.steps_per_unit(), 1000u);
    c.dt = 0.3;
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
    c = SimConfig{};
    c.replicas = 1;
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
    c = SimConfig{};
    c.horizon = 0;
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
    c = SimConfig{};
    c.ks_times = {500};
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
    c = SimConfig{};
    c.ks_alpha = 0.0;
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::config);
}

TEST(Config, ThreadEnvironment) {
    {
        EnvGuard g(nullptr);
        EXPECT_EQ(resolve_threads(3), 3u);
        EXPECT_GE(resolve_threads(0), 1u);
    }
    {
        EnvGuard g("2");
        EXPECT_EQ(resolve_threads(8), 2u);
        EXPECT_EQ(resolve_threads(1), 1u);
    }
    {
        EnvGuard g("two");
        EXPECT_EQ(kind_of([] { (void)resolve_threads(1); }), ErrorKind::config);
    }
    {
        EnvGuard g("0");
        EXPECT_EQ(kind_of([] { (void)resolve_threads(1); }), ErrorKind::config);
    }
}

TEST(Simulation, DeterministicAcrossThreadCounts) {
    EnvGuard g(nullptr);
    const PeriodicModel m = logistic_ou_model(logistic_ou_case(1));
    const SpsdApproximation a = pnoa_approximate(m, Vector{1.05, 0.475});
    SimConfig c = small_config(300, 5);
    const SimulationReport r1 = simulate_statistics(m, a, c);
    for (std::size_t t : {2, 3}) {
        c.threads = t;
        const SimulationReport r = simulate_statistics(m, a, c);
        ASSERT_EQ(r.sample_mean.size(), r1.sample_mean.size());
        for (std::size_t j = 0; j < r.sample_mean.size(); ++j) {
            EXPECT_EQ(r.sample_mean[j], r1.sample_mean[j]);
            EXPECT_EQ(r.sample_cov[j], r1.sample_cov[j]);
        }
        ASSERT_EQ(r.ks.size(), r1.ks.size());
        for (std::size_t k = 0; k < r.ks.size(); ++k) EXPECT_EQ(r.ks[k].statistic, r1.ks[k].statistic);
    }
    c.seed = 8;
    EXPECT_NE(simulate_statistics(m, a, c).sample_mean[5], r1.sample_mean[5]);
}

TEST(Simulation, AdditiveNoiseMilsteinEqualsEuler) {
    const PeriodicModel m = logistic_ou_model(logistic_ou_case(1));
    const SpsdApproximation a = pnoa_approximate(m, Vector{1.05, 0.475});
    SimConfig c = small_config(64, 3);
    const SimulationReport mil = simulate_statistics(m, a, c);
    c.scheme = Scheme::euler_maruyama;
    const SimulationReport em = simulate_statistics(m, a, c);
    EXPECT_EQ(mil.effective_scheme, Scheme::milstein);
    for (std::size_t j = 0; j < mil.sample_mean.size(); ++j) EXPECT_EQ(mil.sample_mean[j], em.sample_mean[j]);
}

TEST(Simulation, OrnsteinUhlenbeckVariance) {
    LogisticOuParams p = logistic_ou_case(1);
    p.profile = SigmaProfile::constant;
    p.epsilon = 0.05;
    const PeriodicModel m = logistic_ou_model(p);
    const SpsdApproximation a = pnoa_approximate(m, Vector{1.05, 0.475});
    const std::size_t num = 4000;
    const SimulationReport r = simulate_statistics(m, a, small_config(num, 10));
    const double v = p.epsilon * p.sigma0 * p.sigma0 / (2 * p.m0);
    const double se = v * std::sqrt(2.0 / (num - 1));
    for (std::size_t j : {1, 5, 10}) {
        EXPECT_NEAR(r.sample_cov[j](1, 1), v, 4 * se) << j;
        EXPECT_NEAR(r.sample_mean[j][1], p.r_bar, 4 * std::sqrt(v / num)) << j;
        EXPECT_NEAR(r.sample_cov[j](0, 0), r.ref_cov[j](0, 0), 4 * r.ref_cov[j](0, 0) * std::sqrt(2.0 / num)) << j;
    }
    EXPECT_EQ(r.included, num);
    EXPECT_EQ(r.blowups, 0u);
    EXPECT_EQ(r.config.ks_times, (std::vector<std::size_t>{10}));
    EXPECT_EQ(r.ks.size(), 2u);
}

TEST(Simulation, ZeroNoiseIsDeterministic) {
    LogisticOuParams p = logistic_ou_case(1);
    p.sigma0 = 0.0;
    const PeriodicModel m = logistic_ou_model(p);
    const SpsdApproximation a = pnoa_approximate(m, Vector{1.05, 0.475});
    const SimulationReport r = simulate_statistics(m, a, small_config(100, 4));
    for (std::size_t j = 0; j <= 4; ++j) {
        EXPECT_LE(max_abs(r.sample_cov[j]), 1e-25);
        EXPECT_NEAR(r.sample_mean[j][0], 1.0, 1e-9);
        EXPECT_NEAR(r.sample_mean[j][1], 0.5, 1e-9);
    }
    EXPECT_TRUE(r.ks.empty());
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Simulation, LogNormalFamilyScalarNoise) {
    const ScalarLogisticParams p;
    const PeriodicModel m = scalar_logistic_model(p);
    const SpsdApproximation a = plna_approximate(m, Vector{1.0});
    const std::size_t num = 4000;
    const SimulationReport r = simulate_statistics(m, a, small_config(num, 6));
    EXPECT_EQ(r.family, Family::log_normal);
    EXPECT_EQ(r.effective_scheme, Scheme::milstein);
    const double v = scalar_logistic_log_variance(p);
    for (std::size_t j : {2, 6}) {
        EXPECT_NEAR(r.sample_mean[j][0], scalar_logistic_log_mean(p), 4 * std::sqrt(v / num));
        EXPECT_NEAR(r.sample_cov[j](0, 0), v, 4 * v * std::sqrt(2.0 / num) + 0.02 * v);
    }
    // ln X is log-gamma in stationarity, so the normal law is only approximate
    std::size_t rejected = 0;
    for (const KsResult& k : r.ks) rejected += k.reject ? 1 : 0;
    EXPECT_LE(rejected, 1u);
}

TEST(Simulation, SchemeSelectionForMultiplicativeNoise) {
    const PeriodicModel diag = two_species(Matrix{{0.3, 0.0}, {0.0, 0.2}});
    const SpsdApproximation ad = plna_approximate(diag, Vector{1.0, 0.8});
    const SimulationReport rd = simulate_statistics(diag, ad, small_config(64, 2));
    EXPECT_EQ(rd.effective_scheme, Scheme::milstein);
    EXPECT_TRUE(rd.warnings.empty());

    const PeriodicModel full = two_species(Matrix{{0.3, 0.1}, {0.1, 0.2}});
    const SpsdApproximation af = plna_approximate(full, Vector{1.0, 0.8});
    const SimulationReport rf = simulate_statistics(full, af, small_config(64, 2));
    EXPECT_EQ(rf.effective_scheme, Scheme::euler_maruyama);
    ASSERT_FALSE(rf.warnings.empty());
}

TEST(Simulation, BlowUpsAreRejected) {
    PeriodicModel m;
    m.name = "cubic";
    m.dim = 1;
    m.noise_dim = 1;
    m.period = 1.0;
    m.epsilon = 4.0;
    m.drift = [](double, std::span<const double> x, std::span<double> out) { out[0] = -x[0] + x[0] * x[0] * x[0]; };
    m.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    m.additive_noise = true;
    const SpsdApproximation a = pnoa_approximate(m, Vector{0.01});
    EXPECT_EQ(kind_of([&] { (void)simulate_statistics(m, a, small_config(200, 3)); }), ErrorKind::blow_up);
}

TEST(Simulation, RefusesIndeterminateCertificate) {
    const PeriodicModel m = logistic_ou_model(logistic_ou_case(1));
    SpsdApproximation a = pnoa_approximate(m, Vector{1.05, 0.475});
    a.certificate.verdict = Verdict::indeterminate;
    EXPECT_EQ(kind_of([&] { (void)simulate_statistics(m, a, small_config(64, 2)); }), ErrorKind::assumption);
    const PeriodicModel s = scalar_logistic_model(ScalarLogisticParams{});
    const SpsdApproximation b = plna_approximate(s, Vector{1.0});
    EXPECT_EQ(kind_of([&] { (void)simulate_statistics(m, b, small_config(64, 2)); }), ErrorKind::dimension);
}
