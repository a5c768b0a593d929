#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spsd/errors.hpp"
#include "spsd/linalg.hpp"
#include "spsd/models.hpp"

using namespace spsd;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::config;
}

}  // namespace

TEST(LogisticOu, EquilibriumAndLinearization) {
    const LogisticOuParams p = logistic_ou_case(1);
    const PeriodicModel m = logistic_ou_model(p);
    const Vector f = m.drift_at(3.0, Vector{1.0, 0.5});
    EXPECT_EQ(f[0], 0.0);
    EXPECT_EQ(f[1], 0.0);
    EXPECT_EQ(logistic_ou_equilibrium(p), (Vector{1.0, 0.5}));
    EXPECT_EQ(logistic_ou_linearization(p), (Matrix{{-0.5, 1.0}, {0.0, -0.3}}));
    EXPECT_EQ(m.jacobian_at(0.0, Vector{1.0, 0.5}), logistic_ou_linearization(p));
    const Matrix g = m.diffusion_at(p.period / 4, Vector{1.0, 0.5});
    EXPECT_EQ(g(0, 0), 0.0);
    EXPECT_NEAR(g(1, 0), 0.1, 1e-15);
    EXPECT_TRUE(m.additive_noise);
}

TEST(LogisticOu, Cases) {
    EXPECT_EQ(logistic_ou_case(1).period, 50.0);
    EXPECT_EQ(logistic_ou_case(2).period, 100.0);
    EXPECT_EQ(logistic_ou_case(3).epsilon, 0.05);
    EXPECT_EQ(logistic_ou_case(4).epsilon, 0.1);
    EXPECT_EQ(parse_case("III"), 3);
    EXPECT_EQ(parse_case("2"), 2);
    EXPECT_EQ(kind_of([] { (void)parse_case("V"); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { (void)logistic_ou_case(5); }), ErrorKind::config);
    EXPECT_STREQ(case_label(4), "IV");
    LogisticOuParams bad;
    bad.m0 = -1.0;
    EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::config);
}

TEST(LogisticOu, ClosedFormPhi) {
    for (int c = 1; c <= 4; ++c) {
        const LogisticOuParams p = logistic_ou_case(c);
        const auto cf = logistic_ou_closed_forms(p);
        const Matrix a = logistic_ou_linearization(p);
        for (double t : {0.0, 1.0, 7.5, 30.0}) {
            const double h = 1e-5;
            const Matrix d = (1.0 / (2 * h)) * (cf.phi(t + h) - cf.phi(t - h));
            EXPECT_LE(max_abs(d - a * cf.phi(t)), 1e-9);
            EXPECT_LE(frobenius_norm(cf.phi(t) * cf.phi_inverse(t) - Matrix::identity(2)), 1e-12);
        }
        const auto mem = eigen_moduli_in_unit_disc(cf.phi(p.period));
        EXPECT_TRUE(mem.is_member);
        EXPECT_NEAR(mem.moduli[0], std::exp(-p.m0 * p.period), 1e-14);
        EXPECT_NEAR(mem.moduli[1], std::exp(-p.r_bar * p.period), 1e-14);
    }
}

TEST(LogisticOu, HbarSatisfiesItsDefinition) {
    // hbar' = Phi^-1 Gamma Gamma^T Phi^-T, hbar(0) = 0
    const LogisticOuParams p = logistic_ou_case(2);
    const auto cf = logistic_ou_closed_forms(p);
    EXPECT_LE(max_abs(cf.hbar(0.0)), 1e-15);
    for (double t : {2.0, 20.0, 65.0}) {
        const double h = 1e-4;
        const Matrix d = (1.0 / (2 * h)) * (cf.hbar(t + h) - cf.hbar(t - h));
        const Matrix gi = cf.phi_inverse(t) * Matrix{{0.0}, {p.sigma(t)}};
        const Matrix k = gi * gi.transpose();
        EXPECT_LE(max_abs(d - k), 1e-7 * (1.0 + max_abs(k)));
    }
    const double theta = p.period;
    const double h22 = p.sigma0 * p.sigma0 * kPi * kPi * (std::exp(2 * p.m0 * theta) - 1) /
                       (p.m0 * (p.m0 * p.m0 * theta * theta + 4 * kPi * kPi));
    EXPECT_NEAR(cf.hbar(theta)(1, 1) / h22, 1.0, 1e-12);
}

TEST(LogisticOu, ClosedFormSigmaIsPeriodicAndKnown) {
    const auto cf = logistic_ou_closed_forms(logistic_ou_case(1));
    const Matrix s0 = cf.sigma0();
    const Matrix published{{1.04524e-4, 0.34123e-4}, {0.34123e-4, 0.12439e-4}};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(s0(i, j) / published(i, j), 1.0, 1e-4);
    EXPECT_LE(relative_difference(cf.sigma(50.0), s0), 1e-10);
    EXPECT_LE(relative_difference(cf.sigma(0.0), s0), 1e-13);
}

TEST(LogisticOu, DegenerateBranch) {
    LogisticOuParams p = logistic_ou_case(1);
    p.m0 = p.r_bar;
    EXPECT_EQ(kind_of([&] { (void)logistic_ou_closed_forms(p); }), ErrorKind::domain);
    const Matrix a = logistic_ou_linearization(p);
    for (double t : {0.5, 4.0}) {
        const double h = 1e-5;
        const Matrix d = (1.0 / (2 * h)) * (logistic_ou_degenerate_phi(p, t + h) - logistic_ou_degenerate_phi(p, t - h));
        EXPECT_LE(max_abs(d - a * logistic_ou_degenerate_phi(p, t)), 1e-9);
    }
    LogisticOuParams c = logistic_ou_case(1);
    c.profile = SigmaProfile::constant;
    EXPECT_EQ(kind_of([&] { (void)logistic_ou_closed_forms(c); }), ErrorKind::domain);
    EXPECT_EQ(c.sigma(13.0), c.sigma0);
}

TEST(ScalarLogistic, Model) {
    ScalarLogisticParams p;
    const PeriodicModel m = scalar_logistic_model(p);
    EXPECT_TRUE(m.positive_invariant);
    EXPECT_EQ(m.drift_at(0.0, Vector{1.0})[0], 0.0);
    EXPECT_NEAR(m.diffusion_at(0.0, Vector{2.0})(0, 0), 0.4, 1e-15);
    EXPECT_NEAR(scalar_logistic_log_mean(p), std::log((0.5 - 0.1 * 0.04 / 2) / 0.5), 1e-15);
    EXPECT_NEAR(scalar_logistic_log_variance(p), 0.1 * 0.04 / (2 * (0.5 - 0.002)), 1e-15);
    p.sigma = 10.0;
    p.epsilon = 1.0;
    EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::config);
}
