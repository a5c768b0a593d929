#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spsd/lyapunov.hpp"
#include "spsd/matrix.hpp"
#include "spsd/periodic_system.hpp"

namespace spsd {

enum class Family { normal, log_normal };

[[nodiscard]] const char* to_string(Family f) noexcept;

struct CovariancePath {
    Matrix initial;
    std::vector<double> grid;
    std::vector<Matrix> values;
    double period = 1.0;
    double periodicity_defect = 0.0;  // ||Sigma(theta) - Sigma(0)||_F
};

/// Sigma(t) = Phi(t) [Sigma0 + eps partial(t)] Phi(t)^T, t reduced modulo the period.
[[nodiscard]] Matrix covariance_at(const CovariancePath& path, const FundamentalPath& fund, const NoiseGram& gram,
                                   double eps, double t);

struct SpsdApproximation {
    Family family = Family::normal;
    double epsilon = 1.0;
    OrbitPath mean;  // X*(t), or the log-orbit for the log-normal family
    FundamentalPath fundamental;
    NoiseGram gram;
    CovariancePath covariance;
    LyapunovSolution lyapunov;
    PdCertificate certificate;
    UnitDiscMembership monodromy_spectrum;

    [[nodiscard]] std::size_t dim() const noexcept { return covariance.initial.rows(); }
    [[nodiscard]] double period() const noexcept { return covariance.period; }
    [[nodiscard]] Vector mean_at(double t) const { return mean.at(t); }
    [[nodiscard]] Matrix covariance_at(double t) const;
};

struct PipelineOptions {
    std::size_t steps = 2000;
    bool use_closed_form_orbit = false;
    double orbit_tol = 1e-10;
    std::size_t max_newton_iterations = 50;
};

/// Linearize along mean with Jacobian path c and noise path gamma, solve the
/// Stein equation for Sigma(0) and tabulate Sigma(t). Shared by PNOA and PLNA.
[[nodiscard]] SpsdApproximation assemble_approximation(Family family, OrbitPath mean, MatrixPath c, MatrixPath gamma,
                                                       double eps, std::size_t steps);

[[nodiscard]] SpsdApproximation pnoa_approximate(const PeriodicModel& model, std::span<const double> orbit_guess,
                                                 const PipelineOptions& opts = {});

/// max over the grid of ||C Sigma + Sigma C^T + eps Gamma Gamma^T - dSigma/dt||_F,
/// with dSigma/dt from periodic fourth-order central differences.
[[nodiscard]] double autonomous_residual(const PeriodicModel& model, const SpsdApproximation& approx);

}  // namespace spsd
