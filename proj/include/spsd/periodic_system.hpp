#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spsd/matrix.hpp"

namespace spsd {

using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Writes a row-major matrix into out.
using MatrixField = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
using MatrixPath = std::function<Matrix(double t)>;

/// dX = f(t,X) dt + sqrt(eps) Gamma(t,X) dW with f, Gamma theta-periodic in t.
/// For Kolmogorov systems Gamma = diag(x) g; use kolmogorov_model to build one.
struct PeriodicModel {
    std::string name;
    std::size_t dim = 0;
    std::size_t noise_dim = 0;
    double period = 1.0;
    double epsilon = 1.0;
    VectorField drift;
    MatrixField diffusion;      // Gamma, dim x noise_dim
    MatrixField noise_factor;   // g, optional
    MatrixField jacobian;       // df/dx, optional
    std::function<void(double t, std::span<double> out)> orbit;  // closed-form X*(t), optional
    bool additive_noise = false;
    bool positive_invariant = false;

    [[nodiscard]] Vector drift_at(double t, std::span<const double> x) const;
    [[nodiscard]] Matrix diffusion_at(double t, std::span<const double> x) const;
    /// Analytic when available, else central differences with h_j = max(1e-6, 1e-7 |x_j|).
    [[nodiscard]] Matrix jacobian_at(double t, std::span<const double> x) const;
    /// g(t,x); derived as Gamma_ij / x_i when no factor was registered.
    [[nodiscard]] Matrix noise_factor_at(double t, std::span<const double> x) const;
};

[[nodiscard]] PeriodicModel kolmogorov_model(std::string name, std::size_t dim, std::size_t noise_dim, double period,
                                             double epsilon, VectorField drift, MatrixField g,
                                             bool positive_invariant);

/// Checks dimensions, theta > 0, eps > 0 and spot-checks periodicity at x.
void validate_model(const PeriodicModel& model, std::span<const double> x);

struct OrbitPath {
    double period = 1.0;
    std::vector<double> grid;
    std::vector<Vector> states;
    std::vector<Vector> slopes;  // drift at the nodes, for Hermite interpolation
    double closure_defect = 0.0;
    double midpoint_residual = 0.0;
    std::size_t newton_iterations = 0;

    [[nodiscard]] std::size_t dim() const noexcept { return states.empty() ? 0 : states.front().size(); }
    /// Cubic Hermite interpolation, t reduced modulo the period.
    [[nodiscard]] Vector at(double t) const;
};

struct OrbitOptions {
    std::size_t steps = 2000;
    double tol = 1e-10;
    std::size_t max_iterations = 50;
    bool use_closed_form = false;
};

[[nodiscard]] OrbitPath find_periodic_orbit(const PeriodicModel& model, std::span<const double> guess,
                                            const OrbitOptions& opts = {});

[[nodiscard]] MatrixPath jacobian_path(const PeriodicModel& model, const OrbitPath& orbit);
/// Gamma*(t) = Gamma(t, X*(t))
[[nodiscard]] MatrixPath noise_path(const PeriodicModel& model, const OrbitPath& orbit);

struct FundamentalPath {
    double period = 1.0;
    std::vector<double> grid;
    std::vector<Matrix> phi;
    std::vector<Matrix> psi;  // co-integrated inverse
    MatrixPath jacobian;

    [[nodiscard]] const Matrix& monodromy() const { return phi.back(); }
    [[nodiscard]] std::size_t steps() const noexcept { return grid.size() - 1; }

    struct State {
        Matrix phi;
        Matrix psi;
    };
    /// Off-grid evaluation by two RK4 sub-steps from the node below t, t in [0, period].
    [[nodiscard]] State at(double t) const;
};

[[nodiscard]] FundamentalPath fundamental_matrix(MatrixPath c, double period, std::size_t steps = 2000);

struct NoiseGram {
    Matrix full;                   // Phi(theta) partial(theta) Phi(theta)^T
    std::vector<Matrix> partials;  // cumulative integrals at the grid nodes
    MatrixPath noise;

    [[nodiscard]] Matrix partial_at(double t, const FundamentalPath& fund) const;
};

[[nodiscard]] NoiseGram noise_gram(MatrixPath gamma, const FundamentalPath& fund);
[[nodiscard]] NoiseGram noise_gram(const PeriodicModel& model, const OrbitPath& orbit, const FundamentalPath& fund);

/// t reduced into [0, period]; t in [0, period] is returned unchanged, other exact multiples map to 0.
[[nodiscard]] double reduce_time(double t, double period) noexcept;

}  // namespace spsd
