#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spsd/linalg.hpp"
#include "spsd/matrix.hpp"

namespace spsd {

namespace tol {
inline constexpr double tail = 1e-13;           // zero-tail test relative to ||A||_F
inline constexpr double residual = 1e-9;        // Stein residual contract
inline constexpr std::size_t series_cap = 100000;
}  // namespace tol

/// A Sigma A^T - Sigma + scale * rhs = 0.
struct LyapunovProblem {
    Matrix transition;
    Matrix rhs;
    double scale = 1.0;

    LyapunovProblem(Matrix a, Matrix q, double eps = 1.0);

    [[nodiscard]] std::size_t dim() const noexcept { return transition.rows(); }
};

[[nodiscard]] double stein_residual(const Matrix& a, const Matrix& sigma, const Matrix& forcing);

/// Record of the elimination that carries A (with target coordinate phi)
/// to the block form whose leading eta x eta block is upper CM-Hessenberg.
/// All indices are zero-based.
struct TransformChain {
    std::size_t target_index = 0;
    std::vector<std::size_t> order;     // (J x)_k = x[order[k]]
    std::vector<std::size_t> pivots;    // nu(i), the row brought to i+1 for column i
    std::vector<double> pivot_values;   // abar_{i+1,i} after rotation
    std::vector<Matrix> rotations;      // P_i
    std::vector<Matrix> eliminations;   // Q_i
    std::size_t terminal_rank = 0;      // eta
    Matrix reduced;                     // the transformed matrix
    Matrix standardizer;                // block-diag(M_eta, I)
    Matrix standard_block;              // M_eta C M_eta^-1, standard companion form
    double pivot_products = 1.0;        // (prod of pivot_values)^2

    [[nodiscard]] std::size_t dim() const noexcept { return order.size(); }
    [[nodiscard]] Matrix order_matrix() const;
    /// Q_{eta-1} P_{eta-1} ... Q_1 P_1 J
    [[nodiscard]] Matrix chain_transform() const;
    [[nodiscard]] Matrix chain_transform_inverse() const;
    /// H_1 .. H_eta for the vector z; H_1 = J z, H_{j+1} = Q_j^{-T} P_j H_j.
    [[nodiscard]] std::vector<Vector> h_vectors(std::span<const double> z) const;
    /// z_phi^2 + sum_{j>=2} (H_j at coordinate j)^2
    [[nodiscard]] double h_energy(std::span<const double> z) const;
    /// Smallest eigenvalue of M^-1 Xi M^-T on the leading block.
    [[nodiscard]] double block_floor() const;
};

/// Xi for A standard companion with characteristic polynomial p.
[[nodiscard]] Matrix solve_standard_l0(const CharPoly& p);

[[nodiscard]] TransformChain reduce_unit_rhs(const Matrix& a, std::size_t target);

struct UnitSolution {
    Matrix solution;
    TransformChain chain;
};

/// Solution for rhs = e_phi e_phi^T.
[[nodiscard]] UnitSolution solve_unit_rhs(const Matrix& a, std::size_t target);

struct LyapunovSolution {
    Matrix solution;
    std::vector<TransformChain> chains;   // one per positive eigen-direction of rhs
    SpectralSplit split;
    Matrix rotated_transition;            // G0 A G0^T
    double residual = 0.0;
};

[[nodiscard]] LyapunovSolution solve_discrete_lyapunov(const LyapunovProblem& prob);

[[nodiscard]] Matrix series_oracle(const LyapunovProblem& prob, double tol);
[[nodiscard]] Matrix vectorization_oracle(const LyapunovProblem& prob);

enum class Verdict { positive_definite, positive_semidefinite_only, indeterminate };

enum class Condition {
    none,
    full_rank_rhs,        // xi = n
    full_chain,           // eta_k = n
    full_minorant,        // xi_bar = n
    full_minorant_chain,  // eta_bar_k = n
    cholesky,
};

[[nodiscard]] const char* to_string(Verdict v) noexcept;
[[nodiscard]] const char* to_string(Condition c) noexcept;

struct PdCertificate {
    Verdict verdict = Verdict::indeterminate;
    Condition triggered = Condition::none;
    std::size_t xi = 0;
    std::vector<std::size_t> eta;
    std::size_t xi_bar = 0;
    std::vector<std::size_t> eta_bar;
    std::vector<std::size_t> minorant_indices;
    double minorant_level = 0.0;
    std::optional<double> rho;
    std::optional<double> rho_bar;
    bool cholesky_success = false;
    double min_cholesky_pivot = 0.0;
    std::vector<TransformChain> minorant_chains;
};

[[nodiscard]] PdCertificate pd_certificate(const LyapunovProblem& prob, const LyapunovSolution& sol);

struct ControllabilityCertificate {
    std::size_t rank = 0;
    bool certifies_pd = false;
};

[[nodiscard]] ControllabilityCertificate controllability_rank_certificate(const Matrix& a, std::size_t target);

}  // namespace spsd
