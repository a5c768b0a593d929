#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spsd/matrix.hpp"

namespace spsd {

namespace tol {
inline constexpr double rank = 1e-10;        // relative to the largest eigenvalue
inline constexpr double pivot = 1e-13;       // LU pivot floor relative to ||M||_inf
inline constexpr double symmetry = 1e-10;    // ||S - S^T||_F relative to ||S||_F
inline constexpr double psd_floor = 1e-10;   // most negative eigenvalue allowed, relative to ||S||_F
inline constexpr double cholesky = 1e-14;    // smallest accepted pivot relative to max diagonal
}  // namespace tol

/// psi(l) = l^n + a_1 l^(n-1) + ... + a_n. coeffs holds a_1..a_n.
struct CharPoly {
    Vector coeffs;

    [[nodiscard]] std::size_t degree() const noexcept { return coeffs.size(); }
    /// a_j with a_j = 0 outside 1..degree
    [[nodiscard]] double a(long j) const noexcept;
    /// Standard companion form: first row -(a_1..a_n), identity subdiagonal.
    [[nodiscard]] Matrix companion() const;
};

[[nodiscard]] CharPoly char_poly(const Matrix& a);
/// psi(M) evaluated by Horner's rule.
[[nodiscard]] Matrix evaluate_at_matrix(const CharPoly& p, const Matrix& m);

struct Eigenvalue {
    double re = 0.0;
    double im = 0.0;
    [[nodiscard]] double modulus() const noexcept;
};

/// Eigenvalues of a real square matrix (balancing, Householder Hessenberg
/// reduction, Francis double-shift QR capped at 100*n sweeps).
[[nodiscard]] std::vector<Eigenvalue> eigenvalues(const Matrix& a);

struct UnitDiscMembership {
    bool is_member = false;
    Vector moduli;  // descending
};

/// True iff every eigenvalue modulus lies strictly inside (0, 1).
[[nodiscard]] UnitDiscMembership eigen_moduli_in_unit_disc(const Matrix& a);

[[nodiscard]] Matrix contraction_matrix(const CharPoly& p);

struct HessenbergStandardization {
    Matrix transform;  // D, rows e_l^T C^(l-1), ..., e_l^T
    Matrix standard;   // D C D^-1
};

[[nodiscard]] HessenbergStandardization hessenberg_standardizer(const Matrix& c);

/// Same construction without the structural and spectral validation; used
/// inside elimination chains whose structure is guaranteed by construction.
[[nodiscard]] HessenbergStandardization standardize_unchecked(const Matrix& c);

[[nodiscard]] bool is_standard_companion(const Matrix& a) noexcept;

struct SpectralSplit {
    Matrix orthogonal;               // rows are eigenvectors: Q S Q^T = diag(eigenvalues)
    Vector eigenvalues;              // descending, clamped at zero
    std::vector<std::size_t> positive_indices;

    [[nodiscard]] std::size_t rank() const noexcept { return positive_indices.size(); }
};

/// Eigendecomposition of a symmetric PSD matrix with rank threshold
/// rank_tol * largest eigenvalue.
[[nodiscard]] SpectralSplit symmetric_eigendecomposition(const Matrix& s, double rank_tol = tol::rank);

struct SymmetricEigen {
    Vector values;   // descending
    Matrix vectors;  // rows are eigenvectors
};

/// Cyclic Jacobi on any symmetric matrix (no PSD requirement, no clamping).
[[nodiscard]] SymmetricEigen jacobi_eigen(const Matrix& s);
[[nodiscard]] double min_eigenvalue(const Matrix& s);

class LuFactorization {
public:
    explicit LuFactorization(const Matrix& m);

    [[nodiscard]] Vector solve(std::span<const double> b) const;
    [[nodiscard]] Matrix solve(const Matrix& b) const;
    [[nodiscard]] Matrix inverse() const;
    [[nodiscard]] double determinant() const noexcept;
    [[nodiscard]] double min_pivot() const noexcept { return min_pivot_; }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
    double min_pivot_ = 0.0;
};

[[nodiscard]] Vector solve_linear_system(const Matrix& m, std::span<const double> b);
[[nodiscard]] Matrix solve_linear_system(const Matrix& m, const Matrix& b);
[[nodiscard]] Matrix inverse(const Matrix& m);

/// Inverse of an upper-triangular matrix by back substitution. Fails when a
/// diagonal entry is zero or negligible against its row.
[[nodiscard]] Matrix upper_triangular_inverse(const Matrix& u);

struct CholeskyResult {
    bool success = false;
    double min_pivot = 0.0;  // smallest d_k before the square root
    Matrix factor;           // lower triangular L with L L^T = S when success
};

[[nodiscard]] CholeskyResult cholesky(const Matrix& s, double rel_tol = tol::cholesky);

/// Singular values by one-sided Jacobi, descending.
[[nodiscard]] Vector singular_values(const Matrix& a);
[[nodiscard]] std::size_t numerical_rank(const Matrix& a, double threshold);

}  // namespace spsd
