#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace spsd {

using Vector = std::vector<double>;

/// Dense row-major real matrix. A default-constructed Matrix is empty (0x0);
/// every other constructor requires rows, cols >= 1.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);
    static Matrix from_row_major(std::size_t rows, std::size_t cols, std::span<const double> values);
    static Matrix column(std::span<const double> v);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_ && rows_ > 0; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    [[nodiscard]] Vector col(std::size_t j) const;
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s) noexcept;

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

[[nodiscard]] Vector multiply(const Matrix& a, std::span<const double> x);
[[nodiscard]] Vector multiply_transpose(const Matrix& a, std::span<const double> x);
/// a * b * a^T
[[nodiscard]] Matrix congruence(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix outer(std::span<const double> a, std::span<const double> b);
[[nodiscard]] Matrix kron(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix power(const Matrix& a, unsigned k);
[[nodiscard]] Matrix symmetrized(const Matrix& a);

[[nodiscard]] double frobenius_norm(const Matrix& a) noexcept;
[[nodiscard]] double inf_norm(const Matrix& a) noexcept;
[[nodiscard]] double max_abs(const Matrix& a) noexcept;
[[nodiscard]] double trace(const Matrix& a) noexcept;
[[nodiscard]] double asymmetry(const Matrix& a) noexcept;  // ||A - A^T||_F
[[nodiscard]] bool all_finite(const Matrix& a) noexcept;
[[nodiscard]] double relative_difference(const Matrix& a, const Matrix& b) noexcept;

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b) noexcept;
[[nodiscard]] double norm2(std::span<const double> a) noexcept;
[[nodiscard]] double norm_inf(std::span<const double> a) noexcept;

void require_square(const Matrix& a, const char* what);
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace spsd
