#include "spsd/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) fail(ErrorKind::dimension, "matrix dimensions must be at least 1x1");
    if (!std::isfinite(fill)) fail(ErrorKind::domain, "matrix fill value must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) fail(ErrorKind::dimension, "matrix literal must be non-empty");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) fail(ErrorKind::dimension, "ragged matrix literal");
        for (double v : r) {
            if (!std::isfinite(v)) fail(ErrorKind::domain, "matrix entries must be finite");
            data_.push_back(v);
        }
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::from_row_major(std::size_t rows, std::size_t cols, std::span<const double> values) {
    if (values.size() != rows * cols) fail(ErrorKind::dimension, "row-major buffer has the wrong length");
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

Matrix Matrix::column(std::span<const double> v) { return from_row_major(v.size(), 1, v); }

Vector Matrix::col(std::size_t j) const {
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) fail(ErrorKind::dimension, "block out of range");
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) fail(ErrorKind::dimension, "block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Matrix& Matrix::operator+=(const Matrix& o) {
    require_same_shape(*this, o, "matrix addition");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    require_same_shape(*this, o, "matrix subtraction");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "cannot multiply " << a.rows() << "x" << a.cols() << " by " << b.rows() << "x" << b.cols();
        fail(ErrorKind::dimension, os.str());
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) fail(ErrorKind::dimension, "matrix-vector size mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

Vector multiply_transpose(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) fail(ErrorKind::dimension, "matrix-vector size mismatch");
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ai[j] * x[i];
    }
    return y;
}

Matrix congruence(const Matrix& a, const Matrix& b) { return a * b * a.transpose(); }

Matrix outer(std::span<const double> a, std::span<const double> b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
    return k;
}

Matrix power(const Matrix& a, unsigned k) {
    require_square(a, "matrix power");
    Matrix result = Matrix::identity(a.rows());
    for (unsigned i = 0; i < k; ++i) result = result * a;
    return result;
}

Matrix symmetrized(const Matrix& a) {
    require_square(a, "symmetrization");
    Matrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

double frobenius_norm(const Matrix& a) noexcept {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double inf_norm(const Matrix& a) noexcept {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (double v : a.row(i)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

double max_abs(const Matrix& a) noexcept {
    double best = 0.0;
    for (double v : a.data()) best = std::max(best, std::abs(v));
    return best;
}

double trace(const Matrix& a) noexcept {
    double s = 0.0;
    const std::size_t n = std::min(a.rows(), a.cols());
    for (std::size_t i = 0; i < n; ++i) s += a(i, i);
    return s;
}

double asymmetry(const Matrix& a) noexcept {
    if (a.rows() != a.cols()) return INFINITY;
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double d = a(i, j) - a(j, i);
            s += d * d;
        }
    return std::sqrt(s);
}

bool all_finite(const Matrix& a) noexcept {
    return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

double relative_difference(const Matrix& a, const Matrix& b) noexcept {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        const double d = a.data()[k] - b.data()[k];
        num += d * d;
        den += b.data()[k] * b.data()[k];
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) noexcept {
    double best = 0.0;
    for (double v : a) best = std::max(best, std::abs(v));
    return best;
}

void require_square(const Matrix& a, const char* what) {
    if (!a.is_square()) {
        std::ostringstream os;
        os << what << " requires a square matrix, got " << a.rows() << "x" << a.cols();
        fail(ErrorKind::dimension, os.str());
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
           << b.cols();
        fail(ErrorKind::dimension, os.str());
    }
}

}  // namespace spsd
