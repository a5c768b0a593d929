#include "spsd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double sign_of(double magnitude, double s) { return s >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude); }

void balance(Matrix& a) {
    const std::size_t n = a.rows();
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

void householder_hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    Vector v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        double norm = 0.0;
        for (std::size_t i = 0; i < m; ++i) norm += a(k + 1 + i, k) * a(k + 1 + i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = -sign_of(norm, a(k + 1, k));
        for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
        v[0] -= alpha;
        double vnorm = 0.0;
        for (std::size_t i = 0; i < m; ++i) vnorm += v[i] * v[i];
        vnorm = std::sqrt(vnorm);
        if (vnorm == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) v[i] /= vnorm;
        for (std::size_t j = k; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += v[i] * a(k + 1 + i, j);
            for (std::size_t i = 0; i < m; ++i) a(k + 1 + i, j) -= 2.0 * v[i] * s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += a(i, k + 1 + j) * v[j];
            for (std::size_t j = 0; j < m; ++j) a(i, k + 1 + j) -= 2.0 * s * v[j];
        }
        a(k + 1, k) = alpha;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr layout).
std::vector<Eigenvalue> hessenberg_qr(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<Eigenvalue> w(static_cast<std::size_t>(n));
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

    const int cap = 100 * n;
    int total = 0;
    int nn = n - 1;
    double t = 0.0;
    double p = 0.0, q = 0.0, r = 0.0, s = 0.0, x = 0.0, y = 0.0, z = 0.0, ww = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l > 0; --l) {
                s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= kEps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            x = a(nn, nn);
            if (l == nn) {
                w[static_cast<std::size_t>(nn)] = {x + t, 0.0};
                --nn;
            } else {
                y = a(nn - 1, nn - 1);
                ww = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + ww;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        w[static_cast<std::size_t>(nn - 1)] = {x + z, 0.0};
                        w[static_cast<std::size_t>(nn)] = {x + z, 0.0};
                        if (z != 0.0) w[static_cast<std::size_t>(nn)] = {x - ww / z, 0.0};
                    } else {
                        w[static_cast<std::size_t>(nn)] = {x + p, -z};
                        w[static_cast<std::size_t>(nn - 1)] = {x + p, z};
                    }
                    nn -= 2;
                } else {
                    if (++total > cap) {
                        std::ostringstream os;
                        os << "QR eigenvalue iteration exceeded " << cap << " sweeps with " << nn + 1
                           << " eigenvalues unresolved";
                        fail(ErrorKind::non_convergence, os.str());
                    }
                    if (its == 10 || its == 20) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        ww = -0.4375 * s * s;
                    }
                    ++its;
                    int m = nn - 2;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v =
                            std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u <= kEps * v) break;
                    }
                    for (int i = m; i < nn - 1; ++i) {
                        a(i + 2, i) = 0.0;
                        if (i != m) a(i + 2, i - 1) = 0.0;
                    }
                    for (int k = m; k < nn; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k + 1 != nn) r = a(k + 2, k - 1);
                            if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k + 1 != nn) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k + 1 != nn) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l + 1 < nn);
    }
    return w;
}

}  // namespace

double CharPoly::a(long j) const noexcept {
    if (j < 1 || j > static_cast<long>(coeffs.size())) return 0.0;
    return coeffs[static_cast<std::size_t>(j - 1)];
}

Matrix CharPoly::companion() const {
    const std::size_t l = degree();
    if (l == 0) fail(ErrorKind::dimension, "companion matrix of a degree-0 polynomial");
    Matrix c(l, l);
    for (std::size_t j = 0; j < l; ++j) c(0, j) = -coeffs[j];
    for (std::size_t i = 1; i < l; ++i) c(i, i - 1) = 1.0;
    return c;
}

CharPoly char_poly(const Matrix& a) {
    require_square(a, "char_poly");
    const std::size_t n = a.rows();
    CharPoly p;
    p.coeffs.resize(n);
    Matrix m = Matrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix am = a * m;
        const double ak = -trace(am) / static_cast<double>(k);
        p.coeffs[k - 1] = ak;
        m = std::move(am);
        for (std::size_t i = 0; i < n; ++i) m(i, i) += ak;
    }
    return p;
}

Matrix evaluate_at_matrix(const CharPoly& p, const Matrix& m) {
    require_square(m, "polynomial evaluation");
    Matrix acc = Matrix::identity(m.rows());
    for (double c : p.coeffs) {
        acc = acc * m;
        for (std::size_t i = 0; i < m.rows(); ++i) acc(i, i) += c;
    }
    return acc;
}

double Eigenvalue::modulus() const noexcept { return std::hypot(re, im); }

std::vector<Eigenvalue> eigenvalues(const Matrix& a) {
    require_square(a, "eigenvalues");
    if (!all_finite(a)) fail(ErrorKind::domain, "eigenvalues of a matrix with non-finite entries");
    Matrix h = a;
    if (h.rows() == 1) return {{h(0, 0), 0.0}};
    balance(h);
    householder_hessenberg(h);
    return hessenberg_qr(h);
}

UnitDiscMembership eigen_moduli_in_unit_disc(const Matrix& a) {
    UnitDiscMembership out;
    for (const auto& ev : eigenvalues(a)) out.moduli.push_back(ev.modulus());
    std::sort(out.moduli.begin(), out.moduli.end(), std::greater<>());
    out.is_member = std::all_of(out.moduli.begin(), out.moduli.end(), [](double m) { return m > 0.0 && m < 1.0; });
    return out;
}

Matrix contraction_matrix(const CharPoly& p) {
    const long l = static_cast<long>(p.degree());
    if (l < 1) fail(ErrorKind::dimension, "contraction matrix needs degree >= 1");
    Matrix g(static_cast<std::size_t>(l), static_cast<std::size_t>(l));
    double s = 0.0;
    for (long k = 1; k <= l; ++k) s += p.a(k) * p.a(k);
    g(0, 0) = 1.0 - s;
    for (long j = 2; j <= l; ++j) {
        double acc = 0.0;
        for (long k = 1; k <= l; ++k) acc += p.a(k) * (p.a(k + 1 - j) + p.a(k + j - 1));
        g(0, static_cast<std::size_t>(j - 1)) = -acc;
    }
    for (long i = 2; i <= l; ++i) {
        const auto ii = static_cast<std::size_t>(i - 1);
        g(ii, 0) = p.a(i - 1);
        for (long j = 2; j <= l; ++j) {
            const auto jj = static_cast<std::size_t>(j - 1);
            g(ii, jj) = (i == j) ? 1.0 + p.a(2 * i - 2) : p.a(i - j) + p.a(i + j - 2);
        }
    }
    return g;
}

bool is_standard_companion(const Matrix& a) noexcept {
    if (!a.is_square()) return false;
    for (std::size_t i = 1; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j) != (j + 1 == i ? 1.0 : 0.0)) return false;
    return true;
}

HessenbergStandardization standardize_unchecked(const Matrix& c) {
    const std::size_t l = c.rows();
    HessenbergStandardization out;
    out.transform = Matrix(l, l);
    Vector row(l, 0.0);
    row[l - 1] = 1.0;
    for (std::size_t k = l; k-- > 0;) {
        for (std::size_t j = 0; j < l; ++j) out.transform(k, j) = j < k ? 0.0 : row[j];
        if (k > 0) row = multiply_transpose(c, row);
    }
    const Matrix dinv = upper_triangular_inverse(out.transform);
    Matrix standard = out.transform * c * dinv;
    for (std::size_t i = 1; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) standard(i, j) = (j + 1 == i) ? 1.0 : 0.0;
    out.standard = std::move(standard);
    return out;
}

HessenbergStandardization hessenberg_standardizer(const Matrix& c) {
    require_square(c, "hessenberg_standardizer");
    const std::size_t l = c.rows();
    for (std::size_t i = 0; i + 1 < l; ++i) {
        if (c(i + 1, i) == 0.0) {
            std::ostringstream os;
            os << "subdiagonal entry (" << i + 2 << "," << i + 1 << ") is zero";
            fail(ErrorKind::not_hessenberg, os.str());
        }
        for (std::size_t r = i + 2; r < l; ++r) {
            if (c(r, i) != 0.0) {
                std::ostringstream os;
                os << "entry (" << r + 1 << "," << i + 1 << ") below the subdiagonal is nonzero";
                fail(ErrorKind::not_hessenberg, os.str());
            }
        }
    }
    const auto spec = eigen_moduli_in_unit_disc(c);
    if (!spec.is_member) {
        std::ostringstream os;
        os << "eigenvalue moduli not inside (0,1): max " << spec.moduli.front() << ", min " << spec.moduli.back();
        fail(ErrorKind::spectrum, os.str());
    }
    return standardize_unchecked(c);
}

SymmetricEigen jacobi_eigen(const Matrix& s) {
    require_square(s, "jacobi_eigen");
    const std::size_t n = s.rows();
    Matrix a = symmetrized(s);
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += a(p, p) * a(p, p);
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off == 0.0 || off <= 1e-34 * diag) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double g = 100.0 * std::abs(apq);
                if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
                    std::abs(a(q, q)) + g == std::abs(a(q, q))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                const double tau = sn / (1.0 + c);
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == p || j == q) continue;
                    const double gj = a(j, p);
                    const double hj = a(j, q);
                    a(j, p) = a(p, j) = gj - sn * (hj + gj * tau);
                    a(j, q) = a(q, j) = hj + sn * (gj - hj * tau);
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double gj = v(j, p);
                    const double hj = v(j, q);
                    v(j, p) = gj - sn * (hj + gj * tau);
                    v(j, q) = hj + sn * (gj - hj * tau);
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t j = 0; j < n; ++j) out.vectors(k, j) = v(j, order[k]);
    }
    return out;
}

double min_eigenvalue(const Matrix& s) { return jacobi_eigen(s).values.back(); }

SpectralSplit symmetric_eigendecomposition(const Matrix& s, double rank_tol) {
    require_square(s, "symmetric_eigendecomposition");
    const double fro = frobenius_norm(s);
    if (asymmetry(s) > tol::symmetry * fro) {
        std::ostringstream os;
        os << "matrix is not symmetric: ||S - S^T||_F = " << asymmetry(s) << " vs ||S||_F = " << fro;
        fail(ErrorKind::domain, os.str());
    }
    SymmetricEigen eig = jacobi_eigen(s);
    if (eig.values.back() < -tol::psd_floor * fro) {
        std::ostringstream os;
        os << "matrix is not positive semidefinite: eigenvalue " << eig.values.back();
        fail(ErrorKind::domain, os.str());
    }
    SpectralSplit out;
    out.orthogonal = std::move(eig.vectors);
    out.eigenvalues = std::move(eig.values);
    const double lmax = std::max(out.eigenvalues.front(), 0.0);
    for (std::size_t k = 0; k < out.eigenvalues.size(); ++k) {
        if (lmax > 0.0 && out.eigenvalues[k] > rank_tol * lmax) {
            out.positive_indices.push_back(k);
        } else {
            out.eigenvalues[k] = 0.0;
        }
    }
    return out;
}

LuFactorization::LuFactorization(const Matrix& m) : lu_(m), perm_(m.rows()) {
    require_square(m, "LU factorization");
    const std::size_t n = m.rows();
    const double scale = inf_norm(m);
    if (scale == 0.0 || !std::isfinite(scale)) fail(ErrorKind::singular, "matrix is zero or non-finite");
    std::iota(perm_.begin(), perm_.end(), 0);
    min_pivot_ = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
        const double pval = std::abs(lu_(piv, k));
        min_pivot_ = std::min(min_pivot_, pval);
        if (pval <= tol::pivot * scale) {
            std::ostringstream os;
            os << "pivot " << pval << " at column " << k + 1 << " is below " << tol::pivot << " * ||M||_inf ("
               << scale << ")";
            fail(ErrorKind::singular, os.str());
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
            sign_ = -sign_;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu_(i, k) / lu_(k, k);
            lu_(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
        }
    }
}

Vector LuFactorization::solve(std::span<const double> b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n) fail(ErrorKind::dimension, "right-hand side length mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[perm_[i]];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
        x[i] = s / lu_(i, i);
    }
    return x;
}

Matrix LuFactorization::solve(const Matrix& b) const {
    if (b.rows() != lu_.rows()) fail(ErrorKind::dimension, "right-hand side rows mismatch");
    Matrix x(b.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const Vector col = solve(b.col(j));
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
    }
    return x;
}

Matrix LuFactorization::inverse() const { return solve(Matrix::identity(lu_.rows())); }

double LuFactorization::determinant() const noexcept {
    double d = sign_;
    for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
}

Vector solve_linear_system(const Matrix& m, std::span<const double> b) { return LuFactorization(m).solve(b); }
Matrix solve_linear_system(const Matrix& m, const Matrix& b) { return LuFactorization(m).solve(b); }
Matrix inverse(const Matrix& m) { return LuFactorization(m).inverse(); }

Matrix upper_triangular_inverse(const Matrix& u) {
    require_square(u, "triangular inverse");
    const std::size_t n = u.rows();
    Matrix inv(n, n);
    for (std::size_t i = n; i-- > 0;) {
        double rowmax = 0.0;
        for (std::size_t j = i; j < n; ++j) rowmax = std::max(rowmax, std::abs(u(i, j)));
        if (!(std::abs(u(i, i)) > kEps * rowmax)) {
            std::ostringstream os;
            os << "triangular factor is singular at diagonal " << i + 1 << " (" << u(i, i) << ")";
            fail(ErrorKind::singular, os.str());
        }
        inv(i, i) = 1.0 / u(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = i + 1; k <= j; ++k) s += u(i, k) * inv(k, j);
            inv(i, j) = -s / u(i, i);
        }
    }
    return inv;
}

CholeskyResult cholesky(const Matrix& s, double rel_tol) {
    require_square(s, "cholesky");
    const std::size_t n = s.rows();
    CholeskyResult out;
    out.factor = Matrix(n, n);
    double maxdiag = 0.0;
    for (std::size_t i = 0; i < n; ++i) maxdiag = std::max(maxdiag, s(i, i));
    out.min_pivot = INFINITY;
    if (!(maxdiag > 0.0)) {
        out.min_pivot = maxdiag;
        return out;
    }
    Matrix& l = out.factor;
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        out.min_pivot = std::min(out.min_pivot, d);
        if (!(d > rel_tol * maxdiag)) return out;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = 0.5 * (s(i, j) + s(j, i));
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    out.success = true;
    return out;
}

Vector singular_values(const Matrix& a) {
    Matrix u = a.rows() >= a.cols() ? a : a.transpose();
    const std::size_t m = u.rows();
    const std::size_t n = u.cols();
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += u(i, p) * u(i, p);
                    beta += u(i, q) * u(i, q);
                    gamma += u(i, p) * u(i, q);
                }
                if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = sign_of(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u(i, p);
                    const double uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
            }
        }
        if (!rotated) break;
    }
    Vector sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

std::size_t numerical_rank(const Matrix& a, double threshold) {
    const Vector sv = singular_values(a);
    return static_cast<std::size_t>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > threshold; }));
}

}  // namespace spsd
