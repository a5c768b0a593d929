#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "spsd/linalg.hpp"
#include "spsd/matrix.hpp"

namespace spsd::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = uniform(rng, lo, hi);
    return m;
}

/// Random matrix rescaled so its spectral radius is uniform in [0.2, 0.95].
inline Matrix random_cm_matrix(Rng& rng, std::size_t n) {
    for (;;) {
        Matrix a = random_matrix(rng, n, n);
        const auto mem = eigen_moduli_in_unit_disc(a);
        const double rho = mem.moduli.front();
        if (rho < 1e-3) continue;
        a *= uniform(rng, 0.2, 0.95) / rho;
        if (eigen_moduli_in_unit_disc(a).is_member) return a;
    }
}

inline Matrix random_psd(Rng& rng, std::size_t n, std::size_t rank) {
    const Matrix b = random_matrix(rng, n, rank);
    return symmetrized(b * b.transpose());
}

/// Characteristic polynomial with random roots (real or conjugate pairs) of
/// modulus in [0.05, 0.95].
inline CharPoly random_cm_poly(Rng& rng, std::size_t l) {
    std::vector<std::complex<double>> poly{1.0};
    auto mul = [&](std::complex<double> root) {
        std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
        for (std::size_t k = 0; k < poly.size(); ++k) {
            next[k] += poly[k];
            next[k + 1] -= root * poly[k];
        }
        poly = std::move(next);
    };
    std::size_t left = l;
    while (left > 0) {
        const double r = uniform(rng, 0.05, 0.95);
        if (left >= 2 && uniform(rng, 0.0, 1.0) < 0.5) {
            const double ang = uniform(rng, 0.1, 3.0);
            mul(std::polar(r, ang));
            mul(std::polar(r, -ang));
            left -= 2;
        } else {
            mul(uniform(rng, 0.0, 1.0) < 0.5 ? -r : r);
            left -= 1;
        }
    }
    CharPoly p;
    for (std::size_t k = 1; k < poly.size(); ++k) p.coeffs.push_back(poly[k].real());
    return p;
}

/// Upper Hessenberg with nonzero subdiagonal, rescaled into CM-bar.
inline Matrix random_hessenberg_cm(Rng& rng, std::size_t n) {
    for (;;) {
        Matrix h = random_matrix(rng, n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j + 1 < i; ++j) h(i, j) = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            const double s = uniform(rng, 0.3, 1.0);
            h(i, i - 1) = uniform(rng, 0.0, 1.0) < 0.5 ? -s : s;
        }
        const auto mem = eigen_moduli_in_unit_disc(h);
        const double rho = mem.moduli.front();
        if (rho < 1e-3) continue;
        h *= uniform(rng, 0.3, 0.95) / rho;
        if (eigen_moduli_in_unit_disc(h).is_member) return h;
    }
}

inline Matrix random_orthogonal(Rng& rng, std::size_t n) {
    // eigenvectors of a random symmetric matrix
    const Matrix b = random_matrix(rng, n, n);
    return jacobi_eigen(symmetrized(b + b.transpose())).vectors;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace spsd::testing
