#include "spsd/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

namespace {

Matrix permutation_matrix(const std::vector<std::size_t>& p) {
    Matrix m(p.size(), p.size());
    for (std::size_t k = 0; k < p.size(); ++k) m(k, p[k]) = 1.0;
    return m;
}

Matrix block_diag_with_identity(const Matrix& lead, std::size_t n) {
    Matrix m = Matrix::identity(n);
    m.set_block(0, 0, lead);
    return m;
}

void require_cm_bar(const Matrix& a, const char* what) {
    const auto spec = eigen_moduli_in_unit_disc(a);
    if (spec.is_member) return;
    double bad = spec.moduli.front();
    for (double m : spec.moduli)
        if (!(m > 0.0 && m < 1.0)) {
            bad = m;
            break;
        }
    std::ostringstream os;
    os.precision(17);
    os << what << ": transition matrix is outside CM-bar, eigenvalue modulus " << bad
       << " is not in the open interval (0,1)";
    fail(ErrorKind::spectrum, os.str());
}

Matrix toeplitz_from_generator(const Vector& zeta) {
    const std::size_t l = zeta.size();
    Matrix xi(l, l);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) xi(i, j) = zeta[i > j ? i - j : j - i];
    return xi;
}

Matrix standard_l0_impl(const CharPoly& p) {
    const Matrix g = contraction_matrix(p);
    Vector e1(p.degree(), 0.0);
    e1[0] = 1.0;
    return toeplitz_from_generator(solve_linear_system(g, e1));
}

CharPoly block_poly(const TransformChain& chain) {
    CharPoly p;
    const auto first = chain.standard_block.row(0);
    p.coeffs.assign(first.begin(), first.end());
    for (double& c : p.coeffs) c = -c;
    return p;
}

TransformChain reduce_impl(const Matrix& a, std::size_t target) {
    const std::size_t n = a.rows();
    TransformChain chain;
    chain.target_index = target;
    chain.order.push_back(target);
    for (std::size_t k = 0; k < n; ++k)
        if (k != target) chain.order.push_back(k);

    Matrix abar(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) abar(i, j) = a(chain.order[i], chain.order[j]);

    const double scale = frobenius_norm(a);
    std::size_t eta = n;
    double prod = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double tail = 0.0;
        std::size_t nu = i + 1;
        for (std::size_t j = i + 1; j < n; ++j) {
            tail += abar(j, i) * abar(j, i);
            if (std::abs(abar(j, i)) > std::abs(abar(nu, i))) nu = j;
        }
        if (std::sqrt(tail) <= tol::tail * scale) {
            eta = i + 1;
            break;
        }
        std::vector<std::size_t> p;
        for (std::size_t k = 0; k <= i; ++k) p.push_back(k);
        for (std::size_t k = nu; k < n; ++k) p.push_back(k);
        for (std::size_t k = i + 1; k < nu; ++k) p.push_back(k);
        Matrix rotated(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) rotated(r, c) = abar(p[r], p[c]);
        abar = std::move(rotated);

        const double pivot = abar(i + 1, i);
        Matrix q = Matrix::identity(n);
        for (std::size_t j = i + 2; j < n; ++j) {
            const double m = abar(j, i) / pivot;
            if (m == 0.0) continue;
            q(j, i + 1) = -m;
            for (std::size_t c = 0; c < n; ++c) abar(j, c) -= m * abar(i + 1, c);
        }
        for (std::size_t j = i + 2; j < n; ++j) {
            const double m = -q(j, i + 1);
            if (m == 0.0) continue;
            for (std::size_t r = 0; r < n; ++r) abar(r, i + 1) += m * abar(r, j);
        }
        for (std::size_t j = i + 2; j < n; ++j) abar(j, i) = 0.0;

        chain.pivots.push_back(nu);
        chain.pivot_values.push_back(pivot);
        chain.rotations.push_back(permutation_matrix(p));
        chain.eliminations.push_back(std::move(q));
        prod *= pivot;
    }
    chain.terminal_rank = eta;
    chain.pivot_products = prod * prod;

    HessenbergStandardization st;
    try {
        st = standardize_unchecked(abar.block(0, 0, eta, eta));
    } catch (const Error& e) {
        std::ostringstream os;
        os << "standardizer of the elimination chain is singular (target " << target + 1 << ", eta " << eta
           << ", pivots";
        for (double v : chain.pivot_values) os << " " << v;
        os << "): " << e.what();
        fail(ErrorKind::singular, os.str());
    }
    chain.reduced = std::move(abar);
    chain.standardizer = block_diag_with_identity(st.transform, n);
    chain.standard_block = std::move(st.standard);
    return chain;
}

UnitSolution solve_unit_impl(const Matrix& a, std::size_t target) {
    UnitSolution out;
    out.chain = reduce_impl(a, target);
    const TransformChain& ch = out.chain;
    const std::size_t n = a.rows();
    const std::size_t eta = ch.terminal_rank;
    const Matrix xi = standard_l0_impl(block_poly(ch));
    const Matrix minv = upper_triangular_inverse(ch.standardizer.block(0, 0, eta, eta));
    const Matrix w = ch.chain_transform_inverse() * block_diag_with_identity(minv, n);
    Matrix delta(n, n);
    delta.set_block(0, 0, xi);
    out.solution = symmetrized(ch.pivot_products * congruence(w, delta));
    return out;
}

void require_index(std::size_t target, std::size_t n) {
    if (target >= n) {
        std::ostringstream os;
        os << "target index " << target << " out of range for dimension " << n;
        fail(ErrorKind::domain, os.str());
    }
}

}  // namespace

LyapunovProblem::LyapunovProblem(Matrix a, Matrix q, double eps)
    : transition(std::move(a)), rhs(std::move(q)), scale(eps) {
    require_square(transition, "Lyapunov transition");
    require_same_shape(transition, rhs, "Lyapunov rhs");
    if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorKind::domain, "noise scale must be positive and finite");
    if (!all_finite(transition) || !all_finite(rhs)) fail(ErrorKind::domain, "Lyapunov data must be finite");
    const double fro = frobenius_norm(rhs);
    if (asymmetry(rhs) > tol::symmetry * fro) fail(ErrorKind::domain, "Lyapunov rhs is not symmetric");
    if (fro > 0.0 && min_eigenvalue(rhs) < -tol::psd_floor * fro)
        fail(ErrorKind::domain, "Lyapunov rhs is not positive semidefinite");
}

double stein_residual(const Matrix& a, const Matrix& sigma, const Matrix& forcing) {
    return frobenius_norm(congruence(a, sigma) - sigma + forcing);
}

Matrix TransformChain::order_matrix() const { return permutation_matrix(order); }

Matrix TransformChain::chain_transform() const {
    Matrix t = order_matrix();
    for (std::size_t i = 0; i < rotations.size(); ++i) t = eliminations[i] * (rotations[i] * t);
    return t;
}

Matrix TransformChain::chain_transform_inverse() const {
    Matrix t = order_matrix().transpose();
    for (std::size_t i = 0; i < rotations.size(); ++i) {
        Matrix qinv = Matrix::identity(dim());
        for (std::size_t r = 0; r < dim(); ++r)
            for (std::size_t c = 0; c < dim(); ++c)
                if (r != c) qinv(r, c) = -eliminations[i](r, c);
        t = t * rotations[i].transpose() * qinv;
    }
    return t;
}

std::vector<Vector> TransformChain::h_vectors(std::span<const double> z) const {
    if (z.size() != dim()) fail(ErrorKind::dimension, "h_vectors: vector length mismatch");
    std::vector<Vector> h;
    Vector cur(dim());
    for (std::size_t k = 0; k < dim(); ++k) cur[k] = z[order[k]];
    h.push_back(cur);
    for (std::size_t i = 0; i + 1 < terminal_rank; ++i) {
        cur = multiply(rotations[i], cur);
        // Q^{-T} = I + e_{i+1} m^T touches coordinate i+1 only
        double s = 0.0;
        for (std::size_t j = i + 2; j < dim(); ++j) s += -eliminations[i](j, i + 1) * cur[j];
        cur[i + 1] += s;
        h.push_back(cur);
    }
    return h;
}

double TransformChain::h_energy(std::span<const double> z) const {
    const auto h = h_vectors(z);
    double s = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) s += h[j][j] * h[j][j];
    return s;
}

double TransformChain::block_floor() const {
    const std::size_t eta = terminal_rank;
    const Matrix xi = standard_l0_impl(block_poly(*this));
    const Matrix minv = upper_triangular_inverse(standardizer.block(0, 0, eta, eta));
    return min_eigenvalue(congruence(minv, xi));
}

Matrix solve_standard_l0(const CharPoly& p) {
    if (p.degree() == 0) fail(ErrorKind::dimension, "standard equation needs degree >= 1");
    require_cm_bar(p.companion(), "solve_standard_l0");
    return standard_l0_impl(p);
}

TransformChain reduce_unit_rhs(const Matrix& a, std::size_t target) {
    require_square(a, "reduce_unit_rhs");
    require_index(target, a.rows());
    require_cm_bar(a, "reduce_unit_rhs");
    return reduce_impl(a, target);
}

UnitSolution solve_unit_rhs(const Matrix& a, std::size_t target) {
    require_square(a, "solve_unit_rhs");
    require_index(target, a.rows());
    require_cm_bar(a, "solve_unit_rhs");
    return solve_unit_impl(a, target);
}

LyapunovSolution solve_discrete_lyapunov(const LyapunovProblem& prob) {
    const Matrix& a = prob.transition;
    const std::size_t n = prob.dim();
    require_cm_bar(a, "solve_discrete_lyapunov");
    LyapunovSolution out;
    out.split = symmetric_eigendecomposition(prob.rhs);
    const Matrix& g0 = out.split.orthogonal;
    out.rotated_transition = g0 * a * g0.transpose();
    Matrix acc(n, n);
    for (std::size_t k : out.split.positive_indices) {
        UnitSolution unit = solve_unit_impl(out.rotated_transition, k);
        acc += out.split.eigenvalues[k] * unit.solution;
        out.chains.push_back(std::move(unit.chain));
    }
    out.solution = symmetrized(prob.scale * (g0.transpose() * acc * g0));
    out.residual = stein_residual(a, out.solution, prob.scale * prob.rhs);
    return out;
}

Matrix series_oracle(const LyapunovProblem& prob, double tol) {
    const Matrix& a = prob.transition;
    Matrix term = prob.scale * prob.rhs;
    Matrix sum = term;
    const Matrix at = a.transpose();
    for (std::size_t k = 1; k <= tol::series_cap; ++k) {
        term = a * term * at;
        sum += term;
        if (!all_finite(sum)) fail(ErrorKind::non_convergence, "series oracle diverged");
        if (frobenius_norm(term) <= tol * (1.0 + frobenius_norm(sum))) return symmetrized(sum);
    }
    std::ostringstream os;
    os << "series oracle did not converge within " << tol::series_cap
       << " terms; the spectrum is too close to the unit circle";
    fail(ErrorKind::non_convergence, os.str());
}

Matrix vectorization_oracle(const LyapunovProblem& prob) {
    const std::size_t n = prob.dim();
    Matrix k = kron(prob.transition, prob.transition);
    Matrix sys = Matrix::identity(n * n) - k;
    Vector b(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i * n + j] = prob.scale * prob.rhs(i, j);
    Vector x;
    try {
        x = solve_linear_system(sys, b);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::singular) throw;
        fail(ErrorKind::domain, std::string("Kronecker system is singular; some eigenvalue pair has s_i s_j = 1: ") +
                                    e.what());
    }
    return symmetrized(Matrix::from_row_major(n, n, x));
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::positive_definite: return "positive_definite";
        case Verdict::positive_semidefinite_only: return "positive_semidefinite_only";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "unknown";
}

const char* to_string(Condition c) noexcept {
    switch (c) {
        case Condition::none: return "none";
        case Condition::full_rank_rhs: return "i";
        case Condition::full_chain: return "ii";
        case Condition::full_minorant: return "iii";
        case Condition::full_minorant_chain: return "iv";
        case Condition::cholesky: return "cholesky";
    }
    return "unknown";
}

namespace {

struct Minorant {
    std::vector<std::size_t> indices;
    double level = 0.0;
};

// Diagonal-dominance minorant rhs >= level * sum_{j in indices} e_j e_j^T.
Minorant diagonal_minorant(const Matrix& rhs) {
    const std::size_t n = rhs.rows();
    Minorant m;
    double maxdiag = 0.0;
    for (std::size_t j = 0; j < n; ++j) maxdiag = std::max(maxdiag, rhs(j, j));
    if (!(maxdiag > 0.0)) return m;
    double level = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(rhs(j, j) > tol::rank * maxdiag)) continue;
        double margin = rhs(j, j);
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) margin -= std::abs(rhs(j, k));
        if (margin > 0.0) {
            m.indices.push_back(j);
            level = std::min(level, margin);
        }
    }
    if (m.indices.empty()) return m;
    // Gershgorin only covers the dominant rows; confirm the whole difference is PSD.
    const double floor = -1e-12 * frobenius_norm(rhs);
    for (int attempt = 0; attempt < 20; ++attempt) {
        Matrix diff = rhs;
        for (std::size_t j : m.indices) diff(j, j) -= level;
        if (min_eigenvalue(diff) >= floor) {
            m.level = level;
            return m;
        }
        level *= 0.5;
    }
    m.indices.clear();
    return m;
}

}  // namespace

PdCertificate pd_certificate(const LyapunovProblem& prob, const LyapunovSolution& sol) {
    const std::size_t n = prob.dim();
    PdCertificate cert;
    cert.xi = sol.split.rank();
    for (const auto& ch : sol.chains) cert.eta.push_back(ch.terminal_rank);

    if (!sol.chains.empty()) {
        double rho = INFINITY;
        for (std::size_t k = 0; k < sol.chains.size(); ++k) {
            const auto& ch = sol.chains[k];
            const double lam = sol.split.eigenvalues[sol.split.positive_indices[k]];
            rho = std::min(rho, lam * ch.pivot_products * ch.block_floor());
        }
        cert.rho = prob.scale * std::max(rho, 0.0);
    }

    Condition structural = Condition::none;
    if (cert.xi == n) {
        structural = Condition::full_rank_rhs;
    } else if (std::find(cert.eta.begin(), cert.eta.end(), n) != cert.eta.end()) {
        structural = Condition::full_chain;
    } else {
        const Minorant m = diagonal_minorant(prob.rhs);
        cert.minorant_indices = m.indices;
        cert.xi_bar = m.indices.size();
        cert.minorant_level = m.indices.empty() ? 1.0 : m.level;
        if (!m.indices.empty()) {
            double rho_bar = INFINITY;
            for (std::size_t j : m.indices) {
                TransformChain ch = reduce_impl(prob.transition, j);
                cert.eta_bar.push_back(ch.terminal_rank);
                rho_bar = std::min(rho_bar, ch.pivot_products * ch.block_floor());
                cert.minorant_chains.push_back(std::move(ch));
            }
            cert.rho_bar = prob.scale * m.level * std::max(rho_bar, 0.0);
        }
        if (cert.xi_bar == n) {
            structural = Condition::full_minorant;
        } else if (std::find(cert.eta_bar.begin(), cert.eta_bar.end(), n) != cert.eta_bar.end()) {
            structural = Condition::full_minorant_chain;
        }
    }

    const CholeskyResult chol = cholesky(sol.solution);
    cert.cholesky_success = chol.success;
    cert.min_cholesky_pivot = chol.min_pivot;

    if (structural != Condition::none && chol.success) {
        cert.verdict = Verdict::positive_definite;
        cert.triggered = structural;
    } else if (structural == Condition::none && chol.success) {
        cert.verdict = Verdict::indeterminate;
        cert.triggered = Condition::cholesky;
    } else if (structural != Condition::none) {
        cert.verdict = Verdict::indeterminate;
        cert.triggered = structural;
    } else {
        cert.verdict = Verdict::positive_semidefinite_only;
        cert.triggered = Condition::none;
    }
    return cert;
}

ControllabilityCertificate controllability_rank_certificate(const Matrix& a, std::size_t target) {
    require_square(a, "controllability_rank_certificate");
    require_index(target, a.rows());
    const std::size_t n = a.rows();
    Matrix unit(n, n);
    unit(target, target) = 1.0;
    Matrix c0(n, n * n);
    Matrix block = unit;
    for (std::size_t k = 0; k < n; ++k) {
        c0.set_block(0, k * n, block);
        block = a * block;
    }
    ControllabilityCertificate out;
    out.rank = numerical_rank(c0, 1e-10 * frobenius_norm(c0));
    out.certifies_pd = out.rank == n;
    return out;
}

}  // namespace spsd
