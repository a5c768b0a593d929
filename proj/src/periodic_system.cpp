#include "spsd/periodic_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spsd/errors.hpp"
#include "spsd/linalg.hpp"

namespace spsd {

Vector PeriodicModel::drift_at(double t, std::span<const double> x) const {
    Vector out(dim, 0.0);
    drift(t, x, out);
    return out;
}

Matrix PeriodicModel::diffusion_at(double t, std::span<const double> x) const {
    Matrix out(dim, noise_dim);
    diffusion(t, x, out.data());
    return out;
}

Matrix PeriodicModel::jacobian_at(double t, std::span<const double> x) const {
    Matrix out(dim, dim);
    if (jacobian) {
        jacobian(t, x, out.data());
        return out;
    }
    Vector xp(x.begin(), x.end());
    Vector fp(dim), fm(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const double h = std::max(1e-6, 1e-7 * std::abs(x[j]));
        xp[j] = x[j] + h;
        drift(t, xp, fp);
        xp[j] = x[j] - h;
        drift(t, xp, fm);
        xp[j] = x[j];
        for (std::size_t i = 0; i < dim; ++i) out(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    }
    return out;
}

Matrix PeriodicModel::noise_factor_at(double t, std::span<const double> x) const {
    Matrix out(dim, noise_dim);
    if (noise_factor) {
        noise_factor(t, x, out.data());
        return out;
    }
    const Matrix gamma = diffusion_at(t, x);
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(x[i] > 0.0)) fail(ErrorKind::positivity, "noise factor needs a strictly positive state");
        for (std::size_t j = 0; j < noise_dim; ++j) out(i, j) = gamma(i, j) / x[i];
    }
    return out;
}

PeriodicModel kolmogorov_model(std::string name, std::size_t dim, std::size_t noise_dim, double period,
                               double epsilon, VectorField drift, MatrixField g, bool positive_invariant) {
    PeriodicModel m;
    m.name = std::move(name);
    m.dim = dim;
    m.noise_dim = noise_dim;
    m.period = period;
    m.epsilon = epsilon;
    m.drift = std::move(drift);
    m.noise_factor = g;
    const std::size_t nd = noise_dim;
    m.diffusion = [g = std::move(g), nd](double t, std::span<const double> x, std::span<double> out) {
        g(t, x, out);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < nd; ++j) out[i * nd + j] *= x[i];
    };
    m.positive_invariant = positive_invariant;
    return m;
}

void validate_model(const PeriodicModel& model, std::span<const double> x) {
    if (model.dim == 0) fail(ErrorKind::config, "model dimension must be at least 1");
    if (model.noise_dim == 0) fail(ErrorKind::config, "noise dimension must be at least 1");
    if (!(model.period > 0.0) || !std::isfinite(model.period)) fail(ErrorKind::config, "period must be positive");
    if (!(model.epsilon > 0.0) || !std::isfinite(model.epsilon))
        fail(ErrorKind::config, "noise scale epsilon must be positive");
    if (!model.drift || !model.diffusion) fail(ErrorKind::config, "model needs drift and diffusion");
    if (x.size() != model.dim) fail(ErrorKind::dimension, "sample state has the wrong dimension");
    const double theta = model.period;
    for (double frac : {0.0, 0.137, 0.5, 0.731}) {
        const double t = frac * theta;
        const Vector f0 = model.drift_at(t, x);
        const Vector f1 = model.drift_at(t + theta, x);
        const Matrix g0 = model.diffusion_at(t, x);
        const Matrix g1 = model.diffusion_at(t + theta, x);
        double worst = 0.0;
        for (std::size_t i = 0; i < model.dim; ++i) worst = std::max(worst, std::abs(f0[i] - f1[i]));
        worst = std::max(worst, max_abs(g0 - g1));
        if (worst > 1e-9) {
            std::ostringstream os;
            os << "model '" << model.name << "' is not " << theta << "-periodic in t (defect " << worst << " at t = "
               << t << ")";
            fail(ErrorKind::config, os.str());
        }
    }
}

double reduce_time(double t, double period) noexcept {
    if (t >= 0.0 && t <= period) return t;
    const double r = t - period * std::floor(t / period);
    return (r < 0.0 || r >= period) ? 0.0 : r;
}

Vector OrbitPath::at(double t) const {
    t = reduce_time(t, period);
    const std::size_t m = grid.size() - 1;
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t j = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    if (j >= m) j = m - 1;
    const double h = grid[j + 1] - grid[j];
    const double s = (t - grid[j]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    Vector x(dim());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = h00 * states[j][i] + h10 * h * slopes[j][i] + h01 * states[j + 1][i] + h11 * h * slopes[j + 1][i];
    return x;
}

namespace {

// One RK4 step of x' = f, Phi' = J Phi.
void rk4_variational_step(const PeriodicModel& m, double t, double h, Vector& x, Matrix& phi) {
    const std::size_t n = m.dim;
    auto add = [](const Vector& a, const Vector& b, double s) {
        Vector r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const Vector k1 = m.drift_at(t, x);
    const Matrix l1 = m.jacobian_at(t, x) * phi;
    const Vector x2 = add(x, k1, 0.5 * h);
    const Vector k2 = m.drift_at(t + 0.5 * h, x2);
    const Matrix l2 = m.jacobian_at(t + 0.5 * h, x2) * (phi + (0.5 * h) * l1);
    const Vector x3 = add(x, k2, 0.5 * h);
    const Vector k3 = m.drift_at(t + 0.5 * h, x3);
    const Matrix l3 = m.jacobian_at(t + 0.5 * h, x3) * (phi + (0.5 * h) * l2);
    const Vector x4 = add(x, k3, h);
    const Vector k4 = m.drift_at(t + h, x4);
    const Matrix l4 = m.jacobian_at(t + h, x4) * (phi + h * l3);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    phi += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

void rk4_state_step(const PeriodicModel& m, double t, double h, Vector& x) {
    const std::size_t n = m.dim;
    Vector tmp(n);
    const Vector k1 = m.drift_at(t, x);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const Vector k2 = m.drift_at(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const Vector k3 = m.drift_at(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    const Vector k4 = m.drift_at(t + h, tmp);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

bool finite(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

OrbitPath tabulate(const PeriodicModel& m, std::vector<Vector> states, std::size_t steps) {
    OrbitPath path;
    path.period = m.period;
    const double h = m.period / static_cast<double>(steps);
    path.grid.resize(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) path.grid[j] = h * static_cast<double>(j);
    path.grid.back() = m.period;
    path.states = std::move(states);
    for (std::size_t j = 0; j <= steps; ++j) path.slopes.push_back(m.drift_at(path.grid[j], path.states[j]));
    double defect = 0.0;
    for (std::size_t i = 0; i < m.dim; ++i)
        defect = std::max(defect, std::abs(path.states.back()[i] - path.states.front()[i]));
    path.closure_defect = defect;
    double resid = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
        // derivative of the Hermite interpolant at the midpoint
        const double tm = 0.5 * (path.grid[j] + path.grid[j + 1]);
        const Vector xm = path.at(tm);
        const Vector fm = m.drift_at(tm, xm);
        for (std::size_t i = 0; i < m.dim; ++i) {
            const double d = 1.5 * (path.states[j + 1][i] - path.states[j][i]) / h -
                             0.25 * (path.slopes[j][i] + path.slopes[j + 1][i]);
            resid = std::max(resid, std::abs(d - fm[i]));
        }
    }
    path.midpoint_residual = resid;
    return path;
}

}  // namespace

OrbitPath find_periodic_orbit(const PeriodicModel& model, std::span<const double> guess, const OrbitOptions& opts) {
    if (guess.size() != model.dim) fail(ErrorKind::dimension, "orbit guess has the wrong dimension");
    if (opts.steps < 2) fail(ErrorKind::config, "orbit grid needs at least 2 steps");
    const std::size_t n = model.dim;
    const std::size_t steps = opts.steps;
    const double h = model.period / static_cast<double>(steps);

    if (opts.use_closed_form && model.orbit) {
        std::vector<Vector> states(steps + 1, Vector(n));
        for (std::size_t j = 0; j <= steps; ++j)
            model.orbit(j == steps ? model.period : h * static_cast<double>(j), states[j]);
        return tabulate(model, std::move(states), steps);
    }

    Vector x(guess.begin(), guess.end());
    std::size_t iter = 0;
    for (;; ++iter) {
        Vector y = x;
        Matrix phi = Matrix::identity(n);
        for (std::size_t k = 0; k < steps; ++k) rk4_variational_step(model, h * static_cast<double>(k), h, y, phi);
        if (!finite(y) || !all_finite(phi)) {
            fail(ErrorKind::non_convergence,
                 "periodic orbit search blew up during the shooting integration; try a better initial guess");
        }
        Vector resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - x[i];
        if (norm_inf(resid) <= opts.tol * std::max(1.0, norm_inf(x))) break;
        if (iter >= opts.max_iterations) {
            std::ostringstream os;
            os << "Newton shooting did not converge in " << opts.max_iterations << " iterations (residual "
               << norm_inf(resid) << "); try a better initial guess";
            fail(ErrorKind::non_convergence, os.str());
        }
        Matrix jac = phi - Matrix::identity(n);
        Vector dx;
        try {
            dx = solve_linear_system(jac, resid);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::singular) throw;
            fail(ErrorKind::degenerate_orbit,
                 std::string("I - Phi(theta) is singular, the orbit is not isolated: ") + e.what());
        }
        for (std::size_t i = 0; i < n; ++i) x[i] -= dx[i];
        if (!finite(x)) fail(ErrorKind::non_convergence, "Newton update is not finite; try a better initial guess");
    }

    std::vector<Vector> states;
    states.reserve(steps + 1);
    states.push_back(x);
    Vector y = x;
    for (std::size_t k = 0; k < steps; ++k) {
        rk4_state_step(model, h * static_cast<double>(k), h, y);
        states.push_back(y);
    }
    OrbitPath path = tabulate(model, std::move(states), steps);
    path.newton_iterations = iter;
    return path;
}

MatrixPath jacobian_path(const PeriodicModel& model, const OrbitPath& orbit) {
    return [model, orbit](double t) { return model.jacobian_at(t, orbit.at(t)); };
}

MatrixPath noise_path(const PeriodicModel& model, const OrbitPath& orbit) {
    return [model, orbit](double t) { return model.diffusion_at(t, orbit.at(t)); };
}

namespace {

void rk4_fundamental_step(const MatrixPath& c, double t, double h, Matrix& phi, Matrix& psi) {
    const Matrix c0 = c(t);
    const Matrix c1 = c(t + 0.5 * h);
    const Matrix c2 = c(t + h);
    const Matrix k1 = c0 * phi;
    const Matrix k2 = c1 * (phi + (0.5 * h) * k1);
    const Matrix k3 = c1 * (phi + (0.5 * h) * k2);
    const Matrix k4 = c2 * (phi + h * k3);
    const Matrix l1 = -1.0 * (psi * c0);
    const Matrix l2 = -1.0 * ((psi + (0.5 * h) * l1) * c1);
    const Matrix l3 = -1.0 * ((psi + (0.5 * h) * l2) * c1);
    const Matrix l4 = -1.0 * ((psi + h * l3) * c2);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    psi += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

std::size_t node_below(const std::vector<double>& grid, double t) {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t j = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::min(j, grid.size() - 1);
}

}  // namespace

FundamentalPath fundamental_matrix(MatrixPath c, double period, std::size_t steps) {
    if (steps < 100) fail(ErrorKind::config, "fundamental matrix needs at least 100 steps");
    if (!(period > 0.0)) fail(ErrorKind::config, "period must be positive");
    FundamentalPath fp;
    fp.period = period;
    fp.jacobian = std::move(c);
    const Matrix c0 = fp.jacobian(0.0);
    require_square(c0, "fundamental matrix");
    const std::size_t n = c0.rows();
    const double h = period / static_cast<double>(steps);
    fp.grid.resize(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) fp.grid[j] = h * static_cast<double>(j);
    fp.grid.back() = period;
    Matrix phi = Matrix::identity(n);
    Matrix psi = Matrix::identity(n);
    fp.phi.reserve(steps + 1);
    fp.psi.reserve(steps + 1);
    fp.phi.push_back(phi);
    fp.psi.push_back(psi);
    for (std::size_t k = 0; k < steps; ++k) {
        rk4_fundamental_step(fp.jacobian, fp.grid[k], h, phi, psi);
        if (!all_finite(phi) || !all_finite(psi)) {
            std::ostringstream os;
            os << "fundamental matrix integration blew up at t = " << fp.grid[k + 1];
            fail(ErrorKind::blow_up, os.str());
        }
        fp.phi.push_back(phi);
        fp.psi.push_back(psi);
    }
    return fp;
}

FundamentalPath::State FundamentalPath::at(double t) const {
    t = reduce_time(t, period);
    const std::size_t j = node_below(grid, t);
    State s{phi[j], psi[j]};
    const double tau = t - grid[j];
    if (tau <= 0.0) return s;
    rk4_fundamental_step(jacobian, grid[j], 0.5 * tau, s.phi, s.psi);
    rk4_fundamental_step(jacobian, grid[j] + 0.5 * tau, 0.5 * tau, s.phi, s.psi);
    return s;
}

namespace {

Matrix gram_integrand(const Matrix& psi, const Matrix& gamma) {
    const Matrix pg = psi * gamma;
    return pg * pg.transpose();
}

}  // namespace

NoiseGram noise_gram(MatrixPath gamma, const FundamentalPath& fund) {
    NoiseGram g;
    g.noise = std::move(gamma);
    const std::size_t m = fund.steps();
    std::vector<Matrix> k;
    k.reserve(m + 1);
    for (std::size_t j = 0; j <= m; ++j) k.push_back(gram_integrand(fund.psi[j], g.noise(fund.grid[j])));
    const std::size_t n = k.front().rows();
    g.partials.assign(m + 1, Matrix(n, n));
    const std::size_t even = m - (m % 2);
    for (std::size_t j = 0; j + 2 <= even; j += 2) {
        const double h = 0.5 * (fund.grid[j + 2] - fund.grid[j]);
        g.partials[j + 1] = g.partials[j] + (h / 12.0) * (5.0 * k[j] + 8.0 * k[j + 1] - k[j + 2]);
        g.partials[j + 2] = g.partials[j] + (h / 3.0) * (k[j] + 4.0 * k[j + 1] + k[j + 2]);
    }
    if (m % 2 == 1) {
        const double h = fund.grid[m] - fund.grid[m - 1];
        g.partials[m] = g.partials[m - 1] + (0.5 * h) * (k[m - 1] + k[m]);
    }
    for (auto& p : g.partials) p = symmetrized(p);
    g.full = symmetrized(congruence(fund.monodromy(), g.partials.back()));
    return g;
}

NoiseGram noise_gram(const PeriodicModel& model, const OrbitPath& orbit, const FundamentalPath& fund) {
    if (orbit.grid.size() != fund.grid.size()) fail(ErrorKind::dimension, "orbit and fundamental grids differ");
    return noise_gram(noise_path(model, orbit), fund);
}

Matrix NoiseGram::partial_at(double t, const FundamentalPath& fund) const {
    t = reduce_time(t, fund.period);
    const std::size_t j = node_below(fund.grid, t);
    const double tau = t - fund.grid[j];
    if (tau <= 0.0) return partials[j];
    const auto mid = fund.at(fund.grid[j] + 0.5 * tau);
    const auto end = fund.at(t);
    const Matrix k0 = gram_integrand(fund.psi[j], noise(fund.grid[j]));
    const Matrix k1 = gram_integrand(mid.psi, noise(fund.grid[j] + 0.5 * tau));
    const Matrix k2 = gram_integrand(end.psi, noise(t));
    return symmetrized(partials[j] + (tau / 6.0) * (k0 + 4.0 * k1 + k2));
}

}  // namespace spsd
