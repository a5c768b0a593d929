#include "spsd/pnoa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

const char* to_string(Family f) noexcept { return f == Family::normal ? "normal" : "log_normal"; }

Matrix covariance_at(const CovariancePath& path, const FundamentalPath& fund, const NoiseGram& gram, double eps,
                     double t) {
    t = reduce_time(t, path.period);
    auto it = std::lower_bound(path.grid.begin(), path.grid.end(), t);
    if (it != path.grid.end() && *it == t) return path.values[static_cast<std::size_t>(it - path.grid.begin())];
    const auto state = fund.at(t);
    return symmetrized(congruence(state.phi, path.initial + eps * gram.partial_at(t, fund)));
}

Matrix SpsdApproximation::covariance_at(double t) const {
    return spsd::covariance_at(covariance, fundamental, gram, epsilon, t);
}

SpsdApproximation assemble_approximation(Family family, OrbitPath mean, MatrixPath c, MatrixPath gamma, double eps,
                                         std::size_t steps) {
    SpsdApproximation out;
    out.family = family;
    out.epsilon = eps;
    out.mean = std::move(mean);
    const double period = out.mean.period;
    out.fundamental = fundamental_matrix(std::move(c), period, steps);
    out.monodromy_spectrum = eigen_moduli_in_unit_disc(out.fundamental.monodromy());
    if (!out.monodromy_spectrum.is_member) {
        std::ostringstream os;
        os.precision(17);
        os << "monodromy matrix is outside CM-bar; eigenvalue moduli:";
        for (double m : out.monodromy_spectrum.moduli) os << " " << m;
        fail(ErrorKind::assumption, os.str());
    }
    out.gram = noise_gram(std::move(gamma), out.fundamental);

    const LyapunovProblem prob(out.fundamental.monodromy(), out.gram.full, eps);
    out.lyapunov = solve_discrete_lyapunov(prob);
    out.certificate = pd_certificate(prob, out.lyapunov);

    CovariancePath& cov = out.covariance;
    cov.initial = out.lyapunov.solution;
    cov.period = period;
    cov.grid = out.fundamental.grid;
    cov.values.reserve(cov.grid.size());
    cov.values.push_back(cov.initial);
    for (std::size_t j = 1; j < cov.grid.size(); ++j)
        cov.values.push_back(
            symmetrized(congruence(out.fundamental.phi[j], cov.initial + eps * out.gram.partials[j])));
    cov.periodicity_defect = frobenius_norm(cov.values.back() - cov.initial);
    return out;
}

SpsdApproximation pnoa_approximate(const PeriodicModel& model, std::span<const double> orbit_guess,
                                   const PipelineOptions& opts) {
    validate_model(model, orbit_guess);
    OrbitOptions oo;
    oo.steps = opts.steps;
    oo.tol = opts.orbit_tol;
    oo.max_iterations = opts.max_newton_iterations;
    oo.use_closed_form = opts.use_closed_form_orbit;
    OrbitPath orbit = find_periodic_orbit(model, orbit_guess, oo);
    MatrixPath c = jacobian_path(model, orbit);
    MatrixPath gamma = noise_path(model, orbit);
    return assemble_approximation(Family::normal, std::move(orbit), std::move(c), std::move(gamma), model.epsilon,
                                  opts.steps);
}

double autonomous_residual(const PeriodicModel& model, const SpsdApproximation& approx) {
    Vector x = approx.mean.states.front();
    if (approx.family == Family::log_normal)
        for (double& v : x) v = std::exp(v);
    const Vector f0 = model.drift_at(0.0, x);
    for (double frac : {0.1, 0.25, 0.5, 0.8}) {
        const Vector f = model.drift_at(frac * model.period, x);
        for (std::size_t i = 0; i < f.size(); ++i)
            if (std::abs(f[i] - f0[i]) > 1e-12 * (1.0 + std::abs(f0[i])))
                fail(ErrorKind::domain, "autonomous_residual needs a time-independent drift");
    }
    const auto& grid = approx.covariance.grid;
    const auto& vals = approx.covariance.values;
    const std::size_t m = grid.size() - 1;
    if (m < 4) fail(ErrorKind::config, "grid too coarse for fourth-order differences");
    const double h = grid[1] - grid[0];
    auto at = [&](long j) -> const Matrix& {
        const long mm = static_cast<long>(m);
        return vals[static_cast<std::size_t>(((j % mm) + mm) % mm)];
    };
    double worst = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
        const long jj = static_cast<long>(j);
        const Matrix deriv = (1.0 / (12.0 * h)) * (at(jj - 2) - 8.0 * at(jj - 1) + 8.0 * at(jj + 1) - at(jj + 2));
        const Matrix c = approx.fundamental.jacobian(grid[j]);
        const Matrix g = approx.gram.noise(grid[j]);
        const Matrix& s = vals[j];
        const Matrix r = c * s + s * c.transpose() + approx.epsilon * (g * g.transpose()) - deriv;
        worst = std::max(worst, frobenius_norm(r));
    }
    return worst;
}

}  // namespace spsd
