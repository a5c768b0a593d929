#include "spsd/plna.hpp"

#include <cmath>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

PeriodicModel log_transform(const PeriodicModel& model) {
    if (!model.positive_invariant) {
        fail(ErrorKind::positivity, "model '" + model.name +
                                        "' is not asserted positive-invariant; some coordinate may leave (0, inf) "
                                        "and the log transform is undefined");
    }
    const std::size_t n = model.dim;
    const std::size_t nd = model.noise_dim;
    const double eps = model.epsilon;
    PeriodicModel lm;
    lm.name = model.name + "-log";
    lm.dim = n;
    lm.noise_dim = nd;
    lm.period = model.period;
    lm.epsilon = eps;
    lm.positive_invariant = false;
    lm.drift = [model, n, nd, eps](double t, std::span<const double> psi, std::span<double> out) {
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(psi[i]);
        model.drift(t, x, out);
        const Matrix g = model.noise_factor_at(t, x);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < nd; ++j) s += g(i, j) * g(i, j);
            out[i] = out[i] / x[i] - 0.5 * eps * s;
        }
    };
    lm.diffusion = [model, n](double t, std::span<const double> psi, std::span<double> out) {
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(psi[i]);
        const Matrix g = model.noise_factor_at(t, x);
        std::copy(g.data().begin(), g.data().end(), out.begin());
    };
    return lm;
}

LogSystem build_log_system(const PeriodicModel& model, std::span<const double> positive_guess,
                           const PipelineOptions& opts) {
    if (positive_guess.size() != model.dim) fail(ErrorKind::dimension, "orbit guess has the wrong dimension");
    Vector psi(model.dim);
    for (std::size_t i = 0; i < model.dim; ++i) {
        if (!(positive_guess[i] > 0.0)) {
            std::ostringstream os;
            os << "non-positive state " << positive_guess[i] << " in coordinate " << i + 1
               << " during the log-orbit search";
            fail(ErrorKind::positivity, os.str());
        }
        psi[i] = std::log(positive_guess[i]);
    }
    LogSystem ls;
    ls.log_model = log_transform(model);
    validate_model(ls.log_model, psi);
    OrbitOptions oo;
    oo.steps = opts.steps;
    oo.tol = opts.orbit_tol;
    oo.max_iterations = opts.max_newton_iterations;
    ls.log_orbit = find_periodic_orbit(ls.log_model, psi, oo);
    ls.log_jacobian = jacobian_path(ls.log_model, ls.log_orbit);
    ls.log_noise = noise_path(ls.log_model, ls.log_orbit);
    return ls;
}

SpsdApproximation plna_approximate(const PeriodicModel& model, std::span<const double> positive_guess,
                                   const PipelineOptions& opts) {
    LogSystem ls = build_log_system(model, positive_guess, opts);
    return assemble_approximation(Family::log_normal, std::move(ls.log_orbit), std::move(ls.log_jacobian),
                                  std::move(ls.log_noise), model.epsilon, opts.steps);
}

}  // namespace spsd
