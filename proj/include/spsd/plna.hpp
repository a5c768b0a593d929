#pragma once

#include <span>

#include "spsd/periodic_system.hpp"
#include "spsd/pnoa.hpp"

namespace spsd {

/// The model rewritten in psi = ln x:
///   F_i = f_i(t, e^psi) e^{-psi_i} - (eps/2) sum_j g_ij(t, e^psi)^2,  Lambda = g(t, e^psi).
struct LogSystem {
    PeriodicModel log_model;
    OrbitPath log_orbit;      // Psi*(t)
    MatrixPath log_jacobian;  // D*(t) = dF/dpsi along Psi*
    MatrixPath log_noise;     // Lambda*(t)
};

[[nodiscard]] PeriodicModel log_transform(const PeriodicModel& model);

[[nodiscard]] LogSystem build_log_system(const PeriodicModel& model, std::span<const double> positive_guess,
                                         const PipelineOptions& opts = {});

[[nodiscard]] SpsdApproximation plna_approximate(const PeriodicModel& model, std::span<const double> positive_guess,
                                                 const PipelineOptions& opts = {});

}  // namespace spsd
