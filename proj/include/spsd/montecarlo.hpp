#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spsd/matrix.hpp"
#include "spsd/periodic_system.hpp"
#include "spsd/pnoa.hpp"

namespace spsd {

enum class Scheme { euler_maruyama, milstein };

[[nodiscard]] const char* to_string(Scheme s) noexcept;
[[nodiscard]] Scheme parse_scheme(const std::string& name);

struct SimConfig {
    double dt = 1e-3;           // 1/dt must be an integer
    std::size_t horizon = 400;  // T, in whole time units
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::milstein;
    std::vector<std::size_t> ks_times;  // empty: default_ks_times
    double ks_alpha = 0.02;
    std::size_t threads = 0;  // 0: hardware concurrency; SPSD_THREADS caps either way

    void validate() const;
    [[nodiscard]] std::size_t steps_per_unit() const;
};

struct KsResult {
    std::size_t coordinate = 0;  // 0-based
    std::size_t time = 0;
    std::size_t samples = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool reject = false;
};

struct RelativeErrors {
    Vector mean;  // Aee_i
    Matrix cov;   // Aev_ij, symmetric
    std::size_t excluded = 0;  // (coordinate, time) terms dropped for a zero denominator
};

/// Statistics are of X for the normal family and of ln X for the log-normal one.
struct SimulationReport {
    std::string model;
    Family family = Family::normal;
    SimConfig config;
    Scheme effective_scheme = Scheme::milstein;
    std::vector<std::string> warnings;
    std::size_t included = 0;
    std::size_t blowups = 0;

    std::vector<Vector> sample_mean;  // j = 0..T
    std::vector<Matrix> sample_cov;
    std::vector<Vector> ref_mean;
    std::vector<Matrix> ref_cov;

    RelativeErrors errors;
    std::vector<KsResult> ks;
};

[[nodiscard]] SimulationReport simulate_statistics(const PeriodicModel& model, const SpsdApproximation& approx,
                                                   const SimConfig& cfg);

/// Averages over j = 1..T of |stat(j) - ref(j)| / |stat(j)|; the average runs
/// over the terms with a nonzero denominator.
[[nodiscard]] RelativeErrors relative_errors(const std::vector<Vector>& sample_mean,
                                             const std::vector<Matrix>& sample_cov,
                                             const std::vector<Vector>& ref_mean,
                                             const std::vector<Matrix>& ref_cov);

/// sup |F_m - F| over both sides of every jump of the empirical CDF.
[[nodiscard]] double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// Asymptotic critical value sqrt(-ln(alpha/2)/2) / sqrt(m).
[[nodiscard]] double ks_threshold(std::size_t m, double alpha);
[[nodiscard]] KsResult ks_marginal_test(std::span<const double> samples, double mean, double variance, double alpha);

[[nodiscard]] double normal_cdf(double x, double mean, double sd) noexcept;

[[nodiscard]] std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept;
/// {round(theta/2), round(theta), round(2 theta), T}, restricted to 1..T.
[[nodiscard]] std::vector<std::size_t> default_ks_times(double period, std::size_t horizon);
[[nodiscard]] std::size_t resolve_threads(std::size_t requested);

}  // namespace spsd
