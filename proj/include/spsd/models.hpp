#pragma once

#include <string>

#include "spsd/matrix.hpp"
#include "spsd/periodic_system.hpp"

namespace spsd {

enum class SigmaProfile { sine, constant };

/// dx = x (r - b x) dt,  dr = m0 (rbar - r) dt + sqrt(eps) sigma(t) dW,
/// sigma(t) = sigma0 sin(2 pi t / theta) (or sigma0 for the constant profile).
struct LogisticOuParams {
    double r_bar = 0.5;
    double b = 0.5;
    double m0 = 0.3;
    double sigma0 = 0.1;
    double epsilon = 0.01;
    double period = 50.0;
    SigmaProfile profile = SigmaProfile::sine;

    void validate() const;
    [[nodiscard]] double sigma(double t) const noexcept;
};

/// Parameter sets I..IV of the worked example (case in 1..4).
[[nodiscard]] LogisticOuParams logistic_ou_case(int case_number);
/// Accepts "I".."IV" or "1".."4".
[[nodiscard]] int parse_case(const std::string& label);
[[nodiscard]] const char* case_label(int case_number);

[[nodiscard]] PeriodicModel logistic_ou_model(const LogisticOuParams& p);
[[nodiscard]] Vector logistic_ou_equilibrium(const LogisticOuParams& p);
[[nodiscard]] Matrix logistic_ou_linearization(const LogisticOuParams& p);

/// Closed forms for the sine profile with m0 != rbar.
class LogisticOuClosedForms {
public:
    explicit LogisticOuClosedForms(const LogisticOuParams& p);

    [[nodiscard]] Matrix phi(double t) const;
    [[nodiscard]] Matrix phi_inverse(double t) const;
    /// Symmetric 2x2 [[h11, h12], [h12, h22]].
    [[nodiscard]] Matrix hbar(double t) const;
    [[nodiscard]] Matrix sigma0() const;
    [[nodiscard]] Matrix sigma(double t) const;

private:
    LogisticOuParams p_;
};

[[nodiscard]] LogisticOuClosedForms logistic_ou_closed_forms(const LogisticOuParams& p);
/// Fundamental matrix for the m0 = rbar branch.
[[nodiscard]] Matrix logistic_ou_degenerate_phi(const LogisticOuParams& p, double t);

/// dx = x (rbar - b x) dt + sqrt(eps) sigma x dW
struct ScalarLogisticParams {
    double r_bar = 0.5;
    double b = 0.5;
    double sigma = 0.2;
    double epsilon = 0.1;
    double period = 1.0;

    void validate() const;
};

[[nodiscard]] PeriodicModel scalar_logistic_model(const ScalarLogisticParams& p);
/// Fixed point of the log system, ln((rbar - eps sigma^2 / 2) / b).
[[nodiscard]] double scalar_logistic_log_mean(const ScalarLogisticParams& p);
/// eps sigma^2 / (2 (rbar - eps sigma^2 / 2))
[[nodiscard]] double scalar_logistic_log_variance(const ScalarLogisticParams& p);

}  // namespace spsd
