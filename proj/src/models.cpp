#include "spsd/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spsd/errors.hpp"

namespace spsd {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be positive and finite, got " << v;
        fail(ErrorKind::config, os.str());
    }
}

}  // namespace

void LogisticOuParams::validate() const {
    require_positive(r_bar, "r_bar");
    require_positive(b, "b");
    require_positive(m0, "m0");
    require_positive(epsilon, "epsilon");
    require_positive(period, "period");
    if (!(sigma0 >= 0.0) || !std::isfinite(sigma0)) fail(ErrorKind::config, "sigma0 must be nonnegative");
}

double LogisticOuParams::sigma(double t) const noexcept {
    if (profile == SigmaProfile::constant) return sigma0;
    return sigma0 * std::sin(2.0 * kPi * t / period);
}

LogisticOuParams logistic_ou_case(int case_number) {
    LogisticOuParams p;
    switch (case_number) {
        case 1: p.epsilon = 0.01; p.period = 50.0; break;
        case 2: p.epsilon = 0.01; p.period = 100.0; break;
        case 3: p.epsilon = 0.05; p.period = 100.0; break;
        case 4: p.epsilon = 0.1; p.period = 100.0; break;
        default: fail(ErrorKind::config, "logistic-OU case must be I, II, III or IV");
    }
    return p;
}

int parse_case(const std::string& label) {
    if (label == "I" || label == "1") return 1;
    if (label == "II" || label == "2") return 2;
    if (label == "III" || label == "3") return 3;
    if (label == "IV" || label == "4") return 4;
    fail(ErrorKind::config, "unknown case '" + label + "' (expected I, II, III or IV)");
}

const char* case_label(int case_number) {
    static const char* labels[] = {"I", "II", "III", "IV"};
    if (case_number < 1 || case_number > 4) return "?";
    return labels[case_number - 1];
}

PeriodicModel logistic_ou_model(const LogisticOuParams& p) {
    p.validate();
    PeriodicModel m;
    m.name = "logistic-ou";
    m.dim = 2;
    m.noise_dim = 1;
    m.period = p.period;
    m.epsilon = p.epsilon;
    m.additive_noise = true;
    m.positive_invariant = false;
    m.drift = [p](double, std::span<const double> x, std::span<double> out) {
        out[0] = x[0] * (x[1] - p.b * x[0]);
        out[1] = p.m0 * (p.r_bar - x[1]);
    };
    m.diffusion = [p](double t, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
        out[1] = p.sigma(t);
    };
    m.jacobian = [p](double, std::span<const double> x, std::span<double> out) {
        out[0] = x[1] - 2.0 * p.b * x[0];
        out[1] = x[0];
        out[2] = 0.0;
        out[3] = -p.m0;
    };
    m.orbit = [p](double, std::span<double> out) {
        out[0] = p.r_bar / p.b;
        out[1] = p.r_bar;
    };
    return m;
}

Vector logistic_ou_equilibrium(const LogisticOuParams& p) { return {p.r_bar / p.b, p.r_bar}; }

Matrix logistic_ou_linearization(const LogisticOuParams& p) { return {{-p.r_bar, p.r_bar / p.b}, {0.0, -p.m0}}; }

LogisticOuClosedForms::LogisticOuClosedForms(const LogisticOuParams& p) : p_(p) {
    p.validate();
    if (std::abs(p.r_bar - p.m0) < 1e-8)
        fail(ErrorKind::domain, "m0 equals r_bar; use logistic_ou_degenerate_phi for the degenerate branch");
    if (p.profile != SigmaProfile::sine) fail(ErrorKind::domain, "closed forms cover the sine profile only");
}

Matrix LogisticOuClosedForms::phi(double t) const {
    const double r = p_.r_bar, m = p_.m0, b = p_.b;
    return {{std::exp(-r * t), r * (std::exp(-m * t) - std::exp(-r * t)) / (b * (r - m))}, {0.0, std::exp(-m * t)}};
}

Matrix LogisticOuClosedForms::phi_inverse(double t) const {
    const double r = p_.r_bar, m = p_.m0, b = p_.b;
    return {{std::exp(r * t), r * (std::exp(m * t) - std::exp(r * t)) / (b * (r - m))}, {0.0, std::exp(m * t)}};
}

Matrix LogisticOuClosedForms::hbar(double t) const {
    const double r = p_.r_bar, m = p_.m0, b = p_.b, s0 = p_.sigma0, th = p_.period;
    const double c4 = std::cos(4.0 * kPi * t / th);
    const double s4 = std::sin(4.0 * kPi * t / th);
    // 4 * integral_0^t e^{2 k s} sin^2(2 pi s / theta) ds
    auto single = [&](double k) {
        const double d = k * k * th * th + 4.0 * kPi * kPi;
        return std::exp(2.0 * k * t) * (1.0 / k - (k * th * th * c4 + 2.0 * kPi * th * s4) / d) -
               4.0 * kPi * kPi / (k * d);
    };
    const double sum = r + m;
    const double dc = sum * sum * th * th + 16.0 * kPi * kPi;
    const double cross = std::exp(sum * t) * (1.0 / sum - (sum * th * th * c4 + 4.0 * kPi * th * s4) / dc) -
                         16.0 * kPi * kPi / (sum * dc);
    const double am = single(m);
    const double ar = single(r);
    const double h11 = s0 * s0 * r * r / (4.0 * b * b * (r - m) * (r - m)) * (am + ar - 4.0 * cross);
    const double h12 = s0 * s0 * r / (4.0 * b * (r - m)) * (am - 2.0 * cross);
    const double h22 = s0 * s0 / 4.0 * am;
    return {{h11, h12}, {h12, h22}};
}

Matrix LogisticOuClosedForms::sigma0() const {
    const double r = p_.r_bar, m = p_.m0, b = p_.b, s0 = p_.sigma0, th = p_.period, eps = p_.epsilon;
    const Matrix h = hbar(th);
    const double h11 = h(0, 0), h12 = h(0, 1);
    const double d = std::exp(-m * th) - std::exp(-r * th);
    const double q = m * m * th * th + 4.0 * kPi * kPi;
    const double ers = std::exp(-(r + m) * th);
    const double s11 =
        eps / ((1.0 - std::exp(-2.0 * r * th)) * (1.0 - ers)) *
        (std::exp(2.0 * m * th) * std::pow(s0 * r * kPi, 2) * (1.0 + ers) * d * d / (m * b * b * (r - m) * (r - m) * q) +
         std::exp(-r * th) * (std::exp(-r * th) * (1.0 - ers) * h11 + 2.0 * r * d * h12 / (b * (r - m))));
    const double s12 = eps / (1.0 - ers) *
                       (ers * h12 + r * s0 * s0 * kPi * kPi * std::exp(m * th) * d / (b * m * (r - m) * q));
    const double s22 = eps * s0 * s0 * kPi * kPi / (m * q);
    return {{s11, s12}, {s12, s22}};
}

Matrix LogisticOuClosedForms::sigma(double t) const {
    const double r = p_.r_bar, m = p_.m0, b = p_.b, eps = p_.epsilon;
    const Matrix s0 = sigma0();
    const Matrix h = hbar(t);
    const double a11 = s0(0, 0) + eps * h(0, 0);
    const double a12 = s0(0, 1) + eps * h(0, 1);
    const double a22 = s0(1, 1) + eps * h(1, 1);
    const double d = std::exp(-m * t) - std::exp(-r * t);
    const double k = r / (b * (r - m));
    const double s11 = std::exp(-2.0 * r * t) * a11 + 2.0 * k * std::exp(-r * t) * d * a12 + k * k * d * d * a22;
    const double s12 = std::exp(-m * t) * (std::exp(-r * t) * a12 + k * d * a22);
    const double s22 = std::exp(-2.0 * m * t) * a22;
    return {{s11, s12}, {s12, s22}};
}

LogisticOuClosedForms logistic_ou_closed_forms(const LogisticOuParams& p) { return LogisticOuClosedForms(p); }

Matrix logistic_ou_degenerate_phi(const LogisticOuParams& p, double t) {
    const double r = p.r_bar;
    return {{std::exp(-r * t), r * t * std::exp(-r * t) / p.b}, {0.0, std::exp(-r * t)}};
}

void ScalarLogisticParams::validate() const {
    require_positive(r_bar, "r_bar");
    require_positive(b, "b");
    require_positive(epsilon, "epsilon");
    require_positive(period, "period");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::config, "sigma must be nonnegative");
    if (!(r_bar - 0.5 * epsilon * sigma * sigma > 0.0))
        fail(ErrorKind::config, "r_bar - eps sigma^2 / 2 must be positive for a positive equilibrium");
}

PeriodicModel scalar_logistic_model(const ScalarLogisticParams& p) {
    p.validate();
    const double s = p.sigma;
    PeriodicModel m = kolmogorov_model(
        "scalar-logistic", 1, 1, p.period, p.epsilon,
        [p](double, std::span<const double> x, std::span<double> out) { out[0] = x[0] * (p.r_bar - p.b * x[0]); },
        [s](double, std::span<const double>, std::span<double> out) { out[0] = s; }, true);
    m.jacobian = [p](double, std::span<const double> x, std::span<double> out) {
        out[0] = p.r_bar - 2.0 * p.b * x[0];
    };
    return m;
}

double scalar_logistic_log_mean(const ScalarLogisticParams& p) {
    return std::log((p.r_bar - 0.5 * p.epsilon * p.sigma * p.sigma) / p.b);
}

double scalar_logistic_log_variance(const ScalarLogisticParams& p) {
    const double es2 = p.epsilon * p.sigma * p.sigma;
    return es2 / (2.0 * (p.r_bar - 0.5 * es2));
}

}  // namespace spsd
