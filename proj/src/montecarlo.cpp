#include "spsd/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "spsd/errors.hpp"
#include "spsd/linalg.hpp"

namespace spsd {

namespace {

constexpr std::size_t kChunk = 64;

enum class Correction { none, scalar_noise, diagonal_noise };

bool diffusion_is_diagonal(const PeriodicModel& m, const SpsdApproximation& approx) {
    if (m.dim != m.noise_dim) return false;
    for (double frac : {0.0, 0.3, 0.7}) {
        const double t = frac * m.period;
        Vector x = approx.mean_at(t);
        if (approx.family == Family::log_normal)
            for (double& v : x) v = std::exp(v);
        const Matrix g = m.diffusion_at(t, x);
        for (std::size_t i = 0; i < m.dim; ++i)
            for (std::size_t j = 0; j < m.dim; ++j)
                if (i != j && g(i, j) != 0.0) return false;
    }
    return true;
}

class Stepper {
public:
    Stepper(const PeriodicModel& m, Correction corr, double dt)
        : m_(m), corr_(corr), n_(m.dim), nd_(m.noise_dim), dt_(dt), sdt_(std::sqrt(dt)),
          seps_(std::sqrt(m.epsilon)), f_(n_), g_(n_ * nd_), gp_(n_ * nd_), gm_(n_ * nd_), dw_(nd_), y_(n_), xp_(n_), xm_(n_) {}

    template <class Rng, class Normal>
    void step(double t, Vector& x, Rng& rng, Normal& normal) {
        for (double& w : dw_) w = sdt_ * normal(rng);
        m_.drift(t, x, f_);
        m_.diffusion(t, x, g_);
        if (corr_ == Correction::scalar_noise) scalar_correction(t, x);
        if (corr_ == Correction::diagonal_noise) diagonal_correction(t, x);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < nd_; ++j) s += g_[i * nd_ + j] * dw_[j];
            x[i] += f_[i] * dt_ + seps_ * s;
        }
        if (corr_ != Correction::none)
            for (std::size_t i = 0; i < n_; ++i) x[i] += y_[i];
    }

private:
    // 0.5 eps (L Gamma)_i (dW^2 - dt), with L = sum_k Gamma_k d/dx_k a directional derivative.
    void scalar_correction(double t, const Vector& x) {
        double scale = 0.0, xs = 1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            scale = std::max(scale, std::abs(g_[i]));
            xs = std::max(xs, std::abs(x[i]));
        }
        std::fill(y_.begin(), y_.end(), 0.0);
        if (scale == 0.0) return;
        const double h = 1e-6 * xs / scale;
        for (std::size_t i = 0; i < n_; ++i) {
            xp_[i] = x[i] + h * g_[i];
            xm_[i] = x[i] - h * g_[i];
        }
        m_.diffusion(t, xp_, gp_);
        m_.diffusion(t, xm_, gm_);
        const double w = 0.5 * m_.epsilon * (dw_[0] * dw_[0] - dt_);
        for (std::size_t i = 0; i < n_; ++i) y_[i] = w * (gp_[i] - gm_[i]) / (2.0 * h);
    }

    void diagonal_correction(double t, const Vector& x) {
        std::copy(x.begin(), x.end(), xp_.begin());
        for (std::size_t i = 0; i < n_; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            xp_[i] = x[i] + h;
            m_.diffusion(t, xp_, gp_);
            xp_[i] = x[i] - h;
            m_.diffusion(t, xp_, gm_);
            xp_[i] = x[i];
            const std::size_t d = i * nd_ + i;
            const double deriv = (gp_[d] - gm_[d]) / (2.0 * h);
            y_[i] = 0.5 * m_.epsilon * g_[d] * deriv * (dw_[i] * dw_[i] - dt_);
        }
    }

    const PeriodicModel& m_;
    Correction corr_;
    std::size_t n_, nd_;
    double dt_, sdt_, seps_;
    Vector f_, g_, gp_, gm_, dw_, y_, xp_, xm_;
};

struct Accumulator {
    std::vector<double> s1;  // (T+1) x n deviations from the reference mean
    std::vector<double> s2;  // (T+1) x packed upper triangle
    std::size_t included = 0;
    std::size_t blowups = 0;

    void reset(std::size_t len1, std::size_t len2) {
        s1.assign(len1, 0.0);
        s2.assign(len2, 0.0);
        included = 0;
        blowups = 0;
    }
    void merge(const Accumulator& o) {
        for (std::size_t k = 0; k < s1.size(); ++k) s1[k] += o.s1[k];
        for (std::size_t k = 0; k < s2.size(); ++k) s2[k] += o.s2[k];
        included += o.included;
        blowups += o.blowups;
    }
};

struct Plan {
    const PeriodicModel& model;
    Family family;
    Correction corr;
    double dt;
    std::size_t spu, horizon, n, packed;
    std::uint64_t seed;
    Vector mean0;
    Matrix root0;  // Sigma0 = root0 root0^T
    const std::vector<Vector>& ref_mean;
    std::vector<std::size_t> ks_times;
    std::vector<double>& ks_buf;  // [path][ks time][coordinate]
    std::vector<char>& ok;
};

void run_chunk(const Plan& p, std::size_t first, std::size_t last, Accumulator& acc) {
    acc.reset((p.horizon + 1) * p.n, (p.horizon + 1) * p.packed);
    Stepper stepper(p.model, p.corr, p.dt);
    std::vector<double> rec((p.horizon + 1) * p.n);
    Vector x(p.n), z(p.n);
    const std::size_t nks = p.ks_times.size();
    for (std::size_t path = first; path < last; ++path) {
        std::mt19937_64 rng(substream_seed(p.seed, path));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& v : z) v = normal(rng);
        for (std::size_t i = 0; i < p.n; ++i) {
            double s = p.mean0[i];
            for (std::size_t k = 0; k < p.n; ++k) s += p.root0(i, k) * z[k];
            x[i] = p.family == Family::log_normal ? std::exp(s) : s;
        }
        bool good = true;
        std::size_t step = 0;
        for (std::size_t j = 0; j <= p.horizon && good; ++j) {
            if (j > 0)
                for (std::size_t s = 0; s < p.spu; ++s, ++step)
                    stepper.step(static_cast<double>(step) * p.dt, x, rng, normal);
            for (std::size_t i = 0; i < p.n; ++i) {
                double y = x[i];
                if (p.family == Family::log_normal) y = y > 0.0 ? std::log(y) : NAN;
                if (!std::isfinite(y)) {
                    good = false;
                    break;
                }
                rec[j * p.n + i] = y;
            }
        }
        p.ok[path] = good ? 1 : 0;
        if (!good) {
            ++acc.blowups;
            continue;
        }
        ++acc.included;
        for (std::size_t q = 0; q < nks; ++q)
            for (std::size_t i = 0; i < p.n; ++i)
                p.ks_buf[(path * nks + q) * p.n + i] = rec[p.ks_times[q] * p.n + i];
        for (std::size_t j = 0; j <= p.horizon; ++j) {
            double* d = rec.data() + j * p.n;
            for (std::size_t i = 0; i < p.n; ++i) d[i] -= p.ref_mean[j][i];
            double* s1 = acc.s1.data() + j * p.n;
            double* s2 = acc.s2.data() + j * p.packed;
            std::size_t k = 0;
            for (std::size_t a = 0; a < p.n; ++a) {
                s1[a] += d[a];
                for (std::size_t b = a; b < p.n; ++b) s2[k++] += d[a] * d[b];
            }
        }
    }
}

}  // namespace

const char* to_string(Scheme s) noexcept { return s == Scheme::milstein ? "milstein" : "euler_maruyama"; }

Scheme parse_scheme(const std::string& name) {
    if (name == "milstein") return Scheme::milstein;
    if (name == "euler_maruyama" || name == "em") return Scheme::euler_maruyama;
    fail(ErrorKind::config, "unknown scheme '" + name + "' (expected milstein or euler_maruyama)");
}

std::size_t SimConfig::steps_per_unit() const {
    if (!(dt > 0.0) || !std::isfinite(dt) || dt > 1.0) fail(ErrorKind::config, "dt must lie in (0, 1]");
    const double k = std::round(1.0 / dt);
    if (std::abs(k * dt - 1.0) > 1e-9) fail(ErrorKind::config, "1/dt must be an integer so unit times fall on the grid");
    return static_cast<std::size_t>(k);
}

void SimConfig::validate() const {
    (void)steps_per_unit();
    if (horizon < 1) fail(ErrorKind::config, "horizon must be at least 1");
    if (replicas < 2) fail(ErrorKind::config, "at least 2 replicas are needed");
    if (!(ks_alpha > 0.0 && ks_alpha < 1.0)) fail(ErrorKind::config, "KS significance must lie in (0, 1)");
    for (std::size_t t : ks_times)
        if (t > horizon) fail(ErrorKind::config, "KS time beyond the horizon");
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    // splitmix64 finalizer over a counter offset from the base seed
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<std::size_t> default_ks_times(double period, std::size_t horizon) {
    std::vector<std::size_t> out;
    for (double v : {0.5 * period, period, 2.0 * period, static_cast<double>(horizon)}) {
        const double r = std::round(v);
        if (r >= 1.0 && r <= static_cast<double>(horizon)) out.push_back(static_cast<std::size_t>(r));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t resolve_threads(std::size_t requested) {
    std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPSD_THREADS"); env && *env) {
        std::size_t cap = 0;
        const char* end = env + std::char_traits<char>::length(env);
        const auto [ptr, ec] = std::from_chars(env, end, cap);
        if (ec != std::errc() || ptr != end || cap == 0)
            fail(ErrorKind::config, std::string("SPSD_THREADS must be a positive integer, got '") + env + "'");
        n = std::min(n, cap);
    }
    return n;
}

double normal_cdf(double x, double mean, double sd) noexcept {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) fail(ErrorKind::domain, "KS statistic of an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double m = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

double ks_threshold(std::size_t m, double alpha) {
    if (m == 0 || !(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::domain, "KS threshold needs m >= 1, alpha in (0,1)");
    return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(m));
}

KsResult ks_marginal_test(std::span<const double> samples, double mean, double variance, double alpha) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        fail(ErrorKind::domain, "degenerate reference distribution: variance must be positive");
    if (samples.size() < 8) fail(ErrorKind::domain, "KS test needs at least 8 samples");
    const double sd = std::sqrt(variance);
    KsResult r;
    r.samples = samples.size();
    r.statistic = ks_statistic(samples, [&](double x) { return normal_cdf(x, mean, sd); });
    r.threshold = ks_threshold(samples.size(), alpha);
    r.reject = r.statistic > r.threshold;
    return r;
}

RelativeErrors relative_errors(const std::vector<Vector>& sample_mean, const std::vector<Matrix>& sample_cov,
                               const std::vector<Vector>& ref_mean, const std::vector<Matrix>& ref_cov) {
    const std::size_t len = sample_mean.size();
    if (len < 2 || sample_cov.size() != len || ref_mean.size() != len || ref_cov.size() != len)
        fail(ErrorKind::dimension, "relative_errors needs matching statistics at j = 0..T with T >= 1");
    const std::size_t n = sample_mean.front().size();
    RelativeErrors out;
    out.mean.assign(n, 0.0);
    out.cov = Matrix(n, n, 0.0);
    std::vector<std::size_t> cm(n, 0);
    Matrix cc(n, n, 0.0);
    for (std::size_t j = 1; j < len; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double den = std::abs(sample_mean[j][i]);
            if (den == 0.0) {
                ++out.excluded;
                continue;
            }
            out.mean[i] += std::abs(sample_mean[j][i] - ref_mean[j][i]) / den;
            ++cm[i];
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) {
                const double den = std::abs(sample_cov[j](a, b));
                if (den == 0.0) {
                    ++out.excluded;
                    continue;
                }
                out.cov(a, b) += std::abs(sample_cov[j](a, b) - ref_cov[j](a, b)) / den;
                cc(a, b) += 1.0;
            }
    }
    for (std::size_t i = 0; i < n; ++i) out.mean[i] = cm[i] ? out.mean[i] / static_cast<double>(cm[i]) : 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            out.cov(a, b) = cc(a, b) > 0.0 ? out.cov(a, b) / cc(a, b) : 0.0;
            out.cov(b, a) = out.cov(a, b);
        }
    return out;
}

SimulationReport simulate_statistics(const PeriodicModel& model, const SpsdApproximation& approx,
                                     const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = model.dim;
    if (approx.dim() != n) fail(ErrorKind::dimension, "approximation and model dimensions differ");
    if (approx.certificate.verdict == Verdict::indeterminate)
        fail(ErrorKind::assumption, "covariance certificate is indeterminate; refusing to sample from it");

    SimulationReport rep;
    rep.model = model.name;
    rep.family = approx.family;
    rep.config = cfg;
    if (rep.config.ks_times.empty()) rep.config.ks_times = default_ks_times(approx.period(), cfg.horizon);

    Correction corr = Correction::none;
    rep.effective_scheme = cfg.scheme;
    if (cfg.scheme == Scheme::milstein && !model.additive_noise) {
        if (model.noise_dim == 1) {
            corr = Correction::scalar_noise;
        } else if (diffusion_is_diagonal(model, approx)) {
            corr = Correction::diagonal_noise;
        } else {
            rep.effective_scheme = Scheme::euler_maruyama;
            rep.warnings.emplace_back("non-diagonal noise: Milstein replaced by Euler-Maruyama");
        }
    }

    const std::size_t horizon = cfg.horizon;
    rep.ref_mean.reserve(horizon + 1);
    rep.ref_cov.reserve(horizon + 1);
    for (std::size_t j = 0; j <= horizon; ++j) {
        rep.ref_mean.push_back(approx.mean_at(static_cast<double>(j)));
        rep.ref_cov.push_back(approx.covariance_at(static_cast<double>(j)));
    }

    const SymmetricEigen eig = jacobi_eigen(approx.covariance.initial);
    Matrix root(n, n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = std::sqrt(std::max(eig.values[k], 0.0));
        for (std::size_t i = 0; i < n; ++i) root(i, k) = eig.vectors(k, i) * s;
    }

    const std::size_t num = cfg.replicas;
    const std::size_t nks = rep.config.ks_times.size();
    std::vector<double> ks_buf(num * nks * n, 0.0);
    std::vector<char> ok(num, 0);
    const Plan plan{model, approx.family, corr, cfg.dt, cfg.steps_per_unit(), horizon, n, n * (n + 1) / 2,
                    cfg.seed, rep.ref_mean[0], root, rep.ref_mean, rep.config.ks_times, ks_buf, ok};

    const std::size_t chunks = (num + kChunk - 1) / kChunk;
    const std::size_t workers = std::min(resolve_threads(cfg.threads), chunks);
    std::vector<Accumulator> slots(workers);
    Accumulator total;
    total.reset((horizon + 1) * n, (horizon + 1) * plan.packed);
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t base = 0; base < chunks; base += workers) {
        const std::size_t active = std::min(workers, chunks - base);
        auto job = [&](std::size_t w) {
            try {
                const std::size_t c = base + w;
                run_chunk(plan, c * kChunk, std::min(num, (c + 1) * kChunk), slots[w]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        };
        if (active == 1) {
            job(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(active);
            for (std::size_t w = 0; w < active; ++w) pool.emplace_back(job, w);
            for (auto& th : pool) th.join();
        }
        for (std::size_t w = 0; w < active; ++w) {
            if (errors[w]) std::rethrow_exception(errors[w]);
            total.merge(slots[w]);
        }
    }

    rep.included = total.included;
    rep.blowups = total.blowups;
    if (rep.blowups * 1000 > num) {
        std::ostringstream os;
        os << rep.blowups << " of " << num << " paths blew up (limit 0.1%)";
        fail(ErrorKind::blow_up, os.str());
    }
    if (rep.blowups > 0) rep.warnings.push_back(std::to_string(rep.blowups) + " blown-up paths excluded");
    if (rep.included < 2) fail(ErrorKind::blow_up, "fewer than 2 paths survived");

    const double cnt = static_cast<double>(rep.included);
    rep.sample_mean.reserve(horizon + 1);
    rep.sample_cov.reserve(horizon + 1);
    for (std::size_t j = 0; j <= horizon; ++j) {
        const double* s1 = total.s1.data() + j * n;
        const double* s2 = total.s2.data() + j * plan.packed;
        Vector mean(n);
        for (std::size_t i = 0; i < n; ++i) mean[i] = rep.ref_mean[j][i] + s1[i] / cnt;
        Matrix cov(n, n, 0.0);
        std::size_t k = 0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b, ++k) {
                cov(a, b) = (s2[k] - s1[a] * s1[b] / cnt) / (cnt - 1.0);
                cov(b, a) = cov(a, b);
            }
        rep.sample_mean.push_back(std::move(mean));
        rep.sample_cov.push_back(std::move(cov));
    }

    rep.errors = relative_errors(rep.sample_mean, rep.sample_cov, rep.ref_mean, rep.ref_cov);
    if (rep.errors.excluded > 0)
        rep.warnings.push_back(std::to_string(rep.errors.excluded) + " relative-error terms had a zero denominator");

    std::vector<double> col;
    col.reserve(rep.included);
    for (std::size_t q = 0; q < nks; ++q) {
        const std::size_t t = rep.config.ks_times[q];
        for (std::size_t i = 0; i < n; ++i) {
            col.clear();
            for (std::size_t path = 0; path < num; ++path)
                if (ok[path]) col.push_back(ks_buf[(path * nks + q) * n + i]);
            const double var = rep.ref_cov[t](i, i);
            if (!(var > 0.0)) {
                rep.warnings.push_back("KS skipped at t=" + std::to_string(t) + ", coordinate " +
                                       std::to_string(i + 1) + ": zero reference variance");
                continue;
            }
            KsResult r = ks_marginal_test(col, rep.ref_mean[t][i], var, cfg.ks_alpha);
            r.coordinate = i;
            r.time = t;
            rep.ks.push_back(r);
        }
    }
    return rep;
}

}  // namespace spsd
