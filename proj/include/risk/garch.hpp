#pragma once

#include "risk/error.hpp"
#include "risk/mathstat.hpp"
#include "risk/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace risk::garch {

/// sigma2_t = omega + alpha * r_{t-1}^2 + beta * sigma2_{t-1}, zero conditional mean.
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    [[nodiscard]] bool valid() const noexcept {
        return omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0 && std::isfinite(omega);
    }

    void validate() const {
        if (!valid())
            throw ParameterError("GARCH(1,1) requires omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1 (got omega=" +
                                 std::to_string(omega) + ", alpha=" + std::to_string(alpha) +
                                 ", beta=" + std::to_string(beta) + ")");
    }

    [[nodiscard]] double persistence() const noexcept { return alpha + beta; }
    [[nodiscard]] double unconditional_variance() const noexcept { return omega / (1.0 - alpha - beta); }
};

struct Filtered {
    std::vector<double> sigma; // conditional standard deviation per date
    std::vector<double> z;     // standardized residuals r_t / sigma_t
};

struct GarchFit {
    GarchParams params;
    std::vector<double> sigma;
    std::vector<double> z;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;

    [[nodiscard]] std::size_t n_obs() const noexcept { return sigma.size(); }
};

struct FitOptions {
    int max_iter = 2000;
    double tol = 1e-8;
};

inline double next_variance(const GarchParams& p, double r_t, double sigma2_t) {
    if (!(sigma2_t > 0.0))
        throw DomainError("next_variance: sigma2_t must be positive");
    return p.omega + p.alpha * r_t * r_t + p.beta * sigma2_t;
}

namespace detail {

// Pre-sample r_0^2 and sigma2_0 are both set to the sample variance, so the first
// variance is omega + (alpha + beta) * s2 and alpha = beta = 0 gives a flat omega.
inline double initial_variance(const GarchParams& p, double s2) {
    return p.omega + (p.alpha + p.beta) * s2;
}

template <class Visit>
void recurse(std::span<const double> r, const GarchParams& p, double s2, Visit&& visit) {
    double v = initial_variance(p, s2);
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (t > 0)
            v = p.omega + p.alpha * r[t - 1] * r[t - 1] + p.beta * v;
        visit(t, v);
    }
}

inline double loglik_unchecked(std::span<const double> r, const GarchParams& p, double s2) {
    constexpr double half_log_2pi = 0.91893853320467274178;
    double ll = 0.0;
    recurse(r, p, s2, [&](std::size_t t, double v) { ll += -half_log_2pi - 0.5 * std::log(v) - 0.5 * r[t] * r[t] / v; });
    return ll;
}

inline double presample_variance(std::span<const double> r) {
    return sample_variance(r);
}

// Unconstrained coordinates (x0, x1, x2) -> (omega, alpha, beta):
// omega = exp(x0); persistence = cap * logistic(x1); alpha = persistence * logistic(x2).
inline constexpr double kPersistenceCap = 1.0 - 1e-6;

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double u) { return std::log(u / (1.0 - u)); }

inline GarchParams from_unconstrained(const std::vector<double>& x) {
    const double s = kPersistenceCap * logistic(x[1]);
    const double a = s * logistic(x[2]);
    return {std::exp(x[0]), a, s - a};
}

inline std::vector<double> to_unconstrained(const GarchParams& p) {
    const double s = p.alpha + p.beta;
    return {std::log(p.omega), logit(s / kPersistenceCap), logit(p.alpha / s)};
}

} // namespace detail

/// Gaussian quasi log-likelihood of the zero-mean GARCH(1,1) recursion.
inline double loglik(std::span<const double> returns, const GarchParams& params) {
    params.validate();
    if (returns.size() < 10)
        throw DomainError("loglik: need at least 10 observations");
    return detail::loglik_unchecked(returns, params, detail::presample_variance(returns));
}

/// Conditional volatilities and standardized residuals under `params`.
inline Filtered filter(std::span<const double> returns, const GarchParams& params) {
    params.validate();
    Filtered out;
    out.sigma.resize(returns.size());
    out.z.resize(returns.size());
    const double s2 = returns.size() >= 2 ? detail::presample_variance(returns) : 0.0;
    detail::recurse(returns, params, s2, [&](std::size_t t, double v) {
        out.sigma[t] = std::sqrt(v);
        out.z[t] = returns[t] / out.sigma[t];
    });
    return out;
}

/// Quasi-maximum-likelihood fit by Nelder-Mead over a reparameterisation that keeps
/// omega > 0, alpha, beta >= 0 and alpha + beta <= 1 - 1e-6. The simplex is restarted
/// at the incumbent until a restart no longer improves the objective.
inline GarchFit fit(std::span<const double> returns, const FitOptions& opts = {}) {
    if (returns.size() < 250)
        throw DataError("GARCH fit needs at least 250 observations, got " + std::to_string(returns.size()));
    const double s2 = detail::presample_variance(returns);
    const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
    if (*lo == *hi || !(s2 > 0.0))
        throw DataError("GARCH fit: return series has zero variance");

    GarchParams start{s2 * 0.05, 0.05, 0.90};
    auto objective = [&](const std::vector<double>& x) {
        return -detail::loglik_unchecked(returns, detail::from_unconstrained(x), s2);
    };

    NelderMeadOptions nm{opts.max_iter, opts.tol, 0.5};
    auto res = nelder_mead(objective, detail::to_unconstrained(start), nm);
    int used = res.iterations;
    for (int restart = 0; restart < 5 && used < opts.max_iter; ++restart) {
        nm.max_iter = opts.max_iter - used;
        nm.initial_step = 0.05;
        auto again = nelder_mead(objective, res.x, nm);
        used += again.iterations;
        const bool improved = again.value < res.value - 1e-10 * (1.0 + std::abs(res.value));
        const bool conv = again.converged;
        if (again.value <= res.value)
            res = std::move(again);
        res.converged = conv;
        if (!improved)
            break;
    }

    GarchFit f;
    f.params = detail::from_unconstrained(res.x);
    auto filtered = filter(returns, f.params);
    f.sigma = std::move(filtered.sigma);
    f.z = std::move(filtered.z);
    f.loglik = detail::loglik_unchecked(returns, f.params, s2);
    f.converged = res.converged && std::isfinite(f.loglik);
    f.iterations = used;
    return f;
}

} // namespace risk::garch
