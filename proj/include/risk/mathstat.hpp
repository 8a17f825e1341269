#pragma once

#include "risk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace risk {

inline double norm_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse standard normal CDF. Acklam's rational approximation (rel. error ~1e-9)
/// followed by one Newton step on norm_cdf.
inline double norm_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("norm_inv_cdf: p must lie in (0,1), got " + std::to_string(p));

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Newton refinement; the upper tail is refined through the complement to keep precision.
    const double err = p < 0.5 ? norm_cdf(x) - p : (1.0 - p) - norm_cdf(-x);
    const double dens = norm_pdf(x);
    if (dens > 0.0)
        x -= err / dens;
    return x;
}

namespace detail {
inline std::size_t lower_rank(double p, std::size_t n) {
    // k = ceil(p*n); the 1e-9 guard keeps products like 0.05*200 from rounding up past the integer.
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}
} // namespace detail

/// Lower empirical quantile: the k-th smallest element, k = ceil(p*n). Never interpolates.
inline double empirical_quantile(std::span<const double> xs, double p) {
    if (xs.empty())
        throw DomainError("empirical_quantile: empty sample");
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("empirical_quantile: p must lie in (0,1)");
    std::vector<double> buf(xs.begin(), xs.end());
    const auto k = detail::lower_rank(p, buf.size());
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k - 1), buf.end());
    return buf[k - 1];
}

/// Chi-square survival function for 1 or 2 degrees of freedom.
inline double chi2_sf(double x, int df) {
    if (!(x >= 0.0))
        throw DomainError("chi2_sf: x must be nonnegative");
    switch (df) {
    case 1:
        // 2*(1 - Phi(sqrt x)) written through erfc to avoid cancellation
        return std::erfc(std::sqrt(0.5 * x));
    case 2:
        return std::exp(-0.5 * x);
    default:
        throw DomainError("chi2_sf: unsupported degrees of freedom " + std::to_string(df));
    }
}

struct QQPoint {
    double theoretical;
    double empirical;
};

/// Sorted sample against normal quantiles at Hazen positions (i - 0.5)/n.
inline std::vector<QQPoint> qq_points(std::span<const double> sample, double mean, double sd) {
    if (!(sd > 0.0))
        throw DomainError("qq_points: sd must be positive");
    if (sample.size() < 2)
        throw DomainError("qq_points: need at least two observations");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<QQPoint> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double pos = (static_cast<double>(i) + 0.5) / n;
        out.push_back({mean + sd * norm_inv_cdf(pos), sorted[i]});
    }
    return out;
}

/// Lower-tail expected shortfall of N(0, sigma^2): -sigma * phi(Phi^-1(p)) / p.
inline double normal_es(double p, double sigma) {
    if (!(p > 0.0 && p < 1.0) || !(sigma > 0.0))
        throw DomainError("normal_es: need 0 < p < 1 and sigma > 0");
    return -sigma * norm_pdf(norm_inv_cdf(p)) / p;
}

inline double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

/// Mean-centred variance with divisor n-1.
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2)
        throw DomainError("sample_variance: need at least two observations");
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs)
        ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

} // namespace risk
