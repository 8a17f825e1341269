#pragma once

#include "risk/data.hpp"
#include "risk/error.hpp"
#include "risk/garch.hpp"
#include "risk/mathstat.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace risk {

enum class VarMethod { hs, garch_normal, fhs };

inline std::string_view to_string(VarMethod m) {
    switch (m) {
    case VarMethod::hs: return "hs";
    case VarMethod::garch_normal: return "garch-n";
    case VarMethod::fhs: return "fhs";
    }
    return "?";
}

inline VarMethod parse_var_method(std::string_view s) {
    if (s == "hs") return VarMethod::hs;
    if (s == "garch-n" || s == "garch_n") return VarMethod::garch_normal;
    if (s == "fhs") return VarMethod::fhs;
    throw ConfigError("unknown VaR method '" + std::string(s) + "'");
}

struct VarConfig {
    double level = 0.05;
    std::size_t window = 200;
    VarMethod method = VarMethod::hs;

    void validate() const {
        if (!(level > 0.0 && level < 0.5))
            throw ConfigError("VaR level must lie in (0, 0.5), got " + std::to_string(level));
        if (window < 20)
            throw ConfigError("VaR window must be at least 20, got " + std::to_string(window));
    }
};

/// Rolling one-day VaR aligned with realized returns. Entry i refers to source index window + i.
/// VaR is stored as a signed return quantile (negative in practice).
struct VarSeries {
    std::vector<Date> dates;
    std::vector<double> realized;
    std::vector<double> var;
    VarMethod method = VarMethod::hs;
    double level = 0.05;

    [[nodiscard]] std::size_t size() const noexcept { return var.size(); }
};

/// Historical simulation: lower empirical p-quantile of the m returns before t.
inline double hs_var(std::span<const double> returns, std::size_t t, const VarConfig& cfg) {
    return empirical_quantile(window(returns, t, cfg.window), cfg.level);
}

inline double garch_normal_var(double sigma_t, double p) {
    if (!(sigma_t > 0.0))
        throw DomainError("garch_normal_var: sigma_t must be positive");
    return sigma_t * norm_inv_cdf(p);
}

/// Filtered historical simulation: sigma_t times the empirical p-quantile of past residuals.
inline double fhs_var(double sigma_t, std::span<const double> z_window, double p) {
    if (!(sigma_t > 0.0))
        throw DomainError("fhs_var: sigma_t must be positive");
    if (z_window.empty())
        throw DomainError("fhs_var: empty residual window");
    return sigma_t * empirical_quantile(z_window, p);
}

/// VaR for every t in [m, T). GARCH-based methods read sigma_t and z_{t-m..t-1} from `fit`,
/// which must be filtered over the same series.
inline VarSeries rolling_var(const ReturnSeries& series, const garch::GarchFit* fit, const VarConfig& cfg) {
    cfg.validate();
    const auto T = series.size();
    if (T <= cfg.window)
        throw ConfigError("series of length " + std::to_string(T) + " too short for window " +
                          std::to_string(cfg.window));
    if (cfg.method != VarMethod::hs) {
        if (fit == nullptr)
            throw ConfigError(std::string(to_string(cfg.method)) + " VaR requires a GARCH fit");
        if (fit->sigma.size() != T || fit->z.size() != T)
            throw AlignmentError("GARCH fit has " + std::to_string(fit->sigma.size()) +
                                 " observations, series has " + std::to_string(T));
    }

    VarSeries out;
    out.method = cfg.method;
    out.level = cfg.level;
    const auto n = T - cfg.window;
    out.dates.assign(series.dates().begin() + static_cast<std::ptrdiff_t>(cfg.window), series.dates().end());
    out.realized.assign(series.values().begin() + static_cast<std::ptrdiff_t>(cfg.window), series.values().end());
    out.var.resize(n);

    // Phi^-1(p) is shared by every GARCH-N date
    const double zq = cfg.method == VarMethod::garch_normal ? norm_inv_cdf(cfg.level) : 0.0;
    for (std::size_t t = cfg.window; t < T; ++t) {
        double v = 0.0;
        switch (cfg.method) {
        case VarMethod::hs:
            v = hs_var(series.values(), t, cfg);
            break;
        case VarMethod::garch_normal:
            v = fit->sigma[t] * zq;
            break;
        case VarMethod::fhs:
            v = fhs_var(fit->sigma[t], window(std::span<const double>(fit->z), t, cfg.window), cfg.level);
            break;
        }
        out.var[t - cfg.window] = v;
    }
    return out;
}

inline VarSeries rolling_var(const ReturnSeries& series, const garch::GarchFit& fit, const VarConfig& cfg) {
    return rolling_var(series, &fit, cfg);
}

} // namespace risk
