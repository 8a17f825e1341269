#pragma once

#include "risk/error.hpp"
#include "risk/garch.hpp"
#include "risk/mathstat.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace risk::mc {

enum class Innovation { normal, fhs_bootstrap };

inline std::string_view to_string(Innovation i) {
    return i == Innovation::normal ? "normal" : "fhs";
}

inline Innovation parse_innovation(std::string_view s) {
    if (s == "normal") return Innovation::normal;
    if (s == "fhs" || s == "fhs_bootstrap") return Innovation::fhs_bootstrap;
    throw ConfigError("unknown innovation '" + std::string(s) + "'");
}

struct McConfig {
    std::size_t n_paths = 1000;
    std::size_t horizon = 5;
    double level = 0.01;
    std::uint64_t seed = 0;
    Innovation innovation = Innovation::normal;

    void validate() const {
        if (n_paths < 100)
            throw ConfigError("n_paths must be at least 100, got " + std::to_string(n_paths));
        if (horizon < 1 || horizon > 250)
            throw ConfigError("horizon must lie in [1, 250], got " + std::to_string(horizon));
        if (!(level > 0.0 && level < 0.5))
            throw ConfigError("level must lie in (0, 0.5), got " + std::to_string(level));
    }
};

/// Row-major [n_paths x horizon]; at(i, h-1) is path i's cumulative log return through step h.
class CumulativeMatrix {
public:
    CumulativeMatrix(std::size_t paths, std::size_t horizon) : paths_(paths), horizon_(horizon), data_(paths * horizon) {}

    [[nodiscard]] std::size_t paths() const noexcept { return paths_; }
    [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
    [[nodiscard]] double& at(std::size_t path, std::size_t step) { return data_[path * horizon_ + step]; }
    [[nodiscard]] double at(std::size_t path, std::size_t step) const { return data_[path * horizon_ + step]; }
    [[nodiscard]] std::span<double> row(std::size_t path) { return {data_.data() + path * horizon_, horizon_}; }

    [[nodiscard]] std::vector<double> column(std::size_t step) const {
        std::vector<double> c(paths_);
        for (std::size_t i = 0; i < paths_; ++i)
            c[i] = at(i, step);
        return c;
    }

    friend bool operator==(const CumulativeMatrix&, const CumulativeMatrix&) = default;

private:
    std::size_t paths_;
    std::size_t horizon_;
    std::vector<double> data_;
};

struct TermPoint {
    std::size_t horizon;
    double var;
    double es;
};

struct TermStructure {
    std::vector<TermPoint> points;
    McConfig config;
    std::size_t n_paths = 0;
};

/// splitmix64 finaliser.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent generator for one path; depends only on (seed, path index).
inline std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
    return std::mt19937_64(mix64(seed ^ mix64(path)));
}

namespace detail {

inline void simulate_path(const garch::GarchParams& params, double sigma2_next, std::span<const double> pool,
                          Innovation innov, std::uint64_t seed, std::size_t path, std::span<double> out) {
    auto rng = path_stream(seed, path);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, pool.empty() ? 0 : pool.size() - 1);
    double v = sigma2_next;
    double cum = 0.0;
    for (std::size_t h = 0; h < out.size(); ++h) {
        const double z = innov == Innovation::normal ? normal(rng) : pool[pick(rng)];
        const double r = std::sqrt(v) * z;
        cum += r;
        out[h] = cum;
        v = garch::next_variance(params, r, v);
    }
}

} // namespace detail

/// Number of workers, clamped to [1, n_paths]. 0 selects hardware concurrency.
inline std::size_t resolve_workers(std::size_t requested, std::size_t n_paths) {
    std::size_t w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(n_paths, 1));
}

/// Simulates cumulative returns from the end of the fitted sample. Each path owns its RNG
/// stream, so the result does not depend on `workers`.
inline CumulativeMatrix simulate_cumulative(const garch::GarchFit& fit, const McConfig& cfg, std::size_t workers = 1) {
    cfg.validate();
    fit.params.validate();
    if (cfg.innovation == Innovation::fhs_bootstrap && fit.z.empty())
        throw DataError("FHS bootstrap needs a nonempty residual pool");
    if (fit.sigma.empty() || fit.sigma.size() != fit.z.size())
        throw AlignmentError("GARCH fit has no aligned sigma/z history");

    // anchor on the last in-sample return r_T = sigma_T * z_T and its filtered variance
    const double last_sigma = fit.sigma.back();
    const double last_return = last_sigma * fit.z.back();
    const double sigma2_next = garch::next_variance(fit.params, last_return, last_sigma * last_sigma);
    std::span<const double> pool(fit.z);

    CumulativeMatrix m(cfg.n_paths, cfg.horizon);
    const auto nw = resolve_workers(workers, cfg.n_paths);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            detail::simulate_path(fit.params, sigma2_next, pool, cfg.innovation, cfg.seed, i, m.row(i));
    };
    if (nw == 1) {
        run(0, cfg.n_paths);
    } else {
        std::vector<std::jthread> pool_threads;
        const std::size_t chunk = (cfg.n_paths + nw - 1) / nw;
        for (std::size_t b = 0; b < cfg.n_paths; b += chunk)
            pool_threads.emplace_back(run, b, std::min(b + chunk, cfg.n_paths));
    }
    return m;
}

/// Per-horizon lower empirical quantile and mean of the k = ceil(p * n) worst paths.
inline TermStructure term_structure(const CumulativeMatrix& cum, double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ConfigError("level must lie in (0,1)");
    if (static_cast<double>(cum.paths()) * p < 5.0 - 1e-9)
        throw InfeasibleError("tail holds fewer than 5 paths (n_paths * level = " +
                              std::to_string(static_cast<double>(cum.paths()) * p) + ")");
    TermStructure ts;
    ts.n_paths = cum.paths();
    ts.config.level = p;
    ts.config.n_paths = cum.paths();
    ts.config.horizon = cum.horizon();
    const auto k = risk::detail::lower_rank(p, cum.paths());
    for (std::size_t h = 0; h < cum.horizon(); ++h) {
        auto col = cum.column(h);
        std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(k - 1), col.end());
        const double var = col[k - 1];
        // nth_element leaves the k-1 smaller values in front
        double tail = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            tail += col[i];
        const double es = std::min(tail / static_cast<double>(k), var);
        ts.points.push_back({h + 1, var, es});
    }
    return ts;
}

/// Simulates T returns r_t = sigma_t * z_t from the GARCH(1,1) recursion, starting at the
/// unconditional variance. `draw(rng)` supplies unit-variance innovations.
template <class Draw>
std::vector<double> simulate_garch(const garch::GarchParams& params, std::size_t T, std::uint64_t seed, Draw&& draw,
                                   std::size_t burn_in = 500) {
    params.validate();
    auto rng = path_stream(seed, ~std::uint64_t{0});
    double v = params.unconditional_variance();
    std::vector<double> r;
    r.reserve(T);
    for (std::size_t t = 0; t < T + burn_in; ++t) {
        const double x = std::sqrt(v) * draw(rng);
        if (t >= burn_in)
            r.push_back(x);
        v = garch::next_variance(params, x, v);
    }
    return r;
}

inline std::vector<double> simulate_garch(const garch::GarchParams& params, std::size_t T, std::uint64_t seed) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return simulate_garch(params, T, seed, [&](auto& rng) { return normal(rng); });
}

inline TermStructure run_mc(const garch::GarchFit& fit, const McConfig& cfg, std::size_t workers = 1) {
    auto ts = term_structure(simulate_cumulative(fit, cfg, workers), cfg.level);
    ts.config = cfg;
    return ts;
}

} // namespace risk::mc
