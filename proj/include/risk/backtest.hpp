#pragma once

#include "risk/data.hpp"
#include "risk/error.hpp"
#include "risk/mathstat.hpp"
#include "risk/var_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace risk::backtest {

struct BreachSeries {
    std::vector<Date> dates;
    std::vector<std::uint8_t> indicator;

    [[nodiscard]] std::size_t size() const noexcept { return indicator.size(); }
};

struct TransitionCounts {
    std::size_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;

    [[nodiscard]] std::size_t total() const noexcept { return n00 + n01 + n10 + n11; }
    friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;
};

struct LrResult {
    double stat = 0.0;
    double p_value = 1.0;
};

/// Undefined statistics are std::nullopt: the test cannot be evaluated on this sample.
struct CoverageReport {
    double level = 0.0;
    std::size_t observations = 0;
    std::size_t breach_count = 0;
    double frequency = 0.0;
    TransitionCounts transitions;
    std::optional<LrResult> uc;
    std::optional<LrResult> ind;
    std::optional<LrResult> cc;
};

/// I_t = 1 iff realized_t < var_t. Ties are not breaches.
inline BreachSeries breaches(const VarSeries& vs) {
    if (vs.realized.size() != vs.var.size() || vs.dates.size() != vs.var.size())
        throw AlignmentError("VaR series has misaligned realized/var/date columns");
    BreachSeries b;
    b.dates = vs.dates;
    b.indicator.resize(vs.var.size());
    for (std::size_t i = 0; i < vs.var.size(); ++i)
        b.indicator[i] = vs.realized[i] < vs.var[i] ? 1 : 0;
    return b;
}

inline double breach_frequency(std::span<const std::uint8_t> indicator) {
    if (indicator.empty())
        throw DomainError("breach_frequency: empty indicator series");
    std::size_t s = 0;
    for (auto v : indicator)
        s += v;
    return static_cast<double>(s) / static_cast<double>(indicator.size());
}

inline double breach_frequency(const BreachSeries& b) { return breach_frequency(b.indicator); }

inline TransitionCounts transition_counts(std::span<const std::uint8_t> indicator) {
    if (indicator.size() < 2)
        throw DomainError("transition_counts: need at least two indicators");
    TransitionCounts c;
    for (std::size_t t = 1; t < indicator.size(); ++t) {
        const bool prev = indicator[t - 1] != 0, cur = indicator[t] != 0;
        if (!prev && !cur) ++c.n00;
        else if (!prev && cur) ++c.n01;
        else if (prev && !cur) ++c.n10;
        else ++c.n11;
    }
    return c;
}

inline TransitionCounts transition_counts(const BreachSeries& b) { return transition_counts(b.indicator); }

namespace detail {

/// n * ln(p) with 0 * ln 0 = 0.
inline double xlogy(double n, double p) {
    return n == 0.0 ? 0.0 : n * std::log(p);
}

inline double clamp_stat(double s) {
    return (s <= 0.0 && s > -1e-12) ? 0.0 : s;
}

} // namespace detail

/// Christoffersen independence test: first-order Markov alternative against i.i.d. Bernoulli.
inline std::optional<LrResult> lr_independence(const TransitionCounts& c) {
    if (c.total() == 0)
        throw DomainError("lr_independence: no transitions");
    if (c.n00 + c.n01 == 0 || c.n10 + c.n11 == 0)
        return std::nullopt;
    const double n00 = static_cast<double>(c.n00), n01 = static_cast<double>(c.n01);
    const double n10 = static_cast<double>(c.n10), n11 = static_cast<double>(c.n11);
    const double p = (n01 + n11) / static_cast<double>(c.total());
    const double pi0 = n01 / (n00 + n01);
    const double pi1 = n11 / (n10 + n11);

    using detail::xlogy;
    const double ln_l0 = xlogy(n00 + n10, 1.0 - p) + xlogy(n01 + n11, p);
    const double ln_l1 = xlogy(n00, 1.0 - pi0) + xlogy(n01, pi0) + xlogy(n10, 1.0 - pi1) + xlogy(n11, pi1);
    const double stat = detail::clamp_stat(-2.0 * (ln_l0 - ln_l1));
    return LrResult{stat, chi2_sf(std::max(stat, 0.0), 1)};
}

/// Kupiec proportion-of-failures test of breach_count out of T against nominal alpha.
inline LrResult lr_unconditional(std::size_t breach_count, std::size_t T, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("lr_unconditional: alpha must lie in (0,1)");
    if (T == 0 || breach_count > T)
        throw DomainError("lr_unconditional: need 0 <= breach_count <= T and T >= 1");
    const double x = static_cast<double>(breach_count);
    const double n = static_cast<double>(T);
    const double phat = x / n;
    using detail::xlogy;
    const double ln_null = xlogy(n - x, 1.0 - alpha) + xlogy(x, alpha);
    const double ln_alt = xlogy(n - x, 1.0 - phat) + xlogy(x, phat);
    const double stat = detail::clamp_stat(-2.0 * (ln_null - ln_alt));
    return {stat, chi2_sf(std::max(stat, 0.0), 1)};
}

/// Conditional coverage: LR_uc + LR_ind against chi2(2).
inline std::optional<LrResult> lr_conditional(const std::optional<LrResult>& uc, const std::optional<LrResult>& ind) {
    if (!uc || !ind)
        return std::nullopt;
    const double s = uc->stat + ind->stat;
    return LrResult{s, chi2_sf(s, 2)};
}

inline CoverageReport coverage_report(const BreachSeries& b, double level) {
    CoverageReport r;
    r.level = level;
    r.observations = b.size();
    for (auto v : b.indicator)
        r.breach_count += v;
    r.frequency = breach_frequency(b);
    r.uc = lr_unconditional(r.breach_count, r.observations, level);
    if (b.size() >= 2) {
        r.transitions = transition_counts(b);
        r.ind = lr_independence(r.transitions);
    }
    r.cc = lr_conditional(r.uc, r.ind);
    return r;
}

} // namespace risk::backtest
