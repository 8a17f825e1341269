#pragma once

// CSV and JSON exports for every result type. Numbers are written in shortest
// round-trip form so identical results always produce identical bytes.

#include "risk/backtest.hpp"
#include "risk/connectedness.hpp"
#include "risk/data.hpp"
#include "risk/garch.hpp"
#include "risk/mathstat.hpp"
#include "risk/montecarlo.hpp"
#include "risk/var_engine.hpp"

#include <json.hpp>

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace risk::report {

using nlohmann::ordered_json;

inline void write_qq_csv(std::ostream& out, std::span<const QQPoint> points) {
    out << "theoretical,empirical\n";
    for (const auto& p : points)
        out << format_double(p.theoretical) << ',' << format_double(p.empirical) << '\n';
}

/// Table layout `date,return,var_<method>...`; all series must come from the same source and window.
inline void write_var_csv(std::ostream& out, std::span<const VarSeries> series) {
    if (series.empty())
        throw ConfigError("write_var_csv: no VaR series");
    const auto& first = series.front();
    for (const auto& s : series)
        if (s.dates != first.dates || s.var.size() != first.var.size())
            throw AlignmentError("write_var_csv: VaR series are not aligned");
    out << "date,return";
    for (const auto& s : series) {
        std::string name(to_string(s.method));
        for (auto& c : name)
            if (c == '-')
                c = '_';
        out << ",var_" << name;
    }
    out << '\n';
    for (std::size_t i = 0; i < first.size(); ++i) {
        out << first.dates[i].iso() << ',' << format_double(first.realized[i]);
        for (const auto& s : series)
            out << ',' << format_double(s.var[i]);
        out << '\n';
    }
}

inline void write_breach_csv(std::ostream& out, const backtest::BreachSeries& b) {
    out << "date,indicator\n";
    for (std::size_t i = 0; i < b.size(); ++i)
        out << b.dates[i].iso() << ',' << static_cast<int>(b.indicator[i]) << '\n';
}

inline ordered_json to_json(const garch::GarchFit& fit) {
    return {{"omega", fit.params.omega},     {"alpha", fit.params.alpha}, {"beta", fit.params.beta},
            {"loglik", fit.loglik},          {"converged", fit.converged}, {"n_obs", fit.n_obs()}};
}

namespace detail {
inline void put_lr(ordered_json& j, const char* stat, const char* pval, const std::optional<backtest::LrResult>& r) {
    if (r) {
        j[stat] = r->stat;
        j[pval] = r->p_value;
    } else {
        j[stat] = nullptr;
        j[pval] = nullptr;
    }
}
} // namespace detail

/// Undefined statistics serialize as null.
inline ordered_json to_json(const backtest::CoverageReport& r) {
    ordered_json j;
    j["level"] = r.level;
    j["observations"] = r.observations;
    j["breach_count"] = r.breach_count;
    j["frequency"] = r.frequency;
    j["transitions"] = {{"n00", r.transitions.n00},
                        {"n01", r.transitions.n01},
                        {"n10", r.transitions.n10},
                        {"n11", r.transitions.n11}};
    detail::put_lr(j, "lr_uc", "p_uc", r.uc);
    detail::put_lr(j, "lr_ind", "p_ind", r.ind);
    detail::put_lr(j, "lr_cc", "p_cc", r.cc);
    return j;
}

/// Signed values: var and es are cumulative log-return quantiles (negative = loss).
inline void write_term_structure_csv(std::ostream& out, const mc::TermStructure& ts) {
    out << "horizon,var,es\n";
    for (const auto& p : ts.points)
        out << p.horizon << ',' << format_double(p.var) << ',' << format_double(p.es) << '\n';
}

inline ordered_json to_json(const mc::TermStructure& ts) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : ts.points)
        pts.push_back({{"horizon", p.horizon}, {"var", p.var}, {"es", p.es}});
    return {{"seed", ts.config.seed},
            {"n_paths", ts.n_paths},
            {"innovation", std::string(mc::to_string(ts.config.innovation))},
            {"level", ts.config.level},
            {"horizon", ts.config.horizon},
            {"sign_convention", "signed cumulative log return; negative values are losses"},
            {"points", std::move(pts)}};
}

/// Spillover table: normalized shares in the body, "from" (percent) as the last column,
/// then "to" and "net" rows (percent) and a final "tci" row.
inline void write_connectedness_csv(std::ostream& out, const connect::ConnectednessTable& t,
                                    std::span<const std::string> names) {
    const auto N = static_cast<std::size_t>(t.theta_tilde.rows());
    if (names.size() != N)
        throw AlignmentError("write_connectedness_csv: name count differs from table size");
    out << "series";
    for (const auto& n : names)
        out << ',' << n;
    out << ",from\n";
    for (std::size_t j = 0; j < N; ++j) {
        out << names[j];
        for (std::size_t k = 0; k < N; ++k)
            out << ',' << format_double(t.theta_tilde(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
        out << ',' << format_double(t.from_others(static_cast<Eigen::Index>(j))) << '\n';
    }
    out << "to";
    for (std::size_t k = 0; k < N; ++k)
        out << ',' << format_double(t.to_others(static_cast<Eigen::Index>(k)));
    out << ",\nnet";
    for (std::size_t k = 0; k < N; ++k)
        out << ',' << format_double(t.net(static_cast<Eigen::Index>(k)));
    out << ",\ntci," << format_double(t.tci) << '\n';
}

/// Directed edges k -> j weighted by the share of j's forecast variance due to k.
inline ordered_json edge_list(const connect::ConnectednessTable& t, std::span<const std::string> names) {
    const auto N = t.theta_tilde.rows();
    if (names.size() != static_cast<std::size_t>(N))
        throw AlignmentError("edge_list: name count differs from table size");
    ordered_json edges = ordered_json::array();
    for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index k = 0; k < N; ++k)
            if (j != k)
                edges.push_back({{"from", names[static_cast<std::size_t>(k)]},
                                 {"to", names[static_cast<std::size_t>(j)]},
                                 {"weight", t.theta_tilde(j, k)}});
    return {{"horizon", t.horizon}, {"tci", t.tci}, {"edges", std::move(edges)}};
}

} // namespace risk::report
