#include "cli.hpp"

#include "risk/risk.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace risk::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Non-convergence of a required fit.
struct FitFailure : Error {
    using Error::Error;
};

struct InputOptions {
    std::string path;
    std::string date_column = "date";
    std::string value_column = "return";
    bool prices = false;
};

void add_input(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("input", in.path, "Input CSV")->required();
    cmd->add_option("--date-column", in.date_column, "Date column name")->capture_default_str();
    cmd->add_option("--value-column", in.value_column, "Value column name")->capture_default_str();
    cmd->add_flag("--prices", in.prices, "Values are prices; convert to log returns");
}

ReturnSeries load_returns(const InputOptions& in) {
    CsvSchema schema{in.date_column, in.value_column, in.prices ? ValueKind::price : ValueKind::returns};
    auto s = load_csv(in.path, schema);
    return in.prices ? to_log_returns(s) : s;
}

ordered_json input_json(const InputOptions& in) {
    return {{"date_column", in.date_column}, {"value_column", in.value_column}, {"prices", in.prices}};
}

garch::GarchFit fit_or_fail(std::span<const double> r) {
    auto f = garch::fit(r);
    if (!f.converged)
        throw FitFailure("GARCH(1,1) fit did not converge after " + std::to_string(f.iterations) + " iterations");
    return f;
}

std::size_t worker_count() {
    const char* env = std::getenv("RISK_THREADS");
    if (env == nullptr || *env == '\0')
        return 0;
    try {
        std::size_t pos = 0;
        const long v = std::stol(env, &pos);
        if (pos != std::strlen(env) || v < 1)
            throw ConfigError("");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(std::string("RISK_THREADS must be a positive integer, got '") + env + "'");
    }
}

fs::path sibling(const std::string& out, const std::string& suffix) {
    fs::path p(out);
    return p.parent_path() / (p.stem().string() + suffix);
}

template <class Writer>
void write_file(const fs::path& path, Writer&& w) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw ConfigError("cannot write '" + path.string() + "'");
    w(f);
    if (!f)
        throw ConfigError("failed writing '" + path.string() + "'");
}

/// Writes `<output>.manifest.json` next to an output file. Contains no timestamps or
/// absolute output paths, so repeated runs produce identical bytes.
void write_manifest(const fs::path& output, const std::string& command, const ordered_json& config,
                    const std::string& input, std::optional<std::uint64_t> seed) {
    ordered_json m;
    m["command"] = command;
    m["output"] = output.filename().string();
    m["config"] = config;
    m["input"] = fs::path(input).filename().string();
    m["input_sha256"] = sha256_file(input);
    m["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
    m["tool_version"] = kToolVersion;
    write_file(fs::path(output.string() + ".manifest.json"), [&](std::ostream& o) { o << m.dump(2) << '\n'; });
}

void write_json(const fs::path& path, const ordered_json& j) {
    write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

std::vector<VarMethod> parse_methods(const std::string& s, bool allow_all) {
    if (s == "all") {
        if (!allow_all)
            throw ConfigError("--method all is not supported here");
        return {VarMethod::hs, VarMethod::garch_normal, VarMethod::fhs};
    }
    return {parse_var_method(s)};
}

} // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw DataError("cannot open '" + path + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 initialisation failed");
    char buf[1 << 16];
    while (f.read(buf, sizeof buf) || f.gcount() > 0)
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(f.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Market-risk engine: VaR, ES, backtests and connectedness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // qq
    InputOptions qq_in;
    std::string qq_out;
    bool qq_mean = false, qq_garch = false;
    auto* qq = app.add_subcommand("qq", "QQ points of returns or GARCH residuals against the normal");
    add_input(qq, qq_in);
    auto* mm = qq->add_flag("--mean-match", qq_mean, "Raw returns vs normal with matched mean and sd");
    auto* gz = qq->add_flag("--garch", qq_garch, "GARCH standardized residuals vs N(0,1)");
    mm->excludes(gz);
    qq->add_option("--out", qq_out, "Output CSV")->required();

    // fit
    InputOptions fit_in;
    std::string fit_out;
    auto* fitc = app.add_subcommand("fit", "Fit GARCH(1,1) and write parameters as JSON");
    add_input(fitc, fit_in);
    fitc->add_option("--out", fit_out, "Output JSON")->required();

    // var
    InputOptions var_in;
    std::string var_method = "all", var_out;
    double var_level = 0.05;
    std::size_t var_window = 200;
    auto* varc = app.add_subcommand("var", "Rolling one-day VaR");
    add_input(varc, var_in);
    varc->add_option("--method", var_method, "hs | garch-n | fhs | all")->capture_default_str();
    varc->add_option("--level", var_level, "Tail probability")->capture_default_str();
    varc->add_option("--window", var_window, "Rolling window length")->capture_default_str();
    varc->add_option("--out", var_out, "Output CSV")->required();

    // backtest
    InputOptions bt_in;
    std::string bt_method = "fhs", bt_out, bt_breaches;
    double bt_level = 0.05;
    std::size_t bt_window = 200;
    auto* btc = app.add_subcommand("backtest", "Breach frequency and coverage/independence LR tests");
    add_input(btc, bt_in);
    btc->add_option("--method", bt_method, "hs | garch-n | fhs")->capture_default_str();
    btc->add_option("--level", bt_level, "Tail probability")->capture_default_str();
    btc->add_option("--window", bt_window, "Rolling window length")->capture_default_str();
    btc->add_option("--out", bt_out, "Output JSON report")->required();
    btc->add_option("--breaches", bt_breaches, "Breach indicator CSV (default: <out stem>.breaches.csv)");

    // mc
    InputOptions mc_in;
    std::string mc_innov = "normal", mc_out, mc_json;
    std::size_t mc_paths = 1000, mc_horizon = 5;
    double mc_level = 0.01;
    std::optional<std::uint64_t> mc_seed;
    auto* mcc = app.add_subcommand("mc", "Multi-day Monte Carlo VaR/ES under GARCH dynamics");
    add_input(mcc, mc_in);
    mcc->add_option("--innovation", mc_innov, "normal | fhs")->capture_default_str();
    mcc->add_option("--paths", mc_paths, "Number of simulated paths")->capture_default_str();
    mcc->add_option("--horizon", mc_horizon, "Days to simulate")->capture_default_str();
    mcc->add_option("--level", mc_level, "Tail probability")->capture_default_str();
    mcc->add_option("--seed", mc_seed, "RNG seed (mandatory)");
    mcc->add_option("--out", mc_out, "Output CSV (horizon,var,es)")->required();
    mcc->add_option("--json", mc_json, "Optional JSON copy of the term structure");

    // connectedness
    std::string cn_input, cn_date = "date", cn_out, cn_edges;
    std::size_t cn_order = 1, cn_horizon = 10;
    auto* cnc = app.add_subcommand("connectedness", "VAR-based GFEVD spillover table");
    cnc->add_option("input", cn_input, "Multi-column CSV (date + one column per series)")->required();
    cnc->add_option("--date-column", cn_date, "Date column name")->capture_default_str();
    cnc->add_option("--order", cn_order, "VAR lag order")->capture_default_str();
    cnc->add_option("--horizon", cn_horizon, "Forecast horizon H")->capture_default_str();
    cnc->add_option("--out", cn_out, "Output table CSV")->required();
    cnc->add_option("--edges", cn_edges, "Edge list JSON (default: <out stem>.edges.json)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*qq) {
            if (!qq_mean && !qq_garch)
                throw ConfigError("qq needs --mean-match or --garch");
            const auto r = load_returns(qq_in);
            std::vector<QQPoint> pts;
            if (qq_mean) {
                pts = qq_points(r.values(), mean(r.values()), std::sqrt(sample_variance(r.values())));
            } else {
                const auto f = fit_or_fail(r.values());
                pts = qq_points(f.z, 0.0, 1.0);
            }
            write_file(qq_out, [&](std::ostream& o) { report::write_qq_csv(o, pts); });
            auto cfg = input_json(qq_in);
            cfg["mode"] = qq_mean ? "mean-match" : "garch";
            write_manifest(qq_out, "qq", cfg, qq_in.path, std::nullopt);
        } else if (*fitc) {
            const auto r = load_returns(fit_in);
            const auto f = fit_or_fail(r.values());
            write_json(fit_out, report::to_json(f));
            write_manifest(fit_out, "fit", input_json(fit_in), fit_in.path, std::nullopt);
        } else if (*varc) {
            const auto methods = parse_methods(var_method, true);
            VarConfig base{var_level, var_window, VarMethod::hs};
            base.validate();
            const auto r = load_returns(var_in);
            std::optional<garch::GarchFit> f;
            std::vector<VarSeries> series;
            for (auto m : methods) {
                if (m != VarMethod::hs && !f)
                    f = fit_or_fail(r.values());
                auto cfg = base;
                cfg.method = m;
                series.push_back(rolling_var(r, f ? &*f : nullptr, cfg));
            }
            write_file(var_out, [&](std::ostream& o) { report::write_var_csv(o, series); });
            auto cfg = input_json(var_in);
            cfg["method"] = var_method;
            cfg["level"] = var_level;
            cfg["window"] = var_window;
            write_manifest(var_out, "var", cfg, var_in.path, std::nullopt);
        } else if (*btc) {
            const auto m = parse_methods(bt_method, false).front();
            VarConfig vc{bt_level, bt_window, m};
            vc.validate();
            const auto r = load_returns(bt_in);
            std::optional<garch::GarchFit> f;
            if (m != VarMethod::hs)
                f = fit_or_fail(r.values());
            const auto vs = rolling_var(r, f ? &*f : nullptr, vc);
            const auto b = backtest::breaches(vs);
            auto rep = report::to_json(backtest::coverage_report(b, bt_level));
            ordered_json j{{"method", std::string(to_string(m))}, {"window", bt_window}};
            j.update(rep);
            const fs::path breach_path = bt_breaches.empty() ? sibling(bt_out, ".breaches.csv") : fs::path(bt_breaches);
            write_json(bt_out, j);
            write_file(breach_path, [&](std::ostream& o) { report::write_breach_csv(o, b); });
            auto cfg = input_json(bt_in);
            cfg["method"] = std::string(to_string(m));
            cfg["level"] = bt_level;
            cfg["window"] = bt_window;
            write_manifest(bt_out, "backtest", cfg, bt_in.path, std::nullopt);
            write_manifest(breach_path, "backtest", cfg, bt_in.path, std::nullopt);
        } else if (*mcc) {
            if (!mc_seed)
                throw ConfigError("--seed is mandatory for mc");
            mc::McConfig cfg{mc_paths, mc_horizon, mc_level, *mc_seed, mc::parse_innovation(mc_innov)};
            cfg.validate();
            const auto workers = worker_count();
            const auto r = load_returns(mc_in);
            const auto f = fit_or_fail(r.values());
            const auto ts = mc::run_mc(f, cfg, workers);
            auto mcfg = input_json(mc_in);
            mcfg["innovation"] = std::string(mc::to_string(cfg.innovation));
            mcfg["paths"] = cfg.n_paths;
            mcfg["horizon"] = cfg.horizon;
            mcfg["level"] = cfg.level;
            mcfg["garch"] = report::to_json(f);
            write_file(mc_out, [&](std::ostream& o) { report::write_term_structure_csv(o, ts); });
            write_manifest(mc_out, "mc", mcfg, mc_in.path, cfg.seed);
            if (!mc_json.empty()) {
                write_json(mc_json, report::to_json(ts));
                write_manifest(mc_json, "mc", mcfg, mc_in.path, cfg.seed);
            }
        } else if (*cnc) {
            const auto data = load_multi_csv(cn_input, cn_date);
            if (data.cols() < 2)
                throw ConfigError("connectedness needs at least two series");
            if (cn_horizon < 1)
                throw ConfigError("--horizon must be at least 1");
            const auto model = connect::fit_var(data, cn_order);
            const auto table = connect::connectedness(model, cn_horizon);
            const fs::path edges = cn_edges.empty() ? sibling(cn_out, ".edges.json") : fs::path(cn_edges);
            write_file(cn_out, [&](std::ostream& o) { report::write_connectedness_csv(o, table, data.names); });
            write_json(edges, report::edge_list(table, data.names));
            ordered_json cfg{{"date_column", cn_date}, {"order", cn_order}, {"horizon", cn_horizon}};
            write_manifest(cn_out, "connectedness", cfg, cn_input, std::nullopt);
            write_manifest(edges, "connectedness", cfg, cn_input, std::nullopt);
        }
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const FitFailure& e) {
        err << "fit error: " << e.what() << '\n';
        return kFitError;
    } catch (const EstimationError& e) {
        err << "fit error: " << e.what() << '\n';
        return kFitError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const AlignmentError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const WindowError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}

} // namespace risk::cli
