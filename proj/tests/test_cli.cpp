#include <catch2/catch_amalgamated.hpp>

#include "cli.hpp"
#include "risk/risk.hpp"
#include "support.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace risk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("risk_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (err_text)
        *err_text = err.str();
    return rc;
}

std::string write_returns(const TempDir& dir, const std::string& name, const std::vector<double>& r) {
    const auto path = dir / name;
    std::ofstream f(path);
    write_csv(f, ReturnSeries::from_values(r));
    return path;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ','))
            cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

const std::vector<double>& sample_returns() {
    static const auto r = mc::simulate_garch({2e-6, 0.1, 0.85}, 1500, 2718);
    return r;
}

} // namespace

TEST_CASE("qq command", "[cli]") {
    TempDir dir;
    const auto in = write_returns(dir, "r.csv", sample_returns());
    REQUIRE(run({"qq", in, "--mean-match", "--out", dir / "qq.csv"}) == 0);
    auto rows = read_rows(dir / "qq.csv");
    REQUIRE(rows.size() == sample_returns().size() + 1);
    CHECK(rows[0] == std::vector<std::string>{"theoretical", "empirical"});
    // already sorted: re-sorting the reloaded points changes nothing
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 1; i < rows.size(); ++i)
        pts.emplace_back(std::stod(rows[i][0]), std::stod(rows[i][1]));
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == pts);
    CHECK(fs::exists(dir / "qq.csv.manifest.json"));

    REQUIRE(run({"qq", in, "--garch", "--out", dir / "qqz.csv"}) == 0);
    CHECK(read_rows(dir / "qqz.csv").size() == sample_returns().size() + 1);

    CHECK(run({"qq", in, "--out", dir / "x.csv"}) == cli::kConfigError);
    CHECK(run({"qq", dir / "missing.csv", "--mean-match", "--out", dir / "x.csv"}) == cli::kDataError);
}

TEST_CASE("var command", "[cli]") {
    TempDir dir;
    const auto in = write_returns(dir, "r.csv", sample_returns());
    REQUIRE(run({"var", in, "--method", "all", "--level", "0.05", "--window", "200", "--out", dir / "v05.csv"}) == 0);
    REQUIRE(run({"var", in, "--method", "all", "--level", "0.01", "--window", "200", "--out", dir / "v01.csv"}) == 0);
    auto r05 = read_rows(dir / "v05.csv");
    auto r01 = read_rows(dir / "v01.csv");
    CHECK(r05[0] == std::vector<std::string>{"date", "return", "var_hs", "var_garch_n", "var_fhs"});
    CHECK(r05.size() - 1 == sample_returns().size() - 200);
    for (std::size_t i = 1; i < r05.size(); ++i)
        for (std::size_t c = 2; c < 5; ++c)
            REQUIRE(std::stod(r01[i][c]) <= std::stod(r05[i][c]));

    REQUIRE(run({"var", in, "--method", "hs", "--out", dir / "hs.csv"}) == 0);
    CHECK(read_rows(dir / "hs.csv")[0].size() == 3);

    CHECK(run({"var", in, "--level", "0.7", "--out", dir / "bad.csv"}) == cli::kConfigError);
    CHECK(run({"var", in, "--window", "5000", "--out", dir / "bad.csv"}) == cli::kConfigError);
    CHECK(run({"var", in, "--method", "nope", "--out", dir / "bad.csv"}) == cli::kConfigError);
}

TEST_CASE("backtest command", "[cli]") {
    TempDir dir;
    const auto in = write_returns(dir, "r.csv", sample_returns());
    REQUIRE(run({"backtest", in, "--method", "fhs", "--level", "0.05", "--out", dir / "bt.json"}) == 0);
    auto j = nlohmann::json::parse(slurp(dir / "bt.json"));
    for (auto key : {"frequency", "lr_uc", "lr_ind", "lr_cc", "p_uc", "p_ind", "p_cc", "breach_count"})
        CHECK(j.contains(key));
    auto rows = read_rows(dir / "bt.breaches.csv");
    CHECK(rows.size() - 1 == sample_returns().size() - 200);
    std::size_t ones = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        ones += rows[i][1] == "1";
    CHECK(std::abs(static_cast<double>(ones) / (rows.size() - 1) - j["frequency"].get<double>()) <= 1e-15);
    CHECK(fs::exists(dir / "bt.json.manifest.json"));
    CHECK(fs::exists(dir / "bt.breaches.csv.manifest.json"));

    REQUIRE(run({"var", in, "--method", "fhs", "--out", dir / "v.csv"}) == 0);
    CHECK(read_rows(dir / "v.csv").size() == rows.size());
    CHECK(run({"backtest", in, "--method", "all", "--out", dir / "x.json"}) == cli::kConfigError);
}

TEST_CASE("mc command", "[cli]") {
    TempDir dir;
    const auto in = write_returns(dir, "r.csv", sample_returns());
    const std::vector<std::string> base{"mc", in, "--paths", "1000", "--horizon", "5", "--level", "0.01", "--seed", "42"};
    auto with_out = [&](const std::string& out) {
        auto a = base;
        a.push_back("--out");
        a.push_back(out);
        return a;
    };
    REQUIRE(run(with_out(dir / "a.csv")) == 0);
    REQUIRE(run(with_out(dir / "b.csv")) == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    auto rows = read_rows(dir / "a.csv");
    CHECK(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"horizon", "var", "es"});

    auto m = nlohmann::json::parse(slurp(dir / "a.csv.manifest.json"));
    CHECK(m["input_sha256"] == cli::sha256_file(in));
    CHECK(m["seed"] == 42);
    CHECK(m["command"] == "mc");

    CHECK(run({"mc", in, "--out", dir / "c.csv"}) == cli::kConfigError);
    CHECK(run({"mc", in, "--seed", "1", "--paths", "200", "--level", "0.01", "--out", dir / "c.csv"}) ==
          cli::kInfeasible);
    REQUIRE(run({"mc", in, "--seed", "3", "--innovation", "fhs", "--out", dir / "f.csv", "--json", dir / "f.json"}) ==
            0);
    auto j = nlohmann::json::parse(slurp(dir / "f.json"));
    CHECK(j["innovation"] == "fhs");
    CHECK(j["points"].size() == 5);
}

TEST_CASE("sha256 matches a known digest", "[cli]") {
    TempDir dir;
    {
        std::ofstream f(dir / "abc.txt", std::ios::binary);
        f << "abc";
    }
    CHECK(cli::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    if (std::system("command -v sha256sum > /dev/null 2>&1") == 0) {
        const auto in = write_returns(dir, "r.csv", sample_returns());
        const auto cmd = "sha256sum " + in + " > " + (dir / "digest.txt");
        REQUIRE(std::system(cmd.c_str()) == 0);
        CHECK(slurp(dir / "digest.txt").substr(0, 64) == cli::sha256_file(in));
    }
}

TEST_CASE("connectedness command", "[cli]") {
    TempDir dir;
    MultiSeries ms;
    ms.names = {"a", "b"};
    ms.columns = {testing::normal_sample(10000, 1), testing::normal_sample(10000, 2)};
    auto base = ReturnSeries::from_values(std::vector<double>(10000, 0.0));
    ms.dates.assign(base.dates().begin(), base.dates().end());
    {
        std::ofstream f(dir / "m.csv");
        write_multi_csv(f, ms);
    }
    REQUIRE(run({"connectedness", dir / "m.csv", "--order", "1", "--horizon", "10", "--out", dir / "c.csv"}) == 0);
    auto rows = read_rows(dir / "c.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"series", "a", "b", "from"});
    for (int j = 1; j <= 2; ++j)
        CHECK(std::abs(std::stod(rows[j][1]) + std::stod(rows[j][2]) - 1.0) <= 1e-9);
    CHECK(rows[5][0] == "tci");
    CHECK(std::stod(rows[5][1]) <= 5.0);

    auto edges = nlohmann::json::parse(slurp(dir / "c.edges.json"));
    REQUIRE(edges["edges"].size() == 2);
    for (auto& e : edges["edges"]) {
        const int to = e["to"] == "a" ? 1 : 2;
        const int from = e["from"] == "a" ? 1 : 2;
        CHECK(e["weight"].get<double>() == std::stod(rows[to][from]));
    }

    std::ofstream(dir / "one.csv") << "date,a\n2020-01-01,1\n";
    CHECK(run({"connectedness", dir / "one.csv", "--out", dir / "x.csv"}) == cli::kConfigError);
}

TEST_CASE("RISK_THREADS does not change mc output", "[cli]") {
    TempDir dir;
    const auto in = write_returns(dir, "r.csv", sample_returns());
    ::setenv("RISK_THREADS", "1", 1);
    REQUIRE(run({"mc", in, "--seed", "5", "--paths", "5000", "--out", dir / "t1.csv"}) == 0);
    ::setenv("RISK_THREADS", "8", 1);
    REQUIRE(run({"mc", in, "--seed", "5", "--paths", "5000", "--out", dir / "t8.csv"}) == 0);
    ::setenv("RISK_THREADS", "zero", 1);
    CHECK(run({"mc", in, "--seed", "5", "--out", dir / "bad.csv"}) == cli::kConfigError);
    ::unsetenv("RISK_THREADS");
    CHECK(slurp(dir / "t1.csv") == slurp(dir / "t8.csv"));
}
