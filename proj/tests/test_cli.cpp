#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli_env(const std::string& env, const std::string& args) {
    const std::string cmd = env + " " + QCUT_CLI_PATH + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

RunResult run_cli(const std::string& args) { return run_cli_env("", args); }

std::string line_with(const std::string& text, const std::string& prefix) {
    const auto pos = text.find(prefix);
    if (pos == std::string::npos) return {};
    return text.substr(pos + prefix.size(), text.find('\n', pos) - pos - prefix.size());
}

}  // namespace

TEST(Cli, EstimatePureReportsTarget) {
    const auto r = run_cli("estimate --n 3 --m 2 --mode pure --samples 20000 --seed 5");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["analytic_target"].get<double>(), 0.75);
    EXPECT_LT(std::abs(j["z_score"].get<double>()), 5.0);
    EXPECT_EQ(j["estimate"]["samples"], 20000);
}

TEST(Cli, FullDimensionIsExact) {
    const auto r = run_cli("estimate --n 2 --m 2 --mode pure --samples 1000 --seed 3");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["estimate"]["mean"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(j["z_score"].get<double>(), 0.0);
}

TEST(Cli, SameSeedIsByteIdenticalApartFromTiming) {
    const std::string args = "estimate --n 4 --m 2 --r 2 --mode entangled --samples 5000 --seed 77";
    auto a = nlohmann::json::parse(run_cli(args + " --threads 1").out);
    auto b = nlohmann::json::parse(run_cli(args + " --threads 3").out);
    a.erase("wall_time_seconds");
    b.erase("wall_time_seconds");
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Cli, SeedFromEnvironment) {
    const std::string args = "estimate --n 3 --m 2 --mode pure --samples 2000";
    const auto a = nlohmann::json::parse(run_cli(args + " --seed 9").out);
    const auto b = nlohmann::json::parse(run_cli_env("QCUT_SEED=9", args).out);
    EXPECT_EQ(a["estimate"]["mean"], b["estimate"]["mean"]);
    EXPECT_EQ(b["config"]["seed"], 9);
}

TEST(Cli, CsvFormat) {
    const auto r = run_cli("estimate --n 3 --m 2 --mode pure --method analytic --samples 1 --format csv");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("n,m,r,mode,method"), std::string::npos);
    EXPECT_NE(r.out.find("3,2,1,pure,analytic,1,"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("estimate --n 3").code, 2);
    EXPECT_EQ(run_cli("estimate --n 2 --m 3 --mode pure --samples 10").code, 2);
    EXPECT_EQ(run_cli("estimate --n 3 --m 2 --r 2 --mode pure --samples 10").code, 2);
    EXPECT_EQ(run_cli("frobnicate").code, 2);
    EXPECT_EQ(run_cli("verify --max-n 4").code, 0);
    EXPECT_EQ(run_cli("verify --max-n 4 --perturb-normalization 0.5").code, 1);
}

TEST(Cli, TableRows) {
    const auto r = run_cli("table --n-max 3 --r 2");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("n,m,r,fidelity\n", 0), 0u);
    EXPECT_NE(r.out.find("3,2,2,0.714285714286\n"), std::string::npos);
    EXPECT_NE(r.out.find("2,1,2,0.600000000000\n"), std::string::npos);
    EXPECT_NE(r.out.find("3,3,2,1.000000000000\n"), std::string::npos);
    const auto est = run_cli("table --n-max 4 --what state-estimation");
    EXPECT_NE(est.out.find("4,2,1,0.300000000000\n"), std::string::npos);
    EXPECT_NE(est.out.find("2,1,1,0.666666666667\n"), std::string::npos);
}

TEST(Cli, TeleportDemoFidelitiesAgree) {
    for (const char* extra : {"", " --store"}) {
        const auto r = run_cli(std::string("teleport-demo --n 4 --m 2 --r 2 --seed 11") + extra);
        ASSERT_EQ(r.code, 0) << r.out;
        const std::string cut = line_with(r.out, "cut fidelity: ");
        ASSERT_FALSE(cut.empty()) << r.out;
        EXPECT_NEAR(std::stod(line_with(r.out, "end-to-end fidelity: ")), std::stod(cut), 1e-12);
        EXPECT_NEAR(std::stod(line_with(r.out, "normalization * probability: ")), std::stod(cut), 1e-12);
    }
    EXPECT_NE(run_cli("teleport-demo --n 4 --m 2 --seed 1").out.find("classical message: a="), std::string::npos);
}
