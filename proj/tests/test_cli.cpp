#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "support.hpp"

using namespace slt;
using json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SLT_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string config(const std::string& name) { return std::string(SLT_CONFIG_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = ::testing::TempDir() + name;
    std::ofstream(path) << body;
    return path;
}

} // namespace

TEST(Cli, DeriveAknsText) {
    const auto r = run("derive-akns --format text");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("i*q_t = q^2*r - 1/2*q_xx"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("i*r_t = -q*r^2 + 1/2*r_xx"), std::string::npos) << r.out;
}

TEST(Cli, DeriveAknsJsonMatchesLibrary) {
    const auto r = run("derive-akns");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    const auto rep = akns_reduce();
    EXPECT_EQ(DiffPoly::from_json(j.at("pde_q")), rep.pde_q);
    EXPECT_EQ(DiffPoly::from_json(j.at("pde_r")), rep.pde_r);
}

TEST(Cli, TrivialSolve) {
    const auto r = run("solve --config " + config("trivial.json"));
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("diagnostics").at("factorization_residual").get<double>(), 0.0);
    const auto frame = CommutativeFrame::diagonal(2);
    const auto u = LoopSeries<Complex>::from_json(j.at("solution").at("U").at(0));
    const auto w = LoopSeries<Complex>::from_json(j.at("solution").at("W").at(0));
    for (int k = u.window().lo; k <= u.window().hi; ++k)
        EXPECT_EQ(u.coeff(k), k == 0 ? frame.E_as<Complex>(1) : Matrix<Complex>(2)) << k;
    for (int k = w.window().lo; k <= w.window().hi; ++k)
        EXPECT_EQ(w.coeff(k), k == -1 ? frame.E_as<Complex>(1) : Matrix<Complex>(2)) << k;
}

TEST(Cli, VerifyRandomConfig) {
    const auto r = run("verify --config " + config("random.json") + " --checks lax:1,1 lax:2,1 zc:-1,1:1,1");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = json::parse(r.out);
    for (const auto* label : {"lax:1,1", "lax:2,1", "zc:-1,1:1,1"}) {
        const auto& c = j.at("checks").at(label);
        EXPECT_EQ(c.at("status"), "pass") << label;
        EXPECT_LE(c.at("max_norm").get<double>(), 1e-6) << label;
    }
    EXPECT_EQ(j.at("inconclusive"), 0);
}

TEST(Cli, DeterministicOutput) {
    const auto a = run("solve --config " + config("random.json"));
    const auto b = run("solve --config " + config("random.json"));
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const auto c = run("solve --n 3 --seed 42");
    const auto d = run("solve --n 3 --seed 42");
    const auto e = run("solve --n 3 --seed 43");
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(c.out, d.out);
    EXPECT_NE(c.out, e.out);
}

TEST(Cli, ProvenanceRoundTrip) {
    for (const auto* cfg : {"random.json", "random_n3.json", "trivial.json"}) {
        const auto s = run("solve --config " + config(cfg));
        ASSERT_EQ(s.code, 0) << cfg;
        const auto path = write_temp("solve_out.json", s.out);
        const auto v = run("verify --config " + path + " --checks lax:1,1");
        ASSERT_EQ(v.code, 0) << cfg;
        EXPECT_EQ(json::parse(s.out).at("provenance").at("hash"), json::parse(v.out).at("provenance").at("hash")) << cfg;
    }
    const auto base = run("solve --config " + config("random.json"));
    const auto other = run("solve --config " + config("random.json") + " --depth-M 14");
    EXPECT_NE(json::parse(base.out).at("provenance"), json::parse(other.out).at("provenance"));
}

TEST(Cli, TextSolveHasAlignedColumns) {
    const auto r = run("solve --config " + config("random.json") + " --format text");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("U_1  window [-12, 0]"), std::string::npos);
    EXPECT_NE(r.out.find("W_1  window"), std::string::npos);
    // Within one series every row has the same width.
    std::size_t width = 0;
    bool in_u = false;
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("U_1", 0) == 0) {
            in_u = true;
            continue;
        }
        if (!in_u) continue;
        if (line.rfind("  z^", 0) != 0) break;
        if (width == 0) width = line.size();
        EXPECT_EQ(line.size(), width) << line;
    }
    EXPECT_GT(width, 0u);
}

TEST(Cli, ZcCheckSymbolic) {
    const auto r = run("zc-check --config " + config("zc_symbolic.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = json::parse(r.out);
    for (const auto& [label, c] : j.at("checks").items()) EXPECT_TRUE(c.at("zero").get<bool>()) << label;
}

TEST(Cli, ReduceStandard) {
    const auto path = write_temp("reduce.json", R"({"n":2,"g":{"random":{"eps":0.1,"modes":1,"seed":3}},"flows":{"1,1":0.2}})");
    const auto r = run("reduce --config " + path + " --target standard");
    ASSERT_EQ(r.code, 0);
    const auto sol = json::parse(r.out).at("solution");
    EXPECT_EQ(sol.at("kind"), "standard");
    EXPECT_TRUE(sol.contains("U"));
    EXPECT_FALSE(sol.contains("W"));
    EXPECT_EQ(run("reduce --config " + path + " --target strict").code, 2);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("solve --n 1").code, 2);
    EXPECT_EQ(run("solve --config /nonexistent.json").code, 2);
    EXPECT_EQ(run("verify --config " + config("random.json") + " --checks bogus").code, 2);
    const auto bigcell = write_temp(
        "bigcell.json", R"({"n":2,"g":{"coeffs":{"1":[[[1,0],[0,0]],[[0,0],[0,0]]],"-1":[[[0,0],[0,0]],[[0,0],[1,0]]]}}})");
    EXPECT_EQ(run("solve --config " + bigcell).code, 3);
    EXPECT_EQ(run("zc-check --config " + config("zc_symbolic.json") + " --term-cap 1").code, 4);
    EXPECT_EQ(run("verify --config " + config("random.json") + " --fd-tol 1e-14").code, 1);
}
