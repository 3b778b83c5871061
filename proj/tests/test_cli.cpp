// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "varorder/config.hpp"
#include "varorder/experiments.hpp"
#include "varorder/holder.hpp"

using namespace varorder;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with VARORDER_OUTPUT_DIR pointing at dir; stdout is captured.
Run cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = "VARORDER_OUTPUT_DIR='" + dir.string() + "' '" VARORDER_CLI "' " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("varorder_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path write(const std::string& name, const std::string& text) {
        const auto p = dir / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir;
};

const char* kSignSin =
    "schema = 1\nphi.kind = power\nphi.params = [1.5]\nexterior.kind = sign-sin\nexterior.m = 1\n"
    "exterior.zero_radius = 2\ngrid.h = 1/32\n";

}  // namespace

TEST_F(Cli, CphiPrintsRoundTripValues) {
    auto r = cli("cphi --phi-kind power --phi-params 1.5", dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "0.5\n");
    r = cli("cphi --phi-kind power --phi-params 1.0", dir);
    EXPECT_EQ(r.out, "1\n");
    EXPECT_EQ(cli("cphi --phi-kind power --phi-params 2.5", dir).code, 2);
    EXPECT_EQ(cli("cphi --phi-kind nope --phi-params 1", dir).code, 2);
    EXPECT_EQ(cli("frobnicate", dir).code, 2);
}

TEST_F(Cli, SolveWritesSolutionAndSummary) {
    const auto cfg = write("a.cfg", std::string(kSignSin) + "output.name = m1\n");
    const auto r = cli("solve --config " + cfg.string(), dir);
    ASSERT_EQ(r.code, 0) << r.out;
    ASSERT_TRUE(fs::exists(dir / "m1.csv"));
    const auto summary = slurp(dir / "m1_summary.json");
    EXPECT_NE(summary.find("\"converged\": true"), std::string::npos);

    // same code path in process: the seminorm printed by the CLI matches bit for bit
    const auto job = solve_job(Config::from_file(cfg.string()));
    const auto rep = solve(job.problem, job.options);
    const GridFunction u = read_csv_file((dir / "m1.csv").string());
    EXPECT_EQ(u.values, rep.u.values);
    const auto sn = seminorm(rep.u, make_modulus("power", {0.05}), {-0.5, 0.5});
    const auto s = cli("seminorm --input " + (dir / "m1.csv").string() +
                           " --modulus power --modulus-params 0.05 --window -0.5 0.5",
                       dir);
    EXPECT_EQ(s.code, 0);
    EXPECT_EQ(s.out.substr(0, s.out.find('\n')), "value " + format_double(sn.value));
}

TEST_F(Cli, ZeroDataSolvesToZero) {
    const auto cfg = write("z.cfg", "schema = 1\ngrid.h = 1/16\noutput.name = z\n");
    ASSERT_EQ(cli("solve --config " + cfg.string(), dir).code, 0);
    for (double v : read_csv_file((dir / "z.csv").string()).values) EXPECT_EQ(v, 0.0);
}

TEST_F(Cli, SolveReportsNonConvergenceAndBadInput) {
    const auto cfg = write("s.cfg", std::string(kSignSin) + "solver.max_iter = 1\noutput.name = s\n");
    EXPECT_EQ(cli("solve --config " + cfg.string(), dir).code, 1);
    EXPECT_NE(slurp(dir / "s_summary.json").find("\"converged\": false"), std::string::npos);
    EXPECT_EQ(cli("solve --config " + (dir / "missing.cfg").string(), dir).code, 2);
    const auto bad = write("b.cfg", "schema = 1\ngrid.h = 0.3\n");
    EXPECT_EQ(cli("solve --config " + bad.string(), dir).code, 2);
    const auto unknown = write("u.cfg", "schema = 1\noperator.kind = linear\n");
    EXPECT_EQ(cli("solve --config " + unknown.string(), dir).code, 2);
}

TEST_F(Cli, SeminormOfAffineDataAndBadWindow) {
    const GridFunction u = sample([](double x) { return 3.0 * x + 1.0; }, -1.0, 1.0 / 32, 65);
    write_csv_file((dir / "aff.csv").string(), u);
    const std::string in = " --input " + (dir / "aff.csv").string();
    const auto r = cli("seminorm" + in + " --modulus power --modulus-params 1.5", dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "value 0");
    EXPECT_EQ(cli("seminorm" + in + " --modulus power --modulus-params 0.5 --window 2 3", dir).code, 2);
}

TEST_F(Cli, ExperimentGateAndDeterminism) {
    const auto gate = write("g.cfg", "schema = 1\nek.sigma = [1.95]\npsi.params = [0.05]\nalpha_bar = 0.1\n");
    EXPECT_EQ(cli("experiment --name ek-sweep --config " + gate.string(), dir).code, 3);
    EXPECT_EQ(cli("experiment --name bogus", dir).code, 2);

    const auto cfg = write("e.cfg", "schema = 1\nek.sigma = [1.2, 1.6]\ngrid.h = 1/32\n");
    ASSERT_EQ(cli("experiment --name ek-sweep --config " + cfg.string(), dir).code, 0);
    const auto csv = slurp(dir / "ek-sweep.csv");
    const auto js = slurp(dir / "ek-sweep_summary.json");
    ASSERT_EQ(cli("experiment --name ek-sweep --jobs 2 --config " + cfg.string(), dir).code, 0);
    EXPECT_EQ(slurp(dir / "ek-sweep.csv"), csv);
    EXPECT_EQ(slurp(dir / "ek-sweep_summary.json"), js);
}
