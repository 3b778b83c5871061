// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "varorder/config.hpp"
#include "varorder/error.hpp"
#include "varorder/experiments.hpp"

using namespace varorder;

namespace {

std::string csv_of(const ExperimentResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

EkSweepConfig small_ek() {
    EkSweepConfig c;
    c.sigma_list = {1.2, 1.6};
    c.h = 1.0 / 32;
    return c;
}

}  // namespace

TEST(Config, ParsesValuesListsAndFractions) {
    const auto c = Config::parse_string(
        "schema = 1\n# comment\nphi.kind = \"two-power\"\nphi.params = [0.5, 1.5]\n"
        "grid.h = 1/256   # trailing\nsolver.max_iter = 40\n");
    EXPECT_EQ(c.get_string("phi.kind", ""), "two-power");
    EXPECT_EQ(c.get_list("phi.params", {}), (std::vector<double>{0.5, 1.5}));
    EXPECT_EQ(c.get_double("grid.h", 0), 1.0 / 256);
    EXPECT_EQ(c.get_int("solver.max_iter", 0), 40);
    EXPECT_EQ(c.get_double("missing", 7.5), 7.5);
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(Config::parse_string("grid.h = 0.1\n"), InputError);
    EXPECT_THROW(Config::parse_string("schema = 2\n"), InputError);
    EXPECT_THROW(Config::parse_string("schema = 1\nnot a pair\n"), InputError);
    EXPECT_THROW(Config::parse_string("schema = 1\na = 1\na = 2\n"), InputError);
    const auto c = Config::parse_string("schema = 1\nsolver.max_iter = 1.5\ngrid.h = abc\n");
    EXPECT_THROW(c.get_int("solver.max_iter", 0), InputError);
    EXPECT_THROW(c.get_double("grid.h", 0), InputError);
    EXPECT_THROW(counterexample_config(Config::parse_string("schema = 1\nbogus = 3\n")), InputError);
    EXPECT_THROW(counterexample_config(Config::parse_string("schema = 1\nphi.params = [2.5]\n")),
                 InputError);
}

TEST(Config, MapsOntoExperimentSettings) {
    const auto c = Config::parse_string(
        "schema = 1\ncounterexample.m = [1, 3]\ngrid.h = 1/64\nsolver.method = pseudo-time\n"
        "lambda = 0.5\nLambda = 3\n");
    const auto cfg = counterexample_config(c);
    EXPECT_EQ(cfg.m_list, (std::vector<double>{1, 3}));
    EXPECT_EQ(cfg.h, 1.0 / 64);
    EXPECT_EQ(cfg.solver.method, SolveMethod::pseudo_time);
    EXPECT_EQ(cfg.lambda, 0.5);
    EXPECT_EQ(cfg.Lambda, 3.0);
    EXPECT_THROW(run_experiment("ek-sweep", Config::parse_string("schema = 1\nexperiment = schauder\n")),
                 InputError);
    EXPECT_THROW(run_experiment("nope", Config::parse_string("schema = 1\n")), InputError);
}

TEST(Experiments, EkSweepIsDeterministicAcrossWorkerCounts) {
    auto a = small_ek();
    auto b = small_ek();
    b.jobs = 3;
    const auto ra = run_ek_sweep(a);
    const auto rb = run_ek_sweep(b);
    EXPECT_EQ(csv_of(ra), csv_of(rb));
    EXPECT_EQ(summary_json(ra), summary_json(rb));
    EXPECT_EQ(ra.records.size(), 5u);
    ASSERT_NE(ra.check("homogeneity"), nullptr);
    EXPECT_TRUE(ra.check("homogeneity")->ok);
    for (const auto& r : ra.records) {
        EXPECT_GT(r.denominator, 0.0);
        EXPECT_NEAR(r.ratio, r.numerator / r.denominator, 1e-15);
    }
}

TEST(Experiments, GateBlocksIntegerProductIndex) {
    auto c = small_ek();
    c.sigma_list = {1.95};
    c.psi = {"power", {0.05}};
    c.alpha_bar = 0.1;
    EXPECT_THROW(run_ek_sweep(c), GateError);
    SchauderConfig s;
    s.phi = {"power", {1.97}};
    s.psi = {"power", {0.03}};
    EXPECT_THROW(run_schauder(s), GateError);
}

TEST(Experiments, SingletonLinearFamilyHasFiniteRatio) {
    auto c = small_ek();
    c.family_size = 1;
    c.Lambda = c.lambda;
    const auto r = run_ek_sweep(c);
    for (const auto& rec : r.records) EXPECT_TRUE(std::isfinite(rec.ratio));
}

TEST(Experiments, ZeroDataGivesZeroSeminorm) {
    const auto phi = make_scale_function("power", {1.5});
    DirichletProblem pb;
    pb.op = OperatorSpec::bellman(envelope_family(phi, 1, 2, 2), 1, 2);
    pb.h = 1.0 / 32;
    const auto rep = solve(pb);
    EXPECT_EQ(seminorm(rep.u, make_product(phi, make_modulus("power", {0.03})), {-0.5, 0.5}).value, 0.0);
}

TEST(Experiments, EnvelopeFamilyStaysInEnvelope) {
    const auto phi = make_scale_function("power", {1.5});
    std::vector<double> ys;
    for (int k = -40; k <= 40; ++k) ys.push_back(std::pow(10.0, k / 8.0));
    for (const auto& m : envelope_family(phi, 0.5, 2.0, 4)) EXPECT_TRUE(m.kernel.in_envelope(ys));
    for (const auto& m : x_dependent_family(phi, 0.5, 2.0, 4, 1.0))
        for (double x = -1; x <= 1; x += 0.01) {
            EXPECT_GE(m.multiplier_at(x), 0.5 - 1e-15);
            EXPECT_LE(m.multiplier_at(x), 2.0 + 1e-15);
        }
}

TEST(Experiments, KernelOscillationDiagnostic) {
    const auto phi = make_scale_function("power", {1.5});
    const auto psi = make_modulus("power", {0.1});
    const auto fixed = OperatorSpec::bellman(envelope_family(phi, 1, 2, 2), 1, 2);
    EXPECT_EQ(kernel_oscillation_diagnostic(fixed, psi, {-1, 1}), 0.0);
    const auto flat = OperatorSpec::bellman(x_dependent_family(phi, 1, 2, 2, 0.0), 1, 2);
    EXPECT_EQ(kernel_oscillation_diagnostic(flat, psi, {-1, 1}), 0.0);

    const auto op = OperatorSpec::bellman(x_dependent_family(phi, 1, 2, 3, 0.5), 1, 2);
    const double d = kernel_oscillation_diagnostic(op, psi, {-1, 1}, 9);
    // oracle: the kernels factor, so the annulus integrals cancel and only the
    // sampled multiplier differences remain
    double brute = 0.0;
    for (const auto& m : op.family)
        for (int i = 0; i < 9; ++i)
            for (int j = i + 1; j < 9; ++j) {
                const double x = -1 + 2.0 * i / 8, xp = -1 + 2.0 * j / 8;
                brute = std::max(brute, std::abs(m.multiplier_at(x) - m.multiplier_at(xp)) / psi(xp - x));
            }
    EXPECT_NEAR(d, brute, 1e-10 * brute);
    EXPECT_LE(d, multiplier_seminorm_bound(psi, 1, 2, 3, 0.5));
}

TEST(Experiments, FrozenOperatorIsTranslationInvariant) {
    const auto phi = make_scale_function("power", {1.5});
    const auto op = OperatorSpec::bellman(x_dependent_family(phi, 1, 2, 2, 0.8), 1, 2);
    const auto frozen = frozen_operator(op, 0.1);
    EXPECT_FALSE(frozen.family.empty());
    auto f = [](double x) { return std::abs(x) < 1 ? std::pow(1 - x * x, 3) * std::cos(2 * x) : 0.0; };
    const auto u = sample(f, -1, 1.0 / 64, 129);
    auto shifted = u;  // tau_w u(x) = u(x + w): same samples, grid moved by -w
    const double w = 0.25;
    shifted.x0 -= w;
    const QuadratureSpec q{0, 0, 1e-10};
    for (double x : {-0.5, -0.25, 0.0, 0.375})
        EXPECT_NEAR(eval_operator(shifted, frozen, x, q), eval_operator(u, frozen, x + w, q), 1e-9);
    // x-independent operators have a zero frozen-coefficient diagnostic
    const auto plain = OperatorSpec::bellman(envelope_family(phi, 1, 2, 2), 1, 2);
    EXPECT_EQ(freeze_coefficients_diagnostic(plain, 0.0, 0.5, {u}, make_modulus("power", {0.03})).value, 0.0);
    const auto fr = freeze_coefficients_diagnostic(op, 0.0, 0.5, {u}, make_modulus("power", {0.03}));
    EXPECT_GT(fr.value, 0.0);
    EXPECT_TRUE(std::isfinite(fr.value));
}

TEST(Experiments, SchauderRecordsBothVariants) {
    SchauderConfig c;
    c.h = 1.0 / 32;
    const auto r = run_schauder(c);
    EXPECT_EQ(r.select("holder-data", c.h).size(), 1u);
    EXPECT_EQ(r.select("bounded-data", c.h / 2).size(), 1u);
    EXPECT_TRUE(r.check("kernel_oscillation_within_A0")->ok);
    EXPECT_GT(r.constant("freeze_diagnostic"), 0.0);
    for (const auto& rec : r.records) EXPECT_TRUE(std::isfinite(rec.ratio));
}

TEST(Experiments, LocalBoundednessSmallSweep) {
    LocalBoundednessConfig c;
    c.sigma_list = {1.2, 1.5};
    c.instances = 3;
    c.h = 1.0 / 16;
    const auto r = run_local_boundedness(c);
    EXPECT_EQ(r.records.size(), 12u);
    EXPECT_TRUE(r.check("finite")->ok);
    for (const auto& rec : r.records) {
        EXPECT_GE(rec.extra("C0"), rec.extra("weight_norm"));
        EXPECT_GE(rec.extra("C0"), rec.extra("rhs_floor"));
    }
    // same instance data at both resolutions: the two ratios are close
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_NEAR(r.records[i].ratio, r.records[i + 6].ratio, 0.25 * std::abs(r.records[i].ratio));
}

TEST(Experiments, CounterexampleSmallSweep) {
    CounterexampleConfig c;
    c.m_list = {1, 2};
    c.h = 1.0 / 32;
    const auto r = run_counterexample(c);
    EXPECT_EQ(r.records.size(), 4u);
    EXPECT_TRUE(r.check("barrier")->ok);
    EXPECT_TRUE(r.check("sup_bound")->ok);
    EXPECT_TRUE(r.check("origin_sign")->ok);
    for (const auto& rec : r.records) EXPECT_LE(rec.extra("sup_abs"), 1.0);
    CounterexampleConfig bad;
    bad.m_list = {2, 1};
    EXPECT_THROW(run_counterexample(bad), InputError);
}

TEST(Experiments, OutputsRoundTrip) {
    const auto r = run_ek_sweep(small_ek());
    const auto dir = std::filesystem::temp_directory_path() / "varorder_test_outputs";
    std::filesystem::remove_all(dir);
    const auto [csv, js] = write_outputs(r, dir.string());
    std::ifstream a(csv), b(js);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), csv_of(r));
    const auto j = nlohmann::json::parse(sb.str());
    EXPECT_EQ(j["experiment"], "ek-sweep");
    EXPECT_EQ(j["passed"], r.passed());
    EXPECT_EQ(j["checks"].size(), r.checks.size());
    std::filesystem::remove_all(dir);
}
