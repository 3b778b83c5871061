// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "varorder/solver.hpp"

namespace varorder {

/// Catalogue selection for a scale function or modulus.
struct ScaleSpec {
    std::string kind = "power";
    std::vector<double> params{1.5};
    ScaleFunction build() const { return make_scale_function(kind, params); }
};

struct ModulusSpec {
    std::string kind = "power";
    std::vector<double> params{0.05};
    Modulus build() const { return make_modulus(kind, params); }
};

/// One row of an experiment table. `parameter` is the swept value (m, sigma
/// or instance number); `extras` follow the experiment's fixed column list.
struct RatioRecord {
    std::string variant;
    double parameter = 0.0;
    double h = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
    double residual = 0.0;
    long iterations = 0;
    std::vector<std::pair<std::string, double>> extras;

    double extra(const std::string& name) const;
};

struct InvariantCheck {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct ExperimentResult {
    std::string name;
    std::string parameter_name;
    std::vector<std::string> extra_columns;
    std::vector<RatioRecord> records;
    std::vector<InvariantCheck> checks;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<std::pair<std::string, std::string>> settings;

    bool passed() const;
    const InvariantCheck* check(const std::string& name) const;
    double constant(const std::string& name) const;
    /// Records of one variant at spacing h, in sweep order.
    std::vector<const RatioRecord*> select(const std::string& variant, double h) const;
};

/// Column schema: experiment,variant,<parameter>,h,numerator,denominator,ratio,
/// residual,iterations,<extras...>
void write_csv(std::ostream& os, const ExperimentResult& r);
std::string summary_json(const ExperimentResult& r);
/// Writes <dir>/<name>.csv and <dir>/<name>_summary.json; returns both paths.
std::pair<std::string, std::string> write_outputs(const ExperimentResult& r, const std::string& dir);

/// Bellman members with y-shapes b_a(y) = lambda + (Lambda - lambda)(1 + cos(a log(1 + y) + t_a)) / 2.
std::vector<BellmanMember> envelope_family(const ScaleFunction& phi, double lambda, double Lambda,
                                           int size);
/// Bellman members with x-multipliers b_a(x) = (lambda + Lambda)/2 + amp (Lambda - lambda)/2 sin(a x + t_a).
std::vector<BellmanMember> x_dependent_family(const ScaleFunction& phi, double lambda, double Lambda,
                                              int size, double amplitude);
/// Upper bound on max_a [b_a]_{C^psi} for x_dependent_family, from
/// |sin s - sin t| <= min(2, |s - t|).
double multiplier_seminorm_bound(const Modulus& psi, double lambda, double Lambda, int size,
                                 double amplitude);

/// sup over members, sampled x != x' in w and radii r of
///   int_{r < |y| < 2r} |K_a(x, y) - K_a(x', y)| dy / (psi(|x - x'|) int_{r < |y| < 2r} K_phi)
double kernel_oscillation_diagnostic(const OperatorSpec& op, const Modulus& psi, const Window& w,
                                     int samples = 9, const std::vector<double>& radii = {1e-3, 1e-2, 0.1, 1.0});

/// The operator with every x-dependence evaluated at z.
OperatorSpec frozen_operator(const OperatorSpec& op, double z);

struct FreezeReport {
    double value = 0.0;  ///< max over family and pairs of beta / psi(|x - x'|)
    double x = 0.0;
    double x_prime = 0.0;
    std::size_t member = 0;
};

/// Empirical lower bound for beta_{I - I_z}(x, x') / psi(|x - x'|) over x, x' in
/// B_r(z) (sampled) and the test family, with the denominator
/// ||u||'_{C^{phi psi}(B_r(z))} + ||u||_inf.
FreezeReport freeze_coefficients_diagnostic(const OperatorSpec& op, double z, double r,
                                            const std::vector<GridFunction>& family,
                                            const Modulus& psi, int samples = 5,
                                            const QuadratureSpec& q = {0.0, 0.0, 1e-8});

struct CounterexampleConfig {
    ScaleSpec phi{"power", {1.5}};
    ModulusSpec psi{"power", {0.05}};
    double lambda = 1.0;
    double Lambda = 2.0;
    std::vector<double> m_list{1, 2, 4, 8, 16};
    double zero_radius = 2.0;
    double holder_alpha = 0.1;
    std::vector<double> barrier_p{0.05, 0.1, 0.2};
    double h = 1.0 / 512;
    int jobs = 1;
    SolveOptions solver{SolveMethod::policy_iteration, 1e-10, 200, 1e-11};
};

struct EkSweepConfig {
    std::vector<double> sigma_list{1.2, 1.5, 1.8, 1.95};
    ModulusSpec psi{"power", {0.03}};
    double alpha_bar = 0.04;
    double sigma0 = 1.0;
    double lambda = 1.0;
    double Lambda = 2.0;
    int family_size = 3;
    double f_scale = 1.0;  ///< C^psi norm of the right-hand side
    double h = 1.0 / 256;
    int jobs = 1;
    SolveOptions solver{SolveMethod::policy_iteration, 1e-10, 200, 1e-11};
};

struct SchauderConfig {
    ScaleSpec phi{"power", {1.5}};
    ModulusSpec psi{"power", {0.03}};
    double alpha_bar = 0.04;
    double sigma0 = 1.0;
    double lambda = 1.0;
    double Lambda = 2.0;
    int family_size = 3;
    double amplitude = 0.5;
    double A0 = 0.0;  ///< 0 picks multiplier_seminorm_bound
    double f_scale = 1.0;
    double h = 1.0 / 256;
    int jobs = 1;
    SolveOptions solver{SolveMethod::policy_iteration, 1e-10, 200, 1e-11};
};

struct LocalBoundednessConfig {
    std::vector<double> sigma_list{1.2, 1.5, 1.8};
    double lambda = 1.0;
    double Lambda = 2.0;
    int instances = 20;
    std::uint64_t seed = 1;
    double h = 1.0 / 32;
    int jobs = 1;
    SolveOptions solver{SolveMethod::policy_iteration, 1e-10, 200, 1e-11};
};

/// Every experiment runs at h and h / 2. Estimate experiments throw GateError
/// when the index assumptions fail.
ExperimentResult run_counterexample(const CounterexampleConfig& cfg);
ExperimentResult run_ek_sweep(const EkSweepConfig& cfg);
ExperimentResult run_schauder(const SchauderConfig& cfg);
ExperimentResult run_local_boundedness(const LocalBoundednessConfig& cfg);

class Config;
/// Config keys are listed in docs/config.md.
CounterexampleConfig counterexample_config(const Config& c);
EkSweepConfig ek_sweep_config(const Config& c);
SchauderConfig schauder_config(const Config& c);
LocalBoundednessConfig local_boundedness_config(const Config& c);
SolveOptions solve_options(const Config& c, SolveOptions base);

/// A single Dirichlet solve described by a config file (keys in docs/config.md).
struct SolveJob {
    DirichletProblem problem;
    SolveOptions options;
    double rhs = 0.0;  ///< constant right-hand side
    std::string name = "solution";
};
SolveJob solve_job(const Config& c);
/// Summary of a finished solve: method, convergence, iterations, residuals.
std::string solve_summary_json(const SolveJob& job, const SolveReport& rep);

/// Dispatch by name: counterexample, ek-sweep, schauder, local-boundedness.
/// `jobs` > 0 overrides the configured worker count.
ExperimentResult run_experiment(const std::string& name, const Config& c, int jobs = 0);

}  // namespace varorder
