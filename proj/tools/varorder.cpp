// SPDX-License-Identifier: MIT
//
// varorder: command-line front end.
// Exit codes: 0 success, 1 non-convergence or numerical failure, 2 bad input,
// 3 index-assumption gate failure.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "varorder/config.hpp"
#include "varorder/error.hpp"
#include "varorder/experiments.hpp"
#include "varorder/holder.hpp"
#include "varorder/solver.hpp"

using namespace varorder;

namespace {

enum Exit { kOk = 0, kNumeric = 1, kInput = 2, kGate = 3 };

Config load_config(const std::string& path) {
    return path.empty() ? Config::parse_string("schema = 1\n") : Config::from_file(path);
}

std::string output_dir(const Config& c) {
    if (const char* env = std::getenv("VARORDER_OUTPUT_DIR"); env && *env) return env;
    return c.get_string("output.dir", "results");
}

std::filesystem::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

int run_cphi(const std::string& kind, const std::vector<double>& params, double tol) {
    const auto phi = make_scale_function(kind, params);
    std::cout << format_double(compute_c_phi(phi, tol)) << "\n";
    return kOk;
}

int run_solve(const std::string& config_path) {
    const Config cfg = Config::from_file(config_path);
    const SolveJob job = solve_job(cfg);
    const SolveReport rep = solve(job.problem, job.options);
    const auto dir = prepare_dir(output_dir(cfg));
    const auto csv = dir / (job.name + ".csv");
    const auto js = dir / (job.name + "_summary.json");
    write_csv_file(csv.string(), rep.u);
    std::ofstream(js) << solve_summary_json(job, rep);
    std::cout << "solution " << csv.string() << "\nsummary " << js.string() << "\n"
              << "converged " << (rep.converged ? "true" : "false") << "\niterations " << rep.iterations
              << "\nresidual "
              << format_double(rep.residual_history.empty() ? 0.0 : rep.residual_history.back()) << "\n";
    if (!rep.converged) {
        std::cerr << "varorder: solver did not converge within " << job.options.max_iter << " iterations\n";
        return kNumeric;
    }
    return kOk;
}

int run_seminorm(const std::string& input, const std::string& modulus,
                 const std::vector<double>& modulus_params, const std::string& phi_kind,
                 const std::vector<double>& phi_params, const std::vector<double>& window) {
    const GridFunction u = read_csv_file(input);
    const Window w{window.at(0), window.at(1)};
    if (!(w.lo < w.hi)) throw InputError("window needs lo < hi");
    const Modulus psi = make_modulus(modulus, modulus_params);
    const SeminormReport rep = phi_kind.empty()
                                   ? seminorm(u, psi, w)
                                   : seminorm(u, make_product(make_scale_function(phi_kind, phi_params), psi), w);
    std::cout << "value " << format_double(rep.value) << "\nx " << format_double(rep.x) << "\ny "
              << format_double(rep.y) << "\nd " << rep.d << "\npair_floor " << format_double(rep.pair_floor)
              << "\n";
    return kOk;
}

int run_named_experiment(const std::string& name, const std::string& config_path, int jobs) {
    const Config cfg = load_config(config_path);
    const ExperimentResult r = run_experiment(name, cfg, jobs);
    const auto [csv, js] = write_outputs(r, prepare_dir(output_dir(cfg)).string());
    std::cout << "table " << csv << "\nsummary " << js << "\n";
    for (const auto& c : r.checks) std::cout << (c.ok ? "ok   " : "FAIL ") << c.name << "  " << c.detail << "\n";
    for (const auto& [k, v] : r.constants) std::cout << "constant " << k << " " << format_double(v) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-order nonlocal operators: scale functions, solves, seminorms, experiments"};
    app.require_subcommand(1);

    std::string phi_kind = "power";
    std::vector<double> phi_params;
    double tol = 1e-13;
    auto* cphi = app.add_subcommand("cphi", "Print the normalizing constant c_phi");
    cphi->add_option("--phi-kind", phi_kind, "Scale function kind")->capture_default_str();
    cphi->add_option("--phi-params", phi_params, "Scale function parameters")->required();
    cphi->add_option("--tol", tol, "Relative tolerance")->capture_default_str();

    std::string config_path;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a Dirichlet problem from a config file");
    solve_cmd->add_option("--config", config_path, "Config file")->required();

    std::string input, modulus = "power", sn_phi_kind;
    std::vector<double> modulus_params, sn_phi_params;
    std::vector<double> window{-1.0, 1.0};
    auto* semi = app.add_subcommand("seminorm", "Discrete Holder-type seminorm of a grid CSV");
    semi->add_option("--input", input, "Grid CSV written by 'solve'")->required();
    semi->add_option("--modulus", modulus, "Modulus kind")->capture_default_str();
    semi->add_option("--modulus-params", modulus_params, "Modulus parameters")->required();
    semi->add_option("--phi-kind", sn_phi_kind, "Multiply the modulus by this scale function");
    semi->add_option("--phi-params", sn_phi_params, "Scale function parameters");
    semi->add_option("--window", window, "Window lo hi")->expected(2)->capture_default_str();

    std::string name;
    int jobs = 0;
    auto* exp = app.add_subcommand("experiment", "Run a numerical experiment sweep");
    exp->add_option("--name", name, "Experiment")
        ->required()
        ->check(CLI::IsMember({"counterexample", "ek-sweep", "schauder", "local-boundedness"}));
    exp->add_option("--config", config_path, "Config file (defaults apply when omitted)");
    exp->add_option("--jobs", jobs, "Worker cap (overrides the config)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*cphi) return run_cphi(phi_kind, phi_params, tol);
        if (*solve_cmd) return run_solve(config_path);
        if (*semi) return run_seminorm(input, modulus, modulus_params, sn_phi_kind, sn_phi_params, window);
        if (*exp) return run_named_experiment(name, config_path, jobs);
    } catch (const GateError& e) {
        std::cerr << "varorder: " << e.what() << "\n";
        return kGate;
    } catch (const InputError& e) {
        std::cerr << "varorder: " << e.what() << "\n";
        return kInput;
    } catch (const ConvergenceError& e) {
        std::cerr << "varorder: " << e.what() << "\n";
        return kNumeric;
    } catch (const QuadratureError& e) {
        std::cerr << "varorder: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "varorder: " << e.what() << "\n";
        return kNumeric;
    }
    return kInput;
}
