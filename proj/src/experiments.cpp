// SPDX-License-Identifier: MIT
#include "varorder/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "varorder/config.hpp"
#include "varorder/error.hpp"
#include "varorder/quadrature.hpp"

namespace varorder {
namespace {

// Runs fn(0..count-1) on up to `jobs` threads; results and the first failure
// (by index) come back in index order.
template <class F>
auto parallel_map(std::size_t count, int jobs, F fn) {
    using T = decltype(fn(std::size_t{0}));
    std::vector<std::optional<T>> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= count) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> res;
    res.reserve(count);
    for (auto& o : out) res.push_back(std::move(*o));
    return res;
}

std::string fmt(double v) { return format_double(v); }

std::string fmt_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

std::string method_name(SolveMethod m) {
    return m == SolveMethod::pseudo_time ? "pseudo-time" : "policy-iteration";
}

// The worker count is left out on purpose: outputs must not depend on it.
void solver_settings(ExperimentResult& r, const SolveOptions& o, double h) {
    r.settings.emplace_back("grid.h", fmt(h));
    r.settings.emplace_back("solver.method", method_name(o.method));
    r.settings.emplace_back("solver.tol", fmt(o.tol));
    r.settings.emplace_back("solver.max_iter", std::to_string(o.max_iter));
    r.settings.emplace_back("solver.tail_tol", fmt(o.tail_tol));
}

double sup_abs(const GridFunction& u) {
    double s = 0.0;
    for (double v : u.values) s = std::max(s, std::abs(v));
    return s;
}

SolveReport solve_or_throw(const DiscreteOperator& disc, const SolveOptions& o, const std::string& what) {
    SolveReport rep = solve(disc, o);
    if (!rep.converged)
        throw ConvergenceError(what + ": no convergence after " + std::to_string(rep.iterations) +
                               " iterations (residual " + fmt(rep.residual_history.back()) + ")");
    return rep;
}

void add_check(ExperimentResult& r, std::string name, bool ok, std::string detail) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
}

std::string h_label(double h) { return "h=" + fmt(h); }

void require_gate(const ScaleFunction& phi, const Modulus& psi, double alpha_bar, double sigma0,
                  const std::string& what) {
    const IndexReport rep = validate_index_assumptions(phi, psi, alpha_bar, sigma0);
    if (!rep.ok) throw GateError(what + ": index assumptions fail\n" + rep.summary());
}

// Smooth bump scaled to the requested C^psi(B_1) norm, measured on a fine grid.
RealFn unit_bump(const Modulus& psi, double target) {
    auto base = [](double x) { return std::exp(-8.0 * x * x); };
    const auto ref = sample(base, -1.0, 1.0 / 1024, 2049);
    const double A = target / norm_plain(ref, psi, {-1.0, 1.0});
    return [A, base](double x) { return A * base(x); };
}

double bump_norm(const RealFn& f, const Modulus& psi) {
    return norm_plain(sample(f, -1.0, 1.0 / 1024, 2049), psi, {-1.0, 1.0});
}

}  // namespace

double RatioRecord::extra(const std::string& name) const {
    for (const auto& [k, v] : extras)
        if (k == name) return v;
    throw InputError("record has no column '" + name + "'");
}

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.ok; });
}

const InvariantCheck* ExperimentResult::check(const std::string& n) const {
    for (const auto& c : checks)
        if (c.name == n) return &c;
    return nullptr;
}

double ExperimentResult::constant(const std::string& n) const {
    for (const auto& [k, v] : constants)
        if (k == n) return v;
    throw InputError("no constant '" + n + "'");
}

std::vector<const RatioRecord*> ExperimentResult::select(const std::string& variant, double h) const {
    std::vector<const RatioRecord*> out;
    for (const auto& r : records)
        if (r.variant == variant && r.h == h) out.push_back(&r);
    return out;
}

void write_csv(std::ostream& os, const ExperimentResult& r) {
    os << "experiment,variant," << r.parameter_name
       << ",h,numerator,denominator,ratio,residual,iterations";
    for (const auto& c : r.extra_columns) os << "," << c;
    os << "\n";
    for (const auto& rec : r.records) {
        os << r.name << "," << rec.variant << "," << fmt(rec.parameter) << "," << fmt(rec.h) << ","
           << fmt(rec.numerator) << "," << fmt(rec.denominator) << "," << fmt(rec.ratio) << ","
           << fmt(rec.residual) << "," << rec.iterations;
        for (const auto& c : r.extra_columns) os << "," << fmt(rec.extra(c));
        os << "\n";
    }
}

std::string summary_json(const ExperimentResult& r) {
    nlohmann::ordered_json j;
    j["experiment"] = r.name;
    j["passed"] = r.passed();
    j["records"] = r.records.size();
    auto& s = j["settings"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.settings) s[k] = v;
    auto& c = j["constants"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.constants) c[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(fmt(v));
    auto& ch = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& chk : r.checks) ch.push_back({{"name", chk.name}, {"ok", chk.ok}, {"detail", chk.detail}});
    return j.dump(2) + "\n";
}

std::pair<std::string, std::string> write_outputs(const ExperimentResult& r, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    const std::string csv = (std::filesystem::path(dir) / (r.name + ".csv")).string();
    const std::string js = (std::filesystem::path(dir) / (r.name + "_summary.json")).string();
    std::ofstream a(csv), b(js);
    if (!a || !b) throw InputError("cannot write outputs in '" + dir + "'");
    write_csv(a, r);
    b << summary_json(r);
    return {csv, js};
}

std::vector<BellmanMember> envelope_family(const ScaleFunction& phi, double lambda, double Lambda,
                                           int size) {
    if (size < 1) throw InputError("family size must be positive");
    std::vector<BellmanMember> fam;
    for (int a = 1; a <= size; ++a) {
        const double freq = a, phase = 2.0 * std::numbers::pi * (a - 1) / size;
        RealFn shape = [lambda, Lambda, freq, phase](double y) {
            return lambda + (Lambda - lambda) * 0.5 * (1.0 + std::cos(freq * std::log1p(y) + phase));
        };
        fam.push_back({Kernel(phi, lambda, Lambda, std::move(shape)), {}, {}});
    }
    return fam;
}

std::vector<BellmanMember> x_dependent_family(const ScaleFunction& phi, double lambda, double Lambda,
                                              int size, double amplitude) {
    if (size < 1) throw InputError("family size must be positive");
    if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw InputError("multiplier amplitude must lie in [0, 1]");
    std::vector<BellmanMember> fam;
    for (int a = 1; a <= size; ++a) {
        const double freq = a, phase = 2.0 * std::numbers::pi * (a - 1) / size;
        RealFn mult = [lambda, Lambda, amplitude, freq, phase](double x) {
            return 0.5 * (lambda + Lambda) + amplitude * 0.5 * (Lambda - lambda) * std::sin(freq * x + phase);
        };
        fam.push_back({Kernel(phi, lambda, Lambda), std::move(mult), {}});
    }
    return fam;
}

double multiplier_seminorm_bound(const Modulus& psi, double lambda, double Lambda, int size,
                                 double amplitude) {
    double best = 0.0;
    for (int a = 1; a <= size; ++a) {
        auto ratio = [&](double t) { return std::min(2.0, a * t) / psi(t); };
        double s = 0.0;
        for (int k = 0; k <= 8 * 64; ++k) s = std::max(s, ratio(2.0 * std::pow(10.0, -k / 64.0)));
        if (2.0 / a <= 2.0) s = std::max(s, ratio(2.0 / a));
        best = std::max(best, s);
    }
    return amplitude * 0.5 * (Lambda - lambda) * best;
}

double kernel_oscillation_diagnostic(const OperatorSpec& op, const Modulus& psi, const Window& w,
                                     int samples, const std::vector<double>& radii) {
    if (!op.x_dependent()) return 0.0;
    if (samples < 2) throw InputError("need at least two sample points");
    const Kernel ref(op.phi);
    double best = 0.0;
    for (double r : radii) {
        const double ref_mass = 2.0 * ref.mass(r, 2.0 * r, 1e-12, false);
        for (const auto& mem : op.family) {
            const bool shaped = mem.kernel.shaped();
            for (int i = 0; i < samples; ++i) {
                const double x = w.lo + w.diameter() * i / (samples - 1);
                for (int j = i + 1; j < samples; ++j) {
                    const double xp = w.lo + w.diameter() * j / (samples - 1);
                    const double bx = mem.multiplier_at(x), bxp = mem.multiplier_at(xp);
                    quad::Options o;
                    o.abs_tol = 1e-12 * ref_mass;
                    const double diff =
                        2.0 * quad::integrate(
                                  [&](double y) { return std::abs(bx - bxp) * mem.kernel.density(y, shaped); },
                                  r, 2.0 * r, o)
                                  .value;
                    best = std::max(best, diff / (psi(xp - x) * ref_mass));
                }
            }
        }
    }
    return best;
}

OperatorSpec frozen_operator(const OperatorSpec& op, double z) {
    OperatorSpec f = op;
    for (auto& mem : f.family) {
        if (mem.x_multiplier) {
            const double b = mem.x_multiplier(z);
            mem.x_multiplier = [b](double) { return b; };
        }
        if (mem.offset) {
            const double c = mem.offset(z);
            mem.offset = [c](double) { return c; };
        }
    }
    return f;
}

FreezeReport freeze_coefficients_diagnostic(const OperatorSpec& op, double z, double r,
                                            const std::vector<GridFunction>& family,
                                            const Modulus& psi, int samples, const QuadratureSpec& q) {
    FreezeReport rep;
    if (!op.x_dependent()) return rep;
    if (samples < 2 || !(r > 0.0)) throw InputError("need r > 0 and at least two sample points");
    const OperatorSpec frozen = frozen_operator(op, z);
    const ProductModulus pm = make_product(op.phi, psi);
    std::vector<double> xs;
    for (int i = 0; i < samples; ++i) xs.push_back(z - 0.5 * r + r * i / (samples - 1));
    for (std::size_t f = 0; f < family.size(); ++f) {
        const GridFunction& u = family[f];
        const double den = norm_nondim(u, pm.modulus, {z - r, z + r}) +
                           std::max(sup_abs(u), u.exterior.sup_abs());
        if (!(den > 0.0)) continue;
        std::vector<double> diff;
        for (double x : xs) diff.push_back(eval_operator(u, op, x, q) - eval_operator(u, frozen, x, q));
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                const double v = std::abs(diff[i] - diff[j]) / den / psi(xs[j] - xs[i]);
                if (v > rep.value) rep = {v, xs[i], xs[j], f};
            }
    }
    return rep;
}

ExperimentResult run_counterexample(const CounterexampleConfig& cfg) {
    const ScaleFunction phi = cfg.phi.build();
    const Modulus psi = cfg.psi.build();
    const ProductModulus pm = make_product(phi, psi);
    const Modulus holder = make_modulus("power", {cfg.holder_alpha});
    if (cfg.m_list.empty()) throw InputError("empty m list");
    for (std::size_t i = 1; i < cfg.m_list.size(); ++i)
        if (!(cfg.m_list[i] > cfg.m_list[i - 1])) throw InputError("m list must be increasing");

    ExperimentResult res;
    res.name = "counterexample";
    res.parameter_name = "m";
    res.extra_columns = {"u_origin", "sup_abs", "holder_alpha_norm", "argmax_x", "argmax_y"};
    res.settings = {{"phi", cfg.phi.kind + " " + fmt_list(cfg.phi.params)},
                    {"psi", cfg.psi.kind + " " + fmt_list(cfg.psi.params)},
                    {"lambda", fmt(cfg.lambda)},
                    {"Lambda", fmt(cfg.Lambda)},
                    {"m", fmt_list(cfg.m_list)},
                    {"zero_radius", fmt(cfg.zero_radius)},
                    {"holder_alpha", fmt(cfg.holder_alpha)}};
    solver_settings(res, cfg.solver, cfg.h);

    const BarrierReport bar = barrier_check(phi, cfg.lambda, cfg.Lambda, cfg.barrier_p);
    res.constants.emplace_back("barrier_best_p", bar.best_p);
    res.constants.emplace_back("barrier_best_eps", bar.best_eps);
    add_check(res, "barrier", bar.any_pass,
              bar.any_pass ? "M+ of the barrier is <= 0 near the band for p = " + fmt(bar.best_p)
                           : "no sampled p satisfies the sign condition");

    const std::vector<double> hs{cfg.h, 0.5 * cfg.h};
    const std::size_t nm = cfg.m_list.size();
    auto job = [&](std::size_t idx) {
        const double h = hs[idx / nm], m = cfg.m_list[idx % nm];
        DirichletProblem pb;
        pb.op = OperatorSpec::pucci(Variant::pucci_plus, phi, cfg.lambda, cfg.Lambda);
        pb.g = Exterior::sign_sin(m, cfg.zero_radius);
        pb.h = h;
        const DiscreteOperator disc(pb, cfg.solver.tail_tol);
        const SolveReport rep = solve_or_throw(disc, cfg.solver, "counterexample m=" + fmt(m));
        const GridFunction& u = rep.u;
        const SeminormReport sn = seminorm(u, pm, {-0.5, 0.5});
        RatioRecord rec;
        rec.variant = "solution";
        rec.parameter = m;
        rec.h = h;
        rec.numerator = sn.value;
        rec.denominator = sup_abs(u);
        rec.ratio = rec.numerator / rec.denominator;
        rec.residual = rep.residual_history.back();
        rec.iterations = rep.iterations;
        rec.extras = {{"u_origin", u(0.0)},
                      {"sup_abs", rec.denominator},
                      {"holder_alpha_norm", norm_plain(u, holder, {-1.0, 1.0})},
                      {"argmax_x", sn.x},
                      {"argmax_y", sn.y}};
        return rec;
    };
    res.records = parallel_map(2 * nm, cfg.jobs, job);

    bool sup_ok = true, sign_ok = true;
    double worst_sup = 0.0, worst_origin = INFINITY;
    for (const auto& r : res.records) {
        worst_sup = std::max(worst_sup, r.extra("sup_abs"));
        worst_origin = std::min(worst_origin, r.extra("u_origin"));
    }
    sup_ok = worst_sup <= 1.0;
    sign_ok = worst_origin >= -1e-6;
    add_check(res, "sup_bound", sup_ok, "max |u_m| = " + fmt(worst_sup));
    add_check(res, "origin_sign", sign_ok, "min u_m(0) = " + fmt(worst_origin));
    std::vector<std::vector<double>> trend;
    for (double h : hs) {
        const auto rows = res.select("solution", h);
        std::vector<double> v;
        for (const auto* r : rows) v.push_back(r->numerator);
        bool mono = true;
        for (std::size_t i = 1; i < v.size(); ++i) mono = mono && v[i] > v[i - 1];
        const double growth = v.back() / v.front();
        res.constants.emplace_back("growth@" + h_label(h), growth);
        add_check(res, "monotone@" + h_label(h), mono, "seminorms " + fmt_list(v));
        add_check(res, "growth@" + h_label(h), growth >= 2.0, "last/first = " + fmt(growth));
        trend.push_back(v);
    }
    bool agree = true;
    for (std::size_t i = 1; i < nm; ++i)
        agree = agree && ((trend[0][i] > trend[0][i - 1]) == (trend[1][i] > trend[1][i - 1]));
    add_check(res, "trend_agreement", agree, "step-by-step direction matches at h and h/2");
    return res;
}

ExperimentResult run_ek_sweep(const EkSweepConfig& cfg) {
    const Modulus psi = cfg.psi.build();
    if (cfg.sigma_list.empty()) throw InputError("empty sigma list");
    std::vector<ScaleFunction> phis;
    for (double s : cfg.sigma_list) {
        phis.push_back(make_scale_function("power", {s}));
        require_gate(phis.back(), psi, cfg.alpha_bar, cfg.sigma0, "ek-sweep sigma=" + fmt(s));
    }
    const RealFn f = unit_bump(psi, cfg.f_scale);
    const double fnorm = bump_norm(f, psi);

    ExperimentResult res;
    res.name = "ek-sweep";
    res.parameter_name = "sigma";
    res.extra_columns = {"frac_m_phipsi", "sup_abs", "u_psi_norm", "f_psi_norm"};
    res.settings = {{"sigma", fmt_list(cfg.sigma_list)},
                    {"psi", cfg.psi.kind + " " + fmt_list(cfg.psi.params)},
                    {"alpha_bar", fmt(cfg.alpha_bar)},
                    {"sigma0", fmt(cfg.sigma0)},
                    {"lambda", fmt(cfg.lambda)},
                    {"Lambda", fmt(cfg.Lambda)},
                    {"family_size", std::to_string(cfg.family_size)},
                    {"rhs.norm", fmt(cfg.f_scale)}};
    solver_settings(res, cfg.solver, cfg.h);
    add_check(res, "index_gate", true, "all sigma pass the index assumptions");

    const std::vector<double> hs{cfg.h, 0.5 * cfg.h};
    const std::size_t ns = cfg.sigma_list.size();
    // jobs: every (h, sigma) pair plus one homogeneity probe (coarse h, first sigma, f -> 3 f)
    auto job = [&](std::size_t idx) {
        const bool probe = idx == 2 * ns;
        const double h = probe ? hs[0] : hs[idx / ns];
        const std::size_t si = probe ? 0 : idx % ns;
        const double scale = probe ? 3.0 : 1.0;
        const ScaleFunction& phi = phis[si];
        DirichletProblem pb;
        pb.op = OperatorSpec::bellman(envelope_family(phi, cfg.lambda, cfg.Lambda, cfg.family_size),
                                      cfg.lambda, cfg.Lambda);
        pb.f = [f, scale](double x) { return scale * f(x); };
        pb.g = Exterior::zero();
        pb.h = h;
        const DiscreteOperator disc(pb, cfg.solver.tail_tol);
        const SolveReport rep = solve_or_throw(disc, cfg.solver, "ek-sweep sigma=" + fmt(cfg.sigma_list[si]));
        const GridFunction& u = rep.u;
        const double unorm = norm_plain(u, psi, {-1.0, 1.0});
        RatioRecord rec;
        rec.variant = probe ? "scaled-3" : "bellman";
        rec.parameter = cfg.sigma_list[si];
        rec.h = h;
        rec.numerator = seminorm(u, make_product(phi, psi), {-0.5, 0.5}).value;
        rec.denominator = unorm + scale * fnorm;
        rec.ratio = rec.numerator / rec.denominator;
        rec.residual = rep.residual_history.back();
        rec.iterations = rep.iterations;
        const double mpp = phi.sigma1 + psi.m_index;
        rec.extras = {{"frac_m_phipsi", mpp - std::floor(mpp)},
                      {"sup_abs", sup_abs(u)},
                      {"u_psi_norm", unorm},
                      {"f_psi_norm", scale * fnorm}};
        return rec;
    };
    res.records = parallel_map(2 * ns + 1, cfg.jobs, job);

    for (double h : hs) {
        const auto rows = res.select("bellman", h);
        double lo = INFINITY, hi = 0.0;
        bool finite = true;
        for (const auto* r : rows) {
            finite = finite && std::isfinite(r->ratio) && r->denominator > 0.0;
            lo = std::min(lo, r->ratio);
            hi = std::max(hi, r->ratio);
        }
        const double spread = hi / lo;
        res.constants.emplace_back("C_empirical@" + h_label(h), hi);
        res.constants.emplace_back("spread@" + h_label(h), spread);
        add_check(res, "uniform_in_sigma@" + h_label(h), finite && lo > 0.0 && spread <= 10.0,
                  "max/min ratio = " + fmt(spread));
    }
    const auto base = res.select("bellman", hs[0]).front();
    const auto probe = res.select("scaled-3", hs[0]).front();
    const double rel = std::abs(probe->ratio - base->ratio) / base->ratio;
    add_check(res, "homogeneity", rel <= 1e-6, "relative change under u, f -> 3u, 3f: " + fmt(rel));
    return res;
}

ExperimentResult run_schauder(const SchauderConfig& cfg) {
    const ScaleFunction phi = cfg.phi.build();
    const Modulus psi = cfg.psi.build();
    require_gate(phi, psi, cfg.alpha_bar, cfg.sigma0, "schauder");
    const RealFn f = unit_bump(psi, cfg.f_scale);
    const double fnorm = bump_norm(f, psi);
    const OperatorSpec op = OperatorSpec::bellman(
        x_dependent_family(phi, cfg.lambda, cfg.Lambda, cfg.family_size, cfg.amplitude), cfg.lambda,
        cfg.Lambda);
    const double A0 = cfg.A0 > 0.0
                          ? cfg.A0
                          : multiplier_seminorm_bound(psi, cfg.lambda, cfg.Lambda, cfg.family_size, cfg.amplitude);
    const double osc = kernel_oscillation_diagnostic(op, psi, {-1.0, 1.0});

    ExperimentResult res;
    res.name = "schauder";
    res.parameter_name = "sigma";
    res.extra_columns = {"kernel_oscillation", "A0", "sup_abs", "u_psi_norm", "f_psi_norm"};
    res.settings = {{"phi", cfg.phi.kind + " " + fmt_list(cfg.phi.params)},
                    {"psi", cfg.psi.kind + " " + fmt_list(cfg.psi.params)},
                    {"alpha_bar", fmt(cfg.alpha_bar)},
                    {"sigma0", fmt(cfg.sigma0)},
                    {"lambda", fmt(cfg.lambda)},
                    {"Lambda", fmt(cfg.Lambda)},
                    {"family_size", std::to_string(cfg.family_size)},
                    {"amplitude", fmt(cfg.amplitude)},
                    {"A0", fmt(A0)},
                    {"rhs.norm", fmt(cfg.f_scale)}};
    solver_settings(res, cfg.solver, cfg.h);
    add_check(res, "index_gate", true, "phi and psi pass the index assumptions");
    res.constants.emplace_back("kernel_oscillation", osc);
    res.constants.emplace_back("A0", A0);
    add_check(res, "kernel_oscillation_within_A0", osc <= A0 * (1 + 1e-9),
              "diagnostic " + fmt(osc) + " vs A0 " + fmt(A0));

    const std::vector<double> hs{cfg.h, 0.5 * cfg.h};
    auto job = [&](std::size_t idx) {
        DirichletProblem pb;
        pb.op = op;
        pb.f = f;
        pb.g = Exterior::zero();
        pb.h = hs[idx];
        const DiscreteOperator disc(pb, cfg.solver.tail_tol);
        const SolveReport rep = solve_or_throw(disc, cfg.solver, "schauder");
        const GridFunction& u = rep.u;
        const double semi = seminorm(u, make_product(phi, psi), {-0.5, 0.5}).value;
        const double unorm = norm_plain(u, psi, {-1.0, 1.0});
        const double usup = sup_abs(u);
        std::vector<RatioRecord> out;
        for (int v = 0; v < 2; ++v) {
            RatioRecord rec;
            rec.variant = v == 0 ? "holder-data" : "bounded-data";
            rec.parameter = phi.sigma1;
            rec.h = hs[idx];
            rec.numerator = semi;
            rec.denominator = (v == 0 ? unorm : usup) + fnorm;
            rec.ratio = rec.numerator / rec.denominator;
            rec.residual = rep.residual_history.back();
            rec.iterations = rep.iterations;
            rec.extras = {{"kernel_oscillation", osc}, {"A0", A0}, {"sup_abs", usup},
                          {"u_psi_norm", unorm}, {"f_psi_norm", fnorm}};
            out.push_back(rec);
        }
        return out;
    };
    for (auto& rows : parallel_map(hs.size(), cfg.jobs, job))
        for (auto& r : rows) res.records.push_back(std::move(r));

    for (const std::string variant : {"holder-data", "bounded-data"}) {
        const double a = res.select(variant, hs[0]).front()->ratio;
        const double b = res.select(variant, hs[1]).front()->ratio;
        const double rel = std::abs(a - b) / std::max(a, b);
        res.constants.emplace_back("ratio[" + variant + "]@" + h_label(hs[0]), a);
        res.constants.emplace_back("ratio[" + variant + "]@" + h_label(hs[1]), b);
        add_check(res, "finite[" + variant + "]", std::isfinite(a) && std::isfinite(b) && a > 0.0,
                  "ratios " + fmt(a) + ", " + fmt(b));
        add_check(res, "two_resolution[" + variant + "]", rel <= 0.25, "relative difference " + fmt(rel));
    }

    // Frozen-coefficient diagnostic on a small smooth test family.
    std::vector<GridFunction> family;
    for (int k = 1; k <= 3; ++k)
        family.push_back(sample([k](double x) { return std::pow(1 - x * x, 3) * std::sin(k * x + 0.3); },
                                -1.0, 1.0 / 64, 129));
    const FreezeReport fr = freeze_coefficients_diagnostic(op, 0.0, 0.5, family, psi);
    res.constants.emplace_back("freeze_diagnostic", fr.value);
    return res;
}

ExperimentResult run_local_boundedness(const LocalBoundednessConfig& cfg) {
    if (cfg.sigma_list.empty() || cfg.instances < 1) throw InputError("need sigma values and instances");
    ExperimentResult res;
    res.name = "local-boundedness";
    res.parameter_name = "instance";
    res.extra_columns = {"sigma", "weight_norm", "rhs_floor", "C0"};
    res.settings = {{"sigma", fmt_list(cfg.sigma_list)},
                    {"lambda", fmt(cfg.lambda)},
                    {"Lambda", fmt(cfg.Lambda)},
                    {"instances", std::to_string(cfg.instances)},
                    {"seed", std::to_string(cfg.seed)}};
    solver_settings(res, cfg.solver, cfg.h);

    std::vector<ScaleFunction> phis;
    for (double s : cfg.sigma_list) phis.push_back(make_scale_function("power", {s}));
    const std::vector<double> hs{cfg.h, 0.5 * cfg.h};
    const std::size_t ns = cfg.sigma_list.size(), ni = static_cast<std::size_t>(cfg.instances);
    auto job = [&](std::size_t idx) {
        const double h = hs[idx / (ns * ni)];
        const std::size_t si = (idx / ni) % ns, inst = idx % ni;
        // the instance data depends on (seed, sigma index, instance) only
        std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(si),
                          static_cast<std::uint64_t>(inst)};
        std::mt19937_64 rng(seq);
        auto U = [&rng] { return std::generate_canonical<double, 53>(rng); };
        const double offset = 2.0 * U() - 1.0, amp = U(), m = 1.0 + std::floor(8.0 * U());
        const double zr = 1.0 + 2.0 * U(), beta = 2.0 * U(), k = 1.0 + std::floor(4.0 * U());
        const double theta = 2.0 * std::numbers::pi * U();
        const ScaleFunction& phi = phis[si];
        DirichletProblem pb;
        pb.op = OperatorSpec::pucci(Variant::pucci_plus, phi, cfg.lambda, cfg.Lambda);
        auto g = Exterior::sign_sin(m, zr, amp);
        g.offset = offset;
        pb.g = g;
        pb.f = [beta, k, theta](double x) { return beta * std::cos(k * x + theta); };
        pb.h = h;
        const DiscreteOperator disc(pb, cfg.solver.tail_tol);
        const SolveReport rep = solve_or_throw(disc, cfg.solver, "local-boundedness");
        const GridFunction& u = rep.u;
        std::vector<double> inner(u.values.begin() + 1, u.values.end() - 1);
        double floor_ = 0.0;
        for (double v : disc.apply_all(inner)) floor_ = std::max(floor_, -v);
        const double wn = weight_norm(u, phi, 1e-9);
        const double C0 = std::max(wn, floor_);
        const IndexRange half = window_nodes(u, {-0.5, 0.5});
        double top = -INFINITY;
        for (std::size_t i = half.first; i <= half.last; ++i) top = std::max(top, u.values[i]);
        RatioRecord rec;
        rec.variant = "pucci-plus";
        rec.parameter = static_cast<double>(inst);
        rec.h = h;
        rec.numerator = top;
        rec.denominator = C0;
        rec.ratio = top / C0;
        rec.residual = rep.residual_history.back();
        rec.iterations = rep.iterations;
        rec.extras = {{"sigma", cfg.sigma_list[si]}, {"weight_norm", wn}, {"rhs_floor", floor_}, {"C0", C0}};
        return rec;
    };
    res.records = parallel_map(2 * ns * ni, cfg.jobs, job);

    bool finite = true;
    for (const auto& r : res.records) finite = finite && std::isfinite(r.ratio) && r.denominator > 0.0;
    add_check(res, "finite", finite, "every instance has C0 > 0 and a finite ratio");
    for (double h : hs) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t si = 0; si < ns; ++si) {
            double C = -INFINITY;
            for (const auto* r : res.select("pucci-plus", h))
                if (r->extra("sigma") == cfg.sigma_list[si]) C = std::max(C, r->ratio);
            res.constants.emplace_back("C[sigma=" + fmt(cfg.sigma_list[si]) + "]@" + h_label(h), C);
            lo = std::min(lo, C);
            hi = std::max(hi, C);
        }
        const double spread = hi / lo;
        res.constants.emplace_back("spread@" + h_label(h), spread);
        add_check(res, "uniform_in_sigma@" + h_label(h), lo > 0.0 && spread < 10.0,
                  "max/min empirical C = " + fmt(spread));
    }
    return res;
}

SolveOptions solve_options(const Config& c, SolveOptions base) {
    const std::string m = c.get_string("solver.method", method_name(base.method));
    if (m == "policy-iteration")
        base.method = SolveMethod::policy_iteration;
    else if (m == "pseudo-time")
        base.method = SolveMethod::pseudo_time;
    else
        throw InputError("solver.method must be policy-iteration or pseudo-time");
    base.tol = c.get_double("solver.tol", base.tol);
    base.max_iter = c.get_int("solver.max_iter", base.max_iter);
    base.tail_tol = c.get_double("solver.tail_tol", base.tail_tol);
    if (!(base.tol > 0.0) || base.max_iter < 1 || !(base.tail_tol > 0.0))
        throw InputError("solver settings need tol > 0, max_iter >= 1, tail_tol > 0");
    return base;
}

namespace {

const std::set<std::string> kCommonKeys{"experiment", "output.dir", "jobs", "grid.h", "solver.method",
                                        "solver.tol", "solver.max_iter", "solver.tail_tol",
                                        "lambda", "Lambda"};

std::set<std::string> with_common(std::initializer_list<std::string> extra) {
    std::set<std::string> s = kCommonKeys;
    s.insert(extra.begin(), extra.end());
    return s;
}

template <class T>
void common(const Config& c, T& cfg) {
    cfg.lambda = c.get_double("lambda", cfg.lambda);
    cfg.Lambda = c.get_double("Lambda", cfg.Lambda);
    if (!(cfg.lambda > 0.0 && cfg.Lambda >= cfg.lambda)) throw InputError("need 0 < lambda <= Lambda");
    cfg.h = c.get_double("grid.h", cfg.h);
    if (!(cfg.h > 0.0 && cfg.h <= 0.25)) throw InputError("grid.h must lie in (0, 1/4]");
    cfg.jobs = static_cast<int>(c.get_int("jobs", cfg.jobs));
    if (cfg.jobs < 1) throw InputError("jobs must be positive");
    cfg.solver = solve_options(c, cfg.solver);
}

ScaleSpec scale_spec(const Config& c, ScaleSpec s) {
    s.kind = c.get_string("phi.kind", s.kind);
    s.params = c.get_list("phi.params", s.params);
    s.build();  // validates
    return s;
}

ModulusSpec modulus_spec(const Config& c, ModulusSpec s) {
    s.kind = c.get_string("psi.kind", s.kind);
    s.params = c.get_list("psi.params", s.params);
    s.build();
    return s;
}

}  // namespace

CounterexampleConfig counterexample_config(const Config& c) {
    c.check_keys(with_common({"phi.kind", "phi.params", "psi.kind", "psi.params", "counterexample.m",
                              "counterexample.zero_radius", "counterexample.holder_alpha", "barrier.p"}));
    CounterexampleConfig cfg;
    common(c, cfg);
    cfg.phi = scale_spec(c, cfg.phi);
    cfg.psi = modulus_spec(c, cfg.psi);
    cfg.m_list = c.get_list("counterexample.m", cfg.m_list);
    cfg.zero_radius = c.get_double("counterexample.zero_radius", cfg.zero_radius);
    cfg.holder_alpha = c.get_double("counterexample.holder_alpha", cfg.holder_alpha);
    cfg.barrier_p = c.get_list("barrier.p", cfg.barrier_p);
    if (!(cfg.zero_radius >= 1.0)) throw InputError("counterexample.zero_radius must be >= 1");
    if (!(cfg.holder_alpha > 0.0 && cfg.holder_alpha < 1.0))
        throw InputError("counterexample.holder_alpha must lie in (0, 1)");
    return cfg;
}

EkSweepConfig ek_sweep_config(const Config& c) {
    c.check_keys(with_common({"psi.kind", "psi.params", "alpha_bar", "sigma0", "ek.sigma", "ek.family_size",
                              "rhs.norm"}));
    EkSweepConfig cfg;
    common(c, cfg);
    cfg.psi = modulus_spec(c, cfg.psi);
    cfg.alpha_bar = c.get_double("alpha_bar", cfg.alpha_bar);
    cfg.sigma0 = c.get_double("sigma0", cfg.sigma0);
    cfg.sigma_list = c.get_list("ek.sigma", cfg.sigma_list);
    cfg.family_size = static_cast<int>(c.get_int("ek.family_size", cfg.family_size));
    cfg.f_scale = c.get_double("rhs.norm", cfg.f_scale);
    if (!(cfg.f_scale > 0.0)) throw InputError("rhs.norm must be positive");
    return cfg;
}

SchauderConfig schauder_config(const Config& c) {
    c.check_keys(with_common({"phi.kind", "phi.params", "psi.kind", "psi.params", "alpha_bar", "sigma0",
                              "schauder.family_size", "schauder.amplitude", "schauder.A0", "rhs.norm"}));
    SchauderConfig cfg;
    common(c, cfg);
    cfg.phi = scale_spec(c, cfg.phi);
    cfg.psi = modulus_spec(c, cfg.psi);
    cfg.alpha_bar = c.get_double("alpha_bar", cfg.alpha_bar);
    cfg.sigma0 = c.get_double("sigma0", cfg.sigma0);
    cfg.family_size = static_cast<int>(c.get_int("schauder.family_size", cfg.family_size));
    cfg.amplitude = c.get_double("schauder.amplitude", cfg.amplitude);
    cfg.A0 = c.get_double("schauder.A0", cfg.A0);
    cfg.f_scale = c.get_double("rhs.norm", cfg.f_scale);
    if (!(cfg.f_scale > 0.0)) throw InputError("rhs.norm must be positive");
    return cfg;
}

LocalBoundednessConfig local_boundedness_config(const Config& c) {
    c.check_keys(with_common({"boundedness.sigma", "boundedness.instances", "boundedness.seed"}));
    LocalBoundednessConfig cfg;
    common(c, cfg);
    cfg.sigma_list = c.get_list("boundedness.sigma", cfg.sigma_list);
    for (double s : cfg.sigma_list)
        if (!(s > 0.0 && s < 2.0)) throw InputError("boundedness.sigma values must lie in (0, 2)");
    cfg.instances = static_cast<int>(c.get_int("boundedness.instances", cfg.instances));
    const long seed = c.get_int("boundedness.seed", static_cast<long>(cfg.seed));
    if (seed < 0) throw InputError("boundedness.seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    return cfg;
}

SolveJob solve_job(const Config& c) {
    c.check_keys({"output.dir", "output.name", "grid.h", "window", "solver.method", "solver.tol",
                  "solver.max_iter", "solver.tail_tol", "lambda", "Lambda", "phi.kind", "phi.params",
                  "operator.variant", "operator.shape", "rhs.constant", "exterior.kind",
                  "exterior.offset", "exterior.amplitude", "exterior.m", "exterior.zero_radius"});
    SolveJob job;
    auto& pb = job.problem;
    const double lambda = c.get_double("lambda", 1.0);
    const double Lambda = c.get_double("Lambda", 2.0);
    if (!(lambda > 0.0 && Lambda >= lambda)) throw InputError("need 0 < lambda <= Lambda");
    const auto phi = scale_spec(c, ScaleSpec{}).build();

    const std::string variant = c.get_string("operator.variant", "pucci-plus");
    if (variant == "pucci-plus" || variant == "pucci-minus") {
        pb.op = OperatorSpec::pucci(variant == "pucci-plus" ? Variant::pucci_plus : Variant::pucci_minus,
                                    phi, lambda, Lambda);
    } else if (variant == "linear") {
        const double b = c.get_double("operator.shape", lambda);
        if (!(b >= lambda && b <= Lambda)) throw InputError("operator.shape must lie in [lambda, Lambda]");
        pb.op = OperatorSpec::linear(Kernel(phi, lambda, Lambda, [b](double) { return b; }));
    } else {
        throw InputError("operator.variant must be pucci-plus, pucci-minus or linear");
    }

    const auto win = c.get_list("window", {-1.0, 1.0});
    if (win.size() != 2 || !(win[0] < win[1])) throw InputError("window needs two increasing values");
    pb.window = {win[0], win[1]};
    pb.h = c.get_double("grid.h", 1.0 / 64);
    const double cells = pb.window.diameter() / pb.h;
    if (!(pb.h > 0.0) || std::abs(cells - std::round(cells)) > 1e-9 * cells || std::round(cells) < 2)
        throw InputError("grid.h must divide the window into at least two cells");

    job.rhs = c.get_double("rhs.constant", 0.0);
    if (job.rhs != 0.0) pb.f = [v = job.rhs](double) { return v; };

    const std::string ext = c.get_string("exterior.kind", "zero");
    if (ext == "zero") {
        pb.g = Exterior::zero();
    } else if (ext == "constant") {
        pb.g = Exterior::constant(c.get_double("exterior.offset", 0.0));
    } else if (ext == "sign-sin") {
        const double m = c.get_double("exterior.m", 1.0);
        const double r0 = c.get_double("exterior.zero_radius", 0.0);
        if (!(m >= 0.0) || !(r0 >= 0.0)) throw InputError("exterior.m and exterior.zero_radius must be >= 0");
        pb.g = Exterior::sign_sin(m, r0, c.get_double("exterior.amplitude", 1.0));
        pb.g.offset = c.get_double("exterior.offset", 0.0);
    } else {
        throw InputError("exterior.kind must be zero, constant or sign-sin");
    }

    job.options = solve_options(c, SolveOptions{SolveMethod::policy_iteration, 1e-10, 200, 1e-11});
    job.name = c.get_string("output.name", job.name);
    if (job.name.empty() || job.name.find('/') != std::string::npos)
        throw InputError("output.name must be a plain file stem");
    return job;
}

std::string solve_summary_json(const SolveJob& job, const SolveReport& rep) {
    nlohmann::ordered_json j;
    j["name"] = job.name;
    j["method"] = rep.method;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["final_residual"] = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    j["tau"] = rep.tau;
    j["h"] = job.problem.h;
    j["window"] = {job.problem.window.lo, job.problem.window.hi};
    j["exterior"] = job.problem.g.kind_name();
    j["rhs"] = job.rhs;
    j["residual_history"] = rep.residual_history;
    return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const std::string& name, const Config& c, int jobs) {
    const std::string declared = c.get_string("experiment", name);
    if (declared != name)
        throw InputError("config is for experiment '" + declared + "', not '" + name + "'");
    if (name == "counterexample") {
        auto cfg = counterexample_config(c);
        if (jobs > 0) cfg.jobs = jobs;
        return run_counterexample(cfg);
    }
    if (name == "ek-sweep") {
        auto cfg = ek_sweep_config(c);
        if (jobs > 0) cfg.jobs = jobs;
        return run_ek_sweep(cfg);
    }
    if (name == "schauder") {
        auto cfg = schauder_config(c);
        if (jobs > 0) cfg.jobs = jobs;
        return run_schauder(cfg);
    }
    if (name == "local-boundedness") {
        auto cfg = local_boundedness_config(c);
        if (jobs > 0) cfg.jobs = jobs;
        return run_local_boundedness(cfg);
    }
    throw InputError("unknown experiment '" + name + "'");
}

}  // namespace varorder
