// SPDX-License-Identifier: MIT
#include "varorder/scale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varorder/error.hpp"
#include "varorder/quadrature.hpp"

namespace varorder {
namespace {

constexpr double kAPadding = 1.05;
constexpr double kExactTol = 1e-9;
constexpr double kCacheTol = 1e-13;
constexpr double kGradedFloor = 1e-60;

void require_exponent(double s, const char* what) {
    if (!(s > 0.0 && s < 2.0)) {
        std::ostringstream os;
        os << what << " must lie in (0, 2), got " << s;
        throw InputError(os.str());
    }
}

void require_count(const std::string& kind, const std::vector<double>& p, std::size_t n) {
    if (p.size() != n) {
        std::ostringstream os;
        os << kind << " expects " << n << " parameter(s), got " << p.size();
        throw InputError(os.str());
    }
}

std::shared_ptr<const RealFn> share(RealFn f) {
    return std::make_shared<const RealFn>(std::move(f));
}

// phi(r) = exp(logB(1) - logB(r^-2)) for a Bernstein function given by its log.
RealFn from_log_bernstein(std::function<double(double)> log_b_of_log_lambda) {
    const double at_one = log_b_of_log_lambda(0.0);
    return [log_b = std::move(log_b_of_log_lambda), at_one](double r) {
        return std::exp(at_one - log_b(-2.0 * std::log(r)));
    };
}

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

}  // namespace

double graded_integral(const RealFn& g, double upper, double sigma2, double tol, double lower) {
    const double p = 2.0 / (2.0 - sigma2);
    // Near sigma2 = 2 the map s -> upper s^p underflows long before s = 0, so
    // below a floor the integrand is continued as a power law with its local slope.
    double below = 0.0;
    if (lower <= 0.0) {
        lower = kGradedFloor * upper;
        const double g1 = g(lower), g2 = g(2.0 * lower);
        if (g1 > 0.0 && g2 > 0.0) {
            const double exponent = std::log(g2 / g1) / std::log(2.0) + 1.0;
            if (!(exponent > 0.0)) throw QuadratureError("integrand is not integrable at 0");
            below = g1 * lower / exponent;
        }
    }
    const double s_lo = std::pow(lower / upper, 1.0 / p);
    auto integrand = [&](double s) {
        const double r = upper * std::pow(s, p);
        return g(r) * upper * p * std::pow(s, p - 1.0);
    };
    quad::Options opts;
    opts.abs_tol = tol;
    opts.rel_tol = 1e-14;
    return below + quad::integrate(integrand, s_lo, 1.0, opts).value;
}

double estimate_weak_scaling_constant(const RealFn& f, double sigma1, double sigma2,
                                      const WeakScalingGrid& grid) {
    const double lmin = std::log10(grid.r_min);
    const double lmax = std::log10(grid.r_max);
    const int n = static_cast<int>(std::lround((lmax - lmin) * grid.points_per_decade)) + 1;
    double min_upper = INFINITY;
    double min_lower = INFINITY;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = std::log(10.0) * (lmin + (lmax - lmin) * i / (n - 1));
        const double l = std::log(f(std::exp(t)));
        const double up = l - sigma2 * t;
        const double lo = sigma1 * t - l;
        min_upper = std::min(min_upper, up);
        min_lower = std::min(min_lower, lo);
        worst = std::max({worst, up - min_upper, lo - min_lower});
    }
    return std::exp(worst);
}

ScaleFunction make_scale_function(const std::string& kind, const std::vector<double>& params) {
    ScaleFunction phi;
    phi.kind = kind;
    phi.params = params;
    if (kind == "power") {
        require_count(kind, params, 1);
        const double s = params[0];
        require_exponent(s, "sigma");
        phi.sigma1 = phi.sigma2 = s;
        phi.eval = share([s](double r) { return std::pow(r, s); });
    } else if (kind == "two-power") {
        require_count(kind, params, 2);
        const double s1 = params[0], s2 = params[1];
        require_exponent(s1, "sigma1");
        require_exponent(s2, "sigma2");
        if (s1 > s2) throw InputError("two-power requires sigma1 <= sigma2");
        phi.sigma1 = s1;
        phi.sigma2 = s2;
        phi.eval = share([s1, s2](double r) {
            return 2.0 / (std::pow(r, -s1) + std::pow(r, -s2));
        });
    } else if (kind == "relativistic") {
        require_count(kind, params, 2);
        const double s = params[0], m = params[1];
        require_exponent(s, "sigma");
        if (s > 1.0) throw InputError("relativistic requires sigma <= 1");
        if (!(m >= 0.0) || !std::isfinite(m)) throw InputError("relativistic mass must be >= 0");
        phi.sigma1 = s;
        phi.sigma2 = m > 0.0 ? 1.0 : s;
        if (m == 0.0) {
            phi.eval = share([s](double r) { return std::pow(r, s); });
        } else {
            const double mu = std::pow(m, 2.0 / s);
            auto bern = [s, m, mu](double lambda) {
                return m * std::expm1(0.5 * s * std::log1p(lambda / mu));
            };
            const double at_one = bern(1.0);
            phi.eval = share([bern, at_one](double r) { return at_one / bern(1.0 / (r * r)); });
        }
    } else if (kind == "power-log-lower" || kind == "power-log-upper") {
        require_count(kind, params, 2);
        const double s1 = params[0], s2 = params[1];
        require_exponent(s1, "sigma1");
        require_exponent(s2, "sigma2");
        const double gap = s2 - s1;
        if (!(gap > 0.0 && gap < 2.0)) throw InputError(kind + " requires sigma2 - sigma1 in (0, 2)");
        phi.sigma1 = s1;
        phi.sigma2 = s2;
        const bool lower = kind == "power-log-lower";
        const double lead = lower ? s1 : s2;
        const double k = lower ? 0.5 * gap : -0.5 * gap;
        phi.eval = share(from_log_bernstein([lead, k](double log_lambda) {
            const double lambda = std::exp(log_lambda);
            return 0.5 * lead * log_lambda + k * std::log(std::log1p(lambda));
        }));
    } else {
        throw InputError("unknown scale function kind '" + kind + "'");
    }

    const double a_est = estimate_weak_scaling_constant(*phi.eval, phi.sigma1, phi.sigma2);
    phi.a = a_est <= 1.0 + kExactTol ? 1.0 : kAPadding * a_est;
    phi.c_phi = compute_c_phi(phi, kCacheTol);
    return phi;
}

double compute_c_phi(const ScaleFunction& phi, double tol) {
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    auto g = [&](double r) { return r / phi(r); };
    // |d(1/I)| = |dI| / I^2, so a coarse pass fixes the integral tolerance.
    const double rough = graded_integral(g, 1.0, phi.sigma2, 1e-6);
    const double itol = std::max(tol * rough * rough * 0.5, 1e-16);
    return 1.0 / graded_integral(g, 1.0, phi.sigma2, itol);
}

WeakScalingReport verify_weak_scaling(const ScaleFunction& phi, const WeakScalingGrid& grid) {
    WeakScalingReport rep;
    rep.declared_a = phi.a;
    rep.worst_ratio = estimate_weak_scaling_constant(*phi.eval, phi.sigma1, phi.sigma2, grid);
    rep.ok = rep.worst_ratio <= phi.a * (1.0 + 1e-12);
    return rep;
}

ScaleFunction rescaled_scale(const ScaleFunction& phi, double rho) {
    if (!(rho > 0.0)) throw InputError("rescaling factor must be positive");
    ScaleFunction out = phi;
    const double base = phi(rho);
    auto inner = phi.eval;
    out.eval = share([inner, rho, base](double r) { return (*inner)(rho * r) / base; });
    out.rho = phi.rho * rho;
    out.c_phi = compute_c_phi(out, kCacheTol);
    return out;
}

double scaling_factor(const ScaleFunction& phi, double rho, double tol) {
    if (!(rho > 0.0 && rho <= 1.0)) throw InputError("scaling factor needs rho in (0, 1]");
    if (rho == 1.0) return 1.0;
    const ScaleFunction bar = rescaled_scale(phi, rho);
    return phi(rho) * compute_c_phi(bar, tol) / compute_c_phi(phi, tol);
}

double capital_phi(const ScaleFunction& phi, double R, double tol) {
    if (!(R > 0.0)) throw InputError("R must be positive");
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    const double phiR = phi(R);
    auto g1 = [&](double r) { return r / phi(r); };
    auto g2 = [&](double r) { return r * phiR / phi(r * R); };
    const double i1 = graded_integral(g1, 1.0, phi.sigma2, 1e-6);
    const double i2 = graded_integral(g2, 1.0, phi.sigma2, 1e-6);
    const double est = phiR * i1 / i2;
    // relative error of the ratio is bounded by the sum of relative errors
    const double rel = tol / std::max(est, 1e-300) * 0.25;
    const double j1 = graded_integral(g1, 1.0, phi.sigma2, std::max(rel * i1, 1e-17));
    const double j2 = graded_integral(g2, 1.0, phi.sigma2, std::max(rel * i2, 1e-17));
    return phiR * j1 / j2;
}

double log_derivative_bound(const ScaleFunction& phi, const WeakScalingGrid& grid) {
    const double lmin = std::log(grid.r_min);
    const double lmax = std::log(grid.r_max);
    const int n = static_cast<int>(std::lround((lmax - lmin) / std::log(10.0) *
                                               grid.points_per_decade)) + 1;
    const double dt = 1e-5;
    double best = -INFINITY;
    for (int i = 0; i < n; ++i) {
        const double t = lmin + (lmax - lmin) * i / (n - 1);
        const double slope =
            (std::log(phi(std::exp(t + dt))) - std::log(phi(std::exp(t - dt)))) / (2 * dt);
        best = std::max(best, slope);
    }
    return best;
}

// ---------------------------------------------------------------------------

int Modulus::derivative_order() const {
    if (is_integer(m_index)) {
        std::ostringstream os;
        os << "modulus '" << kind << "' has integer lower index " << m_index;
        throw InputError(os.str());
    }
    return static_cast<int>(std::floor(m_index));
}

IndexPair index_catalogue(const std::string& kind, const std::vector<double>& params) {
    auto positive = [](double v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError("modulus exponents must be positive");
    };
    if (kind == "power" || kind == "power-log") {
        require_count(kind, params, 1);
        positive(params[0]);
        return {params[0], params[0]};
    }
    if (kind == "two-power") {
        require_count(kind, params, 2);
        positive(params[0]);
        positive(params[1]);
        return {std::min(params[0], params[1]), std::max(params[0], params[1])};
    }
    throw InputError("unknown modulus kind '" + kind + "'");
}

Modulus make_modulus(const std::string& kind, const std::vector<double>& params) {
    const IndexPair idx = index_catalogue(kind, params);
    Modulus psi;
    psi.kind = kind;
    psi.params = params;
    psi.m_index = idx.m;
    psi.M_index = idx.M;
    if (kind == "power") {
        const double al = params[0];
        psi.eval = share([al](double r) { return std::pow(r, al); });
    } else if (kind == "power-log") {
        const double al = params[0];
        const double l2 = std::log(2.0);
        psi.eval = share([al, l2](double r) {
            return std::pow(r, al) * std::abs(std::log(2.0 / r)) / l2;
        });
    } else {
        const double al = params[0], be = params[1];
        psi.eval = share([al, be](double r) { return 0.5 * (std::pow(r, al) + std::pow(r, be)); });
    }
    return psi;
}

Modulus custom_modulus(std::string name, RealFn f, double m_index, double M_index) {
    Modulus psi;
    psi.kind = std::move(name);
    psi.m_index = m_index;
    psi.M_index = M_index;
    psi.eval = share(std::move(f));
    return psi;
}

Modulus rescaled_modulus(const Modulus& psi, double rho) {
    if (!(rho > 0.0)) throw InputError("rescaling factor must be positive");
    Modulus out = psi;
    const double base = psi(rho);
    auto inner = psi.eval;
    out.eval = share([inner, rho, base](double r) { return (*inner)(rho * r) / base; });
    return out;
}

Modulus phi_plus_alpha(const ScaleFunction& phi, double alpha) {
    auto f = phi.eval;
    return custom_modulus(phi.kind + "+alpha",
                          [f, alpha](double r) { return (*f)(r) * std::pow(r, alpha); },
                          phi.sigma1 + alpha, phi.sigma2 + alpha);
}

IndexPair estimate_indices_diagnostic(const Modulus& psi, double r_min, int points_per_decade) {
    const double lmin = std::log(r_min);
    const int n = static_cast<int>(std::lround(-std::log10(r_min) * points_per_decade)) + 1;
    IndexPair out{INFINITY, -INFINITY};
    double prev_t = lmin;
    double prev_l = std::log(psi(r_min));
    for (int i = 1; i < n; ++i) {
        const double t = lmin * (1.0 - static_cast<double>(i) / (n - 1));
        const double l = std::log(psi(std::exp(t)));
        const double slope = (l - prev_l) / (t - prev_t);
        out.m = std::min(out.m, slope);
        out.M = std::max(out.M, slope);
        prev_t = t;
        prev_l = l;
    }
    return out;
}

ProductModulus make_product(const ScaleFunction& phi, const Modulus& psi) {
    ProductModulus pm;
    pm.phi = phi;
    pm.psi = psi;
    auto f = phi.eval;
    auto g = psi.eval;
    pm.modulus = custom_modulus(phi.kind + "*" + psi.kind,
                                [f, g](double r) { return (*f)(r) * (*g)(r); },
                                phi.sigma1 + psi.m_index, phi.sigma2 + psi.M_index);
    pm.d = pm.modulus.derivative_order();
    if (pm.d > 2) throw InputError("product modulus needs more than two derivatives");
    return pm;
}

double admissible_alpha(const ScaleFunction& phi, const Modulus& psi, double alpha_bar) {
    const double m_phi = phi.sigma1;
    const double m_prod = m_phi + psi.m_index;
    const double frac = m_prod - std::floor(m_prod);
    const double alpha = psi.m_index - 0.5 * frac;
    std::ostringstream os;
    if (!(alpha > 0.0)) {
        os << "admissible alpha " << alpha << " is not positive (m_psi=" << psi.m_index
           << ", m_phipsi=" << m_prod << ")";
        throw InputError(os.str());
    }
    const bool chain = std::floor(m_phi + alpha_bar) == std::floor(m_prod) &&
                       std::floor(m_prod) < m_phi + alpha && m_phi + alpha < m_prod;
    if (!chain) {
        os << "alpha " << alpha << " violates floor(m_phi+alpha_bar) = floor(m_phipsi) < "
           << "m_phi+alpha < m_phipsi for alpha_bar=" << alpha_bar;
        throw InputError(os.str());
    }
    return alpha;
}

std::string IndexReport::summary() const {
    std::ostringstream os;
    for (const auto& c : clauses) os << (c.ok ? "pass " : "FAIL ") << c.name << ": " << c.detail << "\n";
    return os.str();
}

IndexReport validate_index_assumptions(const ScaleFunction& phi, const Modulus& psi,
                                       double alpha_bar, double sigma0) {
    IndexReport rep;
    auto add = [&](std::string name, bool ok, bool dep, std::string detail) {
        rep.clauses.push_back({std::move(name), ok, dep, std::move(detail)});
    };
    auto fmt = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    const double m_prod = phi.sigma1 + psi.m_index;
    const double M_prod = phi.sigma2 + psi.M_index;

    add("phi_indices", phi.sigma1 >= sigma0 && phi.sigma2 < 2.0, false,
        "[" + fmt(phi.sigma1) + ", " + fmt(phi.sigma2) + "] within [" + fmt(sigma0) + ", 2)");
    add("psi_indices", psi.m_index > 0.0 && psi.M_index < alpha_bar, true,
        "[" + fmt(psi.m_index) + ", " + fmt(psi.M_index) + "] within (0, " + fmt(alpha_bar) + ")");
    const bool no_int = std::floor(m_prod) == std::floor(M_prod) && !is_integer(m_prod) &&
                        !is_integer(M_prod);
    add("product_no_integer", no_int, false,
        "[" + fmt(m_prod) + ", " + fmt(M_prod) + "] avoids the integers");
    add("phi_plus_alpha_bar_non_integer", !is_integer(phi.sigma1 + alpha_bar), true,
        "m_phi + alpha_bar = " + fmt(phi.sigma1 + alpha_bar));
    add("floor_match", std::floor(phi.sigma1 + alpha_bar) == std::floor(m_prod), true,
        "floor(" + fmt(phi.sigma1 + alpha_bar) + ") vs floor(" + fmt(m_prod) + ")");
    rep.ok = std::all_of(rep.clauses.begin(), rep.clauses.end(), [](const auto& c) { return c.ok; });
    return rep;
}

}  // namespace varorder
