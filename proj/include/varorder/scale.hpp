// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace varorder {

using RealFn = std::function<double(double)>;

/// Order function phi of a variable-order kernel together with its
/// weak-scaling certificate:
///   a^{-1} (R/r)^sigma1 <= phi(R)/phi(r) <= a (R/r)^sigma2,  0 < r <= R,
/// and the cached normalizing constant c_phi = (int_0^1 r/phi(r) dr)^{-1}.
///
/// Catalogue kinds (all normalized so that phi(1) = 1):
///   power            [sigma]           phi(r) = r^sigma
///   two-power        [s1, s2]          phi(r) = 2 / (r^-s1 + r^-s2)
///   relativistic     [sigma, m]        from (l + m^{2/sigma})^{sigma/2} - m
///   power-log-lower  [s1, s2]          from l^{s1/2} log(1+l)^{(s2-s1)/2}
///   power-log-upper  [s1, s2]          from l^{s2/2} log(1+l)^{(s1-s2)/2}
/// where each Bernstein function B(l) is turned into a scale function by
/// phi(r) = B(1) / B(r^-2).
struct ScaleFunction {
    std::string kind;
    std::vector<double> params;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double a = 1.0;
    double c_phi = 0.0;
    double rho = 1.0;  ///< accumulated rescaling factor (1 for catalogue entries)
    std::shared_ptr<const RealFn> eval;

    double operator()(double r) const { return (*eval)(r); }
};

struct WeakScalingGrid {
    double r_min = 1e-6;
    double r_max = 1e6;
    int points_per_decade = 64;
};

struct WeakScalingReport {
    bool ok = false;
    double worst_ratio = 1.0;  ///< smallest a that certifies every sampled pair
    double declared_a = 1.0;
};

ScaleFunction make_scale_function(const std::string& kind, const std::vector<double>& params);

/// Smallest a (>= 1) certifying the weak-scaling bounds of f on the grid.
double estimate_weak_scaling_constant(const RealFn& f, double sigma1, double sigma2,
                                      const WeakScalingGrid& grid = {});

double compute_c_phi(const ScaleFunction& phi, double tol);

WeakScalingReport verify_weak_scaling(const ScaleFunction& phi, const WeakScalingGrid& grid = {});

/// phi_bar(r) = phi(rho r) / phi(rho); keeps (sigma1, sigma2, a).
ScaleFunction rescaled_scale(const ScaleFunction& phi, double rho);

/// phi(rho) c_{phi_bar} / c_phi for rho in (0, 1].
double scaling_factor(const ScaleFunction& phi, double rho, double tol = 1e-12);

/// Phi(R) = phi(R) (int_0^1 r/phi(r) dr) (int_0^1 r phi(R)/phi(rR) dr)^{-1}.
double capital_phi(const ScaleFunction& phi, double R, double tol = 1e-12);

/// Diagnostic only: max over a log grid of r phi'(r) / phi(r).
double log_derivative_bound(const ScaleFunction& phi, const WeakScalingGrid& grid = {});

/// Integral of g over (lower, upper] with the graded substitution r = upper * s^p,
/// p = 2 / (2 - sigma2), which flattens an r^{1 - sigma2} endpoint at 0. With
/// lower = 0 the piece below 1e-60 * upper is continued as a power law.
double graded_integral(const RealFn& g, double upper, double sigma2, double tol, double lower = 0.0);

// ---------------------------------------------------------------------------

/// Modulus of continuity psi with psi(1) = 1 and its indices.
///
/// Catalogue kinds:
///   power      [alpha]        r^alpha
///   power-log  [alpha]        r^alpha |log(2/r)| / log 2
///   two-power  [alpha, beta]  (r^alpha + r^beta) / 2
/// Products and rescalings built from these carry closed-form indices.
struct Modulus {
    std::string kind;
    std::vector<double> params;
    double m_index = 0.0;
    double M_index = 0.0;
    std::shared_ptr<const RealFn> eval;

    double operator()(double r) const { return (*eval)(r); }

    /// Number of derivatives d = floor(m) used by the seminorm. Throws
    /// InputError when m is an integer.
    int derivative_order() const;
};

struct IndexPair {
    double m = 0.0;
    double M = 0.0;
};

IndexPair index_catalogue(const std::string& kind, const std::vector<double>& params);

Modulus make_modulus(const std::string& kind, const std::vector<double>& params);

/// A modulus with caller-supplied indices (no catalogue validation).
Modulus custom_modulus(std::string name, RealFn f, double m_index, double M_index);

/// psi_bar(r) = psi(rho r) / psi(rho); same indices.
Modulus rescaled_modulus(const Modulus& psi, double rho);

/// phi(r) r^alpha, the modulus of C^{phi + alpha}.
Modulus phi_plus_alpha(const ScaleFunction& phi, double alpha);

/// Diagnostic only: extreme log-slopes of a modulus over a grid in (0, 1].
IndexPair estimate_indices_diagnostic(const Modulus& psi, double r_min = 1e-6,
                                      int points_per_decade = 64);

struct ProductModulus {
    ScaleFunction phi;
    Modulus psi;
    int d = 0;
    Modulus modulus;  ///< r -> phi(r) psi(r) with m = sigma1 + m_psi
};

ProductModulus make_product(const ScaleFunction& phi, const Modulus& psi);

inline constexpr double kDefaultAlphaBar = 0.1;

/// alpha = m_psi - (m_phipsi - floor(m_phipsi)) / 2, checked against
///   floor(m_phi + alpha_bar) = floor(m_phipsi) < m_phi + alpha < m_phipsi.
double admissible_alpha(const ScaleFunction& phi, const Modulus& psi,
                        double alpha_bar = kDefaultAlphaBar);

struct IndexClause {
    std::string name;
    bool ok = false;
    bool depends_on_alpha_bar = false;
    std::string detail;
};

struct IndexReport {
    bool ok = false;
    std::vector<IndexClause> clauses;
    std::string summary() const;
};

/// Checks the five index clauses:
///   I_phi in [sigma0, 2), I_psi in (0, alpha_bar), I_phipsi has no integer,
///   m_phi + alpha_bar not an integer, floor(m_phi + alpha_bar) = floor(m_phipsi).
IndexReport validate_index_assumptions(const ScaleFunction& phi, const Modulus& psi,
                                       double alpha_bar = kDefaultAlphaBar,
                                       double sigma0 = 0.0);

}  // namespace varorder
