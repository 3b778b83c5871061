// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "varorder/grid_function.hpp"
#include "varorder/kernel.hpp"

namespace varorder {

/// Split-quadrature controls. h_cut = 0 means "use the grid spacing"; R_far
/// only matters for callable exteriors (0 picks it from the tail bound).
struct QuadratureSpec {
    double h_cut = 0.0;
    double R_far = 0.0;
    double tol = 1e-9;
};

enum class Variant { linear, pucci_plus, pucci_minus, bellman };

/// Member a of a Bellman family: K_a(x, y) = b_a(x) * kernel(y), plus offset c_a(x).
/// Empty callables stand for b_a = 1 and c_a = 0.
struct BellmanMember {
    Kernel kernel;
    RealFn x_multiplier;
    RealFn offset;

    double multiplier_at(double x) const { return x_multiplier ? x_multiplier(x) : 1.0; }
    double offset_at(double x) const { return offset ? offset(x) : 0.0; }
};

struct OperatorSpec {
    Variant variant = Variant::pucci_plus;
    ScaleFunction phi;
    double lambda = 1.0;
    double Lambda = 1.0;
    Kernel kernel;                      ///< linear variant
    std::vector<BellmanMember> family;  ///< bellman variant

    static OperatorSpec linear(const Kernel& k);
    static OperatorSpec pucci(Variant plus_or_minus, const ScaleFunction& phi, double lambda,
                              double Lambda);
    static OperatorSpec bellman(std::vector<BellmanMember> family, double lambda, double Lambda);
    bool x_dependent() const;
    void validate() const;
};

/// Labelling of y -> s(x + y) + s(x - y) + 2 for a standard exterior (one
/// label when it does not oscillate), with the per-label increment
/// exterior(x + y) + exterior(x - y) - 2 ux.
FarField exterior_increment_field(const Exterior& g, double x);
std::vector<double> exterior_label_increments(const Exterior& g, double ux);

/// u(x + y) + u(x - y) - 2 u(x)
double delta(const GridFunction& u, double x, double y);

double eval_linear(const GridFunction& u, const Kernel& K, double x, const QuadratureSpec& q = {});

/// sign = pucci_plus: int (Lambda d+ - lambda d-) K_phi;  pucci_minus: int (lambda d+ - Lambda d-) K_phi
double eval_pucci(const GridFunction& u, Variant sign, const ScaleFunction& phi, double lambda,
                  double Lambda, double x, const QuadratureSpec& q = {});

double eval_bellman(const GridFunction& u, const OperatorSpec& op, double x,
                    const QuadratureSpec& q = {});

double eval_operator(const GridFunction& u, const OperatorSpec& op, double x,
                     const QuadratureSpec& q = {});

struct SandwichReport {
    double lower = 0.0;   ///< M-(u - v)(x)
    double middle = 0.0;  ///< I(u, x) - I(v, x)
    double upper = 0.0;   ///< M+(u - v)(x)
    double slack_lower = 0.0;
    double slack_upper = 0.0;
    bool ok = false;
};

SandwichReport ellipticity_sandwich_check(const OperatorSpec& op, const GridFunction& u,
                                          const GridFunction& v, double x,
                                          const QuadratureSpec& q = {});

/// int |u(y)| c_phi / (1 + |y| phi(|y|)) dy over the real line.
double weight_norm(const GridFunction& u, const ScaleFunction& phi, double tol = 1e-10);

struct PNValues {
    double P = 0.0;
    double N = 0.0;
};

/// P, N = int (delta(u, x_ref + shift, y) - delta(u, x_ref, y))_{+,-} K_phi(y) dy.
PNValues pn_functionals(const GridFunction& u, const ScaleFunction& phi, double x_ref,
                        double shift, const QuadratureSpec& q = {});

/// M+ of dist(., [-1/4, 1/4])^p at x, evaluated without a grid. tol is relative
/// to bar(x) / phi(dist(x, [-1/4, 1/4])) when that exceeds 1.
double pucci_plus_barrier(const ScaleFunction& phi, double lambda, double Lambda, double p,
                          double x, double tol = 1e-10);

}  // namespace varorder
