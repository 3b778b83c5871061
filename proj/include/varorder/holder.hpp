// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>

#include "varorder/grid_function.hpp"
#include "varorder/scale.hpp"

namespace varorder {

/// Closed interval [lo, hi]. A node x belongs to it iff lo - h/2 <= x < hi + h/2.
struct Window {
    double lo = -1.0;
    double hi = 1.0;
    double diameter() const { return hi - lo; }
};

/// Node index range [first, last] of u covered by w. Throws InputError when w
/// is not inside the grid span (up to h/2) or holds no node.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t count() const { return last - first + 1; }
};
IndexRange window_nodes(const GridFunction& u, const Window& w);

/// Central second-order differences, one-sided second-order at the grid ends.
GridFunction fd_derivative(const GridFunction& u, int order);

struct SeminormReport {
    double value = 0.0;
    double x = 0.0;  ///< attaining pair, x < y
    double y = 0.0;
    int d = 0;
    double pair_floor = 0.0;  ///< smallest admitted separation |x - y|
};

/// sup over node pairs in w with |x - y| >= 2h of
///   |D^d u(x) - D^d u(y)| / (psi(|x - y|) |x - y|^{-d}),  d = floor(m_psi).
SeminormReport seminorm(const GridFunction& u, const Modulus& psi, const Window& w);
SeminormReport seminorm(const GridFunction& u, const ProductModulus& pm, const Window& w);

/// sum_{i<=d} sup |D^i u| + seminorm
double norm_plain(const GridFunction& u, const Modulus& psi, const Window& w);
/// sum_{i<=d} diam^i sup |D^i u| + psi(diam) seminorm
double norm_nondim(const GridFunction& u, const Modulus& psi, const Window& w);
/// sum_{i<=d} sup dist_x^i |D^i u| + sup psi(min(dist_x, dist_y)) |...| / (psi(r) r^{-d})
double norm_interior(const GridFunction& u, const Modulus& psi, const Window& w);

struct IsometryReport {
    double seminorm_original = 0.0;  ///< [u]_{psi; B_rho(z)}
    double seminorm_rescaled = 0.0;  ///< [u(z + rho .)/psi(rho)]_{psi_bar; B_1}
    double seminorm_rel_error = 0.0;
    double norm_original = 0.0;  ///< non-dimensional norm on B_rho(z)
    double norm_rescaled = 0.0;  ///< non-dimensional norm of u(z + rho .) on B_1
    double norm_rel_error = 0.0;
};

/// Compares seminorms and non-dimensional norms on B_rho(z) with their rescaled
/// counterparts on B_1, built on the matched grid x_bar = (x - z)/rho. Requires
/// z on a node and rho/h a positive integer.
IsometryReport rescale_isometry_check(const GridFunction& u, const Modulus& psi, double rho,
                                      double z);

struct InterpolationReport {
    double lhs = 0.0;         ///< non-dimensional psi1 norm
    double sup_norm = 0.0;    ///< sup |u| on the window
    double psi2_norm = 0.0;   ///< non-dimensional psi2 norm
    double required_c = 0.0;  ///< smallest C with lhs <= C sup + eps psi2_norm
};

/// Requires M_{psi1} < m_{psi2}.
InterpolationReport interpolation_check(const GridFunction& u, const Modulus& psi1,
                                        const Modulus& psi2, double eps, const Window& w);

}  // namespace varorder
