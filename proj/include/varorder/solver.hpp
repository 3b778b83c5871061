// SPDX-License-Identifier: MIT
#pragma once

#include <string>
#include <vector>

#include "varorder/holder.hpp"
#include "varorder/operators.hpp"

namespace varorder {

/// I(u) = f in the open window (lo, hi), u = g outside. Unknowns sit at
/// lo + i h, i = 1..N-1 with N = (hi - lo)/h; the closed endpoints carry g.
struct DirichletProblem {
    OperatorSpec op;
    RealFn f;  ///< empty means f = 0
    Exterior g;
    Window window{-1.0, 1.0};
    double h = 1.0 / 64;
};

/// Cell weights w_j = 2 int_{(j-1/2)h}^{(j+1/2)h} y^2 K / (jh)^2 (the first cell
/// also takes the inner part from 0), one table per kernel of the operator.
struct WeightTable {
    double h = 0.0;
    std::vector<std::vector<double>> per_kernel;  ///< [kernel][j], index 0 unused
};

WeightTable discretize_weights(const OperatorSpec& op, double h, std::size_t count,
                               double tol = 1e-13);

/// Monotone discretization of a Dirichlet problem:
///   (I u)_i = sum_j m(d_j) w_j d_j + sum_l m(d_l) 2 M_{i,l} d_l
/// with d_j = u_{i+j} + u_{i-j} - 2 u_i over j <= J_i = max(i, N - i) and the
/// exact exterior tail beyond (J_i + 1/2) h carried by label masses M_{i,l}.
class DiscreteOperator {
public:
    DiscreteOperator(const DirichletProblem& problem, double tail_tol = 1e-11);

    std::size_t unknowns() const { return n_; }
    double node(std::size_t k) const { return lo_ + static_cast<double>(k + 1) * h_; }
    const WeightTable& weights() const { return weights_; }
    const std::vector<double>& rhs() const { return f_; }
    const Exterior& exterior() const { return g_; }
    Window window() const { return {lo_, hi_}; }
    double h() const { return h_; }

    /// (I u) at unknown k.
    double apply(const std::vector<double>& u, std::size_t k) const;
    std::vector<double> apply_all(const std::vector<double>& u) const;
    double residual(const std::vector<double>& u) const;  ///< sup |I u - f|

    /// Largest pseudo-time step keeping the explicit update monotone, times 0.9.
    double cfl_tau() const;

    /// Policy-iteration step: linearize at u and solve the frozen linear system.
    std::vector<double> policy_step(const std::vector<double>& u) const;

    /// Embed unknowns into a grid function on [lo, hi] with g at the endpoints.
    GridFunction to_grid(const std::vector<double>& u) const;

private:
    struct Member {
        std::size_t table = 0;
        std::vector<double> mult;    // b_a(x_k)
        std::vector<double> offset;  // c_a(x_k)
        std::vector<std::vector<double>> tail_mass;  // [k][label]
    };

    double value(const std::vector<double>& u, long idx) const;
    double term(double d) const;
    double apply_member(const Member& m, const std::vector<double>& u, std::size_t k) const;

    OperatorSpec op_;
    Exterior g_;
    double lo_, hi_, h_;
    std::size_t N_, n_;
    WeightTable weights_;
    std::vector<Member> members_;
    std::vector<double> ext_;  // g at lo + idx h for idx in [-N, 2N]
    std::vector<double> label_values_;
    std::vector<double> f_;
};

enum class SolveMethod { policy_iteration, pseudo_time };

struct SolveOptions {
    SolveMethod method = SolveMethod::policy_iteration;
    double tol = 1e-8;
    long max_iter = 200;
    double tail_tol = 1e-11;
};

struct SolveReport {
    GridFunction u;
    std::vector<double> residual_history;
    long iterations = 0;
    double tau = 0.0;  ///< pseudo-time step (0 for policy iteration)
    bool converged = false;
    std::string method;
};

SolveReport solve(const DirichletProblem& problem, const SolveOptions& opts = {});
SolveReport solve(const DiscreteOperator& disc, const SolveOptions& opts,
                  const std::vector<double>* initial = nullptr);

struct ComparisonReport {
    bool holds = false;               ///< u <= v + slack on the window nodes
    double max_violation = 0.0;       ///< max (u - v) on the window
    bool operator_ordered = false;    ///< I u >= I v - slack on the window
    bool exterior_ordered = false;    ///< u <= v on the sampled exterior
};

/// Checks the hypotheses (I_u u >= I_v v - slack on the window, g_u <= g_v
/// outside) and the conclusion u <= v + slack for two discretizations on the
/// same grid.
ComparisonReport comparison_check(const DiscreteOperator& disc_u, const std::vector<double>& u,
                                  const DiscreteOperator& disc_v, const std::vector<double>& v,
                                  double slack = 1e-12);

struct BarrierPoint {
    double s = 0.0;
    double value_right = 0.0;  ///< M+ at 1/4 + s
    double value_left = 0.0;   ///< M+ at -1/4 - s
};

struct BarrierRow {
    double p = 0.0;
    double eps = 0.0;  ///< largest sampled s with M+ <= 0 on (0, s]
    double max_asymmetry = 0.0;
    std::vector<BarrierPoint> points;
};

struct BarrierReport {
    std::vector<BarrierRow> rows;
    double best_p = 0.0;  ///< largest p with eps > 0 (0 when none)
    double best_eps = 0.0;
    bool any_pass = false;
};

BarrierReport barrier_check(const ScaleFunction& phi, double lambda, double Lambda,
                            const std::vector<double>& p_list = {0.05, 0.1, 0.2},
                            double s_min = 1e-4, double s_max = 0.5, int samples = 24,
                            double tol = 1e-10);

}  // namespace varorder
