// SPDX-License-Identifier: MIT
#include "varorder/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "varorder/error.hpp"

namespace varorder {
namespace {

std::vector<const Kernel*> operator_kernels(const OperatorSpec& op) {
    std::vector<const Kernel*> ks;
    if (op.variant == Variant::bellman) {
        for (const auto& m : op.family) ks.push_back(&m.kernel);
    } else {
        ks.push_back(&op.kernel);
    }
    return ks;
}

bool shaped_density(const OperatorSpec& op, const Kernel& k) {
    return op.variant == Variant::linear || op.variant == Variant::bellman ? k.shaped() : false;
}

}  // namespace

WeightTable discretize_weights(const OperatorSpec& op, double h, std::size_t count, double tol) {
    if (!(h > 0.0)) throw InputError("grid spacing must be positive");
    WeightTable t;
    t.h = h;
    for (const Kernel* k : operator_kernels(op)) {
        const bool shaped = shaped_density(op, *k);
        std::vector<double> w(count + 1, 0.0);
        for (std::size_t j = 1; j <= count; ++j) {
            const double jh = static_cast<double>(j) * h;
            const double lo = (static_cast<double>(j) - 0.5) * h;
            const double hi = (static_cast<double>(j) + 0.5) * h;
            double m2 = k->second_moment(lo, hi, tol * jh * jh, shaped);
            if (j == 1) m2 += k->second_moment(0.0, lo, tol * h * h, shaped);
            w[j] = 2.0 * m2 / (jh * jh);
            if (!(w[j] > 0.0)) throw QuadratureError("non-positive cell weight");
        }
        t.per_kernel.push_back(std::move(w));
    }
    return t;
}

DiscreteOperator::DiscreteOperator(const DirichletProblem& pb, double tail_tol)
    : op_(pb.op), g_(pb.g), lo_(pb.window.lo), hi_(pb.window.hi), h_(pb.h) {
    op_.validate();
    if (g_.is_callable()) throw InputError("the solver needs a closed-form exterior");
    if (!(hi_ > lo_) || !(h_ > 0.0)) throw InputError("bad window or grid spacing");
    const double ratio = (hi_ - lo_) / h_;
    N_ = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(N_)) > 1e-9 * ratio || N_ < 3)
        throw InputError("window length must be an integer multiple (>= 3) of h");
    n_ = N_ - 1;

    weights_ = discretize_weights(op_, h_, N_ - 1);
    const long NN = static_cast<long>(N_);
    ext_.resize(3 * N_ + 1);
    for (long idx = -NN; idx <= 2 * NN; ++idx)
        ext_[static_cast<std::size_t>(idx + NN)] = g_(lo_ + static_cast<double>(idx) * h_);
    label_values_ = exterior_label_increments(g_, 0.0);

    f_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) f_[k] = pb.f ? pb.f(node(k)) : 0.0;

    const auto kernels = operator_kernels(op_);
    for (std::size_t a = 0; a < kernels.size(); ++a) {
        Member m;
        m.table = a;
        m.mult.assign(n_, 1.0);
        m.offset.assign(n_, 0.0);
        if (op_.variant == Variant::bellman) {
            for (std::size_t k = 0; k < n_; ++k) {
                m.mult[k] = op_.family[a].multiplier_at(node(k));
                m.offset[k] = op_.family[a].offset_at(node(k));
            }
        }
        const bool shaped = shaped_density(op_, *kernels[a]);
        const TailDensity dens = kernels[a]->tail_density(shaped);
        m.tail_mass.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i = k + 1;
            const std::size_t J = std::max(i, N_ - i);
            const double y0 = (static_cast<double>(J) + 0.5) * h_;
            m.tail_mass[k] = far_masses(exterior_increment_field(g_, node(k)), dens, y0, tail_tol);
        }
        members_.push_back(std::move(m));
    }
}

double DiscreteOperator::value(const std::vector<double>& u, long idx) const {
    const long NN = static_cast<long>(N_);
    if (idx >= 1 && idx <= NN - 1) return u[static_cast<std::size_t>(idx - 1)];
    return ext_[static_cast<std::size_t>(idx + NN)];
}

double DiscreteOperator::term(double d) const {
    switch (op_.variant) {
        case Variant::pucci_plus: return d > 0.0 ? op_.Lambda * d : op_.lambda * d;
        case Variant::pucci_minus: return d > 0.0 ? op_.lambda * d : op_.Lambda * d;
        default: return d;
    }
}

double DiscreteOperator::apply_member(const Member& m, const std::vector<double>& u,
                                      std::size_t k) const {
    const long i = static_cast<long>(k) + 1;
    const long J = std::max(i, static_cast<long>(N_) - i);
    const double ui = u[k];
    const auto& w = weights_.per_kernel[m.table];
    double s = 0.0;
    for (long j = 1; j <= J; ++j) {
        const double d = value(u, i + j) + value(u, i - j) - 2.0 * ui;
        s += w[static_cast<std::size_t>(j)] * term(d);
    }
    const auto& M = m.tail_mass[k];
    for (std::size_t l = 0; l < M.size(); ++l) s += 2.0 * M[l] * term(label_values_[l] - 2.0 * ui);
    return m.mult[k] * s + m.offset[k];
}

double DiscreteOperator::apply(const std::vector<double>& u, std::size_t k) const {
    double best = apply_member(members_[0], u, k);
    for (std::size_t a = 1; a < members_.size(); ++a) best = std::min(best, apply_member(members_[a], u, k));
    return best;
}

std::vector<double> DiscreteOperator::apply_all(const std::vector<double>& u) const {
    if (u.size() != n_) throw InputError("state size does not match the grid");
    std::vector<double> out(n_);
    for (std::size_t k = 0; k < n_; ++k) out[k] = apply(u, k);
    return out;
}

double DiscreteOperator::residual(const std::vector<double>& u) const {
    const auto Iu = apply_all(u);
    double r = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
        const double d = std::abs(Iu[k] - f_[k]);
        if (std::isnan(d)) return d;
        r = std::max(r, d);
    }
    return r;
}

double DiscreteOperator::cfl_tau() const {
    const bool extremal = op_.variant == Variant::pucci_plus || op_.variant == Variant::pucci_minus;
    const double top = extremal ? op_.Lambda : 1.0;
    double worst = 0.0;
    for (const auto& m : members_) {
        const auto& w = weights_.per_kernel[m.table];
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i = k + 1;
            const std::size_t J = std::max(i, N_ - i);
            double s = 0.0;
            for (std::size_t j = 1; j <= J; ++j) s += w[j];
            for (double M : m.tail_mass[k]) s += 2.0 * M;
            worst = std::max(worst, 2.0 * top * std::abs(m.mult[k]) * s);
        }
    }
    return 0.9 / worst;
}

std::vector<double> DiscreteOperator::policy_step(const std::vector<double>& u) const {
    const long n = static_cast<long>(n_);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    auto factor = [this](double d) {
        switch (op_.variant) {
            case Variant::pucci_plus: return d >= 0.0 ? op_.Lambda : op_.lambda;
            case Variant::pucci_minus: return d >= 0.0 ? op_.lambda : op_.Lambda;
            default: return 1.0;
        }
    };
    for (long k = 0; k < n; ++k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        std::size_t chosen = 0;
        if (members_.size() > 1) {
            double best = apply_member(members_[0], u, ku);
            for (std::size_t a = 1; a < members_.size(); ++a) {
                const double v = apply_member(members_[a], u, ku);
                if (v < best) {
                    best = v;
                    chosen = a;
                }
            }
        }
        const Member& m = members_[chosen];
        const auto& w = weights_.per_kernel[m.table];
        const long i = k + 1;
        const long J = std::max(i, static_cast<long>(N_) - i);
        const double ui = u[ku];
        double diag = 0.0, cst = m.offset[ku];
        for (long j = 1; j <= J; ++j) {
            const double d = value(u, i + j) + value(u, i - j) - 2.0 * ui;
            const double c = m.mult[ku] * w[static_cast<std::size_t>(j)] * factor(d);
            diag -= 2.0 * c;
            for (long idx : {i + j, i - j}) {
                if (idx >= 1 && idx <= n)
                    A(k, idx - 1) += c;
                else
                    cst += c * value(u, idx);
            }
        }
        const auto& M = m.tail_mass[ku];
        for (std::size_t l = 0; l < M.size(); ++l) {
            const double c = m.mult[ku] * 2.0 * M[l] * factor(label_values_[l] - 2.0 * ui);
            diag -= 2.0 * c;
            cst += c * label_values_[l];
        }
        A(k, k) += diag;
        b(k) = f_[ku] - cst;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd x = lu.solve(b);
    const Eigen::VectorXd r = b - A * x;
    x += lu.solve(r);
    return std::vector<double>(x.data(), x.data() + n);
}

GridFunction DiscreteOperator::to_grid(const std::vector<double>& u) const {
    GridFunction gf;
    gf.x0 = lo_;
    gf.h = h_;
    gf.values.resize(N_ + 1);
    gf.values[0] = g_(lo_);
    gf.values[N_] = g_(hi_);
    for (std::size_t k = 0; k < n_; ++k) gf.values[k + 1] = u[k];
    gf.exterior = g_;
    return gf;
}

SolveReport solve(const DirichletProblem& problem, const SolveOptions& opts) {
    const DiscreteOperator disc(problem, opts.tail_tol);
    return solve(disc, opts);
}

SolveReport solve(const DiscreteOperator& disc, const SolveOptions& opts,
                  const std::vector<double>* initial) {
    if (!(opts.tol > 0.0) || opts.max_iter < 1) throw InputError("need tol > 0 and max_iter >= 1");
    const std::size_t n = disc.unknowns();
    std::vector<double> u;
    if (initial) {
        if (initial->size() != n) throw InputError("initial guess has the wrong size");
        u = *initial;
    } else {
        const GridFunction edge = disc.to_grid(std::vector<double>(n, 0.0));
        double avg = 0.0;
        for (std::size_t k = 0; k < n; ++k) avg += edge.exterior(disc.node(k));
        u.assign(n, avg / static_cast<double>(n));
    }
    SolveReport rep;
    const bool explicit_steps = opts.method == SolveMethod::pseudo_time;
    rep.method = explicit_steps ? "pseudo-time" : "policy-iteration";
    rep.tau = explicit_steps ? disc.cfl_tau() : 0.0;
    double best = INFINITY;
    for (long it = 1; it <= opts.max_iter; ++it) {
        rep.iterations = it;
        const auto Iu = disc.apply_all(u);
        double res = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = std::abs(Iu[k] - disc.rhs()[k]);
            res = std::isnan(r) ? r : std::max(res, r);
            if (std::isnan(r)) break;
        }
        if (!std::isfinite(res)) throw ConvergenceError("residual is not finite");
        rep.residual_history.push_back(res);
        if (res <= opts.tol) {
            rep.converged = true;
            break;
        }
        if (explicit_steps) {
            if (res > 2.0 * best) {
                std::ostringstream os;
                os << "pseudo-time iteration diverged at step " << it << " (residual " << res
                   << ", minimum " << best << ")";
                throw ConvergenceError(os.str());
            }
            for (std::size_t k = 0; k < n; ++k) u[k] += rep.tau * (Iu[k] - disc.rhs()[k]);
        } else {
            u = disc.policy_step(u);
        }
        best = std::min(best, res);
    }
    rep.u = disc.to_grid(u);
    return rep;
}

ComparisonReport comparison_check(const DiscreteOperator& disc_u, const std::vector<double>& u,
                                  const DiscreteOperator& disc_v, const std::vector<double>& v,
                                  double slack) {
    if (u.size() != disc_u.unknowns() || v.size() != disc_v.unknowns() ||
        disc_u.unknowns() != disc_v.unknowns() || disc_u.h() != disc_v.h() ||
        disc_u.window().lo != disc_v.window().lo)
        throw InputError("comparison needs two states on the same grid");
    ComparisonReport r;
    r.max_violation = -INFINITY;
    for (std::size_t k = 0; k < u.size(); ++k) r.max_violation = std::max(r.max_violation, u[k] - v[k]);
    r.holds = r.max_violation <= slack;

    const auto Iu = disc_u.apply_all(u);
    const auto Iv = disc_v.apply_all(v);
    r.operator_ordered = true;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (Iu[k] < Iv[k] - slack) r.operator_ordered = false;

    // Exterior order: exhaustive over the sign pattern when the oscillating
    // parts are aligned, sampled otherwise.
    const Exterior& a = disc_u.exterior();
    const Exterior& b = disc_v.exterior();
    const bool aligned = !a.oscillates() || !b.oscillates() ||
                         (a.m == b.m && a.zero_radius == b.zero_radius && a.center == b.center);
    r.exterior_ordered = true;
    if (aligned) {
        for (int sa : {-1, 0, 1}) {
            const int sb = (a.oscillates() && b.oscillates()) ? sa : 0;
            for (int sb2 : {-1, 0, 1}) {
                const int t = b.oscillates() && !a.oscillates() ? sb2 : sb;
                const double ga = a.offset + (a.oscillates() ? a.amplitude * sa : 0.0);
                const double gb = b.offset + (b.oscillates() ? b.amplitude * t : 0.0);
                if (ga > gb) r.exterior_ordered = false;
            }
        }
    } else {
        for (int i = -40000; i <= 40000; ++i) {
            const double z = i * 2.5e-3 + 1.234e-5;
            if (a(z) > b(z)) r.exterior_ordered = false;
        }
    }
    return r;
}

BarrierReport barrier_check(const ScaleFunction& phi, double lambda, double Lambda,
                            const std::vector<double>& p_list, double s_min, double s_max,
                            int samples, double tol) {
    if (!(s_min > 0.0 && s_max > s_min) || samples < 2) throw InputError("bad barrier sample range");
    BarrierReport rep;
    for (double p : p_list) {
        BarrierRow row;
        row.p = p;
        bool prefix = true;
        for (int k = 0; k < samples; ++k) {
            const double s = s_min * std::pow(s_max / s_min, static_cast<double>(k) / (samples - 1));
            BarrierPoint pt;
            pt.s = s;
            pt.value_right = pucci_plus_barrier(phi, lambda, Lambda, p, 0.25 + s, tol);
            pt.value_left = pucci_plus_barrier(phi, lambda, Lambda, p, -0.25 - s, tol);
            row.max_asymmetry = std::max(row.max_asymmetry, std::abs(pt.value_right - pt.value_left));
            if (prefix && pt.value_right <= 0.0 && pt.value_left <= 0.0)
                row.eps = s;
            else
                prefix = false;
            row.points.push_back(pt);
        }
        if (row.eps > 0.0) {
            rep.any_pass = true;
            if (p > rep.best_p) {
                rep.best_p = p;
                rep.best_eps = row.eps;
            }
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace varorder
