// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <vector>

#include "varorder/scale.hpp"

namespace varorder {

/// A positive density on (0, inf) together with its tail integral.
struct TailDensity {
    RealFn value;
    std::function<double(double, double)> tail;  ///< (Y, tol) -> int_Y^inf value
};

/// int_Y^inf f for 0 <= f(y) <= bound * c_phi / (y phi(y)), integrated in log y
/// and truncated where the weak-scaling bound on the remainder drops below tol/2.
double scale_tail_integral(const ScaleFunction& phi, const RealFn& f, double bound, double Y,
                           double tol);

/// One-dimensional symmetric kernel K(y) = b(|y|) c_phi / (|y| phi(|y|)) with
/// ellipticity envelope [lambda, Lambda]. Without a shape b is identically 1,
/// which is the reference kernel the extremal operators are built on.
class Kernel {
public:
    Kernel() = default;
    Kernel(ScaleFunction phi, double lambda = 1.0, double Lambda = 1.0, RealFn shape = {});

    const ScaleFunction& phi() const { return phi_; }
    double lambda() const { return lambda_; }
    double Lambda() const { return Lambda_; }
    bool shaped() const { return static_cast<bool>(shape_); }

    double base(double y) const { return phi_.c_phi / (y * phi_(y)); }
    double shape(double y) const { return shape_ ? shape_(y) : 1.0; }
    double operator()(double y) const { return shape(y) * base(y); }

    /// Density used by integrals: K when shaped is true, the reference kernel otherwise.
    double density(double y, bool shaped) const { return shaped ? (*this)(y) : base(y); }
    TailDensity tail_density(bool shaped) const;

    /// int_lo^hi y^2 K(y) dy, lo may be 0.
    double second_moment(double lo, double hi, double tol, bool shaped) const;
    /// int_lo^hi K(y) dy, lo > 0.
    double mass(double lo, double hi, double tol, bool shaped) const;
    /// int_Y^inf K(y) dy.
    double tail_mass(double Y, double tol, bool shaped) const;

    /// lambda <= b(y) <= Lambda at the sampled points.
    bool in_envelope(const std::vector<double>& ys) const;

private:
    ScaleFunction phi_;
    double lambda_ = 1.0;
    double Lambda_ = 1.0;
    RealFn shape_;
};

/// Piecewise-constant labelling of the far field y >= y0. Label changes only
/// at fixed_breaks or at lattice points phase + k * spacing; beyond
/// periodic_from the labelling repeats with the given period (period 0 means
/// it is constant there).
struct FarField {
    std::function<int(double)> label;
    int label_count = 1;
    std::vector<double> fixed_breaks;
    std::vector<double> lattice_phases;
    double lattice_spacing = 0.0;
    double periodic_from = 0.0;
    double period = 0.0;

    /// Sorted break points strictly inside (lo, hi).
    std::vector<double> breaks_between(double lo, double hi) const;
};

/// Per-label masses int_{y0}^inf 1{label(y) = l} density(y) dy. Periods are
/// integrated directly until a two-term periodic-averaging formula for the
/// remainder is within tol; throws QuadratureError if that never happens.
std::vector<double> far_masses(const FarField& field, const TailDensity& density, double y0,
                               double tol);

}  // namespace varorder
