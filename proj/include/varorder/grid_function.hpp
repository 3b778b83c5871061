// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace varorder {

/// Closed-form data outside a grid span.
///
/// The standard family is g(z) = offset + amplitude * s(z - center) where
/// s(t) = 0 for |t| < zero_radius and s(t) = sign(sin(m pi t)) otherwise
/// (s = 0 when m = 0).
/// It covers the zero, constant and sign-sin descriptors and is closed under
/// linear combination when m and zero_radius agree. Anything else goes through
/// a callable with a declared sup bound; callables are not serializable.
struct Exterior {
    double offset = 0.0;
    double amplitude = 0.0;
    double m = 0.0;
    double zero_radius = 0.0;
    double center = 0.0;
    std::function<double(double)> fn;
    double fn_bound = 0.0;

    static Exterior zero();
    static Exterior constant(double c);
    static Exterior sign_sin(double m, double zero_radius = 0.0, double amplitude = 1.0);
    static Exterior callable(std::function<double(double)> f, double bound);

    bool is_callable() const { return static_cast<bool>(fn); }
    bool oscillates() const { return !fn && amplitude != 0.0 && m != 0.0; }
    std::string kind_name() const;

    /// The oscillating factor s(z - center) in {-1, 0, 1}.
    int sign_part(double z) const;
    double operator()(double z) const;

    /// z -> g(shift + scale * z), still closed-form for the standard family.
    Exterior rescaled(double shift, double scale) const;
    double sup_abs() const;

    /// a*this + b*other; falls back to a callable when the families differ.
    Exterior combine(double a, const Exterior& other, double b) const;
};

/// sign(sin(m pi z)) computed from the parity of floor(m z), exact at nodes.
double sign_sin(double m, double z);

/// Samples of u at x0 + i h, i = 0..n-1, plus the exterior beyond the span.
struct GridFunction {
    double x0 = 0.0;
    double h = 1.0;
    std::vector<double> values;
    Exterior exterior;

    std::size_t size() const { return values.size(); }
    double x(std::size_t i) const { return x0 + static_cast<double>(i) * h; }
    double x_last() const { return x(values.size() - 1); }
    bool in_span(double z) const;

    /// Cubic (4-point Lagrange) interpolation inside the span, exterior outside.
    /// Points within 1e-9 h of a node return the node value.
    double operator()(double z) const;

    void validate() const;
};

GridFunction sample(const std::function<double(double)>& f, double x0, double h, std::size_t n,
                    Exterior ext = Exterior::zero());

/// a*u + b*v on identical grids.
GridFunction combine(double a, const GridFunction& u, double b, const GridFunction& v);

/// Exact shortest round-trip decimal text for a double.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_csv(std::ostream& os, const GridFunction& u);
GridFunction read_csv(std::istream& is);
void write_csv_file(const std::string& path, const GridFunction& u);
GridFunction read_csv_file(const std::string& path);

}  // namespace varorder
