// SPDX-License-Identifier: MIT
#include "varorder/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varorder/error.hpp"
#include "varorder/quadrature.hpp"

namespace varorder {
namespace {

using Response = std::function<double(double)>;

// Everything the split quadrature needs about y -> increment(y).
struct Increment {
    RealFn value;
    double curvature = 0.0;  // increment ~ curvature * y^2 as y -> 0
    double span_end = 0.0;   // for y >= span_end only exterior data enters
    std::vector<double> breaks;
    bool closed_tail = false;
    FarField far;
    std::vector<double> label_increment;
    double far_bound = 0.0;  // sup |increment| beyond span_end (callable exteriors)
};

double cutoff(const GridFunction& u, const QuadratureSpec& q) {
    const double hc = q.h_cut > 0.0 ? q.h_cut : u.h;
    if (!(q.tol > 0.0)) throw InputError("quadrature tolerance must be positive");
    return hc;
}

// Standard-family labelling of s(x + y) + s(x - y) + 2 for y beyond the span.
FarField increment_field(const Exterior& g, double x) {
    FarField f;
    if (!g.oscillates()) {
        f.label = [](double) { return 0; };
        return f;
    }
    f.label = [g, x](double y) { return g.sign_part(x + y) + g.sign_part(x - y) + 2; };
    f.label_count = 5;
    const double c = g.center, zr = g.zero_radius;
    f.fixed_breaks = {c + zr - x, c - zr - x, x - c - zr, x - c + zr};
    f.lattice_phases = {c - x, x - c};
    f.lattice_spacing = 1.0 / g.m;
    f.periodic_from = zr + std::abs(x - c);
    f.period = 2.0 / g.m;
    return f;
}

std::vector<double> label_increments(const Exterior& g, double ux) {
    if (!g.oscillates()) return {2.0 * (g.offset - ux)};
    std::vector<double> d(5);
    for (int l = 0; l < 5; ++l) d[l] = 2.0 * (g.offset - ux) + g.amplitude * (l - 2);
    return d;
}

void add_node_breaks(const GridFunction& u, double x, double lo, double hi, std::vector<double>& out) {
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double d = std::abs(u.x(k) - x);
        if (d > lo && d < hi) out.push_back(d);
    }
}

Increment single_increment(const GridFunction& u, double x, double hc) {
    Increment inc;
    const double ux = u(x);
    inc.value = [&u, x, ux](double y) { return u(x + y) + u(x - y) - 2.0 * ux; };
    inc.curvature = inc.value(hc) / (hc * hc);
    inc.span_end = std::max(u.x_last() - x, x - u.x0);
    add_node_breaks(u, x, hc, inc.span_end, inc.breaks);
    if (u.exterior.is_callable()) {
        inc.far_bound = 2.0 * u.exterior.sup_abs() + 2.0 * std::abs(ux);
    } else {
        inc.closed_tail = true;
        inc.far = increment_field(u.exterior, x);
        auto eb = inc.far.breaks_between(hc, inc.span_end);
        inc.breaks.insert(inc.breaks.end(), eb.begin(), eb.end());
        inc.label_increment = label_increments(u.exterior, ux);
    }
    return inc;
}

Increment pair_increment(const GridFunction& u, double x1, double x2, double hc) {
    Increment a = single_increment(u, x1, hc);
    Increment b = single_increment(u, x2, hc);
    Increment inc;
    auto va = a.value, vb = b.value;
    inc.value = [va, vb](double y) { return va(y) - vb(y); };
    inc.curvature = a.curvature - b.curvature;
    inc.span_end = std::max(a.span_end, b.span_end);
    inc.breaks = a.breaks;
    inc.breaks.insert(inc.breaks.end(), b.breaks.begin(), b.breaks.end());
    add_node_breaks(u, x1, a.span_end, inc.span_end, inc.breaks);
    add_node_breaks(u, x2, b.span_end, inc.span_end, inc.breaks);
    inc.far_bound = a.far_bound + b.far_bound;
    inc.closed_tail = a.closed_tail;
    if (inc.closed_tail) {
        const int La = a.far.label_count, Lb = b.far.label_count;
        inc.far.label_count = La * Lb;
        auto fa = a.far.label, fb = b.far.label;
        inc.far.label = [fa, fb, Lb](double y) { return fa(y) * Lb + fb(y); };
        inc.far.fixed_breaks = a.far.fixed_breaks;
        inc.far.fixed_breaks.insert(inc.far.fixed_breaks.end(), b.far.fixed_breaks.begin(),
                                    b.far.fixed_breaks.end());
        inc.far.lattice_phases = a.far.lattice_phases;
        inc.far.lattice_phases.insert(inc.far.lattice_phases.end(), b.far.lattice_phases.begin(),
                                      b.far.lattice_phases.end());
        inc.far.lattice_spacing = a.far.lattice_spacing;
        inc.far.periodic_from = std::max(a.far.periodic_from, b.far.periodic_from);
        inc.far.period = a.far.period;
        for (double y : inc.far.breaks_between(hc, inc.span_end)) inc.breaks.push_back(y);
        inc.label_increment.resize(static_cast<std::size_t>(La * Lb));
        for (int i = 0; i < La; ++i)
            for (int j = 0; j < Lb; ++j)
                inc.label_increment[i * Lb + j] = a.label_increment[i] - b.label_increment[j];
    }
    return inc;
}

// 2 int_0^inf response(increment(y)) density(y) dy, split into the Taylor
// inner part, a breakpoint-aware middle part and an exterior-only tail.
double split_integral(const Increment& inc, const Kernel& K, bool shaped, const Response& resp,
                      double hc, const QuadratureSpec& q) {
    const double rc = resp(inc.curvature);
    double total = 0.0;
    if (rc != 0.0) total += 2.0 * rc * K.second_moment(0.0, hc, 1e-3 * q.tol / std::abs(rc), shaped);

    const double Y = std::max(inc.span_end, hc);
    auto integrand = [&](double y) { return 2.0 * resp(inc.value(y)) * K.density(y, shaped); };
    if (Y > hc) {
        std::vector<double> bp{hc};
        for (double b : inc.breaks)
            if (b > hc && b < Y) bp.push_back(b);
        bp.push_back(Y);
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        quad::Options o;
        o.abs_tol = 0.25 * q.tol;
        o.max_intervals = 200000;
        total += quad::integrate(integrand, std::span<const double>(bp), o).value;
    }

    if (inc.closed_tail) {
        double scale = 0.0;
        std::vector<double> r(inc.label_increment.size());
        for (std::size_t l = 0; l < r.size(); ++l) {
            r[l] = resp(inc.label_increment[l]);
            scale = std::max(scale, std::abs(r[l]));
        }
        if (scale == 0.0) return total;
        const auto masses = far_masses(inc.far, K.tail_density(shaped), Y, 0.125 * q.tol / scale);
        for (std::size_t l = 0; l < r.size(); ++l) total += 2.0 * r[l] * masses[l];
        return total;
    }

    // Callable exterior: integrate to R_far and bound the rest.
    const double rmax = std::abs(resp(inc.far_bound)) + std::abs(resp(-inc.far_bound));
    double R = q.R_far > Y ? q.R_far : 2.0 * Y;
    while (rmax * 2.0 * K.tail_mass(R, 1e-3 * q.tol, shaped) > 0.25 * q.tol) {
        if (q.R_far > Y) throw QuadratureError("far-field truncation radius too small for tolerance");
        R *= 2.0;
        if (R > 1e15) throw QuadratureError("far-field truncation radius diverged");
    }
    quad::Options o;
    o.abs_tol = 0.25 * q.tol;
    o.max_intervals = 200000;
    total += quad::integrate(integrand, Y, R, o).value;
    return total;
}

Response pucci_response(Variant v, double lambda, double Lambda) {
    if (v == Variant::pucci_plus)
        return [lambda, Lambda](double d) { return d > 0.0 ? Lambda * d : lambda * d; };
    if (v == Variant::pucci_minus)
        return [lambda, Lambda](double d) { return d > 0.0 ? lambda * d : Lambda * d; };
    throw InputError("not an extremal operator variant");
}

}  // namespace

FarField exterior_increment_field(const Exterior& g, double x) {
    if (g.is_callable()) throw InputError("callable exteriors have no closed-form far field");
    return increment_field(g, x);
}

std::vector<double> exterior_label_increments(const Exterior& g, double ux) {
    return label_increments(g, ux);
}

OperatorSpec OperatorSpec::linear(const Kernel& k) {
    OperatorSpec op;
    op.variant = Variant::linear;
    op.phi = k.phi();
    op.lambda = k.lambda();
    op.Lambda = k.Lambda();
    op.kernel = k;
    return op;
}

OperatorSpec OperatorSpec::pucci(Variant v, const ScaleFunction& phi, double lambda, double Lambda) {
    if (v != Variant::pucci_plus && v != Variant::pucci_minus)
        throw InputError("pucci() needs pucci_plus or pucci_minus");
    OperatorSpec op;
    op.variant = v;
    op.phi = phi;
    op.lambda = lambda;
    op.Lambda = Lambda;
    op.kernel = Kernel(phi, lambda, Lambda);
    return op;
}

OperatorSpec OperatorSpec::bellman(std::vector<BellmanMember> family, double lambda, double Lambda) {
    if (family.empty()) throw InputError("Bellman family must be nonempty");
    OperatorSpec op;
    op.variant = Variant::bellman;
    op.phi = family.front().kernel.phi();
    op.lambda = lambda;
    op.Lambda = Lambda;
    op.kernel = Kernel(op.phi, lambda, Lambda);
    op.family = std::move(family);
    return op;
}

bool OperatorSpec::x_dependent() const {
    if (variant != Variant::bellman) return false;
    return std::any_of(family.begin(), family.end(), [](const BellmanMember& m) {
        return static_cast<bool>(m.x_multiplier);
    });
}

void OperatorSpec::validate() const {
    if (!(lambda > 0.0 && Lambda >= lambda)) throw InputError("need 0 < lambda <= Lambda");
    if (variant == Variant::bellman && family.empty()) throw InputError("Bellman family must be nonempty");
}

double delta(const GridFunction& u, double x, double y) { return u(x + y) + u(x - y) - 2.0 * u(x); }

double eval_linear(const GridFunction& u, const Kernel& K, double x, const QuadratureSpec& q) {
    const double hc = cutoff(u, q);
    const Increment inc = single_increment(u, x, hc);
    return split_integral(inc, K, K.shaped(), [](double d) { return d; }, hc, q);
}

double eval_pucci(const GridFunction& u, Variant sign, const ScaleFunction& phi, double lambda,
                  double Lambda, double x, const QuadratureSpec& q) {
    const double hc = cutoff(u, q);
    const Kernel K(phi, lambda, Lambda);
    const Increment inc = single_increment(u, x, hc);
    return split_integral(inc, K, false, pucci_response(sign, lambda, Lambda), hc, q);
}

double eval_bellman(const GridFunction& u, const OperatorSpec& op, double x, const QuadratureSpec& q) {
    if (op.variant != Variant::bellman) throw InputError("eval_bellman needs a Bellman operator");
    op.validate();
    double best = INFINITY;
    for (const auto& mem : op.family) {
        const double v = mem.multiplier_at(x) * eval_linear(u, mem.kernel, x, q) + mem.offset_at(x);
        best = std::min(best, v);
    }
    return best;
}

double eval_operator(const GridFunction& u, const OperatorSpec& op, double x, const QuadratureSpec& q) {
    switch (op.variant) {
        case Variant::linear: return eval_linear(u, op.kernel, x, q);
        case Variant::pucci_plus:
        case Variant::pucci_minus:
            return eval_pucci(u, op.variant, op.phi, op.lambda, op.Lambda, x, q);
        case Variant::bellman: return eval_bellman(u, op, x, q);
    }
    throw InputError("unknown operator variant");
}

SandwichReport ellipticity_sandwich_check(const OperatorSpec& op, const GridFunction& u,
                                          const GridFunction& v, double x, const QuadratureSpec& q) {
    const GridFunction w = combine(1.0, u, -1.0, v);
    SandwichReport r;
    r.lower = eval_pucci(w, Variant::pucci_minus, op.phi, op.lambda, op.Lambda, x, q);
    r.upper = eval_pucci(w, Variant::pucci_plus, op.phi, op.lambda, op.Lambda, x, q);
    r.middle = eval_operator(u, op, x, q) - eval_operator(v, op, x, q);
    r.slack_lower = r.middle - r.lower;
    r.slack_upper = r.upper - r.middle;
    // each side combines up to four split integrals
    const double allow = 4.0 * q.tol;
    r.ok = r.slack_lower >= -allow && r.slack_upper >= -allow;
    return r;
}

double weight_norm(const GridFunction& u, const ScaleFunction& phi, double tol) {
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    const double c = phi.c_phi;
    const RealFn omega = [&phi, c](double y) {
        const double t = y * phi(y);
        return c / (1.0 + t);
    };
    auto om = [&](double z) { return z == 0.0 ? c : omega(std::abs(z)); };
    quad::Options o;
    o.abs_tol = 0.125 * tol;
    o.max_intervals = 200000;

    // grid span
    std::vector<double> bp;
    for (std::size_t k = 0; k < u.size(); ++k) bp.push_back(u.x(k));
    if (u.x0 < 0.0 && u.x_last() > 0.0) bp.push_back(0.0);
    std::sort(bp.begin(), bp.end());
    double total = quad::integrate([&](double z) { return std::abs(u(z)) * om(z); },
                                   std::span<const double>(bp), o).value;

    const Exterior& g = u.exterior;
    const TailDensity dens{omega, [&phi, &omega](double Y, double t) {
                               return scale_tail_integral(phi, omega, 1.0, Y, t);
                           }};
    // side = +1: z >= x_last, side = -1: z <= x0; y = side * z
    for (int side : {+1, -1}) {
        const double edge = side > 0 ? u.x_last() : -u.x0;
        const double y0 = std::max(edge, 0.0) + 1.0;
        auto gz = [&g, side](double y) { return std::abs(g(side * y)); };
        FarField f;
        if (!g.is_callable()) {
            f.label = [&g, side](double y) { return g.sign_part(side * y) + 1; };
            f.label_count = 3;
            if (g.oscillates()) {
                const double cc = side * g.center;
                f.fixed_breaks = {cc - g.zero_radius, cc + g.zero_radius};
                f.lattice_phases = {cc};
                f.lattice_spacing = 1.0 / g.m;
                f.periodic_from = std::abs(g.center) + g.zero_radius;
                f.period = 2.0 / g.m;
            }
        }
        // finite stretch [edge, y0] in y
        std::vector<double> sb{edge};
        if (!g.is_callable())
            for (double b : f.breaks_between(edge, y0)) sb.push_back(b);
        if (edge < 0.0 && 0.0 < y0) sb.push_back(0.0);
        sb.push_back(y0);
        std::sort(sb.begin(), sb.end());
        total += quad::integrate([&](double y) { return gz(y) * om(y); },
                                 std::span<const double>(sb), o).value;
        if (g.is_callable()) {
            double R = 2.0 * y0;
            while (g.sup_abs() * scale_tail_integral(phi, omega, 1.0, R, 1e-3 * tol) > 0.125 * tol) {
                R *= 2.0;
                if (R > 1e15) throw InputError("exterior tail is not summable against the weight");
            }
            total += quad::integrate([&](double y) { return gz(y) * omega(y); }, y0, R, o).value;
        } else {
            const auto masses = far_masses(f, dens, y0, 0.125 * tol / std::max(1.0, g.sup_abs()));
            for (int l = 0; l < 3; ++l)
                total += std::abs(g.offset + g.amplitude * (l - 1)) * masses[l];
        }
    }
    return total;
}

PNValues pn_functionals(const GridFunction& u, const ScaleFunction& phi, double x_ref, double shift,
                        const QuadratureSpec& q) {
    PNValues out;
    if (shift == 0.0) return out;
    const double hc = cutoff(u, q);
    const Kernel K(phi);
    const Increment inc = pair_increment(u, x_ref + shift, x_ref, hc);
    out.P = split_integral(inc, K, false, [](double d) { return d > 0.0 ? d : 0.0; }, hc, q);
    out.N = split_integral(inc, K, false, [](double d) { return d < 0.0 ? -d : 0.0; }, hc, q);
    return out;
}

double pucci_plus_barrier(const ScaleFunction& phi, double lambda, double Lambda, double p, double x,
                          double tol) {
    if (!(p > 0.0 && p < phi.sigma1)) throw InputError("barrier exponent must lie in (0, sigma1)");
    const Kernel K(phi, lambda, Lambda);
    auto bar = [p](double z) {
        const double d = std::abs(z) - 0.25;
        return d > 0.0 ? std::pow(d, p) : 0.0;
    };
    const double s = std::max(std::abs(x) - 0.25, 0.0);
    const double bx = bar(x);
    // binomial coefficients C(p, 2k) for the even Taylor series of (1+t)^p + (1-t)^p - 2
    std::vector<double> coef;
    {
        double cnk = 1.0;
        for (int k = 1; k <= 16; ++k) {
            cnk *= (p - (k - 1)) / k;
            if (k % 2 == 0) coef.push_back(2.0 * cnk);
        }
    }
    auto incr = [&](double y) {
        if (s > 0.0 && y < 0.1 * s) {
            const double t2 = (y / s) * (y / s);
            double acc = 0.0, tp = 1.0;
            for (double c2 : coef) {
                tp *= t2;
                acc += c2 * tp;
            }
            return bx * acc;
        }
        if (y < s) {
            // both points on the same side of the flat zone: s^p ((1+t)^p + (1-t)^p - 2)
            const double t = y / s;
            return bx * (std::expm1(p * std::log1p(t)) + std::expm1(p * std::log1p(-t)));
        }
        return bar(x + y) + bar(x - y) - 2.0 * bx;
    };
    const auto resp = pucci_response(Variant::pucci_plus, lambda, Lambda);
    auto f = [&](double y) { return 2.0 * resp(incr(y)) * K.base(y); };

    // The response grows like bar(x) / phi(s) as s -> 0; tol is relative to that size.
    if (s > 0.0) tol *= std::max(1.0, bx / phi(s));
    double total = 0.0;
    const double inner = s > 0.0 ? 0.1 * s : 1e-12;
    if (s > 0.0) total += graded_integral(f, inner, phi.sigma2, 0.1 * tol);
    const double Ymid = 2.0 + std::abs(x);
    std::vector<double> bp{inner, std::abs(x - 0.25), std::abs(x + 0.25), Ymid};
    std::erase_if(bp, [&](double b) { return b < inner || b > Ymid; });
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    quad::Options o;
    o.abs_tol = 0.25 * tol;
    o.max_intervals = 200000;
    total += quad::integrate(f, std::span<const double>(bp), o).value;

    // Tail in log y: the integrand decays like y^{p - sigma1}.
    auto g = [&](double t) {
        const double y = Ymid * std::exp(t);
        return f(y) * y;
    };
    const double rate = phi.sigma1 - p;
    double U = 8.0;
    while (std::abs(g(U)) / rate > 0.05 * tol && U < 700.0) U *= 1.5;
    total += quad::integrate(g, 0.0, U, o).value;
    return total;
}

}  // namespace varorder
