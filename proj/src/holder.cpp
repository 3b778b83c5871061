// SPDX-License-Identifier: MIT
#include "varorder/holder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varorder/error.hpp"

namespace varorder {
namespace {

struct PairSup {
    double value = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
};

// Max over i < j in [0, n), j - i >= 2 of |D[j] - D[i]| * weight(i, j) / den[j - i],
// where weight <= wmax. Ties keep the lexicographically smallest pair.
template <class Weight>
PairSup pair_sup(const std::vector<double>& D, const std::vector<double>& den, double wmax,
                 Weight weight) {
    const std::size_t n = D.size();
    if (n < 3) throw InputError("seminorm window holds no admissible pair");
    const auto [mn, mx] = std::minmax_element(D.begin(), D.end());
    const double spread = *mx - *mn;
    PairSup best{-1.0, 0, 2};
    for (std::size_t s = 2; s < n; ++s) {
        if (spread * wmax / den[s] < best.value) continue;
        for (std::size_t i = 0; i + s < n; ++i) {
            const double v = std::abs(D[i + s] - D[i]) * weight(i, i + s) / den[s];
            if (v > best.value || (v == best.value && (i < best.i || (i == best.i && i + s < best.j))))
                best = {v, i, i + s};
        }
    }
    return best;
}

std::vector<double> slice(const std::vector<double>& v, const IndexRange& r) {
    return {v.begin() + static_cast<long>(r.first), v.begin() + static_cast<long>(r.last) + 1};
}

std::vector<double> denominators(const Modulus& psi, int d, double h, std::size_t n) {
    std::vector<double> den(n, 1.0);
    for (std::size_t s = 1; s < n; ++s) {
        const double r = static_cast<double>(s) * h;
        den[s] = psi(r) * std::pow(r, -d);
        if (!(den[s] > 0.0) || !std::isfinite(den[s])) {
            std::ostringstream os;
            os << "modulus '" << psi.kind << "' is not positive at r = " << r;
            throw InputError(os.str());
        }
    }
    return den;
}

double sup_abs(const std::vector<double>& v, const IndexRange& r) {
    double m = 0.0;
    for (std::size_t i = r.first; i <= r.last; ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

}  // namespace

IndexRange window_nodes(const GridFunction& u, const Window& w) {
    if (!(w.lo <= w.hi)) throw InputError("window bounds are reversed");
    const double half = 0.5 * u.h;
    if (w.lo < u.x0 - half || w.hi > u.x_last() + half) {
        std::ostringstream os;
        os << "window [" << w.lo << ", " << w.hi << "] lies outside the grid span [" << u.x0
           << ", " << u.x_last() << "]";
        throw InputError(os.str());
    }
    const double n1 = static_cast<double>(u.size()) - 1.0;
    const double lo = std::max(0.0, std::ceil((w.lo - u.x0) / u.h - 0.5));
    const double hi = std::min(n1, std::ceil((w.hi - u.x0) / u.h + 0.5) - 1.0);
    if (hi < lo) throw InputError("window holds no grid node");
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

GridFunction fd_derivative(const GridFunction& u, int order) {
    if (order < 0 || order > 2) throw InputError("derivative order must be 0, 1 or 2");
    const std::size_t n = u.size();
    if (n < 5) throw InputError("finite differences need at least 5 grid points");
    GridFunction d = u;
    d.exterior = Exterior::zero();
    if (order == 0) return d;
    const auto& v = u.values;
    auto& o = d.values;
    const double h = u.h;
    if (order == 1) {
        for (std::size_t i = 1; i + 1 < n; ++i) o[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        o[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        o[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    } else {
        const double h2 = h * h;
        for (std::size_t i = 1; i + 1 < n; ++i) o[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        o[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        o[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    }
    return d;
}

SeminormReport seminorm(const GridFunction& u, const Modulus& psi, const Window& w) {
    const int d = psi.derivative_order();
    if (d > 2) throw InputError("seminorm supports at most two derivatives");
    const IndexRange r = window_nodes(u, w);
    const auto D = slice(fd_derivative(u, d).values, r);
    const auto den = denominators(psi, d, u.h, D.size());
    const PairSup best = pair_sup(D, den, 1.0, [](std::size_t, std::size_t) { return 1.0; });
    SeminormReport rep;
    rep.value = best.value;
    rep.x = u.x(r.first + best.i);
    rep.y = u.x(r.first + best.j);
    rep.d = d;
    rep.pair_floor = 2.0 * u.h;
    return rep;
}

SeminormReport seminorm(const GridFunction& u, const ProductModulus& pm, const Window& w) {
    return seminorm(u, pm.modulus, w);
}

double norm_plain(const GridFunction& u, const Modulus& psi, const Window& w) {
    const int d = psi.derivative_order();
    const IndexRange r = window_nodes(u, w);
    double total = 0.0;
    for (int i = 0; i <= d; ++i) total += sup_abs(fd_derivative(u, i).values, r);
    return total + seminorm(u, psi, w).value;
}

double norm_nondim(const GridFunction& u, const Modulus& psi, const Window& w) {
    const int d = psi.derivative_order();
    const IndexRange r = window_nodes(u, w);
    const double diam = w.diameter();
    double total = 0.0;
    for (int i = 0; i <= d; ++i) total += std::pow(diam, i) * sup_abs(fd_derivative(u, i).values, r);
    return total + psi(diam) * seminorm(u, psi, w).value;
}

double norm_interior(const GridFunction& u, const Modulus& psi, const Window& w) {
    const int d = psi.derivative_order();
    if (d > 2) throw InputError("seminorm supports at most two derivatives");
    const IndexRange r = window_nodes(u, w);
    std::vector<double> dist(r.count());
    for (std::size_t k = 0; k < dist.size(); ++k) {
        const double x = u.x(r.first + k);
        dist[k] = std::max(0.0, std::min(x - w.lo, w.hi - x));
    }
    double total = 0.0;
    for (int i = 0; i <= d; ++i) {
        const auto Di = slice(fd_derivative(u, i).values, r);
        double m = 0.0;
        for (std::size_t k = 0; k < Di.size(); ++k)
            m = std::max(m, std::pow(dist[k], i) * std::abs(Di[k]));
        total += m;
    }
    std::vector<double> wt(dist.size());
    double wmax = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        wt[k] = dist[k] > 0.0 ? psi(dist[k]) : 0.0;
        wmax = std::max(wmax, wt[k]);
    }
    const auto D = slice(fd_derivative(u, d).values, r);
    const auto den = denominators(psi, d, u.h, D.size());
    const PairSup best = pair_sup(D, den, wmax, [&](std::size_t i, std::size_t j) {
        return dist[i] <= dist[j] ? wt[i] : wt[j];
    });
    return total + best.value;
}

IsometryReport rescale_isometry_check(const GridFunction& u, const Modulus& psi, double rho,
                                      double z) {
    if (!(rho > 0.0)) throw InputError("rho must be positive");
    const double zi = (z - u.x0) / u.h;
    const double ratio = rho / u.h;
    if (std::abs(zi - std::round(zi)) > 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9 ||
        std::round(ratio) < 1.0)
        throw InputError("rescaling needs z on a node and rho an integer multiple of h");

    GridFunction bar = u;
    bar.x0 = (u.x0 - z) / rho;
    bar.h = u.h / rho;
    bar.exterior = u.exterior.rescaled(z, rho);
    const Modulus psi_bar = rescaled_modulus(psi, rho);
    const Window ball{z - rho, z + rho};
    const Window unit{-1.0, 1.0};

    GridFunction bar_scaled = bar;
    const double pr = psi(rho);
    for (auto& v : bar_scaled.values) v /= pr;

    IsometryReport rep;
    rep.seminorm_original = seminorm(u, psi, ball).value;
    rep.seminorm_rescaled = seminorm(bar_scaled, psi_bar, unit).value;
    rep.norm_original = norm_nondim(u, psi, ball);
    rep.norm_rescaled = norm_nondim(bar, psi_bar, unit);
    auto rel = [](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s == 0.0 ? 0.0 : std::abs(a - b) / s;
    };
    rep.seminorm_rel_error = rel(rep.seminorm_original, rep.seminorm_rescaled);
    rep.norm_rel_error = rel(rep.norm_original, rep.norm_rescaled);
    return rep;
}

InterpolationReport interpolation_check(const GridFunction& u, const Modulus& psi1,
                                        const Modulus& psi2, double eps, const Window& w) {
    if (!(psi1.M_index < psi2.m_index))
        throw InputError("interpolation needs the upper index of psi1 below the lower index of psi2");
    if (!(eps > 0.0)) throw InputError("epsilon must be positive");
    InterpolationReport rep;
    rep.lhs = norm_nondim(u, psi1, w);
    rep.psi2_norm = norm_nondim(u, psi2, w);
    rep.sup_norm = sup_abs(u.values, window_nodes(u, w));
    const double excess = rep.lhs - eps * rep.psi2_norm;
    rep.required_c = excess <= 0.0 ? 0.0 : (rep.sup_norm > 0.0 ? excess / rep.sup_norm : INFINITY);
    return rep;
}

}  // namespace varorder
