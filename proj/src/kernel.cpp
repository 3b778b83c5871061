// SPDX-License-Identifier: MIT
#include "varorder/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varorder/error.hpp"
#include "varorder/quadrature.hpp"

namespace varorder {
namespace {

constexpr long kMaxPeriods = 2'000'000;
// Requests below this relative accuracy are beyond double rounding anyway.
constexpr double kRelTol = 1e-14;
// Below this radius y^2 K is continued as a power law with the local
// log-slope of phi, so phi is never evaluated where it underflows.
constexpr double kPowerFloor = 1e-60;

double integrate(const RealFn& f, double a, double b, double tol) {
    quad::Options o;
    o.abs_tol = tol;
    o.rel_tol = kRelTol;
    return quad::integrate(f, a, b, o).value;
}

}  // namespace

Kernel::Kernel(ScaleFunction phi, double lambda, double Lambda, RealFn shape)
    : phi_(std::move(phi)), lambda_(lambda), Lambda_(Lambda), shape_(std::move(shape)) {
    if (!(lambda > 0.0) || !(Lambda >= lambda) || !std::isfinite(Lambda))
        throw InputError("ellipticity constants need 0 < lambda <= Lambda");
    if (!phi_.eval) throw InputError("kernel needs a scale function");
}

TailDensity Kernel::tail_density(bool shaped) const {
    TailDensity d;
    d.value = [this, shaped](double y) { return density(y, shaped); };
    d.tail = [this, shaped](double Y, double tol) { return tail_mass(Y, tol, shaped); };
    return d;
}

double Kernel::second_moment(double lo, double hi, double tol, bool shaped) const {
    if (!(hi > lo) || lo < 0.0) throw InputError("second moment needs 0 <= lo < hi");
    auto g = [this, shaped](double y) { return y * (y * density(y, shaped)); };
    if (lo > 0.0) return integrate(g, lo, hi, tol);
    const double r = std::min(hi, kPowerFloor);
    const double slope = std::log(phi_(2.0 * r) / phi_(r)) / std::log(2.0);
    const double below = g(r) * r / (2.0 - slope);
    if (hi <= kPowerFloor) return below;
    return below + graded_integral(g, hi, phi_.sigma2, tol, kPowerFloor);
}

double Kernel::mass(double lo, double hi, double tol, bool shaped) const {
    if (!(lo > 0.0 && hi >= lo)) throw InputError("kernel mass needs 0 < lo <= hi");
    if (hi == lo) return 0.0;
    return integrate([this, shaped](double y) { return density(y, shaped); }, lo, hi, tol);
}

double scale_tail_integral(const ScaleFunction& phi, const RealFn& f, double bound, double Y,
                           double tol) {
    if (!(Y > 0.0)) throw InputError("tail integral needs Y > 0");
    // y f(y) <= bound c a / phi(Y) (Y/y)^sigma1 for y >= Y
    const double s1 = phi.sigma1;
    const double lead = bound * phi.c_phi * phi.a / (s1 * phi(Y));
    const double S = std::max(1.0, std::log(2.0 * lead / tol) / s1);
    auto g = [&f, Y](double s) {
        const double y = Y * std::exp(s);
        return f(y) * y;
    };
    return integrate(g, 0.0, S, 0.5 * tol);
}

double Kernel::tail_mass(double Y, double tol, bool shaped) const {
    return scale_tail_integral(
        phi_, [this, shaped](double y) { return density(y, shaped); }, shaped ? Lambda_ : 1.0, Y,
        tol);
}

bool Kernel::in_envelope(const std::vector<double>& ys) const {
    for (double y : ys) {
        const double b = shape(y);
        if (b < lambda_ * (1 - 1e-14) || b > Lambda_ * (1 + 1e-14)) return false;
    }
    return true;
}

std::vector<double> FarField::breaks_between(double lo, double hi) const {
    std::vector<double> out;
    for (double b : fixed_breaks)
        if (b > lo && b < hi) out.push_back(b);
    if (lattice_spacing > 0.0) {
        for (double ph : lattice_phases) {
            const double k0 = std::floor((lo - ph) / lattice_spacing);
            for (double k = k0;; k += 1.0) {
                const double b = ph + k * lattice_spacing;
                if (b >= hi) break;
                if (b > lo) out.push_back(b);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> far_masses(const FarField& field, const TailDensity& density, double y0,
                               double tol) {
    if (!(y0 > 0.0)) throw InputError("far field must start at y0 > 0");
    const int L = field.label_count;
    std::vector<double> masses(static_cast<std::size_t>(L), 0.0);
    auto add_piece = [&](double a, double b, double piece_tol) {
        if (b <= a) return;
        const int l = field.label(0.5 * (a + b));
        if (l < 0 || l >= L) throw Error("far-field label out of range");
        masses[static_cast<std::size_t>(l)] += integrate(density.value, a, b, piece_tol);
    };

    const double start = std::max(y0, field.periodic_from);
    {
        auto br = field.breaks_between(y0, start);
        double a = y0;
        const double piece_tol = 0.25 * tol / static_cast<double>(br.size() + 1);
        for (double b : br) {
            add_piece(a, b, piece_tol);
            a = b;
        }
        add_piece(a, start, piece_tol);
    }

    if (field.period <= 0.0) {
        const int l = field.label(start + 1.0);
        masses[static_cast<std::size_t>(l)] += density.tail(start, 0.5 * tol);
        return masses;
    }

    // One period of the pattern, as offsets from `start`.
    const double T = field.period;
    std::vector<double> offs{0.0};
    for (double b : field.breaks_between(start, start + T)) offs.push_back(b - start);
    offs.push_back(T);
    const std::size_t P = offs.size() - 1;
    std::vector<int> lab(P);
    for (std::size_t j = 0; j < P; ++j) lab[j] = field.label(start + 0.5 * (offs[j] + offs[j + 1]));

    // Exact period averages of Q = int (chi - p) and R = int (Q - Qbar) per label.
    std::vector<double> p(L, 0.0), qbar(L, 0.0), rbar(L, 0.0);
    for (std::size_t j = 0; j < P; ++j) p[lab[j]] += (offs[j + 1] - offs[j]) / T;
    for (int l = 0; l < L; ++l) {
        double Q = 0.0, intQ = 0.0;
        for (std::size_t j = 0; j < P; ++j) {
            const double len = offs[j + 1] - offs[j];
            const double slope = (lab[j] == l ? 1.0 : 0.0) - p[l];
            intQ += Q * len + slope * len * len / 2.0;
            Q += slope * len;
        }
        qbar[l] = intQ / T;
        Q = 0.0;
        double R = 0.0, intR = 0.0;
        for (std::size_t j = 0; j < P; ++j) {
            const double len = offs[j + 1] - offs[j];
            const double slope = (lab[j] == l ? 1.0 : 0.0) - p[l];
            intR += R * len + (Q - qbar[l]) * len * len / 2.0 + slope * len * len * len / 6.0;
            R += (Q - qbar[l]) * len + slope * len * len / 2.0;
            Q += slope * len;
        }
        rbar[l] = intR / T;
    }

    const auto& K = density.value;
    const double piece_tol = 1e-4 * tol;
    for (long k = 0; k < kMaxPeriods; ++k) {
        const double base = start + static_cast<double>(k) * T;
        for (std::size_t j = 0; j < P; ++j) {
            const double a = base + offs[j], b = base + offs[j + 1];
            if (b > a)
                masses[static_cast<std::size_t>(lab[j])] += integrate(K, a, b, piece_tol);
        }
        const double Y1 = base + T;
        if (k < 1) continue;
        const double hd = 1e-2 * Y1;
        const double km2 = K(Y1 - 2 * hd), km1 = K(Y1 - hd), k0 = K(Y1), kp1 = K(Y1 + hd),
                     kp2 = K(Y1 + 2 * hd);
        const double d1 = (-kp2 + 8 * kp1 - 8 * km1 + km2) / (12 * hd);
        const double d2 = (-kp2 + 16 * kp1 - 30 * k0 + 16 * km1 - km2) / (12 * hd * hd);
        const double err = 8.0 * T * T * T * std::abs(d2) * L;
        if (err > 0.25 * tol) continue;
        const double F = density.tail(Y1, 0.25 * tol / L);
        for (int l = 0; l < L; ++l) masses[l] += p[l] * F + qbar[l] * k0 - rbar[l] * d1;
        return masses;
    }
    std::ostringstream os;
    os << "far-field remainder did not reach tolerance " << tol << " within " << kMaxPeriods
       << " periods";
    throw QuadratureError(os.str());
}

}  // namespace varorder
