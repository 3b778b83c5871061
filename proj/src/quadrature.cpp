// SPDX-License-Identifier: MIT
#include "varorder/quadrature.hpp"

#include "varorder/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

namespace varorder::quad {

namespace {

// Kronrod abscissae on [-1, 1], positive half, descending. Odd indices are
// the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    std::size_t id;
};

struct ByError {
    bool operator()(const Panel& l, const Panel& r) const {
        if (l.error != r.error) return l.error < r.error;
        return l.id > r.id;
    }
};

}  // namespace

Result kronrod15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(c);
    double k15 = fc * kWgk[7];
    double g7 = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        k15 += kWgk[j] * s;
        if (j % 2 == 1) g7 += kWg[j / 2] * s;
    }
    Result r;
    r.value = k15 * half;
    r.error = std::abs((k15 - g7) * half);
    r.intervals = 1;
    return r;
}

Result integrate(const std::function<double(double)>& f,
                 std::span<const double> breakpoints, const Options& opts) {
    if (breakpoints.size() < 2) return {};
    std::priority_queue<Panel, std::vector<Panel>, ByError> heap;
    std::size_t next_id = 0;
    double total_err = 0.0;
    double total_val = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i];
        const double b = breakpoints[i + 1];
        if (!(b > a)) continue;
        const Result r = kronrod15(f, a, b);
        heap.push({a, b, r.value, r.error, next_id++});
        total_err += r.error;
        total_val += r.value;
    }
    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total_val))) {
        if (heap.size() >= opts.max_intervals) {
            throw QuadratureError("adaptive quadrature exceeded " +
                                  std::to_string(opts.max_intervals) +
                                  " intervals (error estimate " +
                                  std::to_string(total_err) + ")");
        }
        Panel p = heap.top();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            throw QuadratureError("adaptive quadrature reached floating resolution");
        }
        heap.pop();
        const Result l = kronrod15(f, p.a, mid);
        const Result r = kronrod15(f, mid, p.b);
        heap.push({p.a, mid, l.value, l.error, next_id++});
        heap.push({mid, p.b, r.value, r.error, next_id++});
        // Recompute from scratch periodically to avoid drift in the running sum.
        total_err += l.error + r.error - p.error;
        total_val += l.value + r.value - p.value;
        if (next_id % 256 == 0) {
            auto copy = heap;
            total_err = 0.0;
            total_val = 0.0;
            while (!copy.empty()) {
                total_err += copy.top().error;
                total_val += copy.top().value;
                copy.pop();
            }
        }
    }
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel& l, const Panel& r) { return l.a < r.a; });
    Result out;
    for (const auto& p : panels) {
        out.value += p.value;
        out.error += p.error;
    }
    out.intervals = panels.size();
    return out;
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts) {
    const std::array<double, 2> bp = {a, b};
    return integrate(f, std::span<const double>(bp), opts);
}

}  // namespace varorder::quad
