// SPDX-License-Identifier: MIT
#include "varorder/grid_function.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "varorder/error.hpp"

namespace varorder {

double sign_sin(double m, double z) {
    if (m == 0.0) return 0.0;
    const double t = m * z;
    const double fl = std::floor(t);
    if (t == fl) return 0.0;
    const bool even = std::fmod(std::abs(fl), 2.0) == 0.0;
    return even ? 1.0 : -1.0;
}

Exterior Exterior::zero() { return {}; }

Exterior Exterior::constant(double c) {
    Exterior e;
    e.offset = c;
    return e;
}

Exterior Exterior::sign_sin(double m, double zero_radius, double amplitude) {
    if (!(m > 0.0)) throw InputError("sign-sin frequency must be positive");
    if (!(zero_radius >= 0.0)) throw InputError("zero radius must be non-negative");
    Exterior e;
    e.m = m;
    e.zero_radius = zero_radius;
    e.amplitude = amplitude;
    return e;
}

Exterior Exterior::callable(std::function<double(double)> f, double bound) {
    if (!f) throw InputError("empty exterior callable");
    Exterior e;
    e.fn = std::move(f);
    e.fn_bound = bound;
    return e;
}

std::string Exterior::kind_name() const {
    if (fn) return "callable";
    if (oscillates()) return "sign-sin";
    return offset == 0.0 ? "zero" : "constant";
}

int Exterior::sign_part(double z) const {
    if (amplitude == 0.0 || m == 0.0) return 0;
    const double t = z - center;
    if (std::abs(t) < zero_radius) return 0;
    return static_cast<int>(varorder::sign_sin(m, t));
}

double Exterior::operator()(double z) const {
    if (fn) return fn(z);
    return offset + amplitude * sign_part(z);
}

Exterior Exterior::rescaled(double shift, double scale) const {
    if (!(scale > 0.0)) throw InputError("exterior rescaling needs a positive scale");
    if (fn) {
        auto f = fn;
        return callable([f, shift, scale](double z) { return f(shift + scale * z); }, fn_bound);
    }
    Exterior e = *this;
    e.center = (center - shift) / scale;
    e.zero_radius = zero_radius / scale;
    e.m = m * scale;
    return e;
}

double Exterior::sup_abs() const {
    if (fn) return fn_bound;
    return std::abs(offset) + std::abs(amplitude);
}

Exterior Exterior::combine(double a, const Exterior& other, double b) const {
    const bool same_family = !fn && !other.fn &&
                             (!oscillates() || !other.oscillates() ||
                              (m == other.m && zero_radius == other.zero_radius &&
                               center == other.center));
    if (same_family) {
        Exterior e;
        e.offset = a * offset + b * other.offset;
        const Exterior& osc = oscillates() ? *this : other;
        e.m = osc.m;
        e.zero_radius = osc.zero_radius;
        e.center = osc.center;
        e.amplitude = (oscillates() ? a * amplitude : 0.0) +
                      (other.oscillates() ? b * other.amplitude : 0.0);
        return e;
    }
    Exterior lhs = *this, rhs = other;
    return callable([lhs, rhs, a, b](double z) { return a * lhs(z) + b * rhs(z); },
                    std::abs(a) * lhs.sup_abs() + std::abs(b) * rhs.sup_abs());
}

bool GridFunction::in_span(double z) const { return z >= x0 && z <= x_last(); }

double GridFunction::operator()(double z) const {
    if (!in_span(z)) return exterior(z);
    const double t = (z - x0) / h;
    const double nearest = std::round(t);
    if (std::abs(t - nearest) <= 1e-9) return values[static_cast<std::size_t>(nearest)];
    const long n = static_cast<long>(values.size());
    if (n == 3) {
        const double s0 = t, s1 = t - 1.0, s2 = t - 2.0;
        return values[0] * s1 * s2 / 2.0 - values[1] * s0 * s2 + values[2] * s0 * s1 / 2.0;
    }
    long i = static_cast<long>(std::floor(t)) - 1;
    i = std::clamp(i, 0L, n - 4);
    const double s = t - static_cast<double>(i);
    const double s0 = s, s1 = s - 1.0, s2 = s - 2.0, s3 = s - 3.0;
    const double* v = values.data() + i;
    return -v[0] * s1 * s2 * s3 / 6.0 + v[1] * s0 * s2 * s3 / 2.0 - v[2] * s0 * s1 * s3 / 2.0 +
           v[3] * s0 * s1 * s2 / 6.0;
}

void GridFunction::validate() const {
    if (values.size() < 3) throw InputError("grid function needs at least 3 samples");
    if (!(h > 0.0) || !std::isfinite(h)) throw InputError("grid spacing must be positive");
    if (!std::isfinite(x0)) throw InputError("grid origin must be finite");
}

GridFunction sample(const std::function<double(double)>& f, double x0, double h, std::size_t n,
                    Exterior ext) {
    GridFunction u;
    u.x0 = x0;
    u.h = h;
    u.exterior = std::move(ext);
    u.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) u.values[i] = f(u.x(i));
    u.validate();
    return u;
}

GridFunction combine(double a, const GridFunction& u, double b, const GridFunction& v) {
    if (u.x0 != v.x0 || u.h != v.h || u.size() != v.size())
        throw InputError("grid functions live on different grids");
    GridFunction w = u;
    for (std::size_t i = 0; i < w.size(); ++i) w.values[i] = a * u.values[i] + b * v.values[i];
    w.exterior = u.exterior.combine(a, v.exterior, b);
    return w;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw InputError("not a number: '" + s + "'");
    return v;
}

void write_csv(std::ostream& os, const GridFunction& u) {
    if (u.exterior.is_callable()) throw InputError("callable exteriors cannot be serialized");
    nlohmann::ordered_json hdr;
    hdr["x0"] = u.x0;
    hdr["h"] = u.h;
    hdr["n"] = u.size();
    hdr["exterior"] = {{"kind", u.exterior.kind_name()},
                       {"offset", u.exterior.offset},
                       {"amplitude", u.exterior.amplitude},
                       {"m", u.exterior.m},
                       {"zero_radius", u.exterior.zero_radius},
                       {"center", u.exterior.center}};
    os << "# " << hdr.dump() << "\n";
    os << "x,value\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        os << format_double(u.x(i)) << "," << format_double(u.values[i]) << "\n";
}

GridFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
        throw InputError("grid CSV must start with a '# {...}' header");
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(line.substr(2));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad grid CSV header: ") + e.what());
    }
    GridFunction u;
    try {
        u.x0 = hdr.at("x0").get<double>();
        u.h = hdr.at("h").get<double>();
        const auto n = hdr.at("n").get<std::size_t>();
        const auto& ex = hdr.at("exterior");
        u.exterior.offset = ex.at("offset").get<double>();
        u.exterior.amplitude = ex.at("amplitude").get<double>();
        u.exterior.m = ex.at("m").get<double>();
        u.exterior.zero_radius = ex.at("zero_radius").get<double>();
        u.exterior.center = ex.value("center", 0.0);
        u.values.reserve(n);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad grid CSV header: ") + e.what());
    }
    const auto n = hdr.at("n").get<std::size_t>();
    if (!std::getline(is, line) || line.rfind("x,value", 0) != 0)
        throw InputError("grid CSV is missing the 'x,value' column line");
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("malformed CSV row: " + line);
        u.values.push_back(parse_double(line.substr(comma + 1)));
    }
    if (u.values.size() != n) throw InputError("grid CSV row count does not match header");
    u.validate();
    return u;
}

void write_csv_file(const std::string& path, const GridFunction& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path);
    write_csv(os, u);
}

GridFunction read_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot read " + path);
    return read_csv(is);
}

}  // namespace varorder
