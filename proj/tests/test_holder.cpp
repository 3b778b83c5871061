// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "varorder/error.hpp"
#include "varorder/holder.hpp"

using namespace varorder;

namespace {

// Direct definition over all pairs with separation >= floor.
double brute_seminorm(const std::vector<double>& xs, const std::vector<double>& D,
                      const std::function<double(double)>& psi, int d, double floor_sep) {
    double best = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double r = xs[j] - xs[i];
            if (r < floor_sep * (1 - 1e-12)) continue;
            best = std::max(best, std::abs(D[j] - D[i]) / (psi(r) * std::pow(r, -d)));
        }
    return best;
}

GridFunction random_grid(std::mt19937_64& rng, double x0, double h, std::size_t n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GridFunction u;
    u.x0 = x0;
    u.h = h;
    u.values.resize(n);
    for (auto& v : u.values) v = U(rng);
    return u;
}

}  // namespace

TEST(GridFunction, InterpolationAndExterior) {
    auto u = sample([](double x) { return x * x * x - x; }, -1.0, 0.125, 17);
    for (double z : {-0.93, -0.5, 0.01, 0.77, 0.99}) EXPECT_NEAR(u(z), z * z * z - z, 1e-14);
    EXPECT_EQ(u(0.25), u.values[10]);
    EXPECT_EQ(u(1.5), 0.0);
    u.exterior = Exterior::sign_sin(1.0, 2.0);
    EXPECT_EQ(u(1.5), 0.0);
    EXPECT_EQ(u(2.5), 1.0);   // sin(2.5 pi) > 0
    EXPECT_EQ(u(-2.5), -1.0);
    EXPECT_EQ(u(3.5), -1.0);
}

TEST(GridFunction, ExteriorCombination) {
    const auto a = Exterior::sign_sin(3.0, 2.0);
    const auto b = Exterior::constant(0.5);
    const auto c = a.combine(2.0, b, -1.0);
    EXPECT_FALSE(c.is_callable());
    for (double z : {2.1, 2.5, -7.3, 1.0}) EXPECT_EQ(c(z), 2.0 * a(z) - b(z));
    const auto e = a.combine(1.0, Exterior::sign_sin(2.0, 2.0), 1.0);
    EXPECT_TRUE(e.is_callable());
    EXPECT_EQ(e(2.1), a(2.1) + sign_sin(2.0, 2.1));
}

TEST(GridFunction, CsvRoundTripIsBitExact) {
    std::mt19937_64 rng(7);
    auto u = random_grid(rng, -1.0 + 1.0 / 3.0, 1.0 / 3.0 / 97.0, 101);
    u.exterior = Exterior::sign_sin(4.0, 2.0, 0.1 + 0.2);
    u.exterior.offset = 1e-300;
    std::stringstream ss;
    write_csv(ss, u);
    const auto v = read_csv(ss);
    EXPECT_EQ(v.x0, u.x0);
    EXPECT_EQ(v.h, u.h);
    EXPECT_EQ(v.values, u.values);
    EXPECT_EQ(v.exterior.amplitude, u.exterior.amplitude);
    EXPECT_EQ(v.exterior.offset, u.exterior.offset);
    std::stringstream bad("x,value\n1,2\n");
    EXPECT_THROW(read_csv(bad), InputError);
    u.exterior = Exterior::callable([](double) { return 0.0; }, 0.0);
    EXPECT_THROW(write_csv(ss, u), InputError);
}

TEST(Holder, FiniteDifferences) {
    const auto q = sample([](double x) { return x * x; }, -1.0, 0.01, 201);
    for (double v : fd_derivative(q, 2).values) EXPECT_NEAR(v, 2.0, 1e-8);
    const auto c = sample([](double) { return 3.0; }, 0.0, 0.1, 10);
    for (double v : fd_derivative(c, 1).values) EXPECT_EQ(v, 0.0);
    const double h = 0.01;
    const auto s = sample([](double x) { return std::sin(x); }, 0.0, h, 301);
    const auto s2 = fd_derivative(s, 2);
    for (std::size_t i = 0; i < s.size(); ++i)
        EXPECT_NEAR(s2.values[i], -std::sin(s.x(i)), 2.0 * h * h) << i;
    EXPECT_THROW(fd_derivative(sample([](double) { return 0.0; }, 0, 1, 4), 1), InputError);
}

TEST(Holder, WindowMembership) {
    const auto u = sample([](double x) { return x; }, -1.0, 0.25, 9);
    const auto r = window_nodes(u, {-0.5, 0.5});
    EXPECT_EQ(r.first, 2u);
    EXPECT_EQ(r.last, 6u);
    const auto r2 = window_nodes(u, {-0.62, 0.62});  // +-0.75 lie beyond h/2
    EXPECT_EQ(r2.first, 2u);
    EXPECT_EQ(r2.last, 6u);
    const auto r3 = window_nodes(u, {-0.7, 0.7});
    EXPECT_EQ(r3.first, 1u);
    EXPECT_EQ(r3.last, 7u);
    EXPECT_THROW(window_nodes(u, {-3.0, 0.0}), InputError);
}

TEST(Holder, SeminormBasics) {
    const auto affine = sample([](double x) { return 3.0 * x - 1.0; }, -1.0, 1.0 / 64, 129);
    const auto d1 = make_product(make_scale_function("power", {1.2}), make_modulus("power", {0.1}));
    EXPECT_EQ(d1.d, 1);
    EXPECT_NEAR(seminorm(affine, d1, {-1, 1}).value, 0.0, 1e-10);

    const auto quad = sample([](double x) { return x * x; }, -1.0, 1.0 / 64, 129);
    const auto d2 = make_product(make_scale_function("power", {1.95}), make_modulus("power", {0.1}));
    EXPECT_EQ(d2.d, 2);
    EXPECT_NEAR(seminorm(quad, d2, {-1, 1}).value, 0.0, 1e-8);
}

TEST(Holder, SquareRootCusp) {
    const double h = 1.0 / 128;
    const auto u = sample([](double x) { return std::sqrt(std::abs(x)); }, -1.0, h, 257);
    const auto psi = make_modulus("power", {0.5});
    const auto rep = seminorm(u, psi, {-1, 1});
    EXPECT_GE(rep.value, 0.9);
    EXPECT_LE(rep.value, 1.1);
    EXPECT_GE(rep.y - rep.x, 2 * h);
    // oracle: brute force at h/4
    std::vector<double> xs, vs;
    for (int i = 0; i <= 1024; ++i) {
        xs.push_back(-1.0 + i * h / 4);
        vs.push_back(std::sqrt(std::abs(xs.back())));
    }
    const double oracle = brute_seminorm(xs, vs, [](double r) { return std::sqrt(r); }, 0, h / 2);
    EXPECT_NEAR(rep.value, oracle, 0.05 * oracle);
}

TEST(Holder, SeminormMatchesBruteForce) {
    std::mt19937_64 rng(11);
    const auto psi = make_modulus("two-power", {0.3, 0.6});
    for (int t = 0; t < 5; ++t) {
        const auto u = random_grid(rng, 0.0, 0.01, 80);
        std::vector<double> xs;
        for (std::size_t i = 0; i < u.size(); ++i) xs.push_back(u.x(i));
        const double oracle = brute_seminorm(xs, u.values, [&](double r) { return psi(r); }, 0, 0.02);
        EXPECT_NEAR(seminorm(u, psi, {0.0, 0.79}).value, oracle, 1e-14 * oracle);
    }
}

TEST(Holder, Norms) {
    const auto one = sample([](double) { return 1.0; }, -1.0, 1.0 / 32, 65);
    const auto psi = make_modulus("power", {0.3});
    EXPECT_EQ(norm_plain(one, psi, {-1, 1}), 1.0);
    EXPECT_EQ(seminorm(one, psi, {-1, 1}).value, 0.0);

    std::mt19937_64 rng(3);
    const auto u = random_grid(rng, 0.0, 1.0 / 64, 65);
    EXPECT_DOUBLE_EQ(norm_nondim(u, psi, {0, 1}), norm_plain(u, psi, {0, 1}));
}

TEST(Holder, InteriorNormBruteForce) {
    const double h = 1.0 / 32;
    const auto u = sample([](double x) { return x; }, -1.0, h, 65);
    const auto psi = make_modulus("power", {0.1});
    double pair = 0.0, sup0 = 0.0;
    for (int i = 0; i <= 64; ++i) {
        const double x = -1.0 + i * h;
        sup0 = std::max(sup0, std::abs(x));
        for (int j = i + 2; j <= 64; ++j) {
            const double y = -1.0 + j * h;
            const double dmin = std::min(1.0 - std::abs(x), 1.0 - std::abs(y));
            if (dmin <= 0.0) continue;
            pair = std::max(pair, std::pow(dmin, 0.1) * std::abs(y - x) / std::pow(y - x, 0.1));
        }
    }
    EXPECT_NEAR(norm_interior(u, psi, {-1, 1}), sup0 + pair, 1e-13);
}

TEST(Holder, IsometryIdentities) {
    std::mt19937_64 rng(5);
    const auto psi = make_modulus("power-log", {0.4});
    auto u = random_grid(rng, -2.0, 1.0 / 64, 257);
    auto id = rescale_isometry_check(u, make_modulus("power", {0.4}), 1.0, 0.0);
    EXPECT_EQ(id.seminorm_rel_error, 0.0);
    EXPECT_EQ(id.norm_rel_error, 0.0);

    const auto quad = sample([](double x) { return x * x; }, -2.0, 1.0 / 64, 257);
    const auto d2 = make_product(make_scale_function("power", {1.95}), make_modulus("power", {0.1}));
    auto q = rescale_isometry_check(quad, d2.modulus, 0.5, 0.25);
    EXPECT_LE(q.norm_rel_error, 1e-12);

    auto r = rescale_isometry_check(u, psi, 0.25, 0.5);
    EXPECT_LE(r.seminorm_rel_error, 1e-12);
    EXPECT_LE(r.norm_rel_error, 1e-12);
    EXPECT_THROW(rescale_isometry_check(u, psi, 0.25, 0.5 + 1e-3), InputError);
}

TEST(Holder, Interpolation) {
    const auto psi1 = make_modulus("power", {0.1});
    const auto psi2 = make_product(make_scale_function("power", {1.5}), make_modulus("power", {0.1})).modulus;
    const auto zero = sample([](double) { return 0.0; }, -1.0, 1.0 / 128, 257);
    EXPECT_EQ(interpolation_check(zero, psi1, psi2, 0.5, {-1, 1}).required_c, 0.0);
    double prev = 0.0;
    for (int k = 1; k <= 32; k *= 2) {
        const auto u = sample([k](double x) { return std::sin(k * x); }, -1.0, 1.0 / 128, 257);
        const auto rep = interpolation_check(u, psi1, psi2, 0.5, {-1, 1});
        EXPECT_TRUE(std::isfinite(rep.required_c));
        prev = std::max(prev, rep.required_c);
    }
    EXPECT_LT(prev, 1e3);
    EXPECT_THROW(interpolation_check(zero, psi2, psi1, 0.5, {-1, 1}), InputError);
}
