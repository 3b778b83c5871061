// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "varorder/error.hpp"
#include "varorder/operators.hpp"

using namespace varorder;
using boost::math::quadrature::gauss_kronrod;

namespace {

// int_a^b f by Boost adaptive Gauss-Kronrod split at the given points
double boost_int(const std::function<double(double)>& f, std::vector<double> pts) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        s += gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], 15, 1e-13);
    return s;
}

GridFunction truncated_square(double h) {
    return sample([](double x) { return x * x; }, -4.0, h, static_cast<std::size_t>(8.0 / h) + 1);
}

}  // namespace

TEST(Operators, Delta) {
    const auto aff = sample([](double x) { return 2 * x + 1; }, -1, 0.01, 201, Exterior::zero());
    EXPECT_NEAR(delta(aff, 0.1, 0.3), 0.0, 1e-14);
    const auto sq = truncated_square(1.0 / 16);
    EXPECT_NEAR(delta(sq, 0.5, 0.7), 2 * 0.49, 1e-13);
    auto s = sample([](double) { return 0.3; }, -1, 0.05, 41, Exterior::sign_sin(1.0));
    // u(2.5) + u(-2.5) - 2 u(0) from the descriptor
    EXPECT_EQ(delta(s, 0.0, 2.5), 1.0 + -1.0 - 0.6);
}

TEST(Operators, LinearTruncatedSquareClosedForm) {
    const auto phi = make_scale_function("power", {1.0});
    const Kernel K(phi);
    const auto u = truncated_square(1.0 / 64);
    // 2 int_0^4 2 y^2 / y^2 dy
    EXPECT_NEAR(eval_linear(u, K, 0.0, {0, 0, 1e-10}), 16.0, 1e-8);
    // x = 1: oracle from the analytic increment
    auto inc = [](double y) {
        auto uf = [](double z) { return std::abs(z) <= 4 ? z * z : 0.0; };
        return uf(1 + y) + uf(1 - y) - 2 * uf(1.0);
    };
    const double oracle = boost_int([&](double y) { return 2 * inc(y) / (y * y); }, {0, 3, 5}) +
                          2 * (-2.0) / 5.0;
    EXPECT_NEAR(eval_linear(u, K, 1.0, {0, 0, 1e-10}), oracle, 1e-8);
}

TEST(Operators, SignSinTailAgainstBruteForce) {
    const auto phi = make_scale_function("power", {1.5});
    const Kernel K(phi);
    auto u = sample([](double) { return 0.0; }, -1, 1.0 / 32, 65, Exterior::sign_sin(3.0, 2.0));
    const double x = 0.3;
    const double val = eval_linear(u, K, x, {0, 0, 1e-10});
    // brute force: increment is exterior-only beyond 1.3; sum pieces to a large radius
    auto inc = [&](double y) { return u.exterior(x + y) + u.exterior(x - y); };
    std::vector<double> pts{1.3};
    for (double k = -300; k <= 300; k += 1) {
        for (double b : {k / 3.0 - x, x - k / 3.0, 2 - x, -2 + x, 2 + x})
            if (b > 1.3 && b < 200) pts.push_back(b);
    }
    pts.push_back(200);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const double brute = boost_int([&](double y) { return 2 * inc(y) * K(y); }, pts);
    // beyond 200 the sum s(x+y) + s(x-y) averages to zero; remainder ~ T K(200)
    EXPECT_NEAR(val, brute, 1e-7);
}

TEST(Operators, PucciIdentities) {
    const auto phi = make_scale_function("two-power", {0.8, 1.4});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1, 1);
    GridFunction u;
    u.x0 = -1;
    u.h = 1.0 / 32;
    u.values.resize(65);
    for (auto& v : u.values) v = U(rng);
    u.exterior = Exterior::sign_sin(2.0, 1.5, 0.5);
    const QuadratureSpec q{0, 0, 1e-9};
    const Kernel K1(phi, 1.3, 1.3);
    for (double x : {-0.5, 0.0, 0.37}) {
        const double lin = eval_linear(u, Kernel(phi), x, q);
        EXPECT_NEAR(eval_pucci(u, Variant::pucci_plus, phi, 1.3, 1.3, x, q), 1.3 * lin, 1e-8);
        const GridFunction neg = combine(-1.0, u, 0.0, u);
        const double mp = eval_pucci(neg, Variant::pucci_plus, phi, 1.0, 2.0, x, q);
        const double mm = eval_pucci(u, Variant::pucci_minus, phi, 1.0, 2.0, x, q);
        EXPECT_EQ(mp, -mm);
        const double lo = mm, hi = eval_pucci(u, Variant::pucci_plus, phi, 1.0, 2.0, x, q);
        EXPECT_LE(lo, hi);
        EXPECT_LE(lo, 1.5 * lin + 1e-8);
        EXPECT_GE(hi, 1.5 * lin - 1e-8);
    }
    const auto sq = truncated_square(1.0 / 16);
    const auto pw = make_scale_function("power", {1.2});
    EXPECT_NEAR(eval_pucci(sq, Variant::pucci_plus, pw, 1.0, 2.0, 0.0, q),
                2.0 * eval_linear(sq, Kernel(pw), 0.0, q), 1e-8);
}

TEST(Operators, Bellman) {
    const auto phi = make_scale_function("power", {1.5});
    const auto sq = truncated_square(1.0 / 16);
    const QuadratureSpec q{0, 0, 1e-9};
    const double lin = eval_linear(sq, Kernel(phi), 0.0, q);
    auto single = OperatorSpec::bellman({BellmanMember{Kernel(phi), {}, [](double) { return 0.7; }}}, 1, 1);
    EXPECT_NEAR(eval_bellman(sq, single, 0.0, q), lin + 0.7, 1e-12);
    auto two = OperatorSpec::bellman({BellmanMember{Kernel(phi), {}, [](double) { return 1.0; }},
                                      BellmanMember{Kernel(phi), {}, {}}}, 1, 1);
    EXPECT_NEAR(eval_bellman(sq, two, 0.0, q), lin, 1e-12);
    auto env = OperatorSpec::bellman({BellmanMember{Kernel(phi, 1, 3, [](double) { return 1.0; }), {}, {}},
                                      BellmanMember{Kernel(phi, 1, 3, [](double) { return 3.0; }), {}, {}}},
                                     1, 3);
    EXPECT_NEAR(eval_bellman(sq, env, 0.0, q), lin, 1e-8);
}

TEST(Operators, Sandwich) {
    const auto phi = make_scale_function("power", {1.3});
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1, 1);
    auto rnd = [&](Exterior e) {
        GridFunction u;
        u.x0 = -1;
        u.h = 1.0 / 32;
        u.values.resize(65);
        for (auto& v : u.values) v = U(rng);
        u.exterior = e;
        return u;
    };
    const auto u = rnd(Exterior::sign_sin(2.0, 1.0));
    const auto v = rnd(Exterior::sign_sin(2.0, 1.0, -0.5));
    auto shape = [](double y) { return 1.5 + 0.5 * std::cos(3.0 * std::log(y)); };
    const auto bell = OperatorSpec::bellman({BellmanMember{Kernel(phi, 1, 2, shape), {}, {}},
                                             BellmanMember{Kernel(phi, 1, 2), {}, [](double) { return 0.2; }}},
                                            1, 2);
    const QuadratureSpec q{0, 0, 1e-8};
    for (double x : {-0.3, 0.1}) {
        const auto r = ellipticity_sandwich_check(bell, u, v, x, q);
        EXPECT_TRUE(r.ok) << r.slack_lower << " " << r.slack_upper;
        const auto z = ellipticity_sandwich_check(bell, u, u, x, q);
        EXPECT_EQ(z.middle, 0.0);
        EXPECT_EQ(z.upper, 0.0);
    }
}

TEST(Operators, WeightNorm) {
    const auto phi = make_scale_function("power", {1.5});
    const auto zero = sample([](double) { return 0.0; }, -1, 1.0 / 16, 33);
    EXPECT_EQ(weight_norm(zero, phi), 0.0);
    const auto one = sample([](double) { return 1.0; }, -1, 1.0 / 16, 33, Exterior::constant(1.0));
    boost::math::quadrature::tanh_sinh<double> ts;
    const double oracle =
        2.0 * ts.integrate([&](double y) { return phi.c_phi / (1 + y * phi(y)); }, 0.0, INFINITY);
    EXPECT_NEAR(weight_norm(one, phi, 1e-10), oracle, 1e-9);
    auto osc = one;
    osc.exterior = Exterior::sign_sin(3.0, 0.0);
    EXPECT_NEAR(weight_norm(osc, phi, 1e-10), oracle, 1e-9);
}

TEST(Operators, PNFunctionals) {
    const auto phi = make_scale_function("power", {1.5});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1, 1);
    GridFunction u;
    u.x0 = -1;
    u.h = 1.0 / 32;
    u.values.resize(65);
    for (auto& v : u.values) v = U(rng);
    u.exterior = Exterior::sign_sin(2.0, 1.0);
    const auto z = pn_functionals(u, phi, 0.0, 0.0);
    EXPECT_EQ(z.P, 0.0);
    EXPECT_EQ(z.N, 0.0);
    const auto sq = sample([](double x) { return x * x - x; }, -2, 1.0 / 32, 129,
                           Exterior::callable([](double x) { return x * x - x; }, 1e9));
    const auto q0 = pn_functionals(sq, phi, 0.0, 0.25, {0, 0, 1e-9});
    EXPECT_NEAR(q0.P, 0.0, 1e-9);
    EXPECT_NEAR(q0.N, 0.0, 1e-9);
    u = sample([](double x) { return std::sin(3 * x); }, -1, 1.0 / 32, 65, Exterior::sign_sin(2.0, 1.0));
    const auto r = pn_functionals(u, phi, 0.0, 0.25, {0, 0, 1e-9});
    EXPECT_GT(r.P, 0.0) << r.P << " " << r.N;
    EXPECT_GT(r.N, 0.0);
    // P - N equals L u(x + shift) - L u(x)
    const Kernel K(phi);
    EXPECT_NEAR(r.P - r.N, eval_linear(u, K, 0.25, {0, 0, 1e-9}) - eval_linear(u, K, 0.0, {0, 0, 1e-9}),
                1e-7);
}

TEST(Operators, Barrier) {
    const auto phi = make_scale_function("power", {1.5});
    for (double s : {1e-3, 0.01, 0.1}) {
        const double a = pucci_plus_barrier(phi, 1, 2, 0.1, 0.25 + s);
        const double b = pucci_plus_barrier(phi, 1, 2, 0.1, -0.25 - s);
        EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(a)));
    }
    EXPECT_LT(pucci_plus_barrier(phi, 1, 2, 0.05, 0.25 + 1e-3), 0.0);
}
