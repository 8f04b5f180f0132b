#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rebirthlab/quadrature.hpp"

using namespace rebirthlab;

TEST_CASE("adaptive Gauss-Kronrod on smooth integrands") {
    QuadratureOptions opts;
    auto r = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0, opts);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    r = integrate_adaptive([](double x) { return std::sin(40.0 * x); }, 0.0, 1.0, opts);
    CHECK(r.value ==
          doctest::Approx((1.0 - std::cos(40.0)) / 40.0).epsilon(1e-10));
}

TEST_CASE("power-law tail blocks") {
    QuadratureOptions opts;
    auto r = integrate_tail([](double x) { return 1.0 / (x * x); }, 1.0, 2.0, opts);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
    r = integrate_tail([](double x) { return std::pow(x, -1.5); }, 4.0, 1.5, opts);
    CHECK(r.value == doctest::Approx(2.0 / std::sqrt(4.0)).epsilon(1e-9));
    CHECK_THROWS_AS(
        integrate_tail([](double x) { return 1.0 / x; }, 1.0, 1.0, opts),
        QuadratureError);
}

TEST_CASE("oscillatory cosine integral against closed forms") {
    QuadratureOptions opts;
    // integral over [0,inf) of cos(w x)/(1+x^2) = (pi/2) exp(-w)
    for (double w : {0.5, 1.0, 3.0}) {
        auto r = cos_integral([](double x) { return 1.0 / (1.0 + x * x); }, w, 2.0, opts);
        CHECK(r.value ==
              doctest::Approx(0.5 * std::numbers::pi * std::exp(-w)).epsilon(1e-8));
    }
    // w = 0 falls back to the plain improper integral: pi/2
    auto r0 = cos_integral([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 2.0, opts);
    CHECK(r0.value == doctest::Approx(0.5 * std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("oscillatory cosine integral against a brute-force Riemann oracle") {
    // slowly decaying f: 1/(1 + x^1.5); oracle by midpoint Riemann over a long
    // window plus the analytic power tail of the non-oscillatory remainder
    auto f = [](double x) { return 1.0 / (1.0 + std::pow(x, 1.5)); };
    const double w = 2.0;
    const double cutoff = 2.0e4;
    const std::size_t n = 8'000'000;
    const double h = cutoff / static_cast<double>(n);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5) * h;
        acc += std::cos(w * x) * f(x);
    }
    // remaining oscillatory tail is O(1/(w cutoff^1.5)), below 1e-7
    const double oracle = static_cast<double>(acc) * h;

    QuadratureOptions opts;
    auto r = cos_integral(f, w, 1.5, opts);
    CHECK(r.value == doctest::Approx(oracle).epsilon(2e-5));
}

TEST_CASE("one-minus-cosine integral: Brownian increment form") {
    QuadratureOptions opts;
    // (1/pi) integral over [0,inf) of (1-cos(w x)) * 2/x^2 = |w|
    for (double w : {0.25, 0.5, 2.0}) {
        auto r = one_minus_cos_integral([](double x) { return 2.0 / (x * x); }, w, 2.0,
                                        opts);
        CHECK(r.value / std::numbers::pi == doctest::Approx(w).epsilon(1e-8));
    }
}

TEST_CASE("tail cutoff honors the truncation bound") {
    const double L = tail_cutoff([](double x) { return std::pow(x, -1.5); }, 1.5, 1e-6);
    CHECK(2.0 * L * std::pow(L, -1.5) / 0.5 <= 1e-6);
}
