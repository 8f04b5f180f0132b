#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rebirthlab/levy.hpp"
#include "rebirthlab/parallel.hpp"

using namespace rebirthlab;

namespace {

double closed_u(double beta, double x) {
    return std::exp(-std::sqrt(2.0 * beta) * std::abs(x)) / std::sqrt(2.0 * beta);
}

// midpoint Riemann oracle for (1/pi) int_0^inf (1 - cos(w l)) / psi(l) dl.
// [0,1] is integrated in the substituted variable l = t^2 (the integrand has a
// half-power cusp at 0); the power tail of the non-oscillatory part is added
// analytically.
double brute_force_phi(double alpha, double w) {
    long double acc = 0.0L;
    {
        const std::size_t n0 = 400'000;
        const double h0 = 1.0 / static_cast<double>(n0);
        for (std::size_t i = 0; i < n0; ++i) {
            const double t = (static_cast<double>(i) + 0.5) * h0;
            const double l = t * t;
            acc += (1.0 - std::cos(w * l)) / std::pow(l, alpha) * 2.0 * t * h0;
        }
    }
    const double cutoff = 1.0e6;
    const std::size_t n = 20'000'000;
    const double h = (cutoff - 1.0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double l = 1.0 + (static_cast<double>(i) + 0.5) * h;
        acc += (1.0 - std::cos(w * l)) / std::pow(l, alpha) * h;
    }
    const double dc_tail = std::pow(cutoff, 1.0 - alpha) / (alpha - 1.0);
    return (static_cast<double>(acc) + dc_tail) / std::numbers::pi;
}

}  // namespace

TEST_CASE("Brownian-exponent closed forms") {
    LevyKernels lk(LevyExponent::brownian());
    for (double beta : {0.5, 1.0, 2.0})
        for (double x : {0.0, 0.3, -1.2, 2.0})
            CHECK(lk.u_beta(beta, x) == doctest::Approx(closed_u(beta, x)).epsilon(1e-8));
    CHECK(lk.u_beta(2.0, 1.0) == doctest::Approx(std::exp(-2.0) / 2.0).epsilon(1e-8));
    for (double x : {0.5, -1.7}) {
        CHECK(lk.phi0(x) == doctest::Approx(std::abs(x)).epsilon(1e-8));
        CHECK(lk.sigma2(0.0, x) == doctest::Approx(2.0 * std::abs(x)).epsilon(1e-8));
    }
    CHECK(lk.phi0(0.0) == 0.0);
    CHECK(lk.sigma2(1.0, 0.0) == 0.0);
    // killed-at-zero kernel from the spec example
    CHECK(lk.v_beta(1.0, 1.0, 1.0) ==
          doctest::Approx((1.0 - std::exp(-2.0 * std::numbers::sqrt2)) /
                          std::numbers::sqrt2)
              .epsilon(1e-8));
    CHECK(lk.v_beta(1.0, 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lk.frak_u0(1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("symmetries and orderings") {
    LevyKernels lk(LevyExponent::stable(1.5, 1.0));
    for (double x : {0.2, 1.1, 3.0}) {
        CHECK(lk.u_beta(1.0, x) == lk.u_beta(1.0, -x));
        CHECK(lk.phi0(x) == lk.phi0(-x));
        CHECK(lk.u_beta(1.0, x) > 0.0);
        CHECK(lk.sigma2(1.0, x) <= lk.sigma2(0.0, x));
        CHECK(lk.v_beta(1.0, x, 0.7) <= lk.u_beta(1.0, x - 0.7) + 1e-12);
    }
    CHECK(lk.frak_u0(0.4, 1.3) == lk.frak_u0(1.3, 0.4));
    CHECK(lk.frak_u0(0.4, 0.4) == doctest::Approx(2.0 * lk.phi0(0.4)));
    // increment variance has two algebraic routes for beta > 0
    for (double x : {0.1, 0.9})
        CHECK(lk.sigma2(1.0, x) ==
              doctest::Approx(2.0 * (lk.u_beta(1.0, 0.0) - lk.u_beta(1.0, x)))
                  .epsilon(1e-7));
}

TEST_CASE("stable exponent phi against the brute-force oracle") {
    LevyKernels lk(LevyExponent::stable(1.5, 1.0));
    CHECK(lk.phi0(0.3) == doctest::Approx(brute_force_phi(1.5, 0.3)).epsilon(2e-5));
}

TEST_CASE("C_r constants") {
    CHECK(LevyKernels::c_r(2.0) == doctest::Approx(1.0).epsilon(1e-9));
    // oracle for r = 1.5: C_r = (2/pi) int (1-cos s)/s^1.5 ds = 2 phi-like value
    const double oracle = 2.0 * brute_force_phi(1.5, 1.0);
    CHECK(LevyKernels::c_r(1.5) == doctest::Approx(oracle).epsilon(2e-5));
    CHECK_THROWS_AS(LevyKernels::c_r(1.0), std::domain_error);
    CHECK_THROWS_AS(LevyKernels::c_r(2.5), std::domain_error);
}

TEST_CASE("small-distance asymptotics of the increment variance") {
    // stable index r: sigma^2(x) ~ C_r / (x psi(1/x)) with equality for pure
    // power exponents at beta = 0; 5% band at x = 0.01 for beta > 0
    LevyKernels lk(LevyExponent::stable(1.5, 1.0));
    const double cr = LevyKernels::c_r(1.5);
    for (double x : {0.01, 1e-3}) {
        const double predicted = cr / (x * std::pow(1.0 / x, 1.5));
        CHECK(lk.sigma2(0.0, x) / predicted == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(lk.sigma2(1.0, x) / predicted == doctest::Approx(1.0).epsilon(0.05));
    }
    // asymptotic equivalence across discount levels at x = 1e-4
    for (double b1 : {0.0, 1.0, 2.0})
        for (double b2 : {0.0, 1.0, 2.0}) {
            const double ratio = lk.sigma2(b1, 1e-4) / lk.sigma2(b2, 1e-4);
            CHECK(ratio > 0.95);
            CHECK(ratio < 1.05);
        }
}

TEST_CASE("tabulated exponents interpolate and extrapolate by power law") {
    std::vector<double> grid, vals;
    for (int i = 0; i <= 400; ++i) {
        const double l = std::pow(10.0, -3.0 + 8.0 * i / 400.0);
        grid.push_back(l);
        vals.push_back(std::pow(l, 1.5));
    }
    LevyKernels tab(LevyExponent::tabulated(grid, vals, 1.5));
    LevyKernels exact(LevyExponent::stable(1.5, 1.0));
    for (double x : {0.3, 1.0}) {
        CHECK(tab.u_beta(1.0, x) == doctest::Approx(exact.u_beta(1.0, x)).epsilon(1e-4));
        CHECK(tab.phi0(x) == doctest::Approx(exact.phi0(x)).epsilon(1e-4));
    }
    CHECK(tab.spectral_integral() ==
          doctest::Approx(exact.spectral_integral()).epsilon(1e-4));
}

TEST_CASE("domain and validation errors") {
    CHECK_THROWS_AS(LevyExponent::stable(0.9, 1.0), std::domain_error);
    CHECK_THROWS_AS(LevyExponent::stable(2.0, -1.0), std::domain_error);
    CHECK_THROWS_AS(LevyExponent::tabulated({1.0, 0.5}, {1.0, 1.0}, 1.5),
                    std::domain_error);
    CHECK_THROWS_AS(LevyExponent::tabulated({0.5, 1.0}, {1.0, -1.0}, 1.5),
                    std::domain_error);
    LevyKernels lk(LevyExponent::brownian());
    CHECK_THROWS_AS(lk.u_beta(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(lk.u_beta(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(lk.sigma2(-0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(lk.frak_u0(0.0, 1.0), std::domain_error);
}

TEST_CASE("kernel cache is safe under concurrent evaluation") {
    LevyKernels lk(LevyExponent::brownian());
    const auto vals = parallel_map<double>(64, [&lk](int i) {
        return lk.u_beta(1.0, 0.25 * (i % 4)) + lk.phi0(0.5 + 0.1 * (i % 3));
    });
    for (int i = 0; i < 64; ++i)
        CHECK(vals[static_cast<std::size_t>(i)] ==
              vals[static_cast<std::size_t>(i % 12)]);
    // identical arguments reproduce identical bits through the cache
    CHECK(lk.u_beta(1.0, 0.25) == lk.u_beta(1.0, 0.25));
}
