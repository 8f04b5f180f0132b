#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rebirthlab/rebirth.hpp"
#include "rebirthlab/rng.hpp"

using namespace rebirthlab;

namespace {
std::shared_ptr<LevyKernels> brownian_kernels() {
    static auto lk = std::make_shared<LevyKernels>(LevyExponent::brownian());
    return lk;
}
double closed_u(double q, double x) {
    return std::exp(-std::sqrt(2.0 * q) * std::abs(x)) / std::sqrt(2.0 * q);
}
}  // namespace

TEST_CASE("measures: atoms, densities, sampling") {
    const Measure mu = Measure::atoms({{0.0, 0.25}, {1.0, 0.75}});
    CHECK(mu.total_mass() == doctest::Approx(1.0));
    CHECK(mu.integrate([](double x) { return x; }) == doctest::Approx(0.75));
    const Measure uni = Measure::uniform(-1.0, 1.0, 8193);
    CHECK(uni.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(uni.integrate([](double x) { return x * x; }) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    Rng rng(7);
    double mean = 0.0;
    for (int i = 0; i < 20000; ++i) mean += uni.sample(rng);
    CHECK(std::abs(mean / 20000.0) < 0.02);
    Rng r1(42), r2(42);
    CHECK(mu.sample(r1) == mu.sample(r2));
    CHECK_THROWS_AS(Measure::atoms({}), std::domain_error);
    CHECK_THROWS_AS(Measure::atoms({{0.0, -1.0}}), std::domain_error);
}

TEST_CASE("f against closed forms and a brute-force oracle") {
    auto lk = brownian_kernels();
    const BaseProcess base = BaseProcess::levy_killed(lk, 1.0);

    // mu = delta_0, p = 1: f(0) = u^{beta+p}(0) = 1/2
    const RebirthKernel rk0(base, Measure::delta(0.0), 1.0);
    CHECK(rk0.f(0.0) == doctest::Approx(0.5).epsilon(1e-8));

    // single atom: f(y) = u^p(x0, y)
    const RebirthKernel rk1(base, Measure::delta(0.7), 1.0);
    CHECK(rk1.f(0.2) == doctest::Approx(closed_u(2.0, 0.5)).epsilon(1e-8));

    // uniform mu on [-1,1]: midpoint-Riemann oracle with 1e5 nodes
    const RebirthKernel rku(base, Measure::uniform(-1.0, 1.0, 8193), 1.0);
    long double acc = 0.0L;
    const std::size_t n = 100'000;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -1.0 + 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        acc += closed_u(2.0, x) * 0.5;
    }
    const double oracle = static_cast<double>(acc) * 2.0 / static_cast<double>(n);
    CHECK(rku.f(0.0) == doctest::Approx(oracle).epsilon(1e-6));

    // f(y) <= u^p(y,y) for probability measures
    for (double y : {-2.0, -0.3, 0.0, 0.4, 1.1})
        CHECK(rku.f(y) <= base.u_p(1.0, y, y) + 1e-10);
}

TEST_CASE("rebirth kernel w: closed form, simplification consistency, asymmetry") {
    auto lk = brownian_kernels();
    const BaseProcess base = BaseProcess::levy_killed(lk, 1.0);
    const RebirthKernel rk(base, Measure::delta(0.0), 1.0);

    // w(0,0) = u^2(0) + (beta/p) f(0) = 1/2 + 1/2 = 1
    CHECK(rk.w(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-7));

    // the case-1 simplification agrees with the generic bracket formula
    for (double x : {-0.5, 0.3})
        for (double y : {0.0, 0.9}) {
            const double generic =
                base.u_p(1.0, x, y) +
                (1.0 / 1.0 - base.row_integral(1.0, x)) * rk.f(y) / rk.f_l1_norm();
            CHECK(rk.w(x, y) == doctest::Approx(generic).epsilon(1e-5));
        }

    // asymmetry witness: mu = delta_1 gives a visibly asymmetric kernel
    const RebirthKernel rk_asym(base, Measure::delta(1.0), 1.0);
    double max_asym = 0.0;
    for (double x : {-1.0, 0.0, 0.5})
        for (double y : {0.25, 1.5})
            max_asym = std::max(max_asym, std::abs(rk_asym.w(x, y) - rk_asym.w(y, x)));
    CHECK(max_asym > 1e-6);

    CHECK_THROWS_AS(RebirthKernel(base, Measure::delta(0.0), 0.0), std::domain_error);
    CHECK_THROWS_AS(RebirthKernel(base, Measure::atoms({{0.0, 0.5}}), 1.0),
                    std::domain_error);
}

TEST_CASE("case 2 and case 3 kernels at the killed point") {
    auto lk = brownian_kernels();
    const double beta = 1.0, p = 1.0, q = beta + p;
    const BaseProcess b2 = BaseProcess::levy_killed_at_zero(lk, beta);
    const RebirthKernel rk2(b2, Measure::delta(1.0), p);
    // at x = 0 the killed kernel vanishes and the bracket collapses
    const double expect =
        (beta / p + 1.0) / q * rk2.f(0.5) / rk2.f_l1_norm();
    CHECK(rk2.w(0.0, 0.5) == doctest::Approx(expect).epsilon(1e-6));
    // generic route agrees for case 2
    for (double x : {0.4, -0.8}) {
        const double generic =
            b2.u_p(p, x, 0.5) +
            (1.0 / p - b2.row_integral(p, x)) * rk2.f(0.5) / rk2.f_l1_norm();
        CHECK(rk2.w(x, 0.5) == doctest::Approx(generic).epsilon(1e-5));
    }
    const BaseProcess b3 = BaseProcess::levy_recurrent_zero(lk);
    const RebirthKernel rk3(b3, Measure::delta(1.0), p);
    for (double x : {0.4, -0.8}) {
        const double generic =
            b3.u_p(p, x, 0.5) +
            (1.0 / p - b3.row_integral(p, x)) * rk3.f(0.5) / rk3.f_l1_norm();
        CHECK(rk3.w(x, 0.5) == doctest::Approx(generic).epsilon(1e-5));
    }
}

TEST_CASE("partial rebirth kernel") {
    auto lk = brownian_kernels();
    const BaseProcess base = BaseProcess::levy_killed(lk, 1.0);
    const Measure nu = Measure::atoms({{1.0, 0.5}});
    const PartialRebirthKernel pk(base, nu);
    const double expect = closed_u(1.0, 0.0) + 0.5 * closed_u(1.0, 1.0);
    CHECK(pk.u_tilde0(0.0, 0.0) == doctest::Approx(expect).epsilon(1e-7));
    CHECK(pk.exile_probability() == doctest::Approx(1.0 / 1.5));
    // the addition is a function of y alone
    const double d1 = pk.u_tilde0(0.3, 0.8) - base.u_0(0.3, 0.8);
    const double d2 = pk.u_tilde0(-1.1, 0.8) - base.u_0(-1.1, 0.8);
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
    CHECK(pk.u_tilde0(0.3, 0.8) >= base.u_0(0.3, 0.8));
}

TEST_CASE("cycle weights of the partial mechanism") {
    CHECK(cycle_weights_partial(1.0, 1) == std::pair{1.0, 0.0});
    const auto [in_s, exiled] = cycle_weights_partial(1.0, 3);
    CHECK(in_s == doctest::Approx(0.25));
    CHECK(exiled == doctest::Approx(0.75));
    for (int i = 1; i <= 6; ++i) {
        const auto [a, b] = cycle_weights_partial(0.5, i);
        CHECK(a + b == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(cycle_weights_partial(1.0, 0), std::domain_error);
}

TEST_CASE("killing Laplace transform and renewal sum") {
    auto lk = brownian_kernels();
    const BaseProcess base = BaseProcess::levy_killed(lk, 1.0);
    CHECK(base.killing_laplace(1.0, 0.4) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(base.killing_laplace(1e-5, 0.0) == doctest::Approx(1.0).epsilon(1e-4));
    const RebirthKernel rk(base, Measure::delta(0.0), 1.0);
    CHECK(rk.renewal_sum(0.0) == doctest::Approx(1.0).epsilon(1e-6));
}
