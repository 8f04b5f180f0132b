#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rebirthlab/gaussian.hpp"
#include "rebirthlab/diffusion.hpp"
#include "rebirthlab/levy.hpp"
#include "rebirthlab/rng.hpp"

using namespace rebirthlab;

namespace {
std::shared_ptr<LevyKernels> brownian_kernels() {
    static auto lk = std::make_shared<LevyKernels>(LevyExponent::brownian());
    return lk;
}
}  // namespace

TEST_CASE("sampler determinism and degenerate inputs") {
    GaussianFieldSpec spec;
    spec.grid = {0.2, 0.5, 1.0};
    spec.covariance = [](double x, double y) { return std::exp(-std::abs(x - y)); };
    const GaussianSampler gs(spec);
    const auto a = gs.sample(16, 99);
    const auto b = gs.sample(16, 99);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const auto empty = gs.sample(0, 1);
    CHECK(empty.rows() == 0);

    GaussianFieldSpec bad;
    bad.grid = {0.0, 1.0};
    bad.jitter = 1e-15;
    bad.covariance = [](double x, double y) { return x == y ? 0.1 : -1.0; };
    CHECK_THROWS_AS(GaussianSampler{bad}, DegeneracyError);
}

TEST_CASE("single-point variance of the recurrent-at-zero kernel") {
    auto lk = brownian_kernels();
    GaussianFieldSpec spec;
    spec.grid = {1.0};
    spec.covariance = [&lk](double x, double y) { return lk->frak_u0(x, y); };
    const GaussianSampler gs(spec);
    const int n = 100000;
    const auto m = gs.sample(n, 5);
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += m(i, 0) * m(i, 0);
    var /= n;
    const double se = 2.0 * std::sqrt(2.0 / n);  // var of the variance estimate
    CHECK(std::abs(var - 2.0) <= 5.0 * se);
}

TEST_CASE("empirical covariance recovery on a 10-point grid") {
    auto lk = brownian_kernels();
    GaussianFieldSpec spec;
    spec.grid = {-1.6, -1.0, -0.55, -0.25, 0.0, 0.3, 0.5, 0.85, 1.25, 1.7};
    spec.covariance = [&lk](double x, double y) { return lk->u_beta(1.0, x - y); };
    const GaussianSampler gs(spec);
    const int n = 20000;
    const auto m = gs.sample(n, 11);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j <= i; ++j) {
            double c = 0.0;
            for (int k = 0; k < n; ++k) c += m(k, i) * m(k, j);
            c /= n;
            const double target = gs.covariance_matrix()(i, j);
            // var of a product of joint normals, conservative bound
            const double se = std::sqrt((gs.covariance_matrix()(i, i) *
                                             gs.covariance_matrix()(j, j) +
                                         target * target) /
                                        n);
            CHECK(std::abs(c - target) <= 5.0 * se);
        }
}

TEST_CASE("midpoint refinement reproduces the joint law") {
    auto lk = brownian_kernels();
    const Covariance ou = [&lk](double x, double y) { return lk->u_beta(1.0, x - y); };
    const MarkovMidpointRefiner refiner(ou);
    Rng rng(2024);
    const int depth = 4, reps = 30000;
    const std::size_t n = (std::size_t{1} << depth) + 1;
    std::vector<double> acc00(n * n, 0.0);
    std::vector<double> field;
    for (int r = 0; r < reps; ++r) {
        field = refiner.sample_dyadic(0.0, 1.0, depth, rng);
        for (std::size_t i = 0; i < n; i += 4)
            for (std::size_t j = 0; j < n; j += 4) acc00[i * n + j] += field[i] * field[j];
    }
    for (std::size_t i = 0; i < n; i += 4)
        for (std::size_t j = 0; j < n; j += 4) {
            const double xi = static_cast<double>(i) / static_cast<double>(n - 1);
            const double xj = static_cast<double>(j) / static_cast<double>(n - 1);
            const double target = ou(xi, xj);
            const double emp = acc00[i * n + j] / reps;
            const double se =
                std::sqrt((ou(xi, xi) * ou(xj, xj) + target * target) / reps);
            CHECK(std::abs(emp - target) <= 5.0 * se);
        }
    // determinism
    Rng r1(5), r2(5);
    CHECK(refiner.sample_dyadic(0.0, 1.0, 6, r1) == refiner.sample_dyadic(0.0, 1.0, 6, r2));
}

TEST_CASE("midpoint refinement handles the pinned Brownian start") {
    // covariance 2 min(x, y): variance 0 at the left endpoint
    const Covariance cov = [](double x, double y) { return 2.0 * std::min(x, y); };
    const MarkovMidpointRefiner refiner(cov);
    Rng rng(17);
    const auto field = refiner.sample_dyadic(0.0, 1.0, 10, rng);
    CHECK(field.front() == 0.0);
    double var = 0.0;
    const int reps = 20000;
    Rng rng2(18);
    for (int r = 0; r < reps; ++r) {
        const auto f = refiner.sample_dyadic(0.0, 1.0, 4, rng2);
        var += f.back() * f.back();
    }
    var /= reps;
    CHECK(std::abs(var - 2.0) <= 5.0 * 2.0 * std::sqrt(2.0 / reps));
}

TEST_CASE("chi-square combination") {
    Eigen::MatrixXd z1 = Eigen::MatrixXd::Zero(3, 2), z2 = z1, z3 = z1;
    // degenerate all-zero components with shift 2 and half weights: 3 * (1/2) * 4
    const auto g = chi_square_combine({z1, z2, z3}, 2.0, true);
    CHECK(g(1, 1) == doctest::Approx(6.0));
    // r = 1, s = 0 reduces to half the square of the single component
    Eigen::MatrixXd one(1, 2);
    one << 0.3, -1.2;
    const auto h = chi_square_combine({one}, 0.0, true);
    CHECK(h(0, 0) == doctest::Approx(0.5 * 0.09));
    CHECK(h(0, 1) == doctest::Approx(0.5 * 1.44));
    Eigen::MatrixXd mismatched(2, 2);
    CHECK_THROWS_AS(chi_square_combine({one, mismatched}, 0.0, false), std::domain_error);
}

TEST_CASE("chi-square mean matches the moment identity") {
    auto lk = brownian_kernels();
    GaussianFieldSpec s0, sp;
    s0.grid = sp.grid = {0.0, 0.5};
    s0.covariance = [&lk](double x, double y) { return lk->u_beta(1.0, x - y); };
    sp.covariance = [&lk](double x, double y) { return lk->u_beta(2.0, x - y); };
    const GaussianSampler g0(s0), gp(sp);
    const int n = 20000;
    const double shift = 1.0;
    const auto e0 = g0.sample(n, 21);
    const auto ep = gp.sample(n, 22);
    const auto y = chi_square_combine({e0, ep}, shift, true);
    const double expect = 0.5 * (lk->u_beta(1.0, 0.0) + shift * shift) +
                          0.5 * (lk->u_beta(2.0, 0.0) + shift * shift);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += y(i, 0);
    mean /= n;
    CHECK(std::abs(mean - expect) <= 5.0 * 1.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("modulus target plug-ins") {
    auto sig = [](double u) { return 2.0 * u; };
    const double u = std::exp(-std::exp(2.0));
    CHECK(modulus_target_local(sig, u) ==
          doctest::Approx(std::sqrt(2.0 * 2.0 * u * 2.0)));
    CHECK_THROWS_AS(modulus_target_local(sig, 0.5), std::domain_error);
    const double d = std::pow(2.0, -10.0);
    CHECK(modulus_target_uniform(sig, 0.25, 0.25 + d) ==
          doctest::Approx(std::sqrt(4.0 * d * 10.0 * std::log(2.0))).epsilon(1e-12));
    CHECK(modulus_target_uniform(sig, 0.25 + d, 0.25) ==
          modulus_target_uniform(sig, 0.25, 0.25 + d));
    CHECK_THROWS_AS(modulus_target_uniform(sig, 0.3, 0.3), std::domain_error);
    // monotone in sigma^2
    auto sig2 = [](double v) { return 3.0 * v; };
    CHECK(modulus_target_local(sig2, u) > modulus_target_local(sig, u));
}

TEST_CASE("eta_p decomposition rebuilds the free kernel") {
    auto lk = brownian_kernels();
    const double p = 1.0;
    // exact algebra: v^p(x,y) + u^p(x) u^p(y) / u^p(0) = u^p(x-y)
    for (double x : {0.2, 1.0})
        for (double y : {-0.4, 0.6}) {
            const double lhs = lk->v_beta(p, x, y) +
                               lk->u_beta(p, x) * lk->u_beta(p, y) / lk->u_beta(p, 0.0);
            CHECK(lhs == doctest::Approx(lk->u_beta(p, x - y)).epsilon(1e-8));
        }

    // MC covariance of the reassembled field on a grid containing 0
    std::vector<double> grid = {0.0, 0.5, 1.0};
    GaussianFieldSpec vs;
    vs.grid = grid;
    vs.covariance = [&lk, p](double x, double y) { return lk->v_beta(p, x, y); };
    const GaussianSampler vsamp(vs);
    auto u_of = [&lk, p](double x) { return lk->u_beta(p, x); };
    Rng rng(303);
    const int n = 100000;
    double c01 = 0.0, v0 = 0.0;
    std::vector<double> draw;
    for (int i = 0; i < n; ++i) {
        vsamp.sample_one(rng, draw);
        const double xi = rng.normal();
        const auto eta = eta_p_decomposition(draw, grid, u_of, xi);
        // at x = 0 the killed part vanishes up to the factorization jitter:
        // eta(0) = sqrt(u(0)) xi + O(sqrt(jitter))
        CHECK(std::abs(eta[0] - std::sqrt(u_of(0.0)) * xi) < 1e-4);
        c01 += eta[1] * eta[2];
        v0 += eta[0] * eta[0];
    }
    c01 /= n;
    v0 /= n;
    const double t01 = lk->u_beta(p, 0.5);
    const double se01 = std::sqrt((u_of(0.0) * u_of(0.0) + t01 * t01) / n);
    CHECK(std::abs(c01 - t01) <= 5.0 * se01);
    CHECK(std::abs(v0 - u_of(0.0)) <= 5.0 * u_of(0.0) * std::sqrt(2.0 / n));
}

TEST_CASE("per-draw remainder bound from the covariance coefficients") {
    auto lk = brownian_kernels();
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(-1.0 + 0.1 * i);
    GaussianFieldSpec spec;
    spec.grid = grid;
    spec.covariance = [&lk](double x, double y) { return lk->u_beta(1.0, x - y); };
    const GaussianSampler gs(spec);
    const std::size_t di = 10;
    const double d = grid[di];
    auto U = [&](double x, double y) { return lk->u_beta(1.0, x - y); };
    auto sig = [&](double x, double y) {
        return std::sqrt(U(x, x) + U(y, y) - 2.0 * U(x, y));
    };
    const double udd = std::sqrt(U(d, d));
    Rng rng(99);
    std::vector<double> eta;
    for (int rep = 0; rep < 1000; ++rep) {
        gs.sample_one(rng, eta);
        for (std::size_t a = 0; a < grid.size(); a += 3)
            for (std::size_t b = 0; b < grid.size(); b += 3) {
                if (a == b) continue;
                const double u = grid[a], v = grid[b];
                const double Vv = U(v, d) / U(d, d), Vu = U(u, d) / U(d, d);
                const double g = (1.0 - Vv) * eta[a] - (1.0 - Vu) * eta[b];
                const double bound = sig(d, v) / udd * std::abs(eta[a] - eta[b]) +
                                     sig(u, v) / udd * std::abs(eta[b]);
                CHECK(std::abs(g) <= bound + 1e-9);
            }
    }
}

TEST_CASE("entropy-type condition decreases for the Brownian family") {
    auto lk = brownian_kernels();
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 5; k <= 20; ++k) {
        const double h = std::pow(2.0, -k);
        const double v = lk->sigma2(0.0, h) * std::log(1.0 / h);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("split sampling rebuilds the killed-at-zero covariance") {
    auto lk = brownian_kernels();
    DiffusionKernels bm(DiffusionSpec::brownian());
    const KernelFactors fp = bm.solve_factors(1.0);
    std::vector<double> grid;
    for (int i = 1; i <= 8; ++i) grid.push_back(0.125 * i);
    GaussianFieldSpec gsp, hsp;
    gsp.grid = hsp.grid = grid;
    gsp.covariance = [&fp](double x, double y) { return fp.v_bar(x, y); };
    hsp.covariance = [&](double x, double y) {
        return bm.frak_u0(x, y) - fp.v_bar(x, y);
    };
    const GaussianSampler gp(gsp), hp(hsp);
    Rng rng(515);
    const int n = 20000;
    std::vector<double> a, b;
    double c07 = 0.0;
    for (int i = 0; i < n; ++i) {
        gp.sample_one(rng, a);
        hp.sample_one(rng, b);
        c07 += (a[0] + b[0]) * (a[7] + b[7]);
    }
    c07 /= n;
    const double target = bm.frak_u0(grid[0], grid[7]);
    const double se = std::sqrt((bm.frak_u0(grid[0], grid[0]) *
                                     bm.frak_u0(grid[7], grid[7]) +
                                 target * target) /
                                n);
    CHECK(std::abs(c07 - target) <= 5.0 * se);
}

TEST_CASE("field-sample files round-trip with header and checksum") {
    GaussianFieldSpec spec;
    spec.grid = {0.1, 0.4, 0.9};
    spec.covariance = [](double x, double y) { return std::exp(-std::abs(x - y)); };
    const GaussianSampler gs(spec);
    FieldSampleFile file;
    file.covariance_id = "exp_test";
    file.seed = 77;
    file.grid = spec.grid;
    file.samples = gs.sample(6, 77);
    write_field_samples("test_field.rlgf", file);
    const auto back = read_field_samples("test_field.rlgf");
    CHECK(back.covariance_id == "exp_test");
    CHECK(back.grid == file.grid);
    CHECK((back.samples - file.samples).cwiseAbs().maxCoeff() == 0.0);
    export_field_samples_csv("test_field.csv", back);
    std::ifstream is("test_field.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "sample,0.1,0.4,0.9");
    std::filesystem::remove("test_field.rlgf");
    std::filesystem::remove("test_field.csv");
}
