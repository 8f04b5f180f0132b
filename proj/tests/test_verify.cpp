#include <doctest.h>

#include <cmath>

#include "rebirthlab/verify.hpp"

using namespace rebirthlab;
using nlohmann::json;

namespace {

LabContext case1_context(std::uint64_t seed = 20260810) {
    ProcessSpec spec;
    spec.case_id = 1;
    spec.psi = LevyExponent::brownian();
    spec.beta = 1.0;
    RebirthSpec reb;
    reb.mode = RebirthMode::Full;
    reb.measure = Measure::delta(0.0);
    SimConfig sim;
    sim.seed = seed;
    return LabContext(spec, reb, sim, 1.0, seed);
}

}  // namespace

TEST_CASE("check catalog and dispatch") {
    CHECK(is_known_check("kernel_golden"));
    CHECK(!is_known_check("nope"));
    const auto ctx = case1_context();
    CHECK_THROWS_AS(run_check("nope", ctx), ConfigError);
    CHECK_THROWS_AS(run_check("kernel_golden", ctx, json{{"bogus_key", 1}}), ConfigError);
}

TEST_CASE("kernel_golden passes on the Brownian exponent") {
    const auto v = run_check("kernel_golden", case1_context());
    CHECK(v.pass);
    CHECK(v.statistic <= 1e-6);
}

TEST_CASE("scalar identities hold") {
    const auto v = run_check("scalar_identities", case1_context());
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("covariance psd on reduced grids") {
    const auto v = run_check("covariance_psd", case1_context(),
                             json{{"n_grids", 2}, {"grid_size", 40}});
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("local time normalization, reduced size") {
    const auto v = run_check(
        "localtime_normalization", case1_context(),
        json{{"n", 1500}, {"dt", 1e-3}, {"epsilon", 0.04}, {"t_max", 25.0}});
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("rebirth laplace, reduced size") {
    const auto v = run_check("rebirth_laplace", case1_context(),
                             json{{"n", 1200},
                                  {"dt", 4e-4},
                                  {"epsilon", 0.02},
                                  {"t_full", 9.0},
                                  {"t_partial", 18.0}});
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("decomposition exactness, reduced size") {
    const auto v = run_check("decomposition_exact", case1_context(),
                             json{{"n_bundles", 120}, {"shift_bundles", 30}});
    INFO(v.details.dump());
    CHECK(v.pass);
    CHECK(v.statistic <= 1e-12);
}

TEST_CASE("eisenbaum identity and its control, reduced size") {
    const json small{{"n", 4000}, {"dt", 4e-4}, {"epsilon", 0.02},
                     {"n_permutations", 60}};
    const auto v = run_check("eisenbaum", case1_context(), small);
    INFO(v.details.dump());
    CHECK(v.pass);
    const auto c = run_check("eisenbaum_control", case1_context(), small);
    INFO(c.details.dump());
    CHECK(c.pass);  // the corrupted variant must fail its statistical test
}

TEST_CASE("conditional independence and its control, reduced size") {
    const json small{{"n", 800}, {"dt", 1e-3}, {"epsilon", 0.04}};
    const auto v = run_check("conditional_independence", case1_context(), small);
    INFO(v.details.dump());
    CHECK(v.pass);
    const auto c = run_check("conditional_independence_control", case1_context(), small);
    INFO(c.details.dump());
    CHECK(c.pass);
}

TEST_CASE("combined identity and its control, reduced size") {
    const auto v = run_check("combined_identity", case1_context(),
                             json{{"n", 4000}, {"dt", 4e-4}, {"epsilon", 0.02}});
    INFO(v.details.dump());
    CHECK(v.pass);
    // the corrupted covariance shifts the means by an amount the z-test only
    // resolves with a larger sample
    const auto c = run_check("combined_identity_control", case1_context(),
                             json{{"n", 60000}, {"dt", 4e-4}, {"epsilon", 0.02}});
    INFO(c.details.dump());
    CHECK(c.pass);
}

TEST_CASE("uniform modulus bands at reduced depth") {
    // at depth 12 the extreme-value correction still depresses the medians;
    // the acceptance run at depth 16 uses the real bands
    const auto v = run_check("uniform_modulus", case1_context(),
                             json{{"replicas", 12}, {"depth", 12}, {"k_min", 8},
                                  {"k_max", 12},
                                  {"gauss_band", json::array({0.75, 1.25})},
                                  {"chi_band", json::array({0.55, 1.45})}});
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("local modulus trend at reduced depth") {
    const auto v = run_check("local_modulus_lil", case1_context(),
                             json{{"replicas", 16}, {"k_min", 10}, {"k_max", 16}});
    INFO(v.details.dump());
    CHECK(v.informational);
    CHECK(v.details.at("nondecreasing").get<bool>());
}

TEST_CASE("local-time modulus band at reduced size") {
    // plumbing smoke: coarse discretization biases the ratio low, so the band
    // here is wider than the acceptance one
    const auto v = run_check("localtime_modulus", case1_context(),
                             json{{"replicas", 10},
                                  {"dt", 4e-6},
                                  {"epsilon", 0.00390625},
                                  {"grid_k", 8},
                                  {"scale_k", 7},
                                  {"band", json::array({0.2, 2.0})}});
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("determinism across worker counts") {
    const auto v = run_check("determinism", case1_context(),
                             json{{"subchecks",
                                   json::array({json{{"id", "localtime_normalization"},
                                                     {"overrides",
                                                      {{"n", 600},
                                                       {"dt", 1e-3},
                                                       {"epsilon", 0.04}}}}})}});
    INFO(v.details.dump());
    CHECK(v.pass);
}

TEST_CASE("eisenbaum coupling tightens as the shift grows") {
    // both sides converge to the unconditioned law for large s, so the
    // worst functional z-gap (before SE normalization) shrinks in s
    double prev = 1e9;
    for (double s : {1.0, 4.0}) {
        const auto v = run_check("eisenbaum", case1_context(),
                                 json{{"n", 3000},
                                      {"dt", 1e-3},
                                      {"epsilon", 0.04},
                                      {"s", s},
                                      {"n_permutations", 40}});
        double gap = 0.0;
        for (const auto& f : v.details.at("functionals"))
            gap = std::max(gap, std::abs(f.at("lhs_mean").get<double>() -
                                         f.at("rhs_mean").get<double>()));
        CHECK(gap < prev + 1e-3);
        prev = gap;
    }
}

TEST_CASE("constant fields give zero modulus ratios") {
    const std::vector<double> flat(1025, 3.0);
    auto phi = [](double h) { return std::sqrt(h); };
    const auto r = modulus_ratios_uniform({flat, 1.0 / 1024.0, 0}, {8, 10}, phi,
                                          2.0 * std::sqrt(3.0));
    for (double x : r) CHECK(x == 0.0);
    const auto rl = modulus_ratios_local({flat, 1.0 / 1024.0, 512}, {9, 10}, 8, phi,
                                         2.0 * std::sqrt(3.0));
    for (double x : rl) CHECK(x == 0.0);
}
