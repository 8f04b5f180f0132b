// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is nonzero if any
// non-informational criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>

#include "rebirthlab/verify.hpp"

using namespace rebirthlab;
using nlohmann::json;

namespace {

int g_failures = 0;

LabContext acceptance_context() {
    ProcessSpec spec;
    spec.case_id = 1;
    spec.psi = LevyExponent::brownian();
    spec.beta = 1.0;
    RebirthSpec reb;
    reb.mode = RebirthMode::Full;
    reb.measure = Measure::delta(0.0);
    SimConfig sim;
    sim.seed = 20260810;
    return LabContext(spec, reb, sim, 1.0, 20260810);
}

void report(int criterion, const std::string& name, bool pass, double statistic,
            double threshold, double seconds, bool hard = true) {
    std::printf("[%s] criterion %2d: %-28s statistic=%-12.5g threshold=%-10.5g (%.1fs)%s\n",
                pass ? "PASS" : "FAIL", criterion, name.c_str(), statistic, threshold,
                seconds, hard ? "" : "  [informational]");
    std::fflush(stdout);
    if (!pass && hard) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

}  // namespace

int main() {
    const LabContext ctx = acceptance_context();

    {  // 1. kernel golden suite, rel err <= 1e-6 on 20 points, C_2 = 1 +- 1e-6
        Timer t;
        const auto v = run_check("kernel_golden", ctx, json{{"rel_tol", 1e-6}});
        report(1, "kernel_golden", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 2. positive definiteness on 10 random grids of 100 points
        Timer t;
        const auto v = run_check("covariance_psd", ctx,
                                 json{{"n_grids", 10}, {"grid_size", 100}});
        report(2, "covariance_psd", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 3. scalar identities: row integral 1e-4, f bound, killing Laplace 1e-6
        Timer t;
        const auto v = run_check("scalar_identities", ctx);
        report(3, "scalar_identities", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 4. local-time normalization at the pinned discretization
        Timer t;
        const auto v = run_check("localtime_normalization", ctx,
                                 json{{"n", 20000}, {"dt", 1e-4}, {"epsilon", 0.02}});
        report(4, "localtime_normalization", v.pass, v.statistic, v.threshold,
               t.elapsed());
    }
    {  // 5. rebirthed Laplace functional, full + partial targets, 3 SE
        Timer t;
        const auto v = run_check("rebirth_laplace", ctx, json{{"n", 20000}});
        report(5, "rebirth_laplace", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 6. decomposition exact to 1e-12; shift identity on 100 bundles x 5 splits
        Timer t;
        const auto v = run_check("decomposition_exact", ctx,
                                 json{{"n_bundles", 1000},
                                      {"shift_bundles", 100},
                                      {"splits_per_bundle", 5},
                                      {"tol", 1e-12}});
        report(6, "decomposition_exact", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 7. distributional identities and their negative controls
        Timer t;
        const auto e = run_check("eisenbaum", ctx, json{{"n", 100000}});
        report(7, "eisenbaum", e.pass, e.statistic, e.threshold, t.elapsed());
        Timer t2;
        const auto ci = run_check("conditional_independence", ctx, json{{"n", 10000}});
        report(7, "conditional_independence", ci.pass, ci.statistic, ci.threshold,
               t2.elapsed());
        Timer t3;
        const auto co = run_check("combined_identity", ctx, json{{"n", 100000}});
        report(7, "combined_identity", co.pass, co.statistic, co.threshold, t3.elapsed());
        Timer t4;
        const auto ec = run_check("eisenbaum_control", ctx,
                                  json{{"n", 20000}, {"n_permutations", 100}});
        report(7, "eisenbaum_control", ec.pass, ec.statistic, ec.threshold, t4.elapsed());
        Timer t5;
        const auto cic = run_check("conditional_independence_control", ctx,
                                   json{{"n", 3000}});
        report(7, "conditional_independence_ctl", cic.pass, cic.statistic, cic.threshold,
               t5.elapsed());
        Timer t6;
        const auto coc = run_check("combined_identity_control", ctx, json{{"n", 100000}});
        report(7, "combined_identity_control", coc.pass, coc.statistic, coc.threshold,
               t6.elapsed());
    }
    {  // 8. uniform modulus bands to 2^-16 with the chi-square trend
        Timer t;
        const auto v = run_check("uniform_modulus", ctx,
                                 json{{"replicas", 100},
                                      {"depth", 16},
                                      {"k_min", 8},
                                      {"k_max", 16}});
        report(8, "uniform_modulus", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 9. local modulus (iterated logarithm) to 2^-20, informational by default
        Timer t;
        const auto v = run_check("local_modulus_lil", ctx,
                                 json{{"replicas", 100}, {"k_min", 10}, {"k_max", 20}});
        report(9, "local_modulus_lil", v.pass, v.statistic, v.threshold, t.elapsed(),
               /*hard=*/true);
    }
    {  // 10. local-time uniform modulus at desk scale over [0.2, 0.8]
        Timer t;
        const auto v = run_check("localtime_modulus", ctx, json{{"replicas", 50}});
        report(10, "localtime_modulus", v.pass, v.statistic, v.threshold, t.elapsed());
    }
    {  // 11. determinism across worker counts
        Timer t;
        const auto v = run_check("determinism", ctx);
        report(11, "determinism", v.pass, v.statistic, v.threshold, t.elapsed());
    }

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
