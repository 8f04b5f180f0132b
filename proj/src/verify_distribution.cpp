#include <cmath>

#include "rebirthlab/parallel.hpp"
#include "rebirthlab/stats.hpp"
#include "verify_internal.hpp"

namespace rebirthlab::checks {

namespace {

// bounded Laplace-type functionals exp(-<a, V>) over the grid values
std::vector<std::vector<double>> functional_weights(std::size_t grid_size) {
    std::vector<std::vector<double>> as;
    std::vector<double> a1(grid_size, 0.0);
    a1[grid_size / 2] = 0.7;
    as.push_back(a1);
    as.push_back(std::vector<double>(grid_size, 0.4));
    std::vector<double> a3(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i)
        a3[i] = 0.2 + 0.4 * static_cast<double>(i) / std::max<std::size_t>(grid_size - 1, 1);
    as.push_back(a3);
    return as;
}

double bounded_functional(const std::vector<double>& a, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * v[i];
    return std::exp(-s);
}

std::vector<double> localtime_on_grid(const ProcessSpec& spec, double start,
                                      const SimConfig& cfg, Rng& rng, double mark,
                                      const std::vector<double>& grid,
                                      const std::function<double(double)>& m_density,
                                      double* zeta_out = nullptr) {
    Cycle cyc = simulate_base_path(spec, start, cfg, rng, cfg.t_max);
    PathBundle b;
    b.case_id = spec.case_id;
    b.dt = cfg.dt;
    b.zeta_n = {0.0, cyc.zeta(cfg.dt)};
    if (zeta_out) *zeta_out = b.zeta_n[1];
    b.cycles.push_back(std::move(cyc));
    const auto est = estimate_local_time(b, grid, {mark}, cfg.epsilon, m_density);
    return est.values[0];
}

}  // namespace

// ---------------------------------------------------------------------------
// eisenbaum
// ---------------------------------------------------------------------------

Verdict eisenbaum(const LabContext& ctx, const json& overrides, bool control) {
    const json p = merged({{"n", 100000},
                           {"dt", 2.5e-5},
                           {"epsilon", 0.005},
                           {"s", 1.0},
                           {"y", 0.0},
                           {"grid", json::array({-0.5, 0.0, 0.5})},
                           {"t_max", 40.0},
                           {"z_max", 3.0},
                           {"ks_level", 0.01},
                           {"n_permutations", 200},
                           {"min_ess", 100.0}},
                          overrides);
    const char* label = control ? "eisenbaum_control" : "eisenbaum";
    const std::uint64_t seed = check_seed(ctx, label);
    const int n = p.at("n").get<int>();
    const double s = p.at("s").get<double>();
    const double y = p.at("y").get<double>();
    const std::vector<double> grid = p.at("grid").get<std::vector<double>>();
    std::size_t y_index = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - y) < 1e-12) y_index = i;
    if (y_index == grid.size())
        throw ConfigError("eisenbaum: the start point y must be a grid point");

    SimConfig cfg = ctx.sim();
    cfg.dt = p.at("dt").get<double>();
    cfg.epsilon = p.at("epsilon").get<double>();
    cfg.t_max = p.at("t_max").get<double>();
    cfg.validate();

    const BaseProcess base = ctx.base();
    auto m_density = [&base](double z) { return base.m_density(z); };
    const ProcessSpec& spec = ctx.process();
    GaussianFieldSpec gspec;
    gspec.grid = grid;
    gspec.covariance = [&base](double a, double b) { return base.u_0(a, b); };
    gspec.covariance_id = "u0_base";
    const GaussianSampler sampler(gspec);

    const auto fns = functional_weights(grid.size());

    struct Lhs {
        double f[3];
        double t;
    };
    const auto lhs = parallel_map<Lhs>(n, [&](int r) {
        Rng rng_path(derive_seed(seed, hash_label("lhs_path"), static_cast<std::uint64_t>(r)));
        Rng rng_g(derive_seed(seed, hash_label("lhs_gauss"), static_cast<std::uint64_t>(r)));
        const auto lt = localtime_on_grid(spec, y, cfg, rng_path, cfg.t_max + 1.0, grid,
                                          m_density);
        std::vector<double> eta;
        sampler.sample_one(rng_g, eta);
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            v[i] = lt[i] + 0.5 * (eta[i] + s) * (eta[i] + s);
        Lhs out{};
        for (int k = 0; k < 3; ++k) out.f[k] = bounded_functional(fns[k], v);
        out.t = 0.0;
        for (double vi : v) out.t += vi;
        return out;
    });

    struct Rhs {
        double f[3];
        double t;
        double w;
    };
    const auto rhs = parallel_map<Rhs>(n, [&](int r) {
        Rng rng_g(derive_seed(seed, hash_label("rhs_gauss"), static_cast<std::uint64_t>(r)));
        std::vector<double> eta;
        sampler.sample_one(rng_g, eta);
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            v[i] = 0.5 * (eta[i] + s) * (eta[i] + s);
        Rhs out{};
        for (int k = 0; k < 3; ++k) out.f[k] = bounded_functional(fns[k], v);
        out.t = 0.0;
        for (double vi : v) out.t += vi;
        out.w = control ? 1.0 : 1.0 + eta[y_index] / s;
        return out;
    });

    json zs = json::array();
    double max_z = 0.0;
    for (int k = 0; k < 3; ++k) {
        Accumulator la;
        for (const auto& e : lhs) la.add(e.f[k]);
        std::vector<double> vals, ws;
        vals.reserve(rhs.size());
        ws.reserve(rhs.size());
        for (const auto& e : rhs) {
            vals.push_back(e.f[k]);
            ws.push_back(e.w);
        }
        const WeightedMean wm = weighted_mean(vals, ws);
        const double z = (la.mean() - wm.mean) /
                         std::sqrt(la.standard_error() * la.standard_error() +
                                   wm.standard_error * wm.standard_error);
        max_z = std::max(max_z, std::abs(z));
        zs.push_back({{"lhs_mean", la.mean()},
                      {"rhs_mean", wm.mean},
                      {"z", z},
                      {"negative_weight_fraction", wm.negative_weight_fraction}});
    }

    std::vector<double> tl, tr, wr;
    for (const auto& e : lhs) tl.push_back(e.t);
    for (const auto& e : rhs) {
        tr.push_back(e.t);
        wr.push_back(e.w);
    }
    const double ess = effective_sample_size(wr);
    const double ks = weighted_ks_statistic(tl, tr, wr);
    const double ks_thr = weighted_ks_permutation_threshold(
        tl, tr, wr, p.at("ks_level").get<double>(), p.at("n_permutations").get<int>(),
        seed);

    const double z_max = p.at("z_max").get<double>();
    const double stat = std::max(max_z / z_max, ks / ks_thr);
    const bool identity_holds = stat <= 1.0 && ess >= p.at("min_ess").get<double>();

    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = stat;
    v.threshold = 1.0;
    v.pass = control ? !identity_holds : identity_holds;
    v.details = {{"functionals", zs},
                 {"weighted_ks", ks},
                 {"ks_threshold", ks_thr},
                 {"effective_sample_size", ess},
                 {"control", control}};
    if (ess < p.at("min_ess").get<double>()) v.details["infeasible"] = true;
    return v;
}

// ---------------------------------------------------------------------------
// conditional_independence
// ---------------------------------------------------------------------------

Verdict conditional_independence(const LabContext& ctx, const json& overrides,
                                 bool control) {
    const json p = merged({{"n", 10000},
                           {"r", 2},
                           {"dt", 2.5e-4},
                           {"epsilon", 0.032},
                           {"grid_point", 0.0},
                           {"y", 0.0},
                           {"nu", json::array({1.0, 1.0})},
                           {"t_max", 60.0},
                           {"z_max", 3.0},
                           {"corr_factor", 3.0},
                           {"max_attempts_per", 10000},
                           {"min_accept_rate", 1e-3}},
                          overrides);
    const char* label =
        control ? "conditional_independence_control" : "conditional_independence";
    const std::uint64_t seed = check_seed(ctx, label);
    const int n = p.at("n").get<int>();
    const int r_cycles = p.at("r").get<int>();
    if (r_cycles < 2) throw ConfigError("conditional_independence needs r >= 2");
    const double y = p.at("y").get<double>();
    const double g0 = p.at("grid_point").get<double>();
    const double prate = ctx.p();
    const std::vector<double> nus = p.at("nu").get<std::vector<double>>();

    SimConfig cfg = ctx.sim();
    cfg.dt = p.at("dt").get<double>();
    cfg.epsilon = p.at("epsilon").get<double>();
    cfg.t_max = p.at("t_max").get<double>();
    cfg.validate();

    const BaseProcess base = ctx.base();
    auto m_density = [&base](double z) { return base.m_density(z); };
    const ProcessSpec& spec = ctx.process();
    const Measure mu = ctx.rebirth().measure;

    // one conditioned draw: r-1 full cycles then the clipped one, accepted on
    // zeta_{r-1} < lambda <= zeta_r
    struct CondDraw {
        std::vector<double> f;  // per-cycle local times at the grid point
        int attempts = 0;
    };
    const int max_attempts = p.at("max_attempts_per").get<int>();
    auto conditioned = [&](std::uint64_t stream, bool corrupted) {
        CondDraw out;
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            ++out.attempts;
            const std::uint64_t aseed = derive_seed(stream, hash_label("attempt"),
                                                    static_cast<std::uint64_t>(attempt));
            Rng lam_rng(derive_seed(aseed, hash_label("lambda")));
            const double lambda = lam_rng.exponential(prate);
            std::vector<double> fs;
            double zsum = 0.0;
            bool rejected = false;
            const std::uint64_t first_stream = derive_seed(aseed, hash_label("cycle"), 1);
            for (int i = 1; i <= r_cycles; ++i) {
                double start = y;
                if (i > 1) {
                    Rng draw(derive_seed(aseed, hash_label("rebirth_draw"),
                                         static_cast<std::uint64_t>(i)));
                    start = mu.sample(draw);
                }
                Rng crng(corrupted ? first_stream
                                   : derive_seed(aseed, hash_label("cycle"),
                                                 static_cast<std::uint64_t>(i)));
                double zeta = 0.0;
                if (i < r_cycles) {
                    const auto lt = localtime_on_grid(spec, start, cfg, crng,
                                                      cfg.t_max + 1.0, {g0}, m_density,
                                                      &zeta);
                    zsum += zeta;
                    if (zsum >= lambda) {
                        rejected = true;
                        break;
                    }
                    fs.push_back(lt[0]);
                } else {
                    const double clip = lambda - zsum;
                    const auto lt = localtime_on_grid(spec, start, cfg, crng, clip, {g0},
                                                      m_density, &zeta);
                    if (lambda - zsum > zeta) {
                        rejected = true;
                        break;
                    }
                    fs.push_back(lt[0]);
                }
            }
            if (!rejected) {
                out.f = std::move(fs);
                return out;
            }
        }
        throw std::runtime_error("conditioning event too rare; check infeasible");
    };

    const auto draws = parallel_map<CondDraw>(n, [&](int rep) {
        return conditioned(derive_seed(seed, hash_label("cond"), static_cast<std::uint64_t>(rep)),
                           control);
    });
    long total_attempts = 0;
    for (const auto& d : draws) total_attempts += d.attempts;
    const double accept_rate = static_cast<double>(n) / static_cast<double>(total_attempts);

    // (a) pairwise correlation across cycle indices
    double max_corr = 0.0;
    for (int i = 0; i < r_cycles; ++i)
        for (int j = i + 1; j < r_cycles; ++j) {
            std::vector<double> a, b;
            for (const auto& d : draws) {
                a.push_back(d.f[static_cast<std::size_t>(i)]);
                b.push_back(d.f[static_cast<std::size_t>(j)]);
            }
            max_corr = std::max(max_corr, std::abs(pearson_correlation(a, b)));
        }
    const double corr_thr = p.at("corr_factor").get<double>() / std::sqrt(static_cast<double>(n));

    // (b) product form of the conditioned Laplace transform
    Accumulator joint;
    for (const auto& d : draws) {
        double e = 0.0;
        for (std::size_t i = 0; i < d.f.size(); ++i)
            e += nus[i % nus.size()] * d.f[i];
        joint.add(std::exp(-e));
    }
    // independent per-factor estimates
    std::vector<Accumulator> factors(static_cast<std::size_t>(r_cycles));
    for (int i = 1; i <= r_cycles; ++i) {
        const auto vals = parallel_map<double>(n, [&](int rep) {
            const std::uint64_t stream = derive_seed(
                seed, hash_label("factor"),
                static_cast<std::uint64_t>(i) * 1000003ULL + static_cast<std::uint64_t>(rep));
            for (int attempt = 0; attempt < max_attempts; ++attempt) {
                const std::uint64_t aseed =
                    derive_seed(stream, hash_label("attempt"),
                                static_cast<std::uint64_t>(attempt));
                Rng lam_rng(derive_seed(aseed, hash_label("lambda")));
                const double lambda = lam_rng.exponential(prate);
                double start = y;
                if (i > 1) {
                    Rng draw(derive_seed(aseed, hash_label("draw")));
                    start = mu.sample(draw);
                }
                Rng crng(derive_seed(aseed, hash_label("path")));
                double zeta = 0.0;
                if (i < r_cycles) {
                    const auto lt = localtime_on_grid(spec, start, cfg, crng,
                                                      cfg.t_max + 1.0, {g0}, m_density,
                                                      &zeta);
                    if (zeta < lambda)
                        return std::exp(-nus[static_cast<std::size_t>(i - 1) % nus.size()] *
                                        lt[0]);
                } else {
                    const auto lt = localtime_on_grid(spec, start, cfg, crng, lambda, {g0},
                                                      m_density, &zeta);
                    if (lambda <= zeta)
                        return std::exp(-nus[static_cast<std::size_t>(i - 1) % nus.size()] *
                                        lt[0]);
                }
            }
            throw std::runtime_error("factor conditioning too rare");
        });
        for (double v : vals) factors[static_cast<std::size_t>(i - 1)].add(v);
    }
    double prod = 1.0, prod_var = 0.0;
    for (const auto& f : factors) prod *= f.mean();
    for (const auto& f : factors) {
        const double rel = f.standard_error() / f.mean();
        prod_var += rel * rel;
    }
    const double prod_se = std::abs(prod) * std::sqrt(prod_var);
    const double z = (joint.mean() - prod) /
                     std::sqrt(joint.standard_error() * joint.standard_error() +
                               prod_se * prod_se);

    const double z_max = p.at("z_max").get<double>();
    const double stat = std::max(max_corr / corr_thr, std::abs(z) / z_max);
    const bool identity_holds =
        stat <= 1.0 && accept_rate >= p.at("min_accept_rate").get<double>();

    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = stat;
    v.threshold = 1.0;
    v.pass = control ? !identity_holds : identity_holds;
    v.details = {{"max_abs_correlation", max_corr},
                 {"correlation_threshold", corr_thr},
                 {"joint_mean", joint.mean()},
                 {"product_mean", prod},
                 {"z", z},
                 {"acceptance_rate", accept_rate},
                 {"control", control}};
    if (accept_rate < p.at("min_accept_rate").get<double>())
        v.details["infeasible"] = true;
    return v;
}

// ---------------------------------------------------------------------------
// combined_identity
// ---------------------------------------------------------------------------

Verdict combined_identity(const LabContext& ctx, const json& overrides, bool control) {
    const json p = merged({{"n", 100000},
                           {"r", 2},
                           {"dt", 2.5e-5},
                           {"epsilon", 0.005},
                           {"s", 1.0},
                           {"y", 0.0},
                           {"grid", json::array({0.0, 0.5})},
                           {"t_max", 40.0},
                           {"z_max", 3.0}},
                          overrides);
    const char* label = control ? "combined_identity_control" : "combined_identity";
    const std::uint64_t seed = check_seed(ctx, label);
    const int n = p.at("n").get<int>();
    const int r_cycles = p.at("r").get<int>();
    if (r_cycles < 2) throw ConfigError("combined_identity needs r >= 2");
    const double s = p.at("s").get<double>();
    const double y = p.at("y").get<double>();
    const double prate = ctx.p();
    const std::vector<double> grid = p.at("grid").get<std::vector<double>>();

    SimConfig cfg = ctx.sim();
    cfg.dt = p.at("dt").get<double>();
    cfg.epsilon = p.at("epsilon").get<double>();
    cfg.t_max = p.at("t_max").get<double>();
    cfg.validate();

    const BaseProcess base = ctx.base();
    auto m_density = [&base](double z) { return base.m_density(z); };
    const ProcessSpec& spec = ctx.process();
    const Measure mu = ctx.rebirth().measure;
    for (const auto& [ax, aw] : mu.atom_list()) {
        bool on_grid = false;
        for (double g : grid) on_grid = on_grid || std::abs(g - ax) < 1e-12;
        if (aw > 0 && !on_grid)
            throw ConfigError("combined_identity: mu atoms must lie on the grid");
    }

    std::size_t y_index = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - y) < 1e-12) y_index = i;
    if (y_index == grid.size())
        throw ConfigError("combined_identity: y must be a grid point");

    GaussianFieldSpec g0spec, gpspec;
    g0spec.grid = gpspec.grid = grid;
    g0spec.covariance = [&base](double a, double b) { return base.u_0(a, b); };
    gpspec.covariance = [&base, prate](double a, double b) {
        return base.u_p(prate, a, b);
    };
    const GaussianSampler s0(g0spec);
    const GaussianSampler sp(gpspec);
    // the control corrupts the LHS by sampling the last component from the
    // 0-potential covariance instead of the p-potential one
    const GaussianSampler* last_sampler = control ? &s0 : &sp;

    const auto fns = functional_weights(grid.size());

    struct Lhs {
        double f[3];
    };
    const auto lhs = parallel_map<Lhs>(n, [&](int rep) {
        const std::uint64_t rs = derive_seed(seed, hash_label("lhs"),
                                             static_cast<std::uint64_t>(rep));
        std::vector<double> v(grid.size(), 0.0);
        // r-1 full cycles, first from y, the rest from mu
        for (int i = 1; i < r_cycles; ++i) {
            double start = y;
            if (i > 1) {
                Rng draw(derive_seed(rs, hash_label("rebirth_draw"),
                                     static_cast<std::uint64_t>(i)));
                start = mu.sample(draw);
            }
            Rng crng(derive_seed(rs, hash_label("cycle"), static_cast<std::uint64_t>(i)));
            const auto lt = localtime_on_grid(spec, start, cfg, crng, cfg.t_max + 1.0,
                                              grid, m_density);
            for (std::size_t g = 0; g < grid.size(); ++g) v[g] += lt[g];
        }
        // final cycle clipped at an independent exponential time
        {
            Rng draw(derive_seed(rs, hash_label("rebirth_draw"),
                                 static_cast<std::uint64_t>(r_cycles)));
            const double start = mu.sample(draw);
            Rng lam_rng(derive_seed(rs, hash_label("lambda")));
            const double lambda = lam_rng.exponential(prate);
            Rng crng(derive_seed(rs, hash_label("cycle"),
                                 static_cast<std::uint64_t>(r_cycles)));
            const auto lt =
                localtime_on_grid(spec, start, cfg, crng, lambda, grid, m_density);
            for (std::size_t g = 0; g < grid.size(); ++g) v[g] += lt[g];
        }
        // chi-square field
        Rng grng(derive_seed(rs, hash_label("gauss")));
        std::vector<double> eta;
        for (int i = 1; i < r_cycles; ++i) {
            s0.sample_one(grng, eta);
            for (std::size_t g = 0; g < grid.size(); ++g)
                v[g] += 0.5 * (eta[g] + s) * (eta[g] + s);
        }
        last_sampler->sample_one(grng, eta);
        for (std::size_t g = 0; g < grid.size(); ++g)
            v[g] += 0.5 * (eta[g] + s) * (eta[g] + s);
        Lhs out{};
        for (int k = 0; k < 3; ++k) out.f[k] = bounded_functional(fns[k], v);
        return out;
    });

    struct Rhs {
        double f[3];
        double w;
    };
    const auto rhs = parallel_map<Rhs>(n, [&](int rep) {
        Rng grng(derive_seed(seed, hash_label("rhs"), static_cast<std::uint64_t>(rep)));
        std::vector<double> v(grid.size(), 0.0);
        double w = 1.0;
        std::vector<double> eta;
        for (int i = 1; i < r_cycles; ++i) {
            s0.sample_one(grng, eta);
            for (std::size_t g = 0; g < grid.size(); ++g)
                v[g] += 0.5 * (eta[g] + s) * (eta[g] + s);
            if (i == 1) {
                w *= 1.0 + eta[y_index] / s;
            } else {
                double eta_mu = 0.0;
                for (const auto& [ax, aw] : mu.atom_list())
                    for (std::size_t g = 0; g < grid.size(); ++g)
                        if (std::abs(grid[g] - ax) < 1e-12) eta_mu += aw * eta[g];
                w *= 1.0 + eta_mu / s;
            }
        }
        sp.sample_one(grng, eta);
        for (std::size_t g = 0; g < grid.size(); ++g)
            v[g] += 0.5 * (eta[g] + s) * (eta[g] + s);
        double eta_mu = 0.0;
        for (const auto& [ax, aw] : mu.atom_list())
            for (std::size_t g = 0; g < grid.size(); ++g)
                if (std::abs(grid[g] - ax) < 1e-12) eta_mu += aw * eta[g];
        w *= 1.0 + eta_mu / s;
        Rhs out{};
        for (int k = 0; k < 3; ++k) out.f[k] = bounded_functional(fns[k], v);
        out.w = w;
        return out;
    });

    json zs = json::array();
    double max_z = 0.0;
    for (int k = 0; k < 3; ++k) {
        Accumulator la;
        for (const auto& e : lhs) la.add(e.f[k]);
        std::vector<double> vals, ws;
        for (const auto& e : rhs) {
            vals.push_back(e.f[k]);
            ws.push_back(e.w);
        }
        const WeightedMean wm = weighted_mean(vals, ws);
        const double z = (la.mean() - wm.mean) /
                         std::sqrt(la.standard_error() * la.standard_error() +
                                   wm.standard_error * wm.standard_error);
        max_z = std::max(max_z, std::abs(z));
        zs.push_back({{"lhs_mean", la.mean()}, {"rhs_mean", wm.mean}, {"z", z}});
    }

    const double stat = max_z / p.at("z_max").get<double>();
    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = stat;
    v.threshold = 1.0;
    v.pass = control ? stat > 1.0 : stat <= 1.0;
    v.details = {{"functionals", zs}, {"control", control}};
    return v;
}

}  // namespace rebirthlab::checks
