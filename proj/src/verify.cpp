#include "rebirthlab/verify.hpp"

#include <cmath>
#include <numbers>

#include "rebirthlab/parallel.hpp"
#include "rebirthlab/stats.hpp"
#include "verify_internal.hpp"

namespace rebirthlab {

nlohmann::json Verdict::to_json() const {
    return nlohmann::json{{"check", check},     {"params", params},
                          {"statistic", statistic}, {"threshold", threshold},
                          {"pass", pass},       {"informational", informational},
                          {"seed", seed},       {"details", details}};
}

LabContext::LabContext(ProcessSpec process, RebirthSpec rebirth, SimConfig sim,
                       double p, std::uint64_t master_seed)
    : process_(std::move(process)),
      rebirth_(std::move(rebirth)),
      sim_(sim),
      p_(p),
      master_seed_(master_seed) {}

LabContext LabContext::from_config(const ExperimentConfig& cfg) {
    return LabContext(cfg.process, cfg.rebirth, cfg.sim, cfg.p, cfg.master_seed);
}

std::shared_ptr<LevyKernels> LabContext::levy() const {
    if (!levy_) {
        if (!process_.psi)
            throw ConfigError("this check needs a Levy-case process (cases 1-3)");
        levy_ = std::make_shared<LevyKernels>(*process_.psi);
    }
    return levy_;
}

std::shared_ptr<DiffusionKernels> LabContext::diffusion() const {
    if (!diffusion_) {
        if (!process_.diffusion)
            throw ConfigError("this check needs a diffusion-case process (cases 4-6)");
        diffusion_ = std::make_shared<DiffusionKernels>(*process_.diffusion);
    }
    return diffusion_;
}

BaseProcess LabContext::base() const {
    switch (process_.case_id) {
        case 1: return BaseProcess::levy_killed(levy(), process_.beta);
        case 2: return BaseProcess::levy_killed_at_zero(levy(), process_.beta);
        case 3: return BaseProcess::levy_recurrent_zero(levy());
        case 4: return BaseProcess::diffusion_killed(diffusion(), process_.beta);
        case 5: return BaseProcess::diffusion_killed_at_zero(diffusion(), process_.beta);
        case 6: return BaseProcess::diffusion_hit_zero(diffusion());
        default: throw ConfigError("bad case id");
    }
}

const std::vector<CheckInfo>& check_catalog() {
    static const std::vector<CheckInfo> cat = {
        {"kernel_golden", "Brownian-exponent kernels against closed forms", false},
        {"covariance_psd", "positive semidefiniteness of every kernel on random grids",
         false},
        {"scalar_identities",
         "row-integral recurrence, f(y) <= u^p(y,y), killing Laplace closed form", false},
        {"localtime_normalization",
         "single-cycle mean local time matches the 0-potential density", false},
        {"rebirth_laplace",
         "discounted local time matches w^p; partial-rebirth mean matches u~0", false},
        {"decomposition_exact",
         "per-cycle decomposition and additive-functional shift hold exactly", false},
        {"eisenbaum", "path local time + squared Gaussian vs tilted Gaussian law", false},
        {"eisenbaum_control", "eisenbaum with weights removed must fail", false},
        {"conditional_independence",
         "cycle functionals are conditionally independent given the clock event", false},
        {"conditional_independence_control",
         "conditional independence with reused cycle streams must fail", false},
        {"combined_identity",
         "local-time sums plus chi-square field vs weighted Gaussian law", false},
        {"combined_identity_control",
         "combined identity with the wrong last covariance must fail", false},
        {"uniform_modulus",
         "uniform modulus band/trend for Brownian-family and chi-square fields", false},
        {"local_modulus_lil",
         "iterated-logarithm local modulus band/trend at desk scale", true},
        {"localtime_modulus",
         "uniform modulus band for rebirthed local times at desk scale", false},
        {"determinism", "statistics are identical for any worker count", false},
    };
    return cat;
}

bool is_known_check(const std::string& id) {
    for (const auto& c : check_catalog())
        if (c.id == id) return true;
    return false;
}

Verdict run_check(const std::string& id, const LabContext& ctx,
                  const nlohmann::json& overrides) {
    const CheckInfo* info = nullptr;
    for (const auto& c : check_catalog())
        if (c.id == id) info = &c;
    if (!info) throw ConfigError("unknown check id '" + id + "'");

    nlohmann::json ov = overrides;
    bool informational = info->informational_default;
    if (ov.contains("informational")) {
        informational = ov.at("informational").get<bool>();
        ov.erase("informational");
    }

    Verdict v;
    using namespace checks;
    if (id == "kernel_golden") v = kernel_golden(ctx, ov);
    else if (id == "covariance_psd") v = covariance_psd(ctx, ov);
    else if (id == "scalar_identities") v = scalar_identities(ctx, ov);
    else if (id == "localtime_normalization") v = localtime_normalization(ctx, ov);
    else if (id == "rebirth_laplace") v = rebirth_laplace(ctx, ov);
    else if (id == "decomposition_exact") v = decomposition_exact(ctx, ov);
    else if (id == "eisenbaum") v = eisenbaum(ctx, ov, false);
    else if (id == "eisenbaum_control") v = eisenbaum(ctx, ov, true);
    else if (id == "conditional_independence") v = conditional_independence(ctx, ov, false);
    else if (id == "conditional_independence_control")
        v = conditional_independence(ctx, ov, true);
    else if (id == "combined_identity") v = combined_identity(ctx, ov, false);
    else if (id == "combined_identity_control") v = combined_identity(ctx, ov, true);
    else if (id == "uniform_modulus") v = uniform_modulus(ctx, ov);
    else if (id == "local_modulus_lil") v = local_modulus_lil(ctx, ov);
    else if (id == "localtime_modulus") v = localtime_modulus(ctx, ov);
    else if (id == "determinism") v = determinism(ctx, ov);
    else throw ConfigError("unknown check id '" + id + "'");

    v.check = id;
    v.informational = informational;
    return v;
}

namespace checks {

json merged(json defaults, const json& overrides) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!defaults.contains(it.key()))
            throw ConfigError("unknown check override '" + it.key() + "'");
        defaults[it.key()] = it.value();
    }
    return defaults;
}

std::uint64_t check_seed(const LabContext& ctx, const char* id) {
    return derive_seed(ctx.master_seed(), hash_label(id));
}

// ---------------------------------------------------------------------------
// kernel_golden
// ---------------------------------------------------------------------------

Verdict kernel_golden(const LabContext& ctx, const json& overrides) {
    const json p = merged({{"rel_tol", 1e-6}}, overrides);
    const double tol = p.at("rel_tol").get<double>();
    LevyKernels lk(LevyExponent::brownian());

    const std::vector<double> xs = {-2.5, -2.0, -1.75, -1.5, -1.25, -1.0, -0.75,
                                    -0.5, -0.25, -0.1,  0.1,  0.25,  0.5,  0.75,
                                    1.0,  1.25,  1.5,   1.75, 2.0,   2.5};
    auto closed_u = [](double beta, double x) {
        return std::exp(-std::sqrt(2.0 * beta) * std::abs(x)) / std::sqrt(2.0 * beta);
    };
    double worst = 0.0;
    json table = json::array();
    auto track = [&](const std::string& what, double got, double want) {
        const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
        worst = std::max(worst, rel);
        table.push_back({{"kernel", what}, {"value", got}, {"closed_form", want},
                         {"rel_err", rel}});
    };

    for (double beta : {1.0, 2.0})
        for (double x : xs) track("u_beta", lk.u_beta(beta, x), closed_u(beta, x));
    for (double x : xs) track("phi", lk.phi0(x), std::abs(x));
    for (double x : xs) track("sigma2_0", lk.sigma2(0.0, x), 2.0 * std::abs(x));
    for (double x : xs)
        track("sigma2_1", lk.sigma2(1.0, x), 2.0 * (closed_u(1.0, 0.0) - closed_u(1.0, x)));
    for (std::size_t i = 0; i + 3 < xs.size(); i += 3) {
        const double x = xs[i], y = xs[i + 3];
        track("v_beta", lk.v_beta(1.0, x, y),
              closed_u(1.0, x - y) - closed_u(1.0, x) * closed_u(1.0, y) / closed_u(1.0, 0.0));
        track("frak_u0", lk.frak_u0(x, y), std::abs(x) + std::abs(y) - std::abs(x - y));
    }
    track("c_r(2)", LevyKernels::c_r(2.0), 1.0);

    Verdict v;
    v.params = p;
    v.seed = ctx.master_seed();
    v.statistic = worst;
    v.threshold = tol;
    v.pass = worst <= tol;
    v.details["n_values"] = table.size();
    v.details["worst_rel_err"] = worst;
    return v;
}

// ---------------------------------------------------------------------------
// covariance_psd
// ---------------------------------------------------------------------------

namespace {

double min_over_max_eigen(const Eigen::MatrixXd& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0)) return -1.0;
    return lo / hi;
}

std::vector<double> random_grid(Rng& rng, int n, double lo, double hi, double min_gap,
                                double exclusion) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    int guard = 0;
    while (static_cast<int>(g.size()) < n && guard < 100000) {
        ++guard;
        const double x = rng.uniform(lo, hi);
        if (std::abs(x) < exclusion) continue;
        bool ok = true;
        for (double y : g)
            if (std::abs(x - y) < min_gap) {
                ok = false;
                break;
            }
        if (ok) g.push_back(x);
    }
    std::sort(g.begin(), g.end());
    return g;
}

}  // namespace

Verdict covariance_psd(const LabContext& ctx, const json& overrides) {
    const json p = merged({{"n_grids", 10},
                           {"grid_size", 100},
                           {"threshold", -1e-8},
                           {"beta", 1.0},
                           {"p", ctx.p()},
                           {"stable_alpha", 1.5},
                           {"ou_theta", 0.3}},
                          overrides);
    const int n_grids = p.at("n_grids").get<int>();
    const int g_size = p.at("grid_size").get<int>();
    const double thr = p.at("threshold").get<double>();
    const double beta = p.at("beta").get<double>();
    const double prate = p.at("p").get<double>();
    const std::uint64_t seed = check_seed(ctx, "covariance_psd");

    auto lk_b = std::make_shared<LevyKernels>(LevyExponent::brownian());
    auto lk_s = std::make_shared<LevyKernels>(
        LevyExponent::stable(p.at("stable_alpha").get<double>(), 1.0));
    auto dk_b = std::make_shared<DiffusionKernels>(DiffusionSpec::brownian());
    auto dk_o = std::make_shared<DiffusionKernels>(
        DiffusionSpec::ou(p.at("ou_theta").get<double>()));
    const KernelFactors fb = dk_b->solve_factors(beta);
    const KernelFactors fbp = dk_b->solve_factors(prate);
    const KernelFactors fo = dk_o->solve_factors(beta);
    const KernelFactors fop = dk_o->solve_factors(prate);

    struct Entry {
        std::string name;
        double ratio;
    };
    auto run_grid = [&](int gi) -> std::vector<Entry> {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(gi)));
        const auto full = random_grid(rng, g_size, -3.0, 3.0, 2e-3, 0.02);
        const auto half = random_grid(rng, g_size, 0.05, 3.0, 2e-3, 0.0);
        const auto n = static_cast<Eigen::Index>(full.size());
        const auto nh = static_cast<Eigen::Index>(half.size());
        std::vector<Entry> out;
        auto add = [&](const std::string& name, const std::vector<double>& grid,
                       const Covariance& cov) {
            const auto m = static_cast<Eigen::Index>(grid.size());
            Eigen::MatrixXd k(m, m);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double v = cov(grid[static_cast<std::size_t>(i)],
                                         grid[static_cast<std::size_t>(j)]);
                    k(i, j) = v;
                    k(j, i) = v;
                }
            out.push_back({name, min_over_max_eigen(k)});
        };
        (void)n;
        (void)nh;
        for (auto [tag, lk] : {std::pair{"bm", lk_b}, std::pair{"stable", lk_s}}) {
            add(std::string("u_beta/") + tag, full,
                [&, lk](double x, double y) { return lk->u_beta(beta, x - y); });
            add(std::string("v_beta/") + tag, full,
                [&, lk](double x, double y) { return lk->v_beta(beta, x, y); });
            add(std::string("frak_u0/") + tag, full,
                [&, lk](double x, double y) { return lk->frak_u0(x, y); });
        }
        for (auto [tag, dk, f, fp] :
             {std::tuple{"bm", dk_b, &fb, &fbp}, std::tuple{"ou", dk_o, &fo, &fop}}) {
            add(std::string("u_bar/") + tag, full,
                [f](double x, double y) { return f->u_bar(x, y); });
            add(std::string("v_bar/") + tag, half,
                [f](double x, double y) { return f->v_bar(x, y); });
            add(std::string("s_min/") + tag, half, [dk](double x, double y) {
                return dk->frak_u0(x, y);
            });
            add(std::string("h_bar_diff/") + tag, half, [dk, fp](double x, double y) {
                return dk->frak_u0(x, y) - fp->v_bar(x, y);
            });
        }
        return out;
    };

    const auto per_grid = parallel_map<std::vector<Entry>>(
        n_grids, [&](int gi) { return run_grid(gi); });

    double worst = 1.0;
    std::string worst_name;
    for (const auto& grid_entries : per_grid)
        for (const auto& e : grid_entries)
            if (e.ratio < worst) {
                worst = e.ratio;
                worst_name = e.name;
            }

    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = worst;
    v.threshold = thr;
    v.pass = worst >= thr;
    v.details["worst_kernel"] = worst_name;
    v.details["n_matrices"] = per_grid.size() * per_grid.front().size();
    return v;
}

// ---------------------------------------------------------------------------
// scalar_identities
// ---------------------------------------------------------------------------

Verdict scalar_identities(const LabContext& ctx, const json& overrides) {
    const json p = merged({{"pairs", json::array({{1.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}})},
                           {"row_tol", 1e-4},
                           {"kl_tol", 1e-6},
                           {"mar_tol", 1e-9},
                           {"x", 0.3},
                           {"n_measures", 5}},
                          overrides);
    const std::uint64_t seed = check_seed(ctx, "scalar_identities");
    const double row_tol = p.at("row_tol").get<double>();
    const double kl_tol = p.at("kl_tol").get<double>();
    const double mar_tol = p.at("mar_tol").get<double>();
    const double x0 = p.at("x").get<double>();

    auto lk = std::make_shared<LevyKernels>(LevyExponent::brownian());
    json details;
    double worst = 0.0;
    auto track = [&worst](double err, double tol) {
        worst = std::max(worst, err / tol);
    };

    // row-integral recurrence: numeric y-integral of w^p equals 1/p
    json rows = json::array();
    for (const auto& pair : p.at("pairs")) {
        const double beta = pair[0].get<double>(), prate = pair[1].get<double>();
        const BaseProcess base = BaseProcess::levy_killed(lk, beta);
        const RebirthKernel rk(base, Measure::delta(0.0), prate);
        QuadratureOptions qo;
        qo.rel_tol = 1e-8;
        auto wfun = [&](double y) { return rk.w(x0, y); };
        // kinks sit at y = x0 and at the rebirth atom
        double integral = 0.0;
        const double edges[] = {x0 - 16.0, 0.0, x0, x0 + 16.0};
        for (int e = 0; e + 1 < 4; ++e)
            integral += integrate_adaptive(wfun, edges[e], edges[e + 1], qo).value;
        const double rel = std::abs(integral - 1.0 / prate) * prate;
        rows.push_back({{"beta", beta}, {"p", prate}, {"integral", integral},
                        {"rel_err", rel}});
        track(rel, row_tol);

        // killing Laplace closed form for the flat case: beta / (beta + p)
        const double kl = base.killing_laplace(prate, x0);
        const double kl_err = std::abs(kl - beta / (beta + prate));
        rows.back()["killing_laplace_err"] = kl_err;
        track(kl_err, kl_tol);
    }
    details["rows"] = rows;

    // f(y) <= u^p(y,y) for random atom probability measures
    auto lk_s = std::make_shared<LevyKernels>(LevyExponent::stable(1.5, 1.0));
    double worst_margin = 0.0;
    Rng rng(derive_seed(seed, hash_label("measures")));
    for (int mi = 0; mi < p.at("n_measures").get<int>(); ++mi) {
        const int n_atoms = 1 + static_cast<int>(rng.uniform() * 5.0);
        std::vector<std::pair<double, double>> atoms;
        double mass = 0.0;
        for (int a = 0; a < n_atoms; ++a) {
            const double w = rng.uniform();
            atoms.emplace_back(rng.uniform(-2.0, 2.0), w);
            mass += w;
        }
        for (auto& [ax, aw] : atoms) aw /= mass;
        const Measure mu = Measure::atoms(atoms);
        for (const auto& kern : {lk, lk_s}) {
            const BaseProcess base = BaseProcess::levy_killed(kern, 1.0);
            const RebirthKernel rk(base, mu, 1.0);
            const double udiag = base.u_p(1.0, 0.0, 0.0);
            for (int yi = 0; yi <= 60; ++yi) {
                const double y = -3.0 + 0.1 * yi;
                const double margin = rk.f(y) - base.u_p(1.0, y, y);
                worst_margin = std::max(worst_margin, margin / udiag);
            }
        }
    }
    details["f_bound_worst_margin"] = worst_margin;
    track(std::max(worst_margin, 0.0), mar_tol);

    // renewal-sum companion scalar at beta = p = 1, mu = delta_0
    {
        const BaseProcess base = BaseProcess::levy_killed(lk, 1.0);
        const RebirthKernel rk(base, Measure::delta(0.0), 1.0);
        const double rs = rk.renewal_sum(0.0);
        details["renewal_sum"] = rs;
        track(std::abs(rs - 1.0), kl_tol);
    }

    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = worst;
    v.threshold = 1.0;
    v.pass = worst <= 1.0;
    v.details = details;
    return v;
}

// ---------------------------------------------------------------------------
// localtime_normalization
// ---------------------------------------------------------------------------

Verdict localtime_normalization(const LabContext& ctx, const json& overrides) {
    const json p = merged({{"n", 20000},
                           {"dt", 1e-4},
                           {"epsilon", 0.02},
                           {"x", 0.0},
                           {"y", 0.0},
                           {"t_max", 40.0},
                           {"z_max", 3.0}},
                          overrides);
    const std::uint64_t seed = check_seed(ctx, "localtime_normalization");
    const int n = p.at("n").get<int>();
    const double x = p.at("x").get<double>(), y = p.at("y").get<double>();

    SimConfig cfg = ctx.sim();
    cfg.dt = p.at("dt").get<double>();
    cfg.epsilon = p.at("epsilon").get<double>();
    cfg.t_max = p.at("t_max").get<double>();
    cfg.validate();

    const BaseProcess base = ctx.base();
    const double target = base.u_0(x, y);
    auto m_density = [&base](double z) { return base.m_density(z); };
    const ProcessSpec& spec = ctx.process();

    const auto values = parallel_map<double>(n, [&](int r) {
        Rng rng(derive_seed(seed, hash_label("replica"), static_cast<std::uint64_t>(r)));
        Cycle cyc = simulate_base_path(spec, x, cfg, rng, cfg.t_max);
        PathBundle b;
        b.case_id = spec.case_id;
        b.dt = cfg.dt;
        b.zeta_n = {0.0, cyc.zeta(cfg.dt)};
        b.cycles.push_back(std::move(cyc));
        const auto est = estimate_local_time(b, {y}, {cfg.t_max + 1.0}, cfg.epsilon,
                                             m_density);
        return est.values[0][0];
    });
    Accumulator acc;
    for (double v : values) acc.add(v);

    const double z = (acc.mean() - target) / acc.standard_error();
    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = std::abs(z);
    v.threshold = p.at("z_max").get<double>();
    v.pass = v.statistic <= v.threshold;
    v.details = {{"mc_mean", acc.mean()},
                 {"mc_se", acc.standard_error()},
                 {"target", target},
                 {"z", z}};
    return v;
}

// ---------------------------------------------------------------------------
// rebirth_laplace
// ---------------------------------------------------------------------------

Verdict rebirth_laplace(const LabContext& ctx, const json& overrides) {
    const json p = merged({{"n", 20000},
                           {"dt", 2.5e-5},
                           {"epsilon", 0.005},
                           {"t_full", 12.0},
                           {"t_partial", 25.0},
                           {"x", 0.0},
                           {"y", 0.0},
                           {"partial_atoms", json::array({json::array({1.0, 0.5})})},
                           {"z_max", 3.0}},
                          overrides);
    const std::uint64_t seed = check_seed(ctx, "rebirth_laplace");
    const int n = p.at("n").get<int>();
    const double x = p.at("x").get<double>(), y = p.at("y").get<double>();
    const double prate = ctx.p();

    const BaseProcess base = ctx.base();
    auto m_density = [&base](double z) { return base.m_density(z); };
    const ProcessSpec& spec = ctx.process();

    // full rebirth against w^p
    const RebirthKernel rk(base, ctx.rebirth().measure, prate);
    const double target_full = rk.w(x, y);
    SimConfig cfg = ctx.sim();
    cfg.dt = p.at("dt").get<double>();
    cfg.epsilon = p.at("epsilon").get<double>();
    cfg.t_max = p.at("t_full").get<double>();
    cfg.validate();

    const auto full_values = parallel_map<double>(n, [&](int r) {
        SimConfig c = cfg;
        c.seed = derive_seed(seed, hash_label("full"), static_cast<std::uint64_t>(r));
        const PathBundle b = simulate_rebirth(spec, ctx.rebirth(), x, c);
        return laplace_functional(b, prate, y, c.epsilon, m_density);
    });
    Accumulator full_acc;
    for (double v : full_values) full_acc.add(v);
    const double z_full = (full_acc.mean() - target_full) / full_acc.standard_error();

    // partial rebirth against u~0
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : p.at("partial_atoms"))
        atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
    RebirthSpec part;
    part.mode = RebirthMode::Partial;
    part.measure = Measure::atoms(atoms);
    const PartialRebirthKernel pk(base, part.measure);
    const double target_partial = pk.u_tilde0(x, y);

    SimConfig pcfg = cfg;
    pcfg.t_max = p.at("t_partial").get<double>();
    struct PartialOut {
        double value;
        bool truncated;
    };
    const auto part_values = parallel_map<PartialOut>(n, [&](int r) {
        SimConfig c = pcfg;
        c.seed = derive_seed(seed, hash_label("partial"), static_cast<std::uint64_t>(r));
        const PathBundle b = simulate_rebirth(spec, part, x, c);
        const auto est = estimate_local_time(b, {y}, {c.t_max + 1.0}, c.epsilon, m_density);
        return PartialOut{est.values[0][0], b.truncated};
    });
    Accumulator part_acc;
    int truncated = 0;
    for (const auto& pv : part_values) {
        part_acc.add(pv.value);
        if (pv.truncated) ++truncated;
    }
    const double z_part = (part_acc.mean() - target_partial) / part_acc.standard_error();

    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = std::max(std::abs(z_full), std::abs(z_part));
    v.threshold = p.at("z_max").get<double>();
    v.pass = v.statistic <= v.threshold;
    v.details = {{"full", {{"mc_mean", full_acc.mean()},
                           {"mc_se", full_acc.standard_error()},
                           {"target", target_full},
                           {"z", z_full},
                           {"truncation_bias_bound",
                            std::exp(-prate * cfg.t_max) / prate}}},
                 {"partial", {{"mc_mean", part_acc.mean()},
                              {"mc_se", part_acc.standard_error()},
                              {"target", target_partial},
                              {"z", z_part},
                              {"truncated_bundles", truncated}}}};
    return v;
}

// ---------------------------------------------------------------------------
// decomposition_exact
// ---------------------------------------------------------------------------

Verdict decomposition_exact(const LabContext& ctx, const json& overrides) {
    const json p = merged({{"n_bundles", 1000},
                           {"dt", 1e-3},
                           {"epsilon", 0.05},
                           {"t_max", 3.0},
                           {"shift_bundles", 100},
                           {"splits_per_bundle", 5},
                           {"tol", 1e-12},
                           {"y_grid", json::array({-0.3, 0.0, 0.4})}},
                          overrides);
    const std::uint64_t seed = check_seed(ctx, "decomposition_exact");
    const int n_bundles = p.at("n_bundles").get<int>();
    const int shift_bundles = p.at("shift_bundles").get<int>();
    const int splits = p.at("splits_per_bundle").get<int>();
    const double tol = p.at("tol").get<double>();
    std::vector<double> y_grid = p.at("y_grid").get<std::vector<double>>();

    SimConfig cfg = ctx.sim();
    cfg.dt = p.at("dt").get<double>();
    cfg.epsilon = p.at("epsilon").get<double>();
    cfg.t_max = p.at("t_max").get<double>();
    cfg.validate();
    const BaseProcess base = ctx.base();
    auto m_density = [&base](double z) { return base.m_density(z); };
    const ProcessSpec& spec = ctx.process();
    const double start = y_grid[y_grid.size() / 2];

    const auto residuals = parallel_map<std::pair<double, double>>(n_bundles, [&](int r) {
        SimConfig c = cfg;
        c.seed = derive_seed(seed, hash_label("bundle"), static_cast<std::uint64_t>(r));
        const PathBundle b = simulate_rebirth(spec, ctx.rebirth(), start, c);
        const auto est = estimate_local_time(b, y_grid, {c.t_max + 1.0}, c.epsilon,
                                             m_density);
        double worst_sum = 0.0;
        for (std::size_t j = 0; j < y_grid.size(); ++j) {
            double s = 0.0;
            for (const auto& cyc : est.per_cycle) s += cyc[j];
            worst_sum = std::max(worst_sum, std::abs(est.values[0][j] - s));
        }

        double worst_shift = 0.0;
        if (r < shift_bundles && b.total_time() > 4.0 * c.dt) {
            Rng rng(derive_seed(seed, hash_label("split"), static_cast<std::uint64_t>(r)));
            for (int si = 0; si < splits; ++si) {
                const auto m = static_cast<std::size_t>(rng.uniform() *
                                                        static_cast<double>(b.cycles.size()));
                const auto& cyc = b.cycles[m];
                if (cyc.states.size() < 2) continue;
                const auto k = static_cast<std::size_t>(
                    rng.uniform() * static_cast<double>(cyc.states.size() - 1));
                const double s = b.zeta_n[m] + static_cast<double>(k) * c.dt;
                const double remaining = b.total_time() - s;
                if (remaining <= 2.0 * c.dt) continue;
                const auto tsteps = 1 + static_cast<std::size_t>(
                                            rng.uniform() * (remaining / c.dt - 1.0));
                const double t = static_cast<double>(tsteps) * c.dt;
                const auto est_orig =
                    estimate_local_time(b, y_grid, {s, s + t}, c.epsilon, m_density);
                const PathBundle shifted = theta_shift(b, s);
                const auto est_shift =
                    estimate_local_time(shifted, y_grid, {t}, c.epsilon, m_density);
                for (std::size_t j = 0; j < y_grid.size(); ++j) {
                    const double lhs = est_orig.values[1][j];
                    const double rhs = est_orig.values[0][j] + est_shift.values[0][j];
                    worst_shift = std::max(worst_shift, std::abs(lhs - rhs));
                }
            }
        }
        return std::pair{worst_sum, worst_shift};
    });

    double worst_sum = 0.0, worst_shift = 0.0;
    for (const auto& [a, b2] : residuals) {
        worst_sum = std::max(worst_sum, a);
        worst_shift = std::max(worst_shift, b2);
    }

    Verdict v;
    v.params = p;
    v.seed = seed;
    v.statistic = std::max(worst_sum, worst_shift);
    v.threshold = tol;
    v.pass = v.statistic <= tol;
    v.details = {{"worst_decomposition_residual", worst_sum},
                 {"worst_shift_residual", worst_shift}};
    return v;
}

// ---------------------------------------------------------------------------
// determinism
// ---------------------------------------------------------------------------

Verdict determinism(const LabContext& ctx, const json& overrides) {
    const json p = merged(
        {{"workers_a", 1},
         {"workers_b", 0},  // 0: hardware / env default
         {"subchecks",
          json::array(
              {json{{"id", "localtime_normalization"},
                    {"overrides", {{"n", 2000}, {"dt", 1e-3}, {"epsilon", 0.04}}}},
               json{{"id", "uniform_modulus"},
                    {"overrides",
                     {{"replicas", 8}, {"depth", 10}, {"k_min", 8}, {"k_max", 10}}}}})}},
        overrides);

    bool all_equal = true;
    json runs = json::array();
    for (const auto& sub : p.at("subchecks")) {
        const std::string id = sub.at("id").get<std::string>();
        const json ov = sub.value("overrides", json::object());
        set_worker_override(p.at("workers_a").get<int>());
        const Verdict a = run_check(id, ctx, ov);
        set_worker_override(p.at("workers_b").get<int>());
        const Verdict b = run_check(id, ctx, ov);
        set_worker_override(0);
        const bool equal = a.to_json().dump() == b.to_json().dump();
        all_equal = all_equal && equal;
        runs.push_back({{"id", id}, {"identical", equal}});
    }

    Verdict v;
    v.params = p;
    v.seed = ctx.master_seed();
    v.statistic = all_equal ? 0.0 : 1.0;
    v.threshold = 0.0;
    v.pass = all_equal;
    v.details["runs"] = runs;
    return v;
}

}  // namespace checks
}  // namespace rebirthlab
