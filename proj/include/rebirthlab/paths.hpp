#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rebirthlab/rebirth.hpp"
#include "rebirthlab/rng.hpp"

namespace rebirthlab {

enum class HittingMode { Naive, BridgeCorrected };
enum class DeathCause { ExpClock, HitZero, Horizon };

struct SimConfig {
    double dt = 1e-4;
    double t_max = 10.0;
    double epsilon = 0.02;      // local-time bandwidth
    std::uint64_t seed = 1;
    int max_cycles = 100000;
    HittingMode hitting = HittingMode::BridgeCorrected;
    double overflow_guard = 1e9;

    void validate() const {
        if (!(dt > 0.0) || !(t_max > 0.0) || !(epsilon > 0.0))
            throw std::domain_error("dt, t_max, epsilon must be positive");
        if (!(dt <= epsilon * epsilon))
            throw std::domain_error("need dt <= epsilon^2 so the bandwidth resolves the walk");
        if (t_max / dt > 1e9) throw std::domain_error("step-count guard exceeded");
        if (max_cycles < 1) throw std::domain_error("max_cycles must be positive");
    }
};

// One life of the base process on a dt grid. states[k] occupies
// [k dt, (k+1) dt) for k < M = states.size()-1; the last state occupies
// [M dt, M dt + tail_dt). The lifetime is zeta = M dt + tail_dt.
struct Cycle {
    double start = 0.0;
    std::vector<double> states;
    double tail_dt = 0.0;
    DeathCause cause = DeathCause::ExpClock;

    double zeta(double dt) const {
        return static_cast<double>(states.size() - 1) * dt + tail_dt;
    }
};

struct PathBundle {
    int case_id = 1;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::vector<Cycle> cycles;
    std::vector<double> zeta_n;  // zeta_0 = 0 < zeta_1 < ... (size cycles+1)
    std::optional<int> exiled_at_cycle;  // 1-based, partial mode
    bool truncated = false;

    double total_time() const { return zeta_n.back(); }
    // N_t = min{ j : t < zeta_j }
    int cycle_index_at(double t) const;
};

// Simulation view of the base process of one case: the Levy exponent must be
// stable (exact per-step increments); diffusions step with Euler-Maruyama.
struct ProcessSpec {
    int case_id = 1;
    std::optional<LevyExponent> psi;
    std::optional<DiffusionSpec> diffusion;
    double beta = 1.0;

    bool is_levy() const { return case_id <= 3; }
    bool kills_by_clock() const {
        return case_id == 1 || case_id == 2 || case_id == 4 || case_id == 5;
    }
    bool kills_at_zero() const {
        return case_id == 2 || case_id == 3 || case_id == 5 || case_id == 6;
    }
    void validate() const;
    std::uint64_t hash() const;
};

struct RebirthSimOptions {
    // negative control: every cycle reuses the first cycle's stream
    bool corrupt_reuse_seed = false;
};

// ---------------------------------------------------------------------------
// Stepping core. One implementation drives both the bundle producer and the
// streaming estimators, so their random streams are identical by construction.
// The visitor sees every occupied interval:
//   cycle_start(cycle /*1-based*/, start)
//   step(x, t_cycle_local, dt_eff)    with dt_eff in (0, dt]
//   cycle_end(cycle, cause, zeta)
// and for rebirth walks additionally exiled(cycle) when the partial mechanism
// sends the path away.
// ---------------------------------------------------------------------------

namespace detail {

template <class Visitor>
std::pair<DeathCause, double> walk_cycle(const ProcessSpec& spec, double start,
                                         const SimConfig& config, Rng& rng,
                                         double horizon, Visitor&& visit) {
    const double dt = config.dt;
    const double clock = spec.kills_by_clock()
                             ? rng.exponential(spec.beta)
                             : std::numeric_limits<double>::infinity();
    const double life_cap = std::min(clock, horizon);

    double alpha = 2.0, inc_scale = 0.0, guard = 0.0;
    if (spec.is_levy()) {
        alpha = spec.psi->stable_alpha();
        inc_scale = std::pow(spec.psi->stable_scale() * dt, 1.0 / alpha);
        guard = 0.5 * inc_scale;  // naive hit band of half a typical step
    }

    double x = start;
    const auto max_steps = static_cast<std::size_t>(config.t_max / dt) + 2;
    for (std::size_t k = 0; k < max_steps; ++k) {
        const double t_here = static_cast<double>(k) * dt;
        if (t_here + dt > life_cap) {
            const double tail = life_cap - t_here;
            if (tail > 0.0) visit(x, t_here, tail);
            const DeathCause cause =
                (horizon <= clock) ? DeathCause::Horizon : DeathCause::ExpClock;
            return {cause, life_cap};
        }
        double xn;
        if (spec.is_levy()) {
            xn = x + rng.stable_symmetric(alpha, inc_scale);
        } else {
            const double a = spec.diffusion->a(x);
            const double c = spec.diffusion->c(x);
            xn = x + c * dt + a * std::sqrt(dt) * rng.normal();
        }
        if (!std::isfinite(xn) || std::abs(xn) > config.overflow_guard)
            throw std::runtime_error("path overflow at step " + std::to_string(k) +
                                     " (|x| > guard); reduce dt or check coefficients");
        if (spec.kills_at_zero()) {
            bool hit = false;
            if (spec.is_levy()) {
                if (std::abs(xn) <= guard) hit = true;
                if (alpha == 2.0 && x * xn < 0.0) hit = true;
            } else {
                if (xn <= 0.0 || x * xn < 0.0) {
                    hit = true;
                } else if (config.hitting == HittingMode::BridgeCorrected && x > 0.0 &&
                           xn > 0.0) {
                    const double a = spec.diffusion->a(x);
                    if (rng.bernoulli(std::exp(-2.0 * x * xn / (a * a * dt)))) hit = true;
                }
            }
            if (hit) {
                // death strictly inside the step; midpoint convention
                visit(x, t_here, 0.5 * dt);
                return {DeathCause::HitZero, t_here + 0.5 * dt};
            }
        }
        visit(x, t_here, dt);
        x = xn;
    }
    return {DeathCause::Horizon, static_cast<double>(max_steps) * dt};
}

}  // namespace detail

// Walks the full/partial rebirth mechanism. Returns the bundle skeleton
// (death times, exile, truncation) without retaining states.
template <class Visitor>
PathBundle walk_rebirth(const ProcessSpec& spec, const RebirthSpec& rebirth,
                        double start, const SimConfig& config,
                        const RebirthSimOptions& opts, Visitor&& v) {
    spec.validate();
    rebirth.validate();
    config.validate();

    PathBundle bundle;
    bundle.case_id = spec.case_id;
    bundle.seed = config.seed;
    bundle.dt = config.dt;
    bundle.zeta_n.push_back(0.0);

    const std::uint64_t first_cycle_seed = derive_seed(config.seed, hash_label("cycle"), 1);
    const Measure renormalized = rebirth.mode == RebirthMode::Partial
                                     ? rebirth.measure.normalized()
                                     : rebirth.measure;
    double t_used = 0.0;
    for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
        double cycle_start = start;
        if (cycle > 1) {
            Rng draw_rng(derive_seed(config.seed, hash_label("rebirth_draw"),
                                     static_cast<std::uint64_t>(cycle)));
            if (rebirth.mode == RebirthMode::Partial &&
                draw_rng.bernoulli(rebirth.exile_probability())) {
                bundle.exiled_at_cycle = cycle;
                v.exiled(cycle);
                return bundle;
            }
            cycle_start = renormalized.sample(draw_rng);
        }
        Rng cycle_rng(opts.corrupt_reuse_seed
                          ? first_cycle_seed
                          : derive_seed(config.seed, hash_label("cycle"),
                                        static_cast<std::uint64_t>(cycle)));
        v.cycle_start(cycle, cycle_start);
        const double t0 = t_used;
        auto [cause, zeta] = detail::walk_cycle(
            spec, cycle_start, config, cycle_rng, config.t_max - t_used,
            [&](double x, double t_local, double dt_eff) {
                v.step(x, t0 + t_local, dt_eff);
            });
        t_used += zeta;
        bundle.zeta_n.push_back(bundle.zeta_n.back() + zeta);
        v.cycle_end(cycle, cause, zeta);
        if (cause == DeathCause::Horizon) {
            bundle.truncated = true;
            return bundle;
        }
    }
    bundle.truncated = true;  // max_cycles exhausted before t_max
    return bundle;
}

// Visitor with no-op hooks to derive from.
struct WalkEvents {
    void cycle_start(int, double) {}
    void step(double, double, double) {}
    void cycle_end(int, DeathCause, double) {}
    void exiled(int) {}
};

Cycle simulate_base_path(const ProcessSpec& spec, double start,
                         const SimConfig& config, Rng& rng, double horizon);

PathBundle simulate_rebirth(const ProcessSpec& spec, const RebirthSpec& rebirth,
                            double start, const SimConfig& config,
                            const RebirthSimOptions& opts = {});

// time shift per the cycle structure: drop completed cycles before s and clip
// the current one; s must sit on the step grid of its cycle.
PathBundle theta_shift(const PathBundle& bundle, double s);

struct LocalTimeEstimate {
    std::vector<double> y_grid;
    std::vector<double> t_marks;                    // global times
    std::vector<std::vector<double>> values;        // values[mark][y]
    std::vector<std::vector<double>> per_cycle;     // per_cycle[cycle][y], full cycles
    double epsilon = 0.0;
    int case_id = 1;
};

// Occupation-density estimator (1 / (2 eps m'(y))) int 1{|X_s - y| <= eps} ds.
// m' is the case reference-measure density (1 for the Levy cases).
LocalTimeEstimate estimate_local_time(const PathBundle& bundle,
                                      const std::vector<double>& y_grid,
                                      const std::vector<double>& t_marks,
                                      double epsilon,
                                      const std::function<double(double)>& m_density);

// Stieltjes integral of exp(-p s) against the occupation estimator at level y.
double laplace_functional(const PathBundle& bundle, double p, double y,
                          double epsilon,
                          const std::function<double(double)>& m_density);

}  // namespace rebirthlab
