#include "rebirthlab/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace rebirthlab {

int PathBundle::cycle_index_at(double t) const {
    for (std::size_t j = 1; j < zeta_n.size(); ++j)
        if (t < zeta_n[j]) return static_cast<int>(j);
    return static_cast<int>(zeta_n.size());  // beyond the simulated horizon
}

void ProcessSpec::validate() const {
    if (case_id < 1 || case_id > 6) throw std::domain_error("case id must be 1..6");
    if (is_levy()) {
        if (!psi) throw std::domain_error("Levy cases need an exponent");
        if (!psi->is_stable())
            throw std::domain_error(
                "path simulation needs a stable exponent (exact increments); "
                "tabulated exponents are kernel-only");
    } else if (!diffusion) {
        throw std::domain_error("diffusion cases need coefficients");
    }
    if (kills_by_clock() && !(beta > 0.0))
        throw std::domain_error("killing rate beta must be positive");
}

std::uint64_t ProcessSpec::hash() const {
    std::uint64_t h = derive_seed(hash_label("process"), static_cast<std::uint64_t>(case_id),
                                  std::bit_cast<std::uint64_t>(beta));
    if (psi) h = derive_seed(h, psi->hash());
    if (diffusion) h = derive_seed(h, diffusion->hash());
    return h;
}

namespace {

// visitor assembling a Cycle out of the visited (state, dt_eff) stream
struct CycleCollector {
    Cycle cyc;
    double last_dt_eff = 0.0;
    void operator()(double x, double /*t_local*/, double dt_eff) {
        cyc.states.push_back(x);
        last_dt_eff = dt_eff;
    }
};

}  // namespace

Cycle simulate_base_path(const ProcessSpec& spec, double start,
                         const SimConfig& config, Rng& rng, double horizon) {
    spec.validate();
    CycleCollector col;
    col.cyc.start = start;
    auto [cause, zeta] = detail::walk_cycle(
        spec, start, config, rng, horizon,
        [&col](double x, double t, double dt_eff) { col(x, t, dt_eff); });
    if (col.cyc.states.empty()) {
        // died before occupying any interval (zero-length horizon)
        col.cyc.states.push_back(start);
        col.last_dt_eff = 0.0;
    }
    col.cyc.tail_dt = col.last_dt_eff;
    col.cyc.cause = cause;
    (void)zeta;
    return col.cyc;
}

namespace {

struct BundleCollector : WalkEvents {
    PathBundle* bundle = nullptr;
    CycleCollector current;
    void cycle_start(int, double start) {
        current = CycleCollector{};
        current.cyc.start = start;
    }
    void step(double x, double, double dt_eff) { current(x, 0.0, dt_eff); }
    void cycle_end(int, DeathCause cause, double) {
        if (current.cyc.states.empty()) {
            current.cyc.states.push_back(current.cyc.start);
            current.last_dt_eff = 0.0;
        }
        current.cyc.tail_dt = current.last_dt_eff;
        current.cyc.cause = cause;
        bundle->cycles.push_back(std::move(current.cyc));
    }
};

}  // namespace

PathBundle simulate_rebirth(const ProcessSpec& spec, const RebirthSpec& rebirth,
                            double start, const SimConfig& config,
                            const RebirthSimOptions& opts) {
    PathBundle assembled;
    BundleCollector col;
    col.bundle = &assembled;
    PathBundle skeleton = walk_rebirth(spec, rebirth, start, config, opts, col);
    skeleton.cycles = std::move(assembled.cycles);
    return skeleton;
}

PathBundle theta_shift(const PathBundle& bundle, double s) {
    if (s < 0.0 || s >= bundle.total_time())
        throw std::domain_error("shift time outside the simulated horizon");
    const int m = bundle.cycle_index_at(s);
    const double local = s - bundle.zeta_n[static_cast<std::size_t>(m - 1)];
    const auto k0_real = local / bundle.dt;
    const auto k0 = static_cast<std::size_t>(std::llround(k0_real));
    if (std::abs(k0_real - static_cast<double>(k0)) > 1e-9)
        throw std::domain_error("shift time must sit on the step grid of its cycle");

    PathBundle out;
    out.case_id = bundle.case_id;
    out.seed = bundle.seed;
    out.dt = bundle.dt;
    out.truncated = bundle.truncated;
    out.zeta_n.push_back(0.0);
    const auto& cur = bundle.cycles[static_cast<std::size_t>(m - 1)];
    Cycle clipped;
    clipped.states.assign(cur.states.begin() + static_cast<std::ptrdiff_t>(k0),
                          cur.states.end());
    clipped.start = clipped.states.front();
    clipped.tail_dt = cur.tail_dt;
    clipped.cause = cur.cause;
    out.zeta_n.push_back(clipped.zeta(out.dt));
    out.cycles.push_back(std::move(clipped));
    for (std::size_t i = static_cast<std::size_t>(m); i < bundle.cycles.size(); ++i) {
        out.cycles.push_back(bundle.cycles[i]);
        out.zeta_n.push_back(out.zeta_n.back() + bundle.cycles[i].zeta(out.dt));
    }
    if (bundle.exiled_at_cycle && *bundle.exiled_at_cycle >= m)
        out.exiled_at_cycle = *bundle.exiled_at_cycle - (m - 1);
    return out;
}

namespace {

// index range of y_grid points within [x - eps, x + eps]; y_grid sorted
inline std::pair<std::size_t, std::size_t> window(const std::vector<double>& y,
                                                  double x, double eps) {
    const auto lo = std::lower_bound(y.begin(), y.end(), x - eps);
    const auto hi = std::upper_bound(y.begin(), y.end(), x + eps);
    return {static_cast<std::size_t>(lo - y.begin()),
            static_cast<std::size_t>(hi - y.begin())};
}

}  // namespace

LocalTimeEstimate estimate_local_time(const PathBundle& bundle,
                                      const std::vector<double>& y_grid,
                                      const std::vector<double>& t_marks,
                                      double epsilon,
                                      const std::function<double(double)>& m_density) {
    if (y_grid.empty()) throw std::domain_error("empty level grid");
    if (!std::is_sorted(y_grid.begin(), y_grid.end()))
        throw std::domain_error("level grid must be sorted");

    LocalTimeEstimate est;
    est.y_grid = y_grid;
    est.t_marks = t_marks;
    est.epsilon = epsilon;
    est.case_id = bundle.case_id;

    std::vector<double> inv_norm(y_grid.size());
    for (std::size_t i = 0; i < y_grid.size(); ++i)
        inv_norm[i] = 1.0 / (2.0 * epsilon * m_density(y_grid[i]));

    const double dt = bundle.dt;
    est.per_cycle.assign(bundle.cycles.size(), std::vector<double>(y_grid.size(), 0.0));
    // partial[mark][y]: contribution of the (incomplete) current cycle at the mark
    std::vector<std::vector<double>> partial(
        t_marks.size(), std::vector<double>(y_grid.size(), 0.0));

    for (std::size_t ci = 0; ci < bundle.cycles.size(); ++ci) {
        const Cycle& cyc = bundle.cycles[ci];
        const double t0 = bundle.zeta_n[ci];
        const double zeta = cyc.zeta(dt);
        auto& acc = est.per_cycle[ci];
        const std::size_t last = cyc.states.size() - 1;
        for (std::size_t k = 0; k <= last; ++k) {
            const double dt_eff = (k == last) ? cyc.tail_dt : dt;
            if (dt_eff <= 0.0) continue;
            const auto [a, b] = window(y_grid, cyc.states[k], epsilon);
            for (std::size_t j = a; j < b; ++j) acc[j] += dt_eff * inv_norm[j];
        }
        // marks landing inside this cycle get the clipped contribution
        for (std::size_t mi = 0; mi < t_marks.size(); ++mi) {
            const double local = t_marks[mi] - t0;
            if (local <= 0.0 || local >= zeta) continue;
            auto& pacc = partial[mi];
            const auto kmax = static_cast<std::size_t>(local / dt);
            for (std::size_t k = 0; k <= std::min(kmax, last); ++k) {
                const double step_len = (k == last) ? cyc.tail_dt : dt;
                const double step_end =
                    std::min(static_cast<double>(k) * dt + step_len, local);
                const double dt_eff = step_end - static_cast<double>(k) * dt;
                if (dt_eff <= 0.0) continue;
                const auto [a, b] = window(y_grid, cyc.states[k], epsilon);
                for (std::size_t j = a; j < b; ++j) pacc[j] += dt_eff * inv_norm[j];
            }
        }
    }

    // totals at each mark: sum of full cycles before the mark plus the clipped
    // current-cycle term; the decomposition is exact by construction
    est.values.assign(t_marks.size(), std::vector<double>(y_grid.size(), 0.0));
    for (std::size_t mi = 0; mi < t_marks.size(); ++mi) {
        auto& row = est.values[mi];
        for (std::size_t ci = 0; ci < bundle.cycles.size(); ++ci) {
            if (bundle.zeta_n[ci + 1] <= t_marks[mi]) {
                for (std::size_t j = 0; j < row.size(); ++j)
                    row[j] += est.per_cycle[ci][j];
            }
        }
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += partial[mi][j];
    }
    return est;
}

double laplace_functional(const PathBundle& bundle, double p, double y,
                          double epsilon,
                          const std::function<double(double)>& m_density) {
    if (!(p > 0.0)) throw std::domain_error("laplace_functional requires p > 0");
    const double inv_norm = 1.0 / (2.0 * epsilon * m_density(y));
    const double dt = bundle.dt;
    double acc = 0.0;
    for (std::size_t ci = 0; ci < bundle.cycles.size(); ++ci) {
        const Cycle& cyc = bundle.cycles[ci];
        const double t0 = bundle.zeta_n[ci];
        const std::size_t last = cyc.states.size() - 1;
        for (std::size_t k = 0; k <= last; ++k) {
            const double dt_eff = (k == last) ? cyc.tail_dt : dt;
            if (dt_eff <= 0.0) continue;
            if (std::abs(cyc.states[k] - y) > epsilon) continue;
            const double t = t0 + static_cast<double>(k) * dt;
            // the increment dL over the step discounted at its start time
            acc += std::exp(-p * t) * dt_eff * inv_norm;
        }
    }
    return acc;
}

}  // namespace rebirthlab
