#include "rebirthlab/rebirth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "rebirthlab/rng.hpp"

namespace rebirthlab {

Measure Measure::atoms(std::vector<std::pair<double, double>> atom_list) {
    if (atom_list.empty()) throw std::domain_error("measure needs at least one atom");
    Measure m;
    m.atoms_ = std::move(atom_list);
    for (const auto& [x, w] : m.atoms_) {
        if (!(w >= 0.0)) throw std::domain_error("atom weights must be nonnegative");
        m.mass_ += w;
    }
    if (!(m.mass_ > 0.0)) throw std::domain_error("measure must have positive mass");
    return m;
}

Measure Measure::density(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() != values.size() || grid.size() < 2)
        throw std::domain_error("density needs >= 2 grid samples");
    Measure m;
    m.grid_ = std::move(grid);
    m.values_ = std::move(values);
    m.node_weights_.assign(m.grid_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < m.grid_.size(); ++i) {
        const double h = m.grid_[i + 1] - m.grid_[i];
        if (!(h > 0.0)) throw std::domain_error("density grid must increase");
        m.node_weights_[i] += 0.5 * h;
        m.node_weights_[i + 1] += 0.5 * h;
    }
    for (std::size_t i = 0; i < m.grid_.size(); ++i) {
        if (!(m.values_[i] >= 0.0)) throw std::domain_error("density must be nonnegative");
        m.mass_ += m.node_weights_[i] * m.values_[i];
    }
    if (!(m.mass_ > 0.0)) throw std::domain_error("measure must have positive mass");
    return m;
}

Measure Measure::uniform(double lo, double hi, int n_nodes) {
    if (!(hi > lo)) throw std::domain_error("uniform measure needs hi > lo");
    std::vector<double> g(static_cast<std::size_t>(n_nodes)), v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        v[i] = 1.0 / (hi - lo);
    }
    return density(std::move(g), std::move(v));
}

double Measure::total_mass() const { return mass_; }

double Measure::integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (const auto& [x, w] : atoms_) s += w * f(x);
    for (std::size_t i = 0; i < grid_.size(); ++i)
        s += node_weights_[i] * values_[i] * f(grid_[i]);
    return s;
}

Measure Measure::normalized() const {
    Measure m = *this;
    for (auto& [x, w] : m.atoms_) w /= mass_;
    for (auto& v : m.values_) v /= mass_;
    m.mass_ = 1.0;
    return m;
}

double Measure::sample(Rng& rng) const {
    double target = rng.uniform() * mass_;
    for (const auto& [x, w] : atoms_) {
        if (target < w) return x;
        target -= w;
    }
    // density part: piecewise-linear CDF over trapezoid cells
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        const double h = grid_[i + 1] - grid_[i];
        const double cellmass = 0.5 * h * (values_[i] + values_[i + 1]);
        if (target < cellmass || i + 2 == grid_.size()) {
            const double u = cellmass > 0.0 ? target / cellmass : rng.uniform();
            return grid_[i] + h * u;  // linear within the cell
        }
        target -= cellmass;
    }
    return atoms_.empty() ? grid_.back() : atoms_.back().first;
}

bool Measure::supported_in(const std::function<bool(double)>& pred) const {
    for (const auto& [x, w] : atoms_)
        if (w > 0.0 && !pred(x)) return false;
    for (std::size_t i = 0; i < grid_.size(); ++i)
        if (values_[i] > 0.0 && !pred(grid_[i])) return false;
    return true;
}

std::uint64_t Measure::hash() const {
    std::uint64_t h = hash_label("measure");
    auto mix = [&h](double v) { h = derive_seed(h, std::bit_cast<std::uint64_t>(v)); };
    for (const auto& [x, w] : atoms_) {
        mix(x);
        mix(w);
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        mix(grid_[i]);
        mix(values_[i]);
    }
    return h;
}

void RebirthSpec::validate() const {
    if (mode == RebirthMode::Full) {
        if (std::abs(measure.total_mass() - 1.0) > 1e-10)
            throw std::domain_error("full rebirth requires a probability measure");
    } else {
        if (!(measure.total_mass() > 0.0))
            throw std::domain_error("partial rebirth requires |nu| > 0");
    }
}

double RebirthSpec::exile_probability() const {
    if (mode != RebirthMode::Partial) return 0.0;
    return 1.0 / (1.0 + measure.total_mass());
}

BaseProcess BaseProcess::levy_killed(std::shared_ptr<LevyKernels> k, double beta) {
    if (!(beta > 0.0)) throw std::domain_error("case 1 requires beta > 0");
    BaseProcess b;
    b.case_id_ = 1;
    b.beta_ = beta;
    b.levy_ = std::move(k);
    return b;
}

BaseProcess BaseProcess::levy_killed_at_zero(std::shared_ptr<LevyKernels> k,
                                             double beta) {
    if (!(beta > 0.0)) throw std::domain_error("case 2 requires beta > 0");
    BaseProcess b;
    b.case_id_ = 2;
    b.beta_ = beta;
    b.levy_ = std::move(k);
    return b;
}

BaseProcess BaseProcess::levy_recurrent_zero(std::shared_ptr<LevyKernels> k) {
    BaseProcess b;
    b.case_id_ = 3;
    b.levy_ = std::move(k);
    return b;
}

BaseProcess BaseProcess::diffusion_killed(std::shared_ptr<DiffusionKernels> k,
                                          double beta) {
    if (!(beta > 0.0)) throw std::domain_error("case 4 requires beta > 0");
    BaseProcess b;
    b.case_id_ = 4;
    b.beta_ = beta;
    b.diff_ = std::move(k);
    return b;
}

BaseProcess BaseProcess::diffusion_killed_at_zero(std::shared_ptr<DiffusionKernels> k,
                                                  double beta) {
    if (!(beta > 0.0)) throw std::domain_error("case 5 requires beta > 0");
    BaseProcess b;
    b.case_id_ = 5;
    b.beta_ = beta;
    b.diff_ = std::move(k);
    return b;
}

BaseProcess BaseProcess::diffusion_hit_zero(std::shared_ptr<DiffusionKernels> k) {
    BaseProcess b;
    b.case_id_ = 6;
    b.diff_ = std::move(k);
    return b;
}

const KernelFactors* BaseProcess::factors(double rate) const {
    std::lock_guard lock(*factor_mutex_);
    for (const auto& [r, f] : factor_cache_)
        if (r == rate) return f.get();
    auto f = std::make_shared<KernelFactors>(diff_->solve_factors(rate));
    factor_cache_.emplace_back(rate, f);
    return factor_cache_.back().second.get();
}

double BaseProcess::u_p(double p, double x, double y) const {
    switch (case_id_) {
        case 1: return levy_->u_beta(beta_ + p, x - y);
        case 2: return levy_->v_beta(beta_ + p, x, y);
        case 3: return levy_->v_beta(p, x, y);
        case 4: return factors(beta_ + p)->u_bar(x, y);
        case 5: return factors(beta_ + p)->v_bar(x, y);
        case 6: return factors(p)->v_bar(x, y);
        default: throw std::logic_error("bad case id");
    }
}

double BaseProcess::u_0(double x, double y) const {
    switch (case_id_) {
        case 1: return levy_->u_beta(beta_, x - y);
        case 2: return levy_->v_beta(beta_, x, y);
        case 3: return levy_->frak_u0(x, y);
        case 4: return factors(beta_)->u_bar(x, y);
        case 5: return factors(beta_)->v_bar(x, y);
        case 6: return diff_->frak_u0(x, y);
        default: throw std::logic_error("bad case id");
    }
}

namespace {
// the truncation of the working interval must not matter for m-integrals
void check_row_tail(const KernelFactors* kf, double x) {
    const double frac = kf->row_integral_tail_fraction(x);
    if (frac > 0.01)
        throw std::runtime_error(
            "row integral not converged on the working interval (tail fraction " +
            std::to_string(frac) + "); widen the domain");
}
}  // namespace

double BaseProcess::row_integral(double p, double x) const {
    switch (case_id_) {
        case 1: return levy_->u_row_integral(beta_ + p);
        case 2: {
            const double q = beta_ + p;
            return levy_->u_row_integral(q) *
                   (1.0 - levy_->u_beta(q, x) / levy_->u_beta(q, 0.0));
        }
        case 3:
            return levy_->u_row_integral(p) *
                   (1.0 - levy_->u_beta(p, x) / levy_->u_beta(p, 0.0));
        case 4: {
            const auto* kf = factors(beta_ + p);
            check_row_tail(kf, x);
            return kf->u_bar_row_integral(x);
        }
        case 5: {
            const auto* kf = factors(beta_ + p);
            check_row_tail(kf, x);
            return kf->v_bar_row_integral_from_zero(x);
        }
        case 6: {
            const auto* kf = factors(p);
            check_row_tail(kf, x);
            return kf->v_bar_row_integral_from_zero(x);
        }
        default: throw std::logic_error("bad case id");
    }
}

double BaseProcess::m_density(double y) const {
    if (is_levy()) return 1.0;
    return diff_->speed_density(y);
}

bool BaseProcess::in_state_space(double x) const {
    switch (case_id_) {
        case 1: return true;
        case 2:
        case 3: return x != 0.0;
        case 4: return x >= diff_->spec().x_lo() && x <= diff_->spec().x_hi();
        case 5:
        case 6: return x > 0.0 && x <= diff_->spec().x_hi();
        default: return false;
    }
}

double BaseProcess::killing_laplace(double p, double x) const {
    if (!(p > 0.0)) throw std::domain_error("killing_laplace requires p > 0");
    const double v = 1.0 - p * row_integral(p, x);
    if (!(v > 0.0 && v < 1.0))
        throw std::runtime_error("killing Laplace transform escaped (0,1): " +
                                 std::to_string(v));
    return v;
}

RebirthKernel::RebirthKernel(BaseProcess base, Measure mu, double p)
    : base_(std::move(base)), mu_(std::move(mu)), p_(p) {
    if (!(p_ > 0.0)) throw std::domain_error("rebirth kernel requires p > 0");
    if (std::abs(mu_.total_mass() - 1.0) > 1e-10)
        throw std::domain_error("full rebirth requires a probability measure");
    if (!mu_.supported_in([this](double x) { return base_.in_state_space(x); }))
        throw std::domain_error("mu must be supported in the state space");
    // |f|_1 = int row_integral(x) dmu(x), using the symmetry of u^p
    l1_norm_ = mu_.integrate([this](double x) { return base_.row_integral(p_, x); });
    if (!(l1_norm_ > 0.0)) throw std::runtime_error("rebirth kernel: |f|_1 vanishes");
}

double RebirthKernel::f(double y) const {
    return mu_.integrate([this, y](double x) { return base_.u_p(p_, x, y); });
}

double RebirthKernel::w(double x, double y) const {
    const double fy = f(y);
    switch (base_.case_id()) {
        case 1:
            // u^{beta+p}(x-y) + (beta/p) f(y); the row integral of the flat
            // case collapses the generic bracket to beta / (p (beta+p))
            return base_.u_p(p_, x, y) + (base_.beta() / p_) * fy;
        case 2: {
            const double q = base_.beta() + p_;
            const auto& lk = *base_.levy();
            const double bracket =
                (base_.beta() / p_ + lk.u_beta(q, x) / lk.u_beta(q, 0.0)) / q;
            return base_.u_p(p_, x, y) + bracket * fy / l1_norm_;
        }
        case 3: {
            const auto& lk = *base_.levy();
            const double bracket = lk.u_beta(p_, x) / (p_ * lk.u_beta(p_, 0.0));
            return base_.u_p(p_, x, y) + bracket * fy / l1_norm_;
        }
        default:
            return base_.u_p(p_, x, y) +
                   (1.0 / p_ - base_.row_integral(p_, x)) * fy / l1_norm_;
    }
}

double RebirthKernel::renewal_sum(double x) const {
    return base_.killing_laplace(p_, x) / (p_ * l1_norm_);
}

PartialRebirthKernel::PartialRebirthKernel(BaseProcess base, Measure nu)
    : base_(std::move(base)), nu_(std::move(nu)) {
    if (!(nu_.total_mass() > 0.0))
        throw std::domain_error("partial rebirth requires |nu| > 0");
    if (!nu_.supported_in([this](double x) { return base_.in_state_space(x); }))
        throw std::domain_error("nu must be supported in the state space");
}

double PartialRebirthKernel::f(double y) const {
    return nu_.integrate([this, y](double z) { return base_.u_0(z, y); });
}

double PartialRebirthKernel::u_tilde0(double x, double y) const {
    return base_.u_0(x, y) + f(y);
}

std::pair<double, double> cycle_weights_partial(double nu_mass, int i) {
    if (i < 1) throw std::domain_error("cycle index starts at 1");
    const double r = nu_mass / (1.0 + nu_mass);
    const double in_s = std::pow(r, i - 1);
    return {in_s, 1.0 - in_s};
}

}  // namespace rebirthlab
