#include "rebirthlab/diffusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rebirthlab/rng.hpp"

namespace rebirthlab {

namespace {
// 4-point Gauss-Legendre nodes/weights on [0,1]
constexpr double kGx[4] = {0.069431844202974, 0.330009478207572, 0.669990521792428,
                           0.930568155797026};
constexpr double kGw[4] = {0.173927422568727, 0.326072577431273, 0.326072577431273,
                           0.173927422568727};
}  // namespace

DiffusionSpec DiffusionSpec::brownian(double x_lo, double x_hi) {
    DiffusionSpec s;
    s.label_ = "bm";
    s.x_lo_ = x_lo;
    s.x_hi_ = x_hi;
    return s;
}

DiffusionSpec DiffusionSpec::brownian_drift(double drift, double x_lo, double x_hi) {
    DiffusionSpec s;
    s.label_ = "bm_drift";
    s.p0_ = drift;
    s.x_lo_ = x_lo;
    s.x_hi_ = x_hi;
    return s;
}

DiffusionSpec DiffusionSpec::ou(double theta, double x_lo, double x_hi) {
    DiffusionSpec s;
    s.label_ = "ou";
    s.p0_ = theta;
    s.x_lo_ = x_lo;
    s.x_hi_ = x_hi;
    return s;
}

DiffusionSpec DiffusionSpec::tabulated(std::vector<double> x, std::vector<double> a,
                                       std::vector<double> c) {
    if (x.size() < 2 || x.size() != a.size() || x.size() != c.size())
        throw std::domain_error("tabulated diffusion needs matching x/a/c samples");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1]))
            throw std::domain_error("tabulated diffusion grid must increase");
    for (double ai : a)
        if (ai == 0.0) throw std::domain_error("a(x) must not vanish");
    DiffusionSpec s;
    s.label_ = "tabulated";
    s.x_lo_ = x.front();
    s.x_hi_ = x.back();
    s.tab_x_ = std::move(x);
    s.tab_a_ = std::move(a);
    s.tab_c_ = std::move(c);
    return s;
}

namespace {
double lin_interp(const std::vector<double>& xs, const std::vector<double>& ys,
                  double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return ys[hi - 1] * (1.0 - t) + ys[hi] * t;
}
}  // namespace

double DiffusionSpec::a(double x) const {
    if (label_ == "tabulated") return lin_interp(tab_x_, tab_a_, x);
    return 1.0;
}

double DiffusionSpec::c(double x) const {
    if (label_ == "bm") return 0.0;
    if (label_ == "bm_drift") return p0_;
    if (label_ == "ou") return -p0_ * x;
    return lin_interp(tab_x_, tab_c_, x);
}

std::uint64_t DiffusionSpec::hash() const {
    std::uint64_t h = hash_label(label_);
    auto mix = [&h](double v) { h = derive_seed(h, std::bit_cast<std::uint64_t>(v)); };
    mix(p0_);
    mix(x_lo_);
    mix(x_hi_);
    for (std::size_t i = 0; i < tab_x_.size(); ++i) {
        mix(tab_x_[i]);
        mix(tab_a_[i]);
        mix(tab_c_[i]);
    }
    return h;
}

DiffusionKernels::DiffusionKernels(DiffusionSpec spec, int n_cells)
    : spec_(std::move(spec)) {
    const double lo = std::min(spec_.x_lo(), 0.0);
    const double hi = std::max(spec_.x_hi(), 0.0);
    if (!(hi > lo)) throw std::domain_error("empty diffusion domain");
    h_ = (hi - lo) / n_cells;
    nodes_.resize(static_cast<std::size_t>(n_cells) + 1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i] = lo + h_ * static_cast<double>(i);

    // g(x) = int_0^x 2c/a^2, accumulated per cell with GL4, then anchored so
    // g(0) = 0 exactly at the nearest node to 0 plus an in-cell correction.
    auto drift_term = [this](double x) {
        const double ax = spec_.a(x);
        return 2.0 * spec_.c(x) / (ax * ax);
    };
    g_nodes_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        double cell = 0.0;
        for (int j = 0; j < 4; ++j)
            cell += kGw[j] * drift_term(nodes_[i - 1] + h_ * kGx[j]);
        g_nodes_[i] = g_nodes_[i - 1] + h_ * cell;
    }
    // shift so that g(0) = 0
    double g0 = 0.0;
    {
        const std::size_t c = std::min(
            static_cast<std::size_t>(std::max(0.0, (0.0 - lo) / h_)), nodes_.size() - 2);
        double part = 0.0;
        const double w = 0.0 - nodes_[c];
        for (int j = 0; j < 4; ++j) part += kGw[j] * drift_term(nodes_[c] + w * kGx[j]);
        g0 = g_nodes_[c] + w * part;
    }
    for (auto& g : g_nodes_) g -= g0;

    s_nodes_.assign(nodes_.size(), 0.0);
    auto g_at = [this, drift_term](double x) {
        const std::size_t c = std::min(
            static_cast<std::size_t>(std::max(0.0, (x - nodes_.front()) / h_)),
            nodes_.size() - 2);
        double part = 0.0;
        const double w = x - nodes_[c];
        for (int j = 0; j < 4; ++j) part += kGw[j] * drift_term(nodes_[c] + w * kGx[j]);
        return g_nodes_[c] + w * part;
    };
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        double cell = 0.0;
        for (int j = 0; j < 4; ++j)
            cell += kGw[j] * std::exp(-g_at(nodes_[i - 1] + h_ * kGx[j]));
        s_nodes_[i] = s_nodes_[i - 1] + h_ * cell;
    }
    double s0 = 0.0;
    {
        const std::size_t c = std::min(
            static_cast<std::size_t>(std::max(0.0, (0.0 - lo) / h_)), nodes_.size() - 2);
        double part = 0.0;
        const double w = 0.0 - nodes_[c];
        for (int j = 0; j < 4; ++j)
            part += kGw[j] * std::exp(-g_at(nodes_[c] + w * kGx[j]));
        s0 = s_nodes_[c] + w * part;
    }
    for (auto& s : s_nodes_) s -= s0;
}

void DiffusionKernels::require_inside(double x) const {
    if (x < nodes_.front() - 1e-12 || x > nodes_.back() + 1e-12)
        throw std::domain_error("point outside the diffusion working interval");
}

double DiffusionKernels::scale_derivative(double x) const {
    require_inside(x);
    const std::size_t c = std::min(
        static_cast<std::size_t>(std::max(0.0, (x - nodes_.front()) / h_)),
        nodes_.size() - 2);
    auto drift_term = [this](double u) {
        const double au = spec_.a(u);
        return 2.0 * spec_.c(u) / (au * au);
    };
    double part = 0.0;
    const double w = x - nodes_[c];
    for (int j = 0; j < 4; ++j) part += kGw[j] * drift_term(nodes_[c] + w * kGx[j]);
    return std::exp(-(g_nodes_[c] + w * part));
}

double DiffusionKernels::scale(double x) const {
    require_inside(x);
    const std::size_t c = std::min(
        static_cast<std::size_t>(std::max(0.0, (x - nodes_.front()) / h_)),
        nodes_.size() - 2);
    // in-cell GL4 of s' from the left node
    const double w = x - nodes_[c];
    double part = 0.0;
    for (int j = 0; j < 4; ++j)
        part += kGw[j] * scale_derivative(nodes_[c] + w * kGx[j]);
    return s_nodes_[c] + w * part;
}

double DiffusionKernels::speed_density(double x) const {
    const double ax = spec_.a(x);
    return 2.0 / (ax * ax * scale_derivative(x));
}

double DiffusionKernels::frak_u0(double x, double y) const {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::domain_error("frak_u0 requires x, y > 0");
    return std::min(scale(x), scale(y));
}

KernelFactors DiffusionKernels::solve_factors(double beta) const {
    if (!(beta > 0.0)) throw std::domain_error("solve_factors requires beta > 0");
    KernelFactors kf;
    kf.beta_ = beta;
    kf.grid_ = nodes_;
    const std::size_t n = nodes_.size();
    kf.p_.assign(n, 0.0);
    kf.q_.assign(n, 0.0);
    kf.dp_.assign(n, 0.0);
    kf.dq_.assign(n, 0.0);

    auto rhs = [this, beta](double x, double u, double w, double& du, double& dw) {
        const double ax = spec_.a(x);
        du = w;
        dw = (2.0 / (ax * ax)) * (beta * u - spec_.c(x) * w);
    };
    auto rk4 = [&rhs](double x, double hstep, double& u, double& w) {
        double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
        rhs(x, u, w, k1u, k1w);
        rhs(x + 0.5 * hstep, u + 0.5 * hstep * k1u, w + 0.5 * hstep * k1w, k2u, k2w);
        rhs(x + 0.5 * hstep, u + 0.5 * hstep * k2u, w + 0.5 * hstep * k2w, k3u, k3w);
        rhs(x + hstep, u + hstep * k3u, w + hstep * k3w, k4u, k4w);
        u += hstep / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        w += hstep / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    };
    // characteristic roots of (1/2) a^2 r^2 + c r - beta = 0; the positive one
    // seeds the increasing solution, the negative one the decreasing solution
    auto root = [this, beta](double x, int sign) {
        const double a2 = spec_.a(x) * spec_.a(x);
        const double cx = spec_.c(x);
        return (-cx + sign * std::sqrt(cx * cx + 2.0 * beta * a2)) / a2;
    };

    const int sub = 4;  // RK4 substeps per cell
    const double hs = h_ / sub;
    {
        double u = 1.0, w = root(nodes_.front(), +1);
        kf.p_[0] = u;
        kf.dp_[0] = w;
        for (std::size_t i = 1; i < n; ++i) {
            double x = nodes_[i - 1];
            for (int s = 0; s < sub; ++s, x += hs) rk4(x, hs, u, w);
            if (!std::isfinite(u) || std::abs(u) > 1e250)
                throw SolverError("increasing factor overflowed; shrink the domain or beta");
            kf.p_[i] = u;
            kf.dp_[i] = w;
        }
    }
    {
        double u = 1.0, w = root(nodes_.back(), -1);
        kf.q_[n - 1] = u;
        kf.dq_[n - 1] = w;
        for (std::size_t i = n - 1; i-- > 0;) {
            double x = nodes_[i + 1];
            for (int s = 0; s < sub; ++s, x -= hs) rk4(x, -hs, u, w);
            if (!std::isfinite(u) || std::abs(u) > 1e250)
                throw SolverError("decreasing factor overflowed; shrink the domain or beta");
            kf.q_[i] = u;
            kf.dq_[i] = w;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(kf.dp_[i] > 0.0) || !(kf.dq_[i] < 0.0) || !(kf.p_[i] > 0.0) ||
            !(kf.q_[i] > 0.0))
            throw SolverError("factor monotonicity lost at grid index " + std::to_string(i));
    }

    // rescale the pair so q p' - p q' = s'
    std::vector<double> ratio(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = kf.q_[i] * kf.dp_[i] - kf.p_[i] * kf.dq_[i];
        ratio[i] = w / scale_derivative(nodes_[i]);
    }
    std::vector<double> sorted = ratio;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double cw = sorted[n / 2];
    if (!(cw > 0.0)) throw SolverError("nonpositive Wronskian");
    double worst = 0.0;
    for (double r : ratio) worst = std::max(worst, std::abs(r - cw) / cw);
    kf.wronskian_rel_variation_ = worst;
    const double scale_factor = 1.0 / std::sqrt(cw);
    for (std::size_t i = 0; i < n; ++i) {
        kf.p_[i] *= scale_factor;
        kf.dp_[i] *= scale_factor;
        kf.q_[i] *= scale_factor;
        kf.dq_[i] *= scale_factor;
    }

    // cumulative integrals of p m' and q m' for O(1) row integrals
    kf.cum_pm_.assign(n, 0.0);
    kf.cum_qm_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double xm = 0.5 * (nodes_[i - 1] + nodes_[i]);
        const double mm = speed_density(xm);
        const double pm = 0.5 * (kf.p_[i - 1] + kf.p_[i]) * mm;
        const double qm = 0.5 * (kf.q_[i - 1] + kf.q_[i]) * mm;
        kf.cum_pm_[i] = kf.cum_pm_[i - 1] + h_ * pm;
        kf.cum_qm_[i] = kf.cum_qm_[i - 1] + h_ * qm;
    }
    return kf;
}

std::size_t KernelFactors::cell(double x) const {
    if (x < grid_.front() - 1e-12 || x > grid_.back() + 1e-12)
        throw std::domain_error("point outside factor grid");
    const double h = grid_[1] - grid_[0];
    return std::min(static_cast<std::size_t>(std::max(0.0, (x - grid_.front()) / h)),
                    grid_.size() - 2);
}

double KernelFactors::hermite(const std::vector<double>& v,
                              const std::vector<double>& d, double x) const {
    const std::size_t i = cell(x);
    const double h = grid_[i + 1] - grid_[i];
    const double t = (x - grid_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return v[i] * (2 * t3 - 3 * t2 + 1) + d[i] * h * (t3 - 2 * t2 + t) +
           v[i + 1] * (-2 * t3 + 3 * t2) + d[i + 1] * h * (t3 - t2);
}

double KernelFactors::hermite_deriv(const std::vector<double>& v,
                                    const std::vector<double>& d, double x) const {
    const std::size_t i = cell(x);
    const double h = grid_[i + 1] - grid_[i];
    const double t = (x - grid_[i]) / h;
    return (v[i] * (6 * t * t - 6 * t) / h + d[i] * (3 * t * t - 4 * t + 1) +
            v[i + 1] * (6 * t - 6 * t * t) / h + d[i + 1] * (3 * t * t - 2 * t));
}

double KernelFactors::p(double x) const { return hermite(p_, dp_, x); }
double KernelFactors::q(double x) const { return hermite(q_, dq_, x); }
double KernelFactors::p_prime(double x) const { return hermite_deriv(p_, dp_, x); }
double KernelFactors::q_prime(double x) const { return hermite_deriv(q_, dq_, x); }

double KernelFactors::u_bar(double x, double y) const {
    const double lo = std::min(x, y), hi = std::max(x, y);
    return p(lo) * q(hi);
}

double KernelFactors::v_bar(double x, double y) const {
    const double u00 = u_bar(0.0, 0.0);
    if (!(u00 > 0.0)) throw SolverError("degenerate kernel: u_bar(0,0) is not positive");
    return u_bar(x, y) - u_bar(x, 0.0) * u_bar(0.0, y) / u00;
}

namespace {
double cum_at(const std::vector<double>& grid, const std::vector<double>& cum,
              double x) {
    const double h = grid[1] - grid[0];
    const std::size_t i = std::min(
        static_cast<std::size_t>(std::max(0.0, (x - grid.front()) / h)), grid.size() - 2);
    const double t = (x - grid[i]) / h;
    return cum[i] * (1.0 - t) + cum[i + 1] * t;
}
}  // namespace

double KernelFactors::u_bar_row_integral(double x) const {
    // q(x) int_{lo}^{x} p m' + p(x) int_{x}^{hi} q m'
    const double px = p(x), qx = q(x);
    const double left = cum_at(grid_, cum_pm_, x);
    const double right = cum_qm_.back() - cum_at(grid_, cum_qm_, x);
    return qx * left + px * right;
}

double KernelFactors::v_bar_row_integral(double x) const {
    // subtract the rank-one part: u_bar(x,0)/u_bar(0,0) * int u_bar(0,z) dm(z)
    const double u00 = u_bar(0.0, 0.0);
    return u_bar_row_integral(x) - u_bar(x, 0.0) * u_bar_row_integral(0.0) / u00;
}

double KernelFactors::u_bar_row_integral_from_zero(double x) const {
    if (!(x >= 0.0)) throw std::domain_error("half-line row integral needs x >= 0");
    const double px = p(x), qx = q(x);
    const double zero_mark = cum_at(grid_, cum_pm_, 0.0);
    const double left = cum_at(grid_, cum_pm_, x) - zero_mark;
    const double right = cum_qm_.back() - cum_at(grid_, cum_qm_, x);
    return qx * left + px * right;
}

double KernelFactors::v_bar_row_integral_from_zero(double x) const {
    const double u00 = u_bar(0.0, 0.0);
    return u_bar_row_integral_from_zero(x) -
           u_bar(x, 0.0) * u_bar_row_integral_from_zero(0.0) / u00;
}

double KernelFactors::row_integral_tail_fraction(double x) const {
    const double total = u_bar_row_integral(x);
    const double span = grid_.back() - grid_.front();
    const double lo_edge = grid_.front() + 0.1 * span;
    const double hi_edge = grid_.back() - 0.1 * span;
    // contribution of the outer 10% of the domain on each side
    double outer = 0.0;
    if (x > lo_edge) outer += q(x) * cum_at(grid_, cum_pm_, lo_edge);
    if (x < hi_edge) outer += p(x) * (cum_qm_.back() - cum_at(grid_, cum_qm_, hi_edge));
    return std::abs(total) > 0.0 ? outer / total : 0.0;
}

}  // namespace rebirthlab
