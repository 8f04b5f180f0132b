#include "rebirthlab/levy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "rebirthlab/rng.hpp"

namespace rebirthlab {

LevyExponent LevyExponent::stable(double alpha, double scale) {
    if (!(alpha > 1.0 && alpha <= 2.0))
        throw std::domain_error("stable exponent requires alpha in (1, 2]");
    if (!(scale > 0.0)) throw std::domain_error("stable exponent requires scale > 0");
    LevyExponent e;
    e.alpha_ = alpha;
    e.scale_ = scale;
    e.rv_index_ = alpha;
    return e;
}

LevyExponent LevyExponent::tabulated(std::vector<double> lambda_grid,
                                     std::vector<double> psi_values,
                                     double rv_index) {
    if (lambda_grid.size() != psi_values.size() || lambda_grid.size() < 2)
        throw std::domain_error("tabulated exponent needs >= 2 matching samples");
    if (!(rv_index > 1.0 && rv_index <= 2.0))
        throw std::domain_error("tabulated exponent requires rv_index in (1, 2]");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0)) throw std::domain_error("lambda grid must be positive");
        if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
            throw std::domain_error("lambda grid must be strictly increasing");
        if (!(psi_values[i] > 0.0)) throw std::domain_error("psi values must be positive");
    }
    LevyExponent e;
    e.tabulated_lambda_ = std::move(lambda_grid);
    e.tabulated_psi_ = std::move(psi_values);
    e.rv_index_ = rv_index;
    e.log_lambda_.reserve(e.tabulated_lambda_.size());
    e.log_psi_.reserve(e.tabulated_psi_.size());
    for (double l : e.tabulated_lambda_) e.log_lambda_.push_back(std::log(l));
    for (double p : e.tabulated_psi_) e.log_psi_.push_back(std::log(p));
    return e;
}

double LevyExponent::operator()(double lambda) const {
    const double l = std::abs(lambda);
    if (l == 0.0) return 0.0;
    if (is_stable()) return scale_ * std::pow(l, alpha_);
    if (l <= tabulated_lambda_.front())
        return tabulated_psi_.front() *
               std::pow(l / tabulated_lambda_.front(), rv_index_);
    if (l >= tabulated_lambda_.back())
        return tabulated_psi_.back() * std::pow(l / tabulated_lambda_.back(), rv_index_);
    const double ll = std::log(l);
    const auto it = std::upper_bound(log_lambda_.begin(), log_lambda_.end(), ll);
    const std::size_t hi = static_cast<std::size_t>(it - log_lambda_.begin());
    const std::size_t lo = hi - 1;
    const double t = (ll - log_lambda_[lo]) / (log_lambda_[hi] - log_lambda_[lo]);
    return std::exp(log_psi_[lo] * (1.0 - t) + log_psi_[hi] * t);
}

std::uint64_t LevyExponent::hash() const {
    std::uint64_t h = hash_label(is_stable() ? "stable" : "tabulated");
    auto mix = [&h](double v) { h = derive_seed(h, std::bit_cast<std::uint64_t>(v)); };
    mix(rv_index_);
    if (is_stable()) {
        mix(alpha_);
        mix(scale_);
    } else {
        for (std::size_t i = 0; i < tabulated_lambda_.size(); ++i) {
            mix(tabulated_lambda_[i]);
            mix(tabulated_psi_[i]);
        }
    }
    return h;
}

LevyKernels::LevyKernels(LevyExponent psi, QuadratureOptions opts)
    : psi_(std::move(psi)), opts_(opts) {}

std::size_t LevyKernels::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = derive_seed(0x5bf03a7c91e2d14bULL,
                                  static_cast<std::uint64_t>(k.tag), k.beta_bits, k.x_bits);
    return static_cast<std::size_t>(h);
}

double LevyKernels::cached(int tag, double beta, double x,
                           const std::function<double()>& compute) const {
    const Key key{tag, std::bit_cast<std::uint64_t>(beta),
                  std::bit_cast<std::uint64_t>(std::abs(x))};
    {
        std::shared_lock lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const double value = compute();
    {
        std::unique_lock lock(cache_mutex_);
        cache_.emplace(key, value);
    }
    return value;
}

double LevyKernels::check(const QuadratureResult& r) const {
    // relative budget for values of ordinary size, absolute cap for the
    // exponentially small far-tail evaluations
    const double budget =
        std::max(100.0 * opts_.rel_tol * std::abs(r.value), 1e-9);
    if (!(r.error_estimate <= budget))
        throw QuadratureError("kernel quadrature exceeded tolerance", r.value,
                              r.error_estimate);
    return r.value;
}

double LevyKernels::u_beta(double beta, double x) const {
    if (!(beta > 0.0)) throw std::domain_error("u_beta requires beta > 0");
    return cached(0, beta, x, [&] {
        auto f = [this, beta](double l) { return 1.0 / (beta + psi_(l)); };
        const auto r = cos_integral(f, std::abs(x), psi_.rv_index(), opts_);
        return check(r) / std::numbers::pi;
    });
}

double LevyKernels::phi0(double x) const {
    if (x == 0.0) return 0.0;
    return cached(1, 0.0, x, [&] {
        auto f = [this](double l) { return 1.0 / psi_(l); };
        const auto r = one_minus_cos_integral(f, std::abs(x), psi_.rv_index(), opts_);
        return check(r) / std::numbers::pi;
    });
}

double LevyKernels::frak_u0(double x, double y) const {
    if (x == 0.0 || y == 0.0)
        throw std::domain_error("frak_u0 is defined on the punctured line");
    return phi0(x) + phi0(y) - phi0(x - y);
}

double LevyKernels::sigma2(double beta, double x) const {
    if (beta < 0.0) throw std::domain_error("sigma2 requires beta >= 0");
    if (x == 0.0) return 0.0;
    return cached(2, beta, x, [&] {
        auto f = [this, beta](double l) { return 1.0 / (beta + psi_(l)); };
        const auto r = one_minus_cos_integral(f, std::abs(x), psi_.rv_index(), opts_);
        return 2.0 * check(r) / std::numbers::pi;
    });
}

double LevyKernels::v_beta(double beta, double x, double y) const {
    return u_beta(beta, x - y) - u_beta(beta, x) * u_beta(beta, y) / u_beta(beta, 0.0);
}

double LevyKernels::u_row_integral(double beta) const {
    return cached(3, beta, 0.0, [&] {
        auto f = [this, beta](double z) { return u_beta(beta, z); };
        // u^beta decays with index rv_index + 1 (exponentially in the Brownian
        // case); both are handled by the power-law block tail.
        QuadratureOptions o = opts_;
        o.rel_tol = std::max(opts_.rel_tol, 1e-7);
        const auto head = integrate_adaptive(f, 0.0, 8.0, o);
        const auto tail = integrate_tail(f, 8.0, psi_.rv_index() + 1.0, o);
        return 2.0 * (head.value + tail.value);
    });
}

double LevyKernels::spectral_integral() const {
    auto f_head = [this](double l) { return l * l / psi_(l); };
    auto f_tail = [this](double l) { return 1.0 / psi_(l); };
    const auto head = integrate_adaptive(f_head, 0.0, 1.0, opts_);
    const auto mid = integrate_adaptive(f_tail, 1.0, 64.0, opts_);
    const auto tail = integrate_tail(f_tail, 64.0, psi_.rv_index(), opts_);
    return 2.0 * (head.value + mid.value + tail.value);
}

double LevyKernels::c_r(double r) {
    if (!(r > 1.0 && r <= 2.0)) throw std::domain_error("c_r requires r in (1, 2]");
    QuadratureOptions opts;
    opts.rel_tol = 1e-10;
    auto f = [r](double s) { return std::pow(s, -r); };
    const auto q = one_minus_cos_integral(f, 1.0, r, opts);
    return 2.0 * q.value / std::numbers::pi;
}

}  // namespace rebirthlab
