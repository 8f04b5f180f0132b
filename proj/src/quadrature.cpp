#include "rebirthlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace rebirthlab {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (Kronrod abscissae, Gauss subset
// at the odd positions).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEval {
    double kronrod;
    double err;
};

PanelEval gk15(const Integrand& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        result_k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += kWg[j / 2] * (f1 + f2);
    }
    result_g *= h;
    result_k *= h;
    return {result_k, std::abs(result_k - result_g)};
}

}  // namespace

// Globally adaptive: always bisect the panel with the largest error estimate
// until the total is within tolerance or the panel budget runs out.
QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const QuadratureOptions& opts) {
    if (a == b) return {0.0, 0.0};
    struct Panel {
        double a, b, value, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto make_panel = [&f](double lo, double hi) {
        const PanelEval p = gk15(f, lo, hi);
        return Panel{lo, hi, p.kronrod, p.err};
    };
    std::priority_queue<Panel> heap;
    Panel first = make_panel(a, b);
    double total = first.value, err = first.err;
    heap.push(first);
    const int budget = 4096;
    double best_err = err;
    int stalled = 0;
    for (int n = 1; n < budget; ++n) {
        if (err <= std::max(opts.rel_tol * std::max(std::abs(total), opts.abs_floor),
                            opts.abs_tol))
            break;
        // near convergence the error-estimate sum plateaus at roundoff;
        // stop pushing once refinement no longer helps there
        if (err < 0.98 * best_err) {
            best_err = err;
            stalled = 0;
        } else if (err <= 1e-6 * std::max(std::abs(total), opts.abs_floor) &&
                   ++stalled >= 6) {
            break;
        }
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) continue;  // at float resolution
        const Panel left = make_panel(worst.a, mid);
        const Panel right = make_panel(mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    return {total, std::abs(err)};
}

double tail_cutoff(const Integrand& f, double decay_index, double bound) {
    double L = 1.0;
    for (int i = 0; i < 1200; ++i) {
        const double est = 2.0 * L * std::abs(f(L)) / (decay_index - 1.0);
        if (est <= bound) return L;
        L *= 2.0;
    }
    throw QuadratureError("tail_cutoff: truncation bound not reachable", 0.0, bound);
}

QuadratureResult integrate_tail(const Integrand& f, double a, double decay_index,
                                const QuadratureOptions& opts) {
    if (decay_index <= 1.0)
        throw QuadratureError("integrate_tail: decay index must exceed 1", 0.0, 0.0);
    // blocks [a e^j, a e^{j+1}]; integrand in v decays like e^{-(idx-1) v}
    auto g = [&](double v) {
        const double lam = a * std::exp(v);
        return f(lam) * lam;
    };
    double sum = 0.0, err = 0.0;
    const int max_blocks = 800;
    for (int j = 0; j < max_blocks; ++j) {
        const QuadratureResult blk =
            integrate_adaptive(g, static_cast<double>(j), static_cast<double>(j + 1), opts);
        sum += blk.value;
        err += blk.error_estimate;
        const double remaining =
            std::abs(blk.value) / std::max(1.0 - std::exp(-(decay_index - 1.0)), 1e-3);
        if (remaining <= opts.rel_tol * std::max(std::abs(sum), opts.abs_floor) ||
            std::abs(blk.value) < opts.abs_floor) {
            err += remaining;
            return {sum, err};
        }
    }
    throw QuadratureError("integrate_tail: no convergence within block budget", sum, err);
}

namespace {

// Sum of alternating-ish panel integrals t[0], t[1], ... by repeated pairwise
// averaging of the partial sums (van Wijngaarden / Euler transformation).
double accelerate_alternating(const std::vector<double>& t, double& err_out) {
    std::vector<double> s(t.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        acc += t[i];
        s[i] = acc;
    }
    double prev = s.back();
    err_out = 0.0;
    while (s.size() > 1) {
        for (std::size_t i = 0; i + 1 < s.size(); ++i) s[i] = 0.5 * (s[i] + s[i + 1]);
        s.pop_back();
        err_out = std::abs(s.back() - prev);
        prev = s.back();
    }
    return s[0];
}

// Accumulates half-period panel integrals; panels beyond a sliding window are
// summed directly, the window is accelerated. The accuracy of the alternating
// sum is limited by roundoff on the panel scale, which is what the roundoff
// floor in `converged` accounts for when the integral itself cancels to
// (nearly) zero.
class OscillatoryTail {
public:
    void push(double t) {
        last_ = t;
        scale_ = std::max(scale_, std::abs(t));
        window_.push_back(t);
        if (window_.size() > kWindow) {
            direct_ += window_.front();
            window_.erase(window_.begin());
        }
    }
    double evaluate(double& err) const {
        if (window_.empty()) {
            err = 0.0;
            return direct_;
        }
        double aerr = 0.0;
        const double v = accelerate_alternating(window_, aerr);
        err = aerr;
        return direct_ + v;
    }
    bool converged(double accel_err, double result_scale, double rel_tol,
                   double abs_floor, double panel_noise) const {
        if (accel_err <= rel_tol * result_scale) return true;
        // the acceleration cannot resolve below the panel evaluation noise or
        // the roundoff of the panel scale
        if (accel_err <= std::max(4.0 * panel_noise,
                                  64.0 * std::numeric_limits<double>::epsilon() * scale_))
            return true;
        return std::abs(last_) < abs_floor;
    }
    double panel_scale() const { return scale_; }

private:
    static constexpr std::size_t kWindow = 48;
    std::vector<double> window_;
    double direct_ = 0.0;
    double scale_ = 0.0;
    double last_ = 0.0;
};

}  // namespace

QuadratureResult cos_integral(const Integrand& f, double omega, double decay_index,
                              const QuadratureOptions& opts) {
    using std::numbers::pi;
    if (omega == 0.0) {
        const double L = opts.cutoff > 0.0
                             ? opts.cutoff
                             : tail_cutoff(f, decay_index, opts.rel_tol * 0.1);
        const QuadratureResult head = integrate_adaptive(f, 0.0, L, opts);
        const QuadratureResult tail = integrate_tail(f, L, decay_index, opts);
        return {head.value + tail.value, head.error_estimate + tail.error_estimate};
    }

    auto g = [&](double x) { return std::cos(omega * x) * f(x); };
    const double half = pi / omega;

    // a handful of leading half-period panels summed directly
    const int direct = 8;
    double sum = 0.0, err = 0.0;
    QuadratureOptions popts = opts;
    double panel_scale = 0.0;
    for (int k = 0; k < direct; ++k) {
        const QuadratureResult p =
            integrate_adaptive(g, k * half, (k + 1) * half, popts);
        sum += p.value;
        err += p.error_estimate;
        panel_scale = std::max(panel_scale, std::abs(p.value));
        // per-panel absolute target for the remaining panels, so the heap does
        // not chase a relative tolerance inside cancelling slices
        popts.abs_tol = opts.rel_tol * panel_scale;
    }

    // alternating tail in acceleration blocks
    OscillatoryTail tail;
    int k = direct;
    double accel_value = 0.0, accel_err = 0.0;
    while (true) {
        for (int j = 0; j < opts.accel_block; ++j, ++k) {
            const QuadratureResult p =
                integrate_adaptive(g, k * half, (k + 1) * half, popts);
            tail.push(p.value);
            err += p.error_estimate;
        }
        accel_value = tail.evaluate(accel_err);
        const double scale = std::max(std::abs(sum + accel_value), opts.abs_floor);
        const double noise = err / std::max(k, 1);
        if (tail.converged(accel_err, scale, opts.rel_tol, opts.abs_floor, noise)) break;
        if (k >= opts.max_panels)
            throw QuadratureError("cos_integral: oscillatory tail did not converge",
                                  sum + accel_value, accel_err);
    }
    return {sum + accel_value, err + accel_err};
}

QuadratureResult one_minus_cos_integral(const Integrand& f, double omega,
                                        double decay_index,
                                        const QuadratureOptions& opts) {
    using std::numbers::pi;
    if (omega == 0.0) return {0.0, 0.0};
    const double w = std::abs(omega);
    const double a = pi / w;

    // head: no cancellation, integrand vanishes quadratically at 0
    auto g = [&](double x) { return (1.0 - std::cos(w * x)) * f(x); };
    const QuadratureResult head = integrate_adaptive(g, 0.0, a, opts);

    // beyond the first half period: a monotone part plus an oscillatory part
    const QuadratureResult probe = integrate_adaptive(f, a, 2.0 * a, opts);
    const double scale0 =
        std::max(std::abs(head.value) + std::abs(probe.value), opts.abs_floor);
    double L = opts.cutoff > 0.0
                   ? opts.cutoff
                   : tail_cutoff(f, decay_index, 0.1 * opts.rel_tol * scale0);
    L = std::max(L, 2.0 * a);
    const QuadratureResult dc_head = integrate_adaptive(f, a, L, opts);
    const QuadratureResult dc_tail = integrate_tail(f, L, decay_index, opts);

    auto gc = [&](double x) { return std::cos(w * x) * f(x); };
    // oscillatory part on [a, infinity): panels are half periods starting at a
    double err = 0.0;
    OscillatoryTail tail;
    QuadratureOptions popts = opts;
    int k = 1;  // panel index in units of half periods
    double accel_value = 0.0, accel_err = 0.0;
    while (true) {
        for (int j = 0; j < opts.accel_block; ++j, ++k) {
            const QuadratureResult p = integrate_adaptive(gc, k * a, (k + 1) * a, popts);
            tail.push(p.value);
            err += p.error_estimate;
            popts.abs_tol = opts.rel_tol * tail.panel_scale();
        }
        accel_value = tail.evaluate(accel_err);
        const double scale =
            std::max(std::abs(head.value + dc_head.value + dc_tail.value), opts.abs_floor);
        const double noise = err / std::max(k, 1);
        if (tail.converged(accel_err, scale, opts.rel_tol, opts.abs_floor, noise)) break;
        if (k >= opts.max_panels)
            throw QuadratureError("one_minus_cos_integral: tail did not converge",
                                  head.value + dc_head.value + dc_tail.value - accel_value,
                                  accel_err);
    }

    const double value = head.value + dc_head.value + dc_tail.value - accel_value;
    const double error = head.error_estimate + dc_head.error_estimate +
                         dc_tail.error_estimate + err + accel_err;
    return {value, error};
}

}  // namespace rebirthlab
