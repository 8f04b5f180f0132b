#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace rebirthlab {

struct QuadratureOptions {
    double rel_tol = 1e-9;   // requested relative accuracy of the full integral
    double abs_tol = 0.0;    // additional absolute target (0 = relative only)
    double abs_floor = 1e-300; // below this the target is treated as zero
    int max_panels = 20000;  // budget of oscillatory half-period panels
    int accel_block = 24;    // panels fed to one acceleration pass
    double cutoff = 0.0;     // explicit tail cutoff; 0 = derive from decay index
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double value, double achieved_error)
        : std::runtime_error(what), value(value), achieved_error(achieved_error) {}
    double value;
    double achieved_error;
};

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod 7-15 on [a,b].
QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const QuadratureOptions& opts);

// Integral of f over [a, infinity) for f with eventual power-law decay of
// index > 1. Exponential substitution in blocks, stopping once a block is
// negligible against the accumulated value.
QuadratureResult integrate_tail(const Integrand& f, double a, double decay_index,
                                const QuadratureOptions& opts);

// Smallest cutoff L (by doubling) with 2 L f(L) / (decay_index - 1) below the
// bound; this is the standard truncation estimate for a regularly varying
// integrand of index -decay_index.
double tail_cutoff(const Integrand& f, double decay_index, double bound);

// integral over [0, infinity) of cos(omega x) f(x); f smooth, integrable,
// eventually monotone. Half-period panels, alternating tail accelerated by
// repeated averaging.
QuadratureResult cos_integral(const Integrand& f, double omega, double decay_index,
                              const QuadratureOptions& opts);

// integral over [0, infinity) of (1 - cos(omega x)) f(x); f may blow up at 0
// as long as x^2 f(x) stays integrable there.
QuadratureResult one_minus_cos_integral(const Integrand& f, double omega,
                                        double decay_index,
                                        const QuadratureOptions& opts);

}  // namespace rebirthlab
