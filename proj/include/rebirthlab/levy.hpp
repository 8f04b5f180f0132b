#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "rebirthlab/quadrature.hpp"

namespace rebirthlab {

// Symmetric characteristic exponent psi. Either a parametric stable family
// psi(l) = scale * |l|^alpha, or a tabulated regularly varying function with
// log-log interpolation inside the table and power-law continuation of index
// rv_index beyond it.
class LevyExponent {
public:
    static LevyExponent stable(double alpha, double scale = 1.0);
    // psi(l) = l^2 / 2, the exponent of standard Brownian motion
    static LevyExponent brownian() { return stable(2.0, 0.5); }
    static LevyExponent tabulated(std::vector<double> lambda_grid,
                                  std::vector<double> psi_values, double rv_index);

    double operator()(double lambda) const;
    double rv_index() const { return rv_index_; }
    bool is_stable() const { return tabulated_lambda_.empty(); }
    double stable_alpha() const { return alpha_; }
    double stable_scale() const { return scale_; }
    std::uint64_t hash() const;

private:
    LevyExponent() = default;
    double alpha_ = 0.0, scale_ = 0.0;
    std::vector<double> tabulated_lambda_, tabulated_psi_;
    std::vector<double> log_lambda_, log_psi_;
    double rv_index_ = 0.0;
};

enum class LevyKernelId { UBeta, VBeta, FrakU0, Sigma2Beta, Sigma2Zero, Phi };

// Potential-density and increment-variance kernels of a symmetric Levy
// process, by quadrature of the oscillatory Fourier representations.
// Evaluations are pure and memoized; safe for concurrent use.
class LevyKernels {
public:
    explicit LevyKernels(LevyExponent psi, QuadratureOptions opts = {});

    // (1/2pi) integral of cos(l x) / (beta + psi(l)) over the line
    double u_beta(double beta, double x) const;
    // (1/2pi) integral of (1 - cos(l x)) / psi(l) over the line
    double phi0(double x) const;
    // phi(x) + phi(y) - phi(x - y); potential of the walk killed at 0
    double frak_u0(double x, double y) const;
    // (1/pi) integral of (1 - cos(l x)) / (beta + psi(l)); beta = 0 gives 2 phi
    double sigma2(double beta, double x) const;
    // u^beta(x - y) - u^beta(x) u^beta(y) / u^beta(0)
    double v_beta(double beta, double x, double y) const;

    // integral of u^beta(z) dz over the whole line, evaluated from the kernel
    // itself (no closed-form shortcut); used by the recurrence identities.
    double u_row_integral(double beta) const;

    // integral of (1 ^ l^2) / psi(l) dl; finiteness is the precondition for the
    // stationary-increment modulus statements.
    double spectral_integral() const;

    const LevyExponent& exponent() const { return psi_; }
    const QuadratureOptions& options() const { return opts_; }

    static double c_r(double r);

private:
    double cached(int tag, double beta, double x,
                  const std::function<double()>& compute) const;
    double check(const QuadratureResult& r) const;

    LevyExponent psi_;
    QuadratureOptions opts_;
    struct Key {
        int tag;
        std::uint64_t beta_bits, x_bits;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };
    mutable std::unordered_map<Key, double, KeyHash> cache_;
    mutable std::shared_mutex cache_mutex_;
};

}  // namespace rebirthlab
