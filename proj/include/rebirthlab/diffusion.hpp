#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace rebirthlab {

// Coefficients of the generator (1/2) a^2(x) d^2/dx^2 + c(x) d/dx on a bounded
// working interval. Presets cover the configuration surface; tabulated
// coefficients are interpolated linearly.
class DiffusionSpec {
public:
    static DiffusionSpec brownian(double x_lo = -8.0, double x_hi = 8.0);
    static DiffusionSpec brownian_drift(double drift, double x_lo = -8.0,
                                        double x_hi = 8.0);
    static DiffusionSpec ou(double theta, double x_lo = -8.0, double x_hi = 8.0);
    static DiffusionSpec tabulated(std::vector<double> x, std::vector<double> a,
                                   std::vector<double> c);

    double a(double x) const;
    double c(double x) const;
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    const std::string& label() const { return label_; }
    std::uint64_t hash() const;

private:
    DiffusionSpec() = default;
    std::string label_;
    double p0_ = 0.0;  // drift / theta parameter of the preset
    double x_lo_ = 0.0, x_hi_ = 0.0;
    std::vector<double> tab_x_, tab_a_, tab_c_;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Increasing/decreasing solutions of (1/2) a^2 u'' + c u' = beta u, scaled so
// the Wronskian q p' - p q' equals s'. Immutable once solved.
class KernelFactors {
public:
    double beta() const { return beta_; }
    double p(double x) const;
    double q(double x) const;
    double p_prime(double x) const;
    double q_prime(double x) const;

    // p(x ^ y) q(x v y)
    double u_bar(double x, double y) const;
    // u_bar(x,y) - u_bar(x,0) u_bar(0,y) / u_bar(0,0)
    double v_bar(double x, double y) const;
    // integral of u_bar(x, z) dm(z) over the working interval, with the
    // fraction contributed by the outer decade of the domain as a convergence
    // diagnostic.
    double u_bar_row_integral(double x) const;
    double v_bar_row_integral(double x) const;
    // same integrals restricted to z > 0, for the half-line cases
    double u_bar_row_integral_from_zero(double x) const;
    double v_bar_row_integral_from_zero(double x) const;
    double row_integral_tail_fraction(double x) const;

    double wronskian_rel_variation() const { return wronskian_rel_variation_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& p_values() const { return p_; }
    const std::vector<double>& q_values() const { return q_; }

private:
    friend class DiffusionKernels;
    double beta_ = 0.0;
    std::vector<double> grid_, p_, q_, dp_, dq_;
    std::vector<double> cum_pm_, cum_qm_;  // cumulative p m', q m'
    double wronskian_rel_variation_ = 0.0;
    double hermite(const std::vector<double>& v, const std::vector<double>& d,
                   double x) const;
    double hermite_deriv(const std::vector<double>& v, const std::vector<double>& d,
                         double x) const;
    std::size_t cell(double x) const;
};

// Scale function, speed density and the Cases 4-6 kernels for one spec.
class DiffusionKernels {
public:
    explicit DiffusionKernels(DiffusionSpec spec, int n_cells = 8192);

    // s(0) = 0, s'(x) = exp(-int_0^x 2 c / a^2)
    double scale(double x) const;
    double scale_derivative(double x) const;
    // m'(x) = 2 / (a^2(x) s'(x)); potential densities are reported w.r.t. m
    double speed_density(double x) const;

    // s(x) ^ s(y), the kernel of the diffusion killed at 0 (x, y > 0)
    double frak_u0(double x, double y) const;

    KernelFactors solve_factors(double beta) const;

    const DiffusionSpec& spec() const { return spec_; }

private:
    void require_inside(double x) const;
    DiffusionSpec spec_;
    std::vector<double> nodes_, g_nodes_, s_nodes_;  // g = int 2c/a^2
    double h_ = 0.0;
};

}  // namespace rebirthlab
