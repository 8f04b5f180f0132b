#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rebirthlab/diffusion.hpp"
#include "rebirthlab/levy.hpp"

namespace rebirthlab {

class Rng;

// A finite positive measure on the line, represented as point atoms plus an
// optional density sampled on a grid (trapezoid weights). Every mu/nu
// integral in the lab goes through this one quadrature layer.
class Measure {
public:
    static Measure atoms(std::vector<std::pair<double, double>> atom_list);
    static Measure delta(double x) { return atoms({{x, 1.0}}); }
    static Measure density(std::vector<double> grid, std::vector<double> values);
    static Measure uniform(double lo, double hi, int n_nodes = 257);

    double total_mass() const;
    double integrate(const std::function<double(double)>& f) const;
    Measure normalized() const;
    double sample(Rng& rng) const;
    bool supported_in(const std::function<bool(double)>& pred) const;
    const std::vector<std::pair<double, double>>& atom_list() const { return atoms_; }
    std::uint64_t hash() const;

private:
    Measure() = default;
    std::vector<std::pair<double, double>> atoms_;
    std::vector<double> grid_, values_, node_weights_;
    double mass_ = 0.0;
};

enum class RebirthMode { Full, Partial };

struct RebirthSpec {
    RebirthMode mode = RebirthMode::Full;
    Measure measure = Measure::delta(0.0);  // mu (mass 1) or nu (finite, > 0)
    std::string exile_label = "exile";

    void validate() const;
    // partial mode: probability of permanent exile at each death
    double exile_probability() const;
};

// The transient base process of one of the six concrete cases, reduced to
// what the rebirth construction needs: p-potential densities, the reference
// measure and row integrals.
class BaseProcess {
public:
    static BaseProcess levy_killed(std::shared_ptr<LevyKernels> k, double beta);   // case 1
    static BaseProcess levy_killed_at_zero(std::shared_ptr<LevyKernels> k,
                                           double beta);                           // case 2
    static BaseProcess levy_recurrent_zero(std::shared_ptr<LevyKernels> k);        // case 3
    static BaseProcess diffusion_killed(std::shared_ptr<DiffusionKernels> k,
                                        double beta);                              // case 4
    static BaseProcess diffusion_killed_at_zero(std::shared_ptr<DiffusionKernels> k,
                                                double beta);                      // case 5
    static BaseProcess diffusion_hit_zero(std::shared_ptr<DiffusionKernels> k);    // case 6

    int case_id() const { return case_id_; }
    double beta() const { return beta_; }
    bool is_levy() const { return case_id_ <= 3; }

    // p-potential density of the (killed) base process
    double u_p(double p, double x, double y) const;
    // 0-potential density
    double u_0(double x, double y) const;
    // integral of u_p(x, z) dm(z) over the state space
    double row_integral(double p, double x) const;
    double m_density(double y) const;
    bool in_state_space(double x) const;

    // E^x exp(-p zeta) = 1 - p int u^p(x, z) dm(z); always in (0,1)
    double killing_laplace(double p, double x) const;

    const std::shared_ptr<LevyKernels>& levy() const { return levy_; }
    const std::shared_ptr<DiffusionKernels>& diffusion() const { return diff_; }
    const KernelFactors* factors(double rate) const;

private:
    BaseProcess() = default;
    int case_id_ = 0;
    double beta_ = 0.0;
    std::shared_ptr<LevyKernels> levy_;
    std::shared_ptr<DiffusionKernels> diff_;
    mutable std::vector<std::pair<double, std::shared_ptr<KernelFactors>>> factor_cache_;
    mutable std::shared_ptr<std::mutex> factor_mutex_ = std::make_shared<std::mutex>();
};

// Potential density w^p of the fully rebirthed process, with the scalar
// companions derived along the way.
class RebirthKernel {
public:
    RebirthKernel(BaseProcess base, Measure mu, double p);

    double f(double y) const;        // int u^p(x, y) dmu(x)
    double f_l1_norm() const { return l1_norm_; }
    double w(double x, double y) const;
    // sum over r >= 2 of E^x exp(-p zeta_{r-1}) = E^x exp(-p zeta) / (p |f|_1)
    double renewal_sum(double x) const;

    double p() const { return p_; }
    const BaseProcess& base() const { return base_; }
    const Measure& mu() const { return mu_; }

private:
    BaseProcess base_;
    Measure mu_;
    double p_ = 0.0;
    double l1_norm_ = 0.0;
};

// Potential density of a partially rebirthed process restricted to S:
// u~0(x,y) = u0(x,y) + int u0(z,y) dnu(z).
class PartialRebirthKernel {
public:
    PartialRebirthKernel(BaseProcess base, Measure nu);

    double f(double y) const;
    double u_tilde0(double x, double y) const;
    double exile_probability() const { return 1.0 / (1.0 + nu_.total_mass()); }
    const Measure& nu() const { return nu_; }
    const BaseProcess& base() const { return base_; }

private:
    BaseProcess base_;
    Measure nu_;
};

// mass kept in S and mass at the exile point of the i-th cycle start measure
std::pair<double, double> cycle_weights_partial(double nu_mass, int i);

}  // namespace rebirthlab
