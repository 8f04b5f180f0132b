#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rebirthlab {

class Rng;

using Covariance = std::function<double(double, double)>;

class DegeneracyError : public std::runtime_error {
public:
    DegeneracyError(const std::string& what, double worst_eigenvalue)
        : std::runtime_error(what), worst_eigenvalue(worst_eigenvalue) {}
    double worst_eigenvalue;
};

struct GaussianFieldSpec {
    std::vector<double> grid;
    Covariance covariance;
    std::string covariance_id = "custom";
    double jitter = -1.0;  // < 0: default 1e-12 * trace / n
};

// Factor-based sampler for a Gaussian field restricted to a grid. The
// covariance matrix is factored once (Cholesky with escalating diagonal
// jitter over three decades); draws are L z with z iid standard normal.
class GaussianSampler {
public:
    explicit GaussianSampler(GaussianFieldSpec spec);

    const std::vector<double>& grid() const { return spec_.grid; }
    double applied_jitter() const { return applied_jitter_; }
    const Eigen::MatrixXd& covariance_matrix() const { return cov_; }

    void sample_one(Rng& rng, std::vector<double>& out) const;
    // n_samples x grid matrix; deterministic in the seed
    Eigen::MatrixXd sample(int n_samples, std::uint64_t seed) const;

private:
    GaussianFieldSpec spec_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd factor_;
    double applied_jitter_ = 0.0;
};

// Exact dyadic refinement for Gaussian fields whose restriction to a line is
// Markov (the Brownian / Ornstein-Uhlenbeck covariance family used here).
// The midpoint of each refined pair is drawn from its conditional law given
// the two neighbours, which by the Markov property is the full conditional.
class MarkovMidpointRefiner {
public:
    explicit MarkovMidpointRefiner(Covariance cov) : cov_(std::move(cov)) {}

    // field on lo + j (hi-lo)/2^depth, j = 0..2^depth
    std::vector<double> sample_dyadic(double lo, double hi, int depth, Rng& rng) const;

private:
    Covariance cov_;
};

// Y(x) = sum_i weight (eta_i(x) + shift)^2 pointwise over shared grids;
// weight is 1 for the plain chi-square and 1/2 for the isomorphism field.
Eigen::MatrixXd chi_square_combine(const std::vector<Eigen::MatrixXd>& components,
                                   double shift, bool half_weights);

// (2 sigma2(u) loglog 1/|u|)^(1/2); requires |u| < 1/e
double modulus_target_local(const std::function<double(double)>& sigma2, double u);
// (2 sigma2(u - v) log 1/|u-v|)^(1/2); requires 0 < |u-v| < 1
double modulus_target_uniform(const std::function<double(double)>& sigma2, double u,
                              double v);

// eta_p(x) = eta_bar_p(x) + u_p(x)/sqrt(u_p(0)) xi: rebuilds the unkilled
// field from a sample of the killed one plus one standard normal.
std::vector<double> eta_p_decomposition(const std::vector<double>& v_field_sample,
                                        const std::vector<double>& grid,
                                        const std::function<double(double)>& u_p,
                                        double xi);

// Field-sample container: a small binary header (grid, covariance id, seed)
// followed by the sample matrix and a checksum; CSV export for plotting.
struct FieldSampleFile {
    std::string covariance_id;
    std::uint64_t seed = 0;
    std::vector<double> grid;
    Eigen::MatrixXd samples;  // rows are draws
};

void write_field_samples(const std::string& path, const FieldSampleFile& file);
FieldSampleFile read_field_samples(const std::string& path);
void export_field_samples_csv(const std::string& path, const FieldSampleFile& file);

}  // namespace rebirthlab
