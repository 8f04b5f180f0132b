#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rebirthlab {

// Streaming mean/variance with an associative merge, so sharded replicas can
// be reduced in a fixed order regardless of the worker count.
class Accumulator {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const Accumulator& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * nb / (na + nb);
        m2_ += o.m2_ + d * d * na * nb / (na + nb);
        n_ += o.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    double standard_error() const {
        return n_ > 0 ? sd() / std::sqrt(static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Mean of F under possibly signed weights, m = sum(w F)/sum(w), with the
// delta-method standard error of the ratio estimator.
struct WeightedMean {
    double mean = 0.0;
    double standard_error = 0.0;
    double negative_weight_fraction = 0.0;
    std::size_t count = 0;
};

inline WeightedMean weighted_mean(const std::vector<double>& values,
                                  const std::vector<double>& weights) {
    if (values.size() != weights.size() || values.empty())
        throw std::invalid_argument("weighted_mean: size mismatch or empty input");
    double sw = 0.0, swf = 0.0;
    std::size_t neg = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sw += weights[i];
        swf += weights[i] * values[i];
        if (weights[i] < 0.0) ++neg;
    }
    WeightedMean out;
    out.count = values.size();
    out.negative_weight_fraction =
        static_cast<double>(neg) / static_cast<double>(values.size());
    if (sw == 0.0) throw std::runtime_error("weighted_mean: zero total weight");
    out.mean = swf / sw;
    double s2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double r = weights[i] * (values[i] - out.mean);
        s2 += r * r;
    }
    out.standard_error = std::sqrt(s2) / std::abs(sw);
    return out;
}

inline double effective_sample_size(const std::vector<double>& weights) {
    double sw = 0.0, sw2 = 0.0;
    for (double w : weights) {
        sw += w;
        sw2 += w * w;
    }
    return sw2 > 0.0 ? sw * sw / sw2 : 0.0;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (hi + v[mid - 1]);
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile of empty set");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double f = pos - static_cast<double>(i);
    return v[i] * (1.0 - f) + v[i + 1] * f;
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ls_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("ls_slope: degenerate x");
    return sxy / sxx;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

// Two-sample KS distance where the second sample carries (possibly signed)
// weights; the first sample has unit weights.
double weighted_ks_statistic(std::vector<double> sample_a,
                             std::vector<double> sample_b,
                             std::vector<double> weights_b);

// Permutation-calibrated threshold for the weighted KS statistic at the given
// upper-tail level (e.g. 0.01). Group labels are permuted while the weight
// attached to each observation travels with it.
double weighted_ks_permutation_threshold(const std::vector<double>& sample_a,
                                         const std::vector<double>& sample_b,
                                         const std::vector<double>& weights_b,
                                         double level, int n_permutations,
                                         std::uint64_t seed);

}  // namespace rebirthlab
