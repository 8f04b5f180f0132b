#include "rebirthlab/stats.hpp"

#include <numeric>

#include "rebirthlab/rng.hpp"

namespace rebirthlab {

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson_correlation: need paired samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

namespace {

struct Tagged {
    double x;
    double w;        // signed weight
    bool from_b;
};

double ks_of_tagged(std::vector<Tagged>& pts) {
    std::sort(pts.begin(), pts.end(),
              [](const Tagged& l, const Tagged& r) { return l.x < r.x; });
    double wa_total = 0.0, wb_total = 0.0;
    for (const auto& p : pts) (p.from_b ? wb_total : wa_total) += p.w;
    if (wa_total == 0.0 || wb_total == 0.0)
        throw std::runtime_error("weighted KS: a group has zero total weight");
    double ca = 0.0, cb = 0.0, d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        (pts[i].from_b ? cb : ca) += pts[i].w;
        // evaluate between distinct x values only
        if (i + 1 < pts.size() && pts[i + 1].x == pts[i].x) continue;
        d = std::max(d, std::abs(ca / wa_total - cb / wb_total));
    }
    return d;
}

}  // namespace

double weighted_ks_statistic(std::vector<double> sample_a,
                             std::vector<double> sample_b,
                             std::vector<double> weights_b) {
    if (sample_b.size() != weights_b.size())
        throw std::invalid_argument("weighted_ks_statistic: b/weights size mismatch");
    std::vector<Tagged> pts;
    pts.reserve(sample_a.size() + sample_b.size());
    for (double x : sample_a) pts.push_back({x, 1.0, false});
    for (std::size_t i = 0; i < sample_b.size(); ++i)
        pts.push_back({sample_b[i], weights_b[i], true});
    return ks_of_tagged(pts);
}

double weighted_ks_permutation_threshold(const std::vector<double>& sample_a,
                                         const std::vector<double>& sample_b,
                                         const std::vector<double>& weights_b,
                                         double level, int n_permutations,
                                         std::uint64_t seed) {
    std::vector<Tagged> pool;
    pool.reserve(sample_a.size() + sample_b.size());
    for (double x : sample_a) pool.push_back({x, 1.0, false});
    for (std::size_t i = 0; i < sample_b.size(); ++i)
        pool.push_back({sample_b[i], weights_b[i], true});

    Rng rng(derive_seed(seed, hash_label("ks_permutation")));
    std::vector<double> stats(static_cast<std::size_t>(n_permutations));
    std::vector<Tagged> work(pool.size());
    std::vector<std::uint32_t> idx(pool.size());
    for (int b = 0; b < n_permutations; ++b) {
        std::iota(idx.begin(), idx.end(), 0u);
        // Fisher-Yates on the group labels: observation (x,w) pairs stay
        // intact, only which group they land in is shuffled.
        for (std::size_t i = idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
            std::swap(idx[i - 1], idx[j]);
        }
        for (std::size_t i = 0; i < pool.size(); ++i) {
            work[i].x = pool[idx[i]].x;
            work[i].w = pool[idx[i]].w;
            work[i].from_b = i >= sample_a.size();
        }
        stats[static_cast<std::size_t>(b)] = ks_of_tagged(work);
    }
    return quantile(stats, 1.0 - level);
}

}  // namespace rebirthlab
