#include "rebirthlab/gaussian.hpp"

#include <cmath>

#include <cstring>
#include <fstream>

#include "rebirthlab/rng.hpp"

namespace rebirthlab {

GaussianSampler::GaussianSampler(GaussianFieldSpec spec) : spec_(std::move(spec)) {
    const auto n = static_cast<Eigen::Index>(spec_.grid.size());
    if (n == 0) throw std::domain_error("empty grid");
    cov_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = spec_.covariance(spec_.grid[static_cast<std::size_t>(i)],
                                              spec_.grid[static_cast<std::size_t>(j)]);
            cov_(i, j) = v;
            cov_(j, i) = v;
        }
    if (!cov_.allFinite()) throw std::domain_error("covariance not finite on the grid");

    const double base_jitter =
        spec_.jitter >= 0.0 ? spec_.jitter
                            : 1e-12 * cov_.trace() / static_cast<double>(n);
    for (int decade = 0; decade <= 3; ++decade) {
        const double j = decade == 0 ? (spec_.jitter > 0.0 ? base_jitter : 0.0)
                                     : base_jitter * std::pow(10.0, decade - 1);
        Eigen::MatrixXd trial = cov_;
        trial.diagonal().array() += j;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
            applied_jitter_ = j;
            return;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
    throw DegeneracyError("covariance not factorizable after jitter escalation; "
                          "worst eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()),
                          es.eigenvalues().minCoeff());
}

void GaussianSampler::sample_one(Rng& rng, std::vector<double>& out) const {
    const auto n = static_cast<Eigen::Index>(spec_.grid.size());
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd x = factor_ * z;
    out.assign(x.data(), x.data() + n);
}

Eigen::MatrixXd GaussianSampler::sample(int n_samples, std::uint64_t seed) const {
    const auto n = static_cast<Eigen::Index>(spec_.grid.size());
    Eigen::MatrixXd out(n_samples, n);
    Rng rng(derive_seed(seed, hash_label("gaussian_sampler")));
    std::vector<double> row;
    for (int s = 0; s < n_samples; ++s) {
        sample_one(rng, row);
        for (Eigen::Index i = 0; i < n; ++i) out(s, i) = row[static_cast<std::size_t>(i)];
    }
    return out;
}

std::vector<double> MarkovMidpointRefiner::sample_dyadic(double lo, double hi,
                                                         int depth, Rng& rng) const {
    if (!(hi > lo)) throw std::domain_error("refiner needs hi > lo");
    if (depth < 0 || depth > 26) throw std::domain_error("refiner depth out of range");
    const std::size_t n = (std::size_t{1} << depth) + 1;
    std::vector<double> x(n, 0.0);

    // endpoints from the exact 2x2 law
    {
        const double kll = cov_(lo, lo), krr = cov_(hi, hi), klr = cov_(lo, hi);
        const double z1 = rng.normal(), z2 = rng.normal();
        if (kll <= 0.0) {
            x.front() = 0.0;
            x.back() = std::sqrt(std::max(krr, 0.0)) * z2;
        } else {
            x.front() = std::sqrt(kll) * z1;
            const double b = klr / kll;
            const double resid = std::max(krr - klr * klr / kll, 0.0);
            x.back() = b * x.front() + std::sqrt(resid) * z2;
        }
    }

    for (int level = 0; level < depth; ++level) {
        const std::size_t stride = std::size_t{1} << (depth - level);
        const std::size_t half = stride / 2;
        for (std::size_t i = 0; i + stride < n; i += stride) {
            const std::size_t li = i, ri = i + stride, mi = i + half;
            const double l = lo + (hi - lo) * static_cast<double>(li) / static_cast<double>(n - 1);
            const double r = lo + (hi - lo) * static_cast<double>(ri) / static_cast<double>(n - 1);
            const double m = lo + (hi - lo) * static_cast<double>(mi) / static_cast<double>(n - 1);
            const double kll = cov_(l, l), krr = cov_(r, r), klr = cov_(l, r);
            const double kml = cov_(m, l), kmr = cov_(m, r), kmm = cov_(m, m);
            double a = 0.0, b = 0.0;
            const double det = kll * krr - klr * klr;
            if (det > 1e-14 * std::max(kll * krr, 1e-300)) {
                a = (krr * kml - klr * kmr) / det;
                b = (kll * kmr - klr * kml) / det;
            } else if (krr > kll) {
                b = krr > 0.0 ? kmr / krr : 0.0;
            } else if (kll > 0.0) {
                a = kml / kll;
            }
            double var = kmm - a * kml - b * kmr;
            if (var < -1e-9 * std::max(kmm, 1e-300))
                throw DegeneracyError("midpoint conditional variance negative", var);
            var = std::max(var, 0.0);
            x[mi] = a * x[li] + b * x[ri] + std::sqrt(var) * rng.normal();
        }
    }
    return x;
}

Eigen::MatrixXd chi_square_combine(const std::vector<Eigen::MatrixXd>& components,
                                   double shift, bool half_weights) {
    if (components.empty()) throw std::domain_error("chi-square needs components");
    const auto rows = components.front().rows();
    const auto cols = components.front().cols();
    for (const auto& c : components)
        if (c.rows() != rows || c.cols() != cols)
            throw std::domain_error("chi-square components disagree on the grid");
    const double w = half_weights ? 0.5 : 1.0;
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& c : components)
        y.array() += w * (c.array() + shift).square();
    return y;
}

double modulus_target_local(const std::function<double(double)>& sigma2, double u) {
    const double au = std::abs(u);
    if (!(au > 0.0) || au >= std::exp(-1.0))
        throw std::domain_error("local modulus target needs 0 < |u| < 1/e");
    return std::sqrt(2.0 * sigma2(au) * std::log(std::log(1.0 / au)));
}

double modulus_target_uniform(const std::function<double(double)>& sigma2, double u,
                              double v) {
    const double d = std::abs(u - v);
    if (!(d > 0.0) || d >= 1.0)
        throw std::domain_error("uniform modulus target needs 0 < |u-v| < 1");
    return std::sqrt(2.0 * sigma2(d) * std::log(1.0 / d));
}

std::vector<double> eta_p_decomposition(const std::vector<double>& v_field_sample,
                                        const std::vector<double>& grid,
                                        const std::function<double(double)>& u_p,
                                        double xi) {
    if (v_field_sample.size() != grid.size())
        throw std::domain_error("sample/grid size mismatch");
    const double u0 = u_p(0.0);
    if (!(u0 > 0.0)) throw std::domain_error("u_p(0) must be positive");
    const double root = std::sqrt(u0);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = v_field_sample[i] + u_p(grid[i]) / root * xi;
    return out;
}


namespace {

constexpr char kFieldMagic[4] = {'R', 'L', 'G', 'F'};

std::uint64_t fnv1a(const unsigned char* p, std::size_t n,
                    std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void write_field_samples(const std::string& path, const FieldSampleFile& file) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    std::string buf;
    auto put = [&buf](const void* p, std::size_t n) {
        buf.append(static_cast<const char*>(p), n);
    };
    put(kFieldMagic, 4);
    const std::uint32_t version = 1;
    put(&version, sizeof(version));
    put(&file.seed, sizeof(file.seed));
    const auto id_len = static_cast<std::uint32_t>(file.covariance_id.size());
    put(&id_len, sizeof(id_len));
    put(file.covariance_id.data(), id_len);
    const auto n_grid = static_cast<std::uint64_t>(file.grid.size());
    put(&n_grid, sizeof(n_grid));
    put(file.grid.data(), file.grid.size() * sizeof(double));
    const auto rows = static_cast<std::uint64_t>(file.samples.rows());
    put(&rows, sizeof(rows));
    for (Eigen::Index r = 0; r < file.samples.rows(); ++r)
        for (Eigen::Index c = 0; c < file.samples.cols(); ++c) {
            const double v = file.samples(r, c);
            put(&v, sizeof(v));
        }
    const std::uint64_t digest =
        fnv1a(reinterpret_cast<const unsigned char*>(buf.data()), buf.size());
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    os.write(reinterpret_cast<const char*>(&digest), sizeof(digest));
    if (!os) throw std::runtime_error("short write to " + path);
}

FieldSampleFile read_field_samples(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(is)),
                    std::istreambuf_iterator<char>());
    if (buf.size() < 12 + sizeof(std::uint64_t))
        throw std::runtime_error("field sample file truncated");
    const std::size_t body = buf.size() - sizeof(std::uint64_t);
    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + body, sizeof(stored));
    if (stored != fnv1a(reinterpret_cast<const unsigned char*>(buf.data()), body))
        throw std::runtime_error("field sample checksum mismatch");
    std::size_t off = 0;
    auto get = [&](void* p, std::size_t n) {
        if (off + n > body) throw std::runtime_error("field sample file truncated");
        std::memcpy(p, buf.data() + off, n);
        off += n;
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, kFieldMagic, 4) != 0)
        throw std::runtime_error("not a field sample file: " + path);
    std::uint32_t version;
    get(&version, sizeof(version));
    if (version != 1) throw std::runtime_error("field sample version mismatch");
    FieldSampleFile file;
    get(&file.seed, sizeof(file.seed));
    std::uint32_t id_len;
    get(&id_len, sizeof(id_len));
    file.covariance_id.resize(id_len);
    get(file.covariance_id.data(), id_len);
    std::uint64_t n_grid;
    get(&n_grid, sizeof(n_grid));
    file.grid.resize(n_grid);
    get(file.grid.data(), n_grid * sizeof(double));
    std::uint64_t rows;
    get(&rows, sizeof(rows));
    file.samples.resize(static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(n_grid));
    for (Eigen::Index r = 0; r < file.samples.rows(); ++r)
        for (Eigen::Index c = 0; c < file.samples.cols(); ++c) {
            double v;
            get(&v, sizeof(v));
            file.samples(r, c) = v;
        }
    return file;
}

void export_field_samples_csv(const std::string& path, const FieldSampleFile& file) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "sample";
    for (double g : file.grid) os << ',' << g;
    os << '\n';
    for (Eigen::Index r = 0; r < file.samples.rows(); ++r) {
        os << r;
        for (Eigen::Index c = 0; c < file.samples.cols(); ++c)
            os << ',' << file.samples(r, c);
        os << '\n';
    }
}

}  // namespace rebirthlab

