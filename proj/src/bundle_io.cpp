#include "rebirthlab/bundle_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rebirthlab {

namespace {

constexpr char kMagic[4] = {'R', 'L', 'B', 'N'};

struct Hasher {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void feed(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    }
};

class Writer {
public:
    explicit Writer(std::ofstream& os) : os_(os) {}
    template <class T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
        hash_.feed(&v, sizeof(T));
    }
    void put_bytes(const void* data, std::size_t n) {
        os_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        hash_.feed(data, n);
    }
    std::uint64_t digest() const { return hash_.h; }

private:
    std::ofstream& os_;
    Hasher hash_;
};

class Reader {
public:
    explicit Reader(std::ifstream& is) : is_(is) {}
    template <class T>
    T get() {
        T v{};
        is_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!is_) throw BundleIoError("bundle file truncated");
        hash_.feed(&v, sizeof(T));
        return v;
    }
    void get_bytes(void* data, std::size_t n) {
        is_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (!is_) throw BundleIoError("bundle file truncated");
        hash_.feed(data, n);
    }
    std::uint64_t digest() const { return hash_.h; }

private:
    std::ifstream& is_;
    Hasher hash_;
};

}  // namespace

void write_bundles(const std::string& path, const BundleFile& file) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw BundleIoError("cannot open " + path + " for writing");
    Writer w(os);
    w.put_bytes(kMagic, sizeof(kMagic));
    w.put<std::uint32_t>(BundleFile::kVersion);
    w.put<std::uint64_t>(file.process_hash);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(file.context_json.size()));
    w.put_bytes(file.context_json.data(), file.context_json.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(file.bundles.size()));
    for (const auto& b : file.bundles) {
        w.put<std::int32_t>(b.case_id);
        w.put<std::uint64_t>(b.seed);
        w.put<double>(b.dt);
        w.put<std::uint8_t>(b.truncated ? 1 : 0);
        w.put<std::int32_t>(b.exiled_at_cycle.value_or(-1));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(b.cycles.size()));
        for (const auto& c : b.cycles) {
            w.put<double>(c.start);
            w.put<double>(c.tail_dt);
            w.put<std::uint8_t>(static_cast<std::uint8_t>(c.cause));
            w.put<std::uint64_t>(c.states.size());
            w.put_bytes(c.states.data(), c.states.size() * sizeof(double));
        }
    }
    const std::uint64_t digest = w.digest();
    os.write(reinterpret_cast<const char*>(&digest), sizeof(digest));
    if (!os) throw BundleIoError("short write to " + path);
}

BundleFile read_bundles(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw BundleIoError("cannot open " + path);
    Reader r(is);
    char magic[4];
    r.get_bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw BundleIoError("not a bundle file: " + path);
    const auto version = r.get<std::uint32_t>();
    if (version != BundleFile::kVersion)
        throw BundleIoError("bundle format version mismatch: file has v" +
                            std::to_string(version) + ", reader expects v" +
                            std::to_string(BundleFile::kVersion));
    BundleFile file;
    file.process_hash = r.get<std::uint64_t>();
    const auto ctx_len = r.get<std::uint32_t>();
    file.context_json.resize(ctx_len);
    if (ctx_len > 0) r.get_bytes(file.context_json.data(), ctx_len);
    const auto n_bundles = r.get<std::uint32_t>();
    file.bundles.resize(n_bundles);
    for (auto& b : file.bundles) {
        b.case_id = r.get<std::int32_t>();
        b.seed = r.get<std::uint64_t>();
        b.dt = r.get<double>();
        b.truncated = r.get<std::uint8_t>() != 0;
        const auto exiled = r.get<std::int32_t>();
        if (exiled >= 0) b.exiled_at_cycle = exiled;
        const auto n_cycles = r.get<std::uint32_t>();
        b.cycles.resize(n_cycles);
        b.zeta_n.assign(1, 0.0);
        for (auto& c : b.cycles) {
            c.start = r.get<double>();
            c.tail_dt = r.get<double>();
            c.cause = static_cast<DeathCause>(r.get<std::uint8_t>());
            const auto n_states = r.get<std::uint64_t>();
            c.states.resize(n_states);
            r.get_bytes(c.states.data(), n_states * sizeof(double));
            b.zeta_n.push_back(b.zeta_n.back() + c.zeta(b.dt));
        }
    }
    const std::uint64_t computed = r.digest();
    std::uint64_t stored = 0;
    is.read(reinterpret_cast<char*>(&stored), sizeof(stored));
    if (!is) throw BundleIoError("bundle file truncated (missing checksum)");
    if (stored != computed)
        throw BundleIoError("bundle checksum mismatch; file is corrupted");
    return file;
}

void export_bundle_csv(const std::string& path, const PathBundle& bundle) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw BundleIoError("cannot open " + path + " for writing");
    os << "t,x,cycle\n";
    for (std::size_t ci = 0; ci < bundle.cycles.size(); ++ci) {
        const auto& c = bundle.cycles[ci];
        const double t0 = bundle.zeta_n[ci];
        for (std::size_t k = 0; k < c.states.size(); ++k)
            os << t0 + static_cast<double>(k) * bundle.dt << ',' << c.states[k] << ','
               << ci + 1 << '\n';
    }
}

}  // namespace rebirthlab
