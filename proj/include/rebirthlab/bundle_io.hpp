#pragma once

#include <string>
#include <vector>

#include "rebirthlab/paths.hpp"

namespace rebirthlab {

class BundleIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Compact binary container for simulated bundles: a small header (format
// version, process hash, context JSON) followed by per-cycle state arrays and
// a trailing checksum so truncation and corruption are detected on read.
struct BundleFile {
    static constexpr std::uint32_t kVersion = 1;
    std::uint64_t process_hash = 0;
    std::string context_json;  // the producing config, for replay
    std::vector<PathBundle> bundles;
};

void write_bundles(const std::string& path, const BundleFile& file);
BundleFile read_bundles(const std::string& path);

// CSV export of one bundle (t, x, cycle) for plotting
void export_bundle_csv(const std::string& path, const PathBundle& bundle);

}  // namespace rebirthlab
