#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rebirthlab/paths.hpp"

namespace rebirthlab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckRequest {
    std::string id;
    nlohmann::json overrides;  // object; may be empty
};

struct ExperimentConfig {
    int schema_version = 1;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    std::string format = "both";  // json | csv | both
    ProcessSpec process;
    RebirthSpec rebirth;
    SimConfig sim;
    double p = 1.0;  // discount rate of the rebirthed kernel
    std::vector<CheckRequest> checks;
    nlohmann::json raw;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_json(const nlohmann::json& j);
    std::uint64_t hash() const;
};

// building blocks reused by the CLI and python surface
ProcessSpec parse_process(const nlohmann::json& j);
RebirthSpec parse_rebirth(const nlohmann::json& j);
SimConfig parse_sim(const nlohmann::json& j, std::uint64_t master_seed);
Measure parse_measure(const nlohmann::json& j);

}  // namespace rebirthlab
