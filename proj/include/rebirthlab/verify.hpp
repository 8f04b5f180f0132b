#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rebirthlab/config.hpp"
#include "rebirthlab/gaussian.hpp"
#include "rebirthlab/modulus.hpp"
#include "rebirthlab/paths.hpp"

namespace rebirthlab {

struct Verdict {
    std::string check;
    nlohmann::json params;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool informational = false;
    std::uint64_t seed = 0;
    nlohmann::json details;

    nlohmann::json to_json() const;
};

struct CheckInfo {
    std::string id;
    std::string description;
    bool informational_default = false;
};

const std::vector<CheckInfo>& check_catalog();
bool is_known_check(const std::string& id);

// Everything a check needs: the configured process, rebirth measure, sim
// defaults, the discount rate p and the master seed. Kernel objects are
// built lazily and shared.
class LabContext {
public:
    LabContext(ProcessSpec process, RebirthSpec rebirth, SimConfig sim, double p,
               std::uint64_t master_seed);
    static LabContext from_config(const ExperimentConfig& cfg);

    const ProcessSpec& process() const { return process_; }
    const RebirthSpec& rebirth() const { return rebirth_; }
    const SimConfig& sim() const { return sim_; }
    double p() const { return p_; }
    std::uint64_t master_seed() const { return master_seed_; }

    std::shared_ptr<LevyKernels> levy() const;
    std::shared_ptr<DiffusionKernels> diffusion() const;
    BaseProcess base() const;

private:
    ProcessSpec process_;
    RebirthSpec rebirth_;
    SimConfig sim_;
    double p_;
    std::uint64_t master_seed_;
    mutable std::shared_ptr<LevyKernels> levy_;
    mutable std::shared_ptr<DiffusionKernels> diffusion_;
};

// Runs one check with per-check parameter overrides (JSON object). Throws
// ConfigError for unknown ids.
Verdict run_check(const std::string& id, const LabContext& ctx,
                  const nlohmann::json& overrides = nlohmann::json::object());

}  // namespace rebirthlab
