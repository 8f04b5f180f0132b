#pragma once

#include <string>
#include <vector>

#include "rebirthlab/verify.hpp"

namespace rebirthlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::string started_at, finished_at;
    std::vector<Verdict> verdicts;
    std::vector<std::string> artifacts;
    bool all_hard_passed = false;

    nlohmann::json to_json() const;
};

// Executes every requested check, writes verdict JSON (and per-scale CSV data
// where available), then the manifest, atomically. Throws ConfigError for
// invalid configs (unknown check ids included).
RunManifest run_experiment(const ExperimentConfig& cfg);

// 0: all hard checks passed; 1: some hard check failed
int exit_code_for(const RunManifest& m);

// Evaluates one kernel over a grid and writes CSV rows x,y,value,case_id,beta.
void dump_kernel_csv(const LabContext& ctx, const std::string& kernel,
                     const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& out_path);

// Re-runs an estimator check on persisted bundles without resimulation.
Verdict replay_bundles(const std::string& bundle_path, const std::string& check_id,
                       const nlohmann::json& overrides);

}  // namespace rebirthlab
