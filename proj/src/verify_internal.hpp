#pragma once

#include "rebirthlab/verify.hpp"

namespace rebirthlab::checks {

using nlohmann::json;

// defaults overlaid with user overrides; unknown keys are config errors
json merged(json defaults, const json& overrides);

std::uint64_t check_seed(const LabContext& ctx, const char* id);

Verdict kernel_golden(const LabContext&, const json&);
Verdict covariance_psd(const LabContext&, const json&);
Verdict scalar_identities(const LabContext&, const json&);
Verdict localtime_normalization(const LabContext&, const json&);
Verdict rebirth_laplace(const LabContext&, const json&);
Verdict decomposition_exact(const LabContext&, const json&);
Verdict eisenbaum(const LabContext&, const json&, bool control);
Verdict conditional_independence(const LabContext&, const json&, bool control);
Verdict combined_identity(const LabContext&, const json&, bool control);
Verdict uniform_modulus(const LabContext&, const json&);
Verdict local_modulus_lil(const LabContext&, const json&);
Verdict localtime_modulus(const LabContext&, const json&);
Verdict determinism(const LabContext&, const json&);

}  // namespace rebirthlab::checks
