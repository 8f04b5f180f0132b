#include "rebirthlab/config.hpp"

#include <fstream>
#include <sstream>

namespace rebirthlab {

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> known,
                         const std::string& where) {
    std::vector<std::string> bad;
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) bad.push_back(it.key());
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "unknown key(s) in " << where << ":";
        for (const auto& k : bad) os << " '" << k << "'";
        throw ConfigError(os.str());
    }
}

}  // namespace

Measure parse_measure(const nlohmann::json& j) {
    reject_unknown_keys(j, {"atoms", "density"}, "measure");
    std::vector<std::pair<double, double>> atoms;
    if (j.contains("atoms"))
        for (const auto& a : j.at("atoms")) {
            if (!a.is_array() || a.size() != 2)
                throw ConfigError("measure atoms must be [x, weight] pairs");
            atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
        }
    if (j.contains("density")) {
        const auto& d = j.at("density");
        if (d.contains("preset")) {
            if (d.at("preset") != "uniform")
                throw ConfigError("unknown density preset '" +
                                  d.at("preset").get<std::string>() + "'");
            Measure dens = Measure::uniform(d.at("lo").get<double>(),
                                            d.at("hi").get<double>());
            if (atoms.empty()) return dens;
            throw ConfigError("mixed atoms + density measures: supply one block");
        }
        Measure dens = Measure::density(d.at("grid").get<std::vector<double>>(),
                                        d.at("values").get<std::vector<double>>());
        if (atoms.empty()) return dens;
        throw ConfigError("mixed atoms + density measures: supply one block");
    }
    if (atoms.empty()) throw ConfigError("measure needs 'atoms' or 'density'");
    return Measure::atoms(std::move(atoms));
}

ProcessSpec parse_process(const nlohmann::json& j) {
    reject_unknown_keys(j, {"case", "beta", "levy", "diffusion"}, "process");
    ProcessSpec spec;
    spec.case_id = j.at("case").get<int>();
    spec.beta = j.value("beta", 1.0);
    if (spec.case_id >= 1 && spec.case_id <= 3) {
        if (!j.contains("levy")) throw ConfigError("process.levy required for cases 1-3");
        const auto& l = j.at("levy");
        reject_unknown_keys(l, {"kind", "alpha", "scale", "lambda_grid", "psi_values",
                                "rv_index"},
                            "process.levy");
        const std::string kind = l.value("kind", "stable");
        if (kind == "stable") {
            spec.psi = LevyExponent::stable(l.value("alpha", 2.0), l.value("scale", 0.5));
        } else if (kind == "tabulated") {
            spec.psi = LevyExponent::tabulated(
                l.at("lambda_grid").get<std::vector<double>>(),
                l.at("psi_values").get<std::vector<double>>(),
                l.at("rv_index").get<double>());
        } else {
            throw ConfigError("process.levy.kind must be 'stable' or 'tabulated'");
        }
    } else {
        if (!j.contains("diffusion"))
            throw ConfigError("process.diffusion required for cases 4-6");
        const auto& d = j.at("diffusion");
        reject_unknown_keys(d, {"preset", "drift", "theta", "x_lo", "x_hi", "x", "a", "c"},
                            "process.diffusion");
        const double lo = d.value("x_lo", -8.0), hi = d.value("x_hi", 8.0);
        const std::string preset = d.value("preset", "bm");
        if (preset == "bm") {
            spec.diffusion = DiffusionSpec::brownian(lo, hi);
        } else if (preset == "bm_drift") {
            spec.diffusion = DiffusionSpec::brownian_drift(d.at("drift").get<double>(), lo, hi);
        } else if (preset == "ou") {
            spec.diffusion = DiffusionSpec::ou(d.at("theta").get<double>(), lo, hi);
        } else if (preset == "tabulated") {
            spec.diffusion = DiffusionSpec::tabulated(d.at("x").get<std::vector<double>>(),
                                                      d.at("a").get<std::vector<double>>(),
                                                      d.at("c").get<std::vector<double>>());
        } else {
            throw ConfigError("unknown diffusion preset '" + preset + "'");
        }
    }
    return spec;
}

RebirthSpec parse_rebirth(const nlohmann::json& j) {
    reject_unknown_keys(j, {"mode", "atoms", "density", "exile_label"}, "rebirth");
    RebirthSpec spec;
    const std::string mode = j.value("mode", "full");
    if (mode == "full")
        spec.mode = RebirthMode::Full;
    else if (mode == "partial")
        spec.mode = RebirthMode::Partial;
    else
        throw ConfigError("rebirth.mode must be 'full' or 'partial'");
    nlohmann::json measure_block;
    if (j.contains("atoms")) measure_block["atoms"] = j.at("atoms");
    if (j.contains("density")) measure_block["density"] = j.at("density");
    spec.measure = parse_measure(measure_block);
    spec.exile_label = j.value("exile_label", "exile");
    spec.validate();
    return spec;
}

SimConfig parse_sim(const nlohmann::json& j, std::uint64_t master_seed) {
    reject_unknown_keys(
        j, {"dt", "t_max", "epsilon", "seed", "max_cycles", "hitting", "overflow_guard", "n"},
        "sim");
    SimConfig sim;
    sim.dt = j.value("dt", sim.dt);
    sim.t_max = j.value("t_max", sim.t_max);
    sim.epsilon = j.value("epsilon", sim.epsilon);
    sim.seed = j.value("seed", master_seed);
    sim.max_cycles = j.value("max_cycles", sim.max_cycles);
    sim.overflow_guard = j.value("overflow_guard", sim.overflow_guard);
    const std::string hitting = j.value("hitting", "bridge_corrected");
    if (hitting == "bridge_corrected")
        sim.hitting = HittingMode::BridgeCorrected;
    else if (hitting == "naive")
        sim.hitting = HittingMode::Naive;
    else
        throw ConfigError("sim.hitting must be 'bridge_corrected' or 'naive'");
    sim.validate();
    return sim;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"schema_version", "master_seed", "output_dir", "format",
                         "process", "rebirth", "sim", "p", "checks"},
                        "config");
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1)
        throw ConfigError("unsupported schema_version " +
                          std::to_string(cfg.schema_version));
    cfg.master_seed = j.value("master_seed", std::uint64_t{1});
    cfg.output_dir = j.value("output_dir", "out");
    cfg.format = j.value("format", "both");
    if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "both")
        throw ConfigError("format must be json, csv or both");
    if (!j.contains("process")) throw ConfigError("config needs a 'process' block");
    cfg.process = parse_process(j.at("process"));
    if (j.contains("rebirth")) cfg.rebirth = parse_rebirth(j.at("rebirth"));
    cfg.sim = j.contains("sim") ? parse_sim(j.at("sim"), cfg.master_seed)
                                : SimConfig{.seed = cfg.master_seed};
    cfg.p = j.value("p", 1.0);
    if (!(cfg.p > 0.0)) throw ConfigError("p must be positive");
    if (j.contains("checks")) {
        for (const auto& c : j.at("checks")) {
            CheckRequest req;
            if (c.is_string()) {
                req.id = c.get<std::string>();
            } else {
                reject_unknown_keys(c, {"id", "overrides"}, "checks[]");
                req.id = c.at("id").get<std::string>();
                req.overrides = c.value("overrides", nlohmann::json::object());
            }
            cfg.checks.push_back(std::move(req));
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

std::uint64_t ExperimentConfig::hash() const {
    return hash_label(raw.dump());
}

}  // namespace rebirthlab
