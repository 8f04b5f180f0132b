#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rebirthlab/bundle_io.hpp"
#include "rebirthlab/runner.hpp"

using namespace rebirthlab;
using nlohmann::json;

namespace {

json minimal_config() {
    return json{{"master_seed", 4242},
                {"output_dir", "test_out"},
                {"format", "both"},
                {"process",
                 {{"case", 1},
                  {"beta", 1.0},
                  {"levy", {{"kind", "stable"}, {"alpha", 2.0}, {"scale", 0.5}}}}},
                {"rebirth", {{"mode", "full"}, {"atoms", {{0.0, 1.0}}}}},
                {"p", 1.0},
                {"checks", {"kernel_golden"}}};
}

}  // namespace

TEST_CASE("config validation names offending keys") {
    auto j = minimal_config();
    j["typo_key"] = 1;
    CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(j),
                         doctest::Contains("typo_key"), ConfigError);
    j = minimal_config();
    j["process"]["levy"]["alpha"] = 0.5;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::domain_error);
    j = minimal_config();
    j["format"] = "yaml";
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
}

TEST_CASE("unknown check ids are named in the error") {
    auto j = minimal_config();
    j["checks"] = {"no_such_check"};
    const auto cfg = ExperimentConfig::from_json(j);
    CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("no_such_check"),
                         ConfigError);
}

TEST_CASE("minimal run produces a passing manifest with artifacts") {
    const auto cfg = ExperimentConfig::from_json(minimal_config());
    const auto manifest = run_experiment(cfg);
    CHECK(manifest.all_hard_passed);
    CHECK(manifest.verdicts.size() == 1);
    CHECK(manifest.config_hash.size() == 16);
    CHECK(std::filesystem::exists("test_out/manifest.json"));
    CHECK(std::filesystem::exists("test_out/verdict_kernel_golden.json"));
    CHECK(exit_code_for(manifest) == 0);

    // rerun: statistic fields byte-identical
    const auto manifest2 = run_experiment(cfg);
    REQUIRE(manifest2.verdicts.size() == manifest.verdicts.size());
    for (std::size_t i = 0; i < manifest.verdicts.size(); ++i)
        CHECK(manifest.verdicts[i].to_json().dump() ==
              manifest2.verdicts[i].to_json().dump());
    std::filesystem::remove_all("test_out");
}

TEST_CASE("kernel dump CSV matches closed forms") {
    const auto cfg = ExperimentConfig::from_json(minimal_config());
    const LabContext ctx = LabContext::from_config(cfg);
    std::vector<double> xs;
    for (int i = 0; i <= 600; ++i) xs.push_back(-3.0 + 0.01 * i);
    dump_kernel_csv(ctx, "u_beta", xs, {}, "test_dump.csv");
    std::ifstream is("test_dump.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,y,value,case_id,beta");
    int rows = 0;
    double x, y, value;
    int case_id;
    double beta;
    char comma;
    std::string line;
    double worst = 0.0;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        ls >> x >> comma >> y >> comma >> value >> comma >> case_id >> comma >> beta;
        ++rows;
        const double closed =
            std::exp(-std::sqrt(2.0) * std::abs(x)) / std::sqrt(2.0);
        worst = std::max(worst, std::abs(value - closed) / closed);
    }
    CHECK(rows == 601);
    CHECK(worst <= 1e-6);
    std::filesystem::remove("test_dump.csv");

    // empty grid: header only
    dump_kernel_csv(ctx, "u_beta", {}, {}, "test_dump_empty.csv");
    std::ifstream empty_is("test_dump_empty.csv");
    std::getline(empty_is, header);
    CHECK(header == "x,y,value,case_id,beta");
    CHECK(!std::getline(empty_is, header));
    std::filesystem::remove("test_dump_empty.csv");
}

TEST_CASE("w_p dump exposes the asymmetry witness") {
    auto j = minimal_config();
    j["rebirth"] = {{"mode", "full"}, {"atoms", {{1.0, 1.0}}}};
    const auto cfg = ExperimentConfig::from_json(j);
    const LabContext ctx = LabContext::from_config(cfg);
    const std::vector<double> g = {-1.0, 0.0, 0.5, 1.5};
    dump_kernel_csv(ctx, "w_p", g, g, "test_wp.csv");
    std::ifstream is("test_wp.csv");
    std::string header;
    std::getline(is, header);
    std::map<std::pair<double, double>, double> w;
    std::string line;
    while (std::getline(is, line)) {
        double x, y, value;
        char c;
        std::istringstream ls(line);
        ls >> x >> c >> y >> c >> value;
        w[{x, y}] = value;
    }
    double max_asym = 0.0;
    for (double x : g)
        for (double y : g)
            max_asym = std::max(max_asym, std::abs(w[{x, y}] - w[{y, x}]));
    CHECK(max_asym > 1e-6);
    std::filesystem::remove("test_wp.csv");
}

TEST_CASE("replay reproduces estimates and honors overrides") {
    ProcessSpec spec;
    spec.case_id = 1;
    spec.psi = LevyExponent::brownian();
    spec.beta = 1.0;
    RebirthSpec reb;
    reb.measure = Measure::delta(0.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.epsilon = 0.05;
    cfg.t_max = 3.0;
    cfg.seed = 31337;

    BundleFile file;
    file.process_hash = spec.hash();
    file.context_json = minimal_config().dump();
    for (int i = 0; i < 4; ++i) {
        SimConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(i);
        file.bundles.push_back(simulate_rebirth(spec, reb, 0.0, c));
    }
    write_bundles("test_replay.rlbn", file);

    const auto v1 = replay_bundles("test_replay.rlbn", "localtime_estimate", json{});
    const auto v2 = replay_bundles("test_replay.rlbn", "localtime_estimate", json{});
    CHECK(v1.to_json().dump() == v2.to_json().dump());

    const auto v3 = replay_bundles("test_replay.rlbn", "localtime_estimate",
                                   json{{"epsilon", 0.1}});
    CHECK(v1.details.at("values") != v3.details.at("values"));

    const auto d = replay_bundles("test_replay.rlbn", "decomposition_exact", json{});
    CHECK(d.pass);
    const auto d2 = replay_bundles("test_replay.rlbn", "decomposition_exact",
                                   json{{"epsilon", 0.1}});
    CHECK(d2.pass);

    CHECK_THROWS_AS(replay_bundles("test_replay.rlbn", "bogus", json{}), ConfigError);
    std::filesystem::remove("test_replay.rlbn");
}
