#include <CLI11.hpp>
#include <iostream>

#include "rebirthlab/runner.hpp"

namespace {

std::vector<double> parse_range(const std::string& spec) {
    // "lo:step:hi" or comma-separated values
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, step, hi;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3)
            throw rebirthlab::ConfigError("bad range '" + spec + "', expected lo:step:hi");
        if (!(step > 0.0)) throw rebirthlab::ConfigError("range step must be positive");
        for (double x = lo; x <= hi + 0.5 * step; x += step) out.push_back(x);
        return out;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for rebirthed Markov processes"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    auto* run = app.add_subcommand("run", "run the checks requested by a config file");
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--output-dir", out_override, "override the config output_dir");

    std::string dk_config, dk_kernel = "u_beta", dk_x = "-3:0.01:3", dk_y, dk_out = "kernel.csv";
    auto* dump = app.add_subcommand("dump-kernel", "evaluate a kernel on a grid, write CSV");
    dump->add_option("config", dk_config, "JSON experiment config")->required();
    dump->add_option("--kernel", dk_kernel,
                     "u_beta|phi|sigma2|sigma2_0|v_beta|frak_u0|w_p|u_tilde0|u_bar|v_bar|s_min");
    dump->add_option("--x", dk_x, "x grid, lo:step:hi or comma list");
    dump->add_option("--y", dk_y, "y grid (two-argument kernels); defaults to the x grid");
    dump->add_option("--out", dk_out, "output CSV path");

    std::string rp_file, rp_check = "decomposition_exact", rp_overrides = "{}";
    auto* replay = app.add_subcommand("replay", "re-run an estimator check on stored bundles");
    replay->add_option("file", rp_file, "bundle file")->required();
    replay->add_option("--check", rp_check, "decomposition_exact|localtime_estimate");
    replay->add_option("--overrides", rp_overrides, "JSON overrides (e.g. '{\"epsilon\":0.1}')");

    app.add_subcommand("list-checks", "list available check ids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) {
            auto cfg = rebirthlab::ExperimentConfig::from_file(config_path);
            if (!out_override.empty()) cfg.output_dir = out_override;
            const auto manifest = rebirthlab::run_experiment(cfg);
            for (const auto& v : manifest.verdicts)
                std::cout << (v.pass ? "[PASS] " : (v.informational ? "[INFO] " : "[FAIL] "))
                          << v.check << "  statistic=" << v.statistic
                          << " threshold=" << v.threshold << "\n";
            std::cout << "manifest: " << cfg.output_dir << "/manifest.json\n";
            return rebirthlab::exit_code_for(manifest);
        }
        if (app.got_subcommand("dump-kernel")) {
            const auto cfg = rebirthlab::ExperimentConfig::from_file(dk_config);
            const rebirthlab::LabContext ctx = rebirthlab::LabContext::from_config(cfg);
            const auto xs = parse_range(dk_x);
            const auto ys = dk_y.empty() ? std::vector<double>{} : parse_range(dk_y);
            rebirthlab::dump_kernel_csv(ctx, dk_kernel, xs, ys, dk_out);
            std::cout << "wrote " << dk_out << "\n";
            return 0;
        }
        if (app.got_subcommand("replay")) {
            const auto overrides = nlohmann::json::parse(rp_overrides);
            const auto v = rebirthlab::replay_bundles(rp_file, rp_check, overrides);
            std::cout << v.to_json().dump(2) << "\n";
            return v.pass ? 0 : 1;
        }
        if (app.got_subcommand("list-checks")) {
            for (const auto& c : rebirthlab::check_catalog())
                std::cout << c.id << (c.informational_default ? "  [informational]" : "")
                          << "\n    " << c.description << "\n";
            return 0;
        }
    } catch (const rebirthlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
