#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rebirthlab/runner.hpp"

namespace py = pybind11;
using namespace rebirthlab;

namespace {

std::string run_check_json(const std::string& config_json, const std::string& check_id,
                           const std::string& overrides_json) {
    const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    const LabContext ctx = LabContext::from_config(cfg);
    const auto v = run_check(check_id, ctx, nlohmann::json::parse(overrides_json));
    return v.to_json().dump();
}

std::string run_experiment_json(const std::string& config_path) {
    const auto cfg = ExperimentConfig::from_file(config_path);
    return run_experiment(cfg).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "kernels, simulators and verification checks for rebirthed Markov processes";

    py::register_exception<QuadratureError>(m, "QuadratureError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DegeneracyError>(m, "DegeneracyError");

    py::class_<LevyExponent>(m, "LevyExponent")
        .def_static("stable", &LevyExponent::stable, py::arg("alpha"),
                    py::arg("scale") = 1.0)
        .def_static("brownian", &LevyExponent::brownian)
        .def_static("tabulated", &LevyExponent::tabulated, py::arg("lambda_grid"),
                    py::arg("psi_values"), py::arg("rv_index"))
        .def("__call__", &LevyExponent::operator())
        .def_property_readonly("rv_index", &LevyExponent::rv_index);

    py::class_<LevyKernels, std::shared_ptr<LevyKernels>>(m, "LevyKernels")
        .def(py::init<LevyExponent>())
        .def("u_beta", &LevyKernels::u_beta, py::arg("beta"), py::arg("x"))
        .def("phi0", &LevyKernels::phi0, py::arg("x"))
        .def("frak_u0", &LevyKernels::frak_u0, py::arg("x"), py::arg("y"))
        .def("sigma2", &LevyKernels::sigma2, py::arg("beta"), py::arg("x"))
        .def("v_beta", &LevyKernels::v_beta, py::arg("beta"), py::arg("x"), py::arg("y"))
        .def("u_row_integral", &LevyKernels::u_row_integral, py::arg("beta"))
        .def("spectral_integral", &LevyKernels::spectral_integral)
        .def_static("c_r", &LevyKernels::c_r, py::arg("r"));

    py::class_<DiffusionSpec>(m, "DiffusionSpec")
        .def_static("brownian", &DiffusionSpec::brownian, py::arg("x_lo") = -8.0,
                    py::arg("x_hi") = 8.0)
        .def_static("brownian_drift", &DiffusionSpec::brownian_drift, py::arg("drift"),
                    py::arg("x_lo") = -8.0, py::arg("x_hi") = 8.0)
        .def_static("ou", &DiffusionSpec::ou, py::arg("theta"), py::arg("x_lo") = -8.0,
                    py::arg("x_hi") = 8.0)
        .def_static("tabulated", &DiffusionSpec::tabulated, py::arg("x"), py::arg("a"),
                    py::arg("c"))
        .def("a", &DiffusionSpec::a)
        .def("c", &DiffusionSpec::c);

    py::class_<KernelFactors>(m, "KernelFactors")
        .def_property_readonly("beta", &KernelFactors::beta)
        .def("p", &KernelFactors::p)
        .def("q", &KernelFactors::q)
        .def("u_bar", &KernelFactors::u_bar)
        .def("v_bar", &KernelFactors::v_bar)
        .def("u_bar_row_integral", &KernelFactors::u_bar_row_integral)
        .def_property_readonly("wronskian_rel_variation",
                               &KernelFactors::wronskian_rel_variation);

    py::class_<DiffusionKernels, std::shared_ptr<DiffusionKernels>>(m, "DiffusionKernels")
        .def(py::init<DiffusionSpec, int>(), py::arg("spec"), py::arg("n_cells") = 8192)
        .def("scale", &DiffusionKernels::scale)
        .def("scale_derivative", &DiffusionKernels::scale_derivative)
        .def("speed_density", &DiffusionKernels::speed_density)
        .def("frak_u0", &DiffusionKernels::frak_u0)
        .def("solve_factors", &DiffusionKernels::solve_factors, py::arg("beta"));

    py::class_<Measure>(m, "Measure")
        .def_static("atoms", &Measure::atoms)
        .def_static("delta", &Measure::delta)
        .def_static("density", &Measure::density)
        .def_static("uniform", &Measure::uniform, py::arg("lo"), py::arg("hi"),
                    py::arg("n_nodes") = 257)
        .def("total_mass", &Measure::total_mass)
        .def("integrate", &Measure::integrate);

    py::enum_<RebirthMode>(m, "RebirthMode")
        .value("Full", RebirthMode::Full)
        .value("Partial", RebirthMode::Partial);

    py::class_<RebirthSpec>(m, "RebirthSpec")
        .def(py::init([](RebirthMode mode, Measure measure) {
                 RebirthSpec s;
                 s.mode = mode;
                 s.measure = std::move(measure);
                 s.validate();
                 return s;
             }),
             py::arg("mode"), py::arg("measure"))
        .def_readonly("mode", &RebirthSpec::mode)
        .def("exile_probability", &RebirthSpec::exile_probability);

    py::class_<BaseProcess>(m, "BaseProcess")
        .def_static("levy_killed", &BaseProcess::levy_killed)
        .def_static("levy_killed_at_zero", &BaseProcess::levy_killed_at_zero)
        .def_static("levy_recurrent_zero", &BaseProcess::levy_recurrent_zero)
        .def_static("diffusion_killed", &BaseProcess::diffusion_killed)
        .def_static("diffusion_killed_at_zero", &BaseProcess::diffusion_killed_at_zero)
        .def_static("diffusion_hit_zero", &BaseProcess::diffusion_hit_zero)
        .def("u_p", &BaseProcess::u_p)
        .def("u_0", &BaseProcess::u_0)
        .def("row_integral", &BaseProcess::row_integral)
        .def("killing_laplace", &BaseProcess::killing_laplace)
        .def_property_readonly("case_id", &BaseProcess::case_id);

    py::class_<RebirthKernel>(m, "RebirthKernel")
        .def(py::init<BaseProcess, Measure, double>(), py::arg("base"), py::arg("mu"),
             py::arg("p"))
        .def("f", &RebirthKernel::f)
        .def("f_l1_norm", &RebirthKernel::f_l1_norm)
        .def("w", &RebirthKernel::w)
        .def("renewal_sum", &RebirthKernel::renewal_sum);

    py::class_<PartialRebirthKernel>(m, "PartialRebirthKernel")
        .def(py::init<BaseProcess, Measure>(), py::arg("base"), py::arg("nu"))
        .def("f", &PartialRebirthKernel::f)
        .def("u_tilde0", &PartialRebirthKernel::u_tilde0)
        .def("exile_probability", &PartialRebirthKernel::exile_probability);

    m.def("cycle_weights_partial", &cycle_weights_partial, py::arg("nu_mass"),
          py::arg("i"));

    py::enum_<HittingMode>(m, "HittingMode")
        .value("Naive", HittingMode::Naive)
        .value("BridgeCorrected", HittingMode::BridgeCorrected);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_max", &SimConfig::t_max)
        .def_readwrite("epsilon", &SimConfig::epsilon)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("max_cycles", &SimConfig::max_cycles)
        .def_readwrite("hitting", &SimConfig::hitting);

    py::class_<ProcessSpec>(m, "ProcessSpec")
        .def(py::init([](int case_id, std::optional<LevyExponent> psi,
                         std::optional<DiffusionSpec> diffusion, double beta) {
                 ProcessSpec s;
                 s.case_id = case_id;
                 s.psi = std::move(psi);
                 s.diffusion = std::move(diffusion);
                 s.beta = beta;
                 s.validate();
                 return s;
             }),
             py::arg("case_id"), py::arg("psi") = std::nullopt,
             py::arg("diffusion") = std::nullopt, py::arg("beta") = 1.0);

    py::class_<Cycle>(m, "Cycle")
        .def_readonly("start", &Cycle::start)
        .def_readonly("states", &Cycle::states)
        .def_readonly("tail_dt", &Cycle::tail_dt);

    py::class_<PathBundle>(m, "PathBundle")
        .def_readonly("case_id", &PathBundle::case_id)
        .def_readonly("seed", &PathBundle::seed)
        .def_readonly("dt", &PathBundle::dt)
        .def_readonly("cycles", &PathBundle::cycles)
        .def_readonly("zeta_n", &PathBundle::zeta_n)
        .def_readonly("exiled_at_cycle", &PathBundle::exiled_at_cycle)
        .def_readonly("truncated", &PathBundle::truncated)
        .def("total_time", &PathBundle::total_time)
        .def("cycle_index_at", &PathBundle::cycle_index_at);

    py::class_<RebirthSimOptions>(m, "RebirthSimOptions")
        .def(py::init<>())
        .def_readwrite("corrupt_reuse_seed", &RebirthSimOptions::corrupt_reuse_seed);
    m.def("simulate_rebirth", &simulate_rebirth, py::arg("spec"), py::arg("rebirth"),
          py::arg("start"), py::arg("config"), py::arg("opts") = RebirthSimOptions{});
    m.def("theta_shift", &theta_shift, py::arg("bundle"), py::arg("s"));

    py::class_<LocalTimeEstimate>(m, "LocalTimeEstimate")
        .def_readonly("y_grid", &LocalTimeEstimate::y_grid)
        .def_readonly("t_marks", &LocalTimeEstimate::t_marks)
        .def_readonly("values", &LocalTimeEstimate::values)
        .def_readonly("per_cycle", &LocalTimeEstimate::per_cycle)
        .def_readonly("epsilon", &LocalTimeEstimate::epsilon);

    m.def("estimate_local_time", &estimate_local_time, py::arg("bundle"),
          py::arg("y_grid"), py::arg("t_marks"), py::arg("epsilon"),
          py::arg("m_density"));
    m.def("laplace_functional", &laplace_functional, py::arg("bundle"), py::arg("p"),
          py::arg("y"), py::arg("epsilon"), py::arg("m_density"));

    py::class_<GaussianFieldSpec>(m, "GaussianFieldSpec")
        .def(py::init([](std::vector<double> grid, Covariance cov, double jitter) {
                 GaussianFieldSpec s;
                 s.grid = std::move(grid);
                 s.covariance = std::move(cov);
                 s.jitter = jitter;
                 return s;
             }),
             py::arg("grid"), py::arg("covariance"), py::arg("jitter") = -1.0);

    py::class_<GaussianSampler>(m, "GaussianSampler")
        .def(py::init<GaussianFieldSpec>())
        .def("sample", &GaussianSampler::sample, py::arg("n_samples"), py::arg("seed"))
        .def_property_readonly("applied_jitter", &GaussianSampler::applied_jitter)
        .def_property_readonly("covariance_matrix", &GaussianSampler::covariance_matrix);

    py::class_<MarkovMidpointRefiner>(m, "MarkovMidpointRefiner")
        .def(py::init<Covariance>())
        .def("sample_dyadic",
             [](const MarkovMidpointRefiner& r, double lo, double hi, int depth,
                std::uint64_t seed) {
                 Rng rng(seed);
                 return r.sample_dyadic(lo, hi, depth, rng);
             },
             py::arg("lo"), py::arg("hi"), py::arg("depth"), py::arg("seed"));

    m.def("chi_square_combine", &chi_square_combine, py::arg("components"),
          py::arg("shift") = 0.0, py::arg("half_weights") = false);
    m.def("modulus_target_local", &modulus_target_local, py::arg("sigma2"), py::arg("u"));
    m.def("modulus_target_uniform", &modulus_target_uniform, py::arg("sigma2"),
          py::arg("u"), py::arg("v"));
    m.def("eta_p_decomposition", &eta_p_decomposition, py::arg("v_field_sample"),
          py::arg("grid"), py::arg("u_p"), py::arg("xi"));

    m.def("run_check", &run_check_json, py::arg("config_json"), py::arg("check_id"),
          py::arg("overrides_json") = std::string("{}"),
          "run a single check; returns the verdict as a JSON string");
    m.def("run_experiment", &run_experiment_json, py::arg("config_path"),
          "run a config file end to end; returns the manifest as a JSON string");
    m.def("check_ids", [] {
        std::vector<std::string> ids;
        for (const auto& c : check_catalog()) ids.push_back(c.id);
        return ids;
    });

    m.attr("__version__") = kToolVersion;
}
