"""Smoke tests for the python surface of the lab."""

import json
import math

import pytest

rl = pytest.importorskip("rebirthlab")


def test_levy_kernels_match_closed_forms():
    lk = rl.LevyKernels(rl.LevyExponent.brownian())
    for beta in (1.0, 2.0):
        for x in (0.0, 0.5, -1.3):
            closed = math.exp(-math.sqrt(2 * beta) * abs(x)) / math.sqrt(2 * beta)
            assert lk.u_beta(beta, x) == pytest.approx(closed, rel=1e-7)
    assert lk.phi0(0.75) == pytest.approx(0.75, rel=1e-7)
    assert lk.sigma2(0.0, 0.25) == pytest.approx(0.5, rel=1e-7)
    assert rl.LevyKernels.c_r(2.0) == pytest.approx(1.0, abs=1e-8)


def test_rebirth_kernel_scalar_identities():
    lk = rl.LevyKernels(rl.LevyExponent.brownian())
    base = rl.BaseProcess.levy_killed(lk, 1.0)
    rk = rl.RebirthKernel(base, rl.Measure.delta(0.0), 1.0)
    assert rk.w(0.0, 0.0) == pytest.approx(1.0, rel=1e-6)
    assert rk.f(0.0) == pytest.approx(0.5, rel=1e-6)
    assert base.killing_laplace(1.0, 0.3) == pytest.approx(0.5, abs=1e-6)
    pk = rl.PartialRebirthKernel(base, rl.Measure.atoms([(1.0, 0.5)]))
    expect = 1 / math.sqrt(2) + 0.5 * math.exp(-math.sqrt(2)) / math.sqrt(2)
    assert pk.u_tilde0(0.0, 0.0) == pytest.approx(expect, rel=1e-6)
    assert rl.cycle_weights_partial(1.0, 3) == pytest.approx((0.25, 0.75))


def test_simulation_and_local_time_decomposition():
    spec = rl.ProcessSpec(1, psi=rl.LevyExponent.brownian(), beta=1.0)
    reb = rl.RebirthSpec(rl.RebirthMode.Full, rl.Measure.delta(0.0))
    cfg = rl.SimConfig()
    cfg.dt = 1e-3
    cfg.epsilon = 0.05
    cfg.t_max = 4.0
    cfg.seed = 99
    bundle = rl.simulate_rebirth(spec, reb, 0.0, cfg)
    again = rl.simulate_rebirth(spec, reb, 0.0, cfg)
    assert bundle.zeta_n == again.zeta_n  # determinism
    assert all(b > a for a, b in zip(bundle.zeta_n, bundle.zeta_n[1:]))

    est = rl.estimate_local_time(bundle, [-0.2, 0.0, 0.4], [5.0], cfg.epsilon,
                                 lambda y: 1.0)
    totals = est.values[0]
    sums = [sum(pc[j] for pc in est.per_cycle) for j in range(3)]
    assert totals == pytest.approx(sums, abs=1e-12)

    lap1 = rl.laplace_functional(bundle, 1.0, 0.0, cfg.epsilon, lambda y: 1.0)
    lap9 = rl.laplace_functional(bundle, 9.0, 0.0, cfg.epsilon, lambda y: 1.0)
    assert lap1 > lap9 >= 0.0


def test_gaussian_sampler_and_refiner():
    spec = rl.GaussianFieldSpec([0.25, 0.5, 1.0],
                                lambda x, y: math.exp(-abs(x - y)))
    gs = rl.GaussianSampler(spec)
    a = gs.sample(8, 7)
    b = gs.sample(8, 7)
    assert (a == b).all()
    refiner = rl.MarkovMidpointRefiner(lambda x, y: 2.0 * min(x, y))
    field = refiner.sample_dyadic(0.0, 1.0, 6, seed=3)
    assert field[0] == 0.0
    assert len(field) == 65


def test_diffusion_factors():
    dk = rl.DiffusionKernels(rl.DiffusionSpec.brownian(), n_cells=2048)
    f = dk.solve_factors(1.0)
    s2 = math.sqrt(2.0)
    assert f.u_bar(0.0, 0.0) == pytest.approx(1.0 / (2 * s2), rel=1e-5)
    assert f.wronskian_rel_variation < 1e-6
    assert dk.frak_u0(1.0, 2.0) == pytest.approx(1.0, rel=1e-8)


def test_run_check_verdict_roundtrip():
    config = {
        "master_seed": 7,
        "process": {"case": 1, "beta": 1.0,
                    "levy": {"kind": "stable", "alpha": 2.0, "scale": 0.5}},
        "rebirth": {"mode": "full", "atoms": [[0.0, 1.0]]},
        "p": 1.0,
    }
    verdict = json.loads(rl.run_check(json.dumps(config), "kernel_golden"))
    assert verdict["pass"] is True
    assert verdict["statistic"] <= 1e-6
    assert "kernel_golden" == verdict["check"]
    assert "decomposition_exact" in rl.check_ids()
