"""Acceptance suite: every criterion the artifact must meet, at its stated
tolerance, one pass/fail line each (run with -s to see them).

The shared fixtures hold the handful of runs several criteria inspect.
Every expected number here is either exact (stationary circle), an
analytically derived linearization value (decay rates 2 q^2 (q^2-kbar^2)^2,
attractor radius L0/(2 pi omega)), or a self-consistency target (order fit,
scheme agreement, byte determinism).
"""

import dataclasses
import json
import math

import numpy as np
import pytest

from curveflow import diagnostics, experiments, flow
from curveflow.curves import make_circle, make_perturbed_circle, reconstruct
from curveflow.flow import IntegratorConfig, Stepper, FlowState
from curveflow.grid import GridFunction
from curveflow.inequalities import (
    ProfileSampler,
    psw_bounds,
    psw_suite,
    sup_curvature_bounds,
    sup_curvature_suite,
)

TWO_PI = 2 * math.pi


def announce(number, name):
    print(f"[acceptance] criterion {number:02d} {name}: PASS")


# ----------------------------------------------------------- shared run data

@pytest.fixture(scope="module")
def conservation_run():
    """epsilon = 0.05, m = 2, to t = 0.2, recorded every step."""
    p = make_perturbed_circle(TWO_PI, 1, 256, [(2, 0.05, 0.0)])
    return flow.run(p, IntegratorConfig(dt=1e-4, t_max=0.2), output_stride=1)


@pytest.fixture(scope="module")
def rate_runs():
    out = {}
    for m, t_max in ((2, 0.25), (3, 0.016)):
        p = make_perturbed_circle(TWO_PI, 1, 256, [(m, 1e-3, 0.0)])
        out[m] = flow.run(p, IntegratorConfig(dt=1e-4, t_max=t_max), output_stride=1)
    return out


@pytest.fixture(scope="module")
def attractor_runs():
    cases = [(1, TWO_PI), (2, TWO_PI), (1, 2 * TWO_PI)]
    out = {}
    for omega, L0 in cases:
        p = make_perturbed_circle(L0, omega, 256, [(3, 1e-3, 0.0)])
        cfg = IntegratorConfig(dt=1e-4, t_max=5.0, energy_tol=1e-16)
        out[(omega, L0)] = flow.run(p, cfg, output_stride=1)
    return out


# ------------------------------------------------------------- the criteria

def test_criterion_01_stationarity():
    record = flow.run(
        make_circle(TWO_PI, 1, 128),
        IntegratorConfig(scheme="imex_bdf2", dt=1e-4, t_max=1.0),
        output_stride=1,
    )
    assert record.steps_taken == 10_000
    assert record.status == "reached_t_max"
    drift = np.abs(record.column("k_sup") - 1.0).max()
    assert drift <= 1e-9
    assert record.column("sup_deviation").max() <= 1e-9
    assert np.abs(record.column("h")).max() <= 1e-12
    announce(1, "stationarity")


def test_criterion_02_conservation(conservation_run):
    record = conservation_run
    assert record.clean
    assert np.abs(record.column("winding_integral") - TWO_PI).max() <= 1e-8
    assert np.abs(record.column("constraint_integral")).max() <= 1e-10
    assert record.column("closure_defect").max() <= 1e-6
    announce(2, "conservation")


def test_criterion_03_energy_monotonicity(conservation_run):
    record = conservation_run
    energy = record.column("E")
    assert np.diff(energy).max() <= 1e-12
    dissipation = -record.speed_l2sq - record.column("h") * record.speed_integral
    assert dissipation.max() <= 0.0
    announce(3, "energy monotonicity")


def test_criterion_04_exponential_rate(rate_runs):
    # linearization oracle: rate(q) = 2 q^2 (q^2 - 1)^2 at kbar = 1
    for m, expected in ((2, 72.0), (3, 1152.0)):
        fit = diagnostics.fit_decay(rate_runs[m])
        assert abs(fit.rate - expected) <= 0.05 * expected, (m, fit.rate)
    announce(4, "exponential rate")


def test_criterion_05_attractor_radius(attractor_runs):
    for (omega, L0), record in attractor_runs.items():
        assert record.status == "converged", (omega, L0, record.status)
        curve = reconstruct(record.final_state.profile)
        target = L0 / (TWO_PI * omega)
        assert abs(curve.best_fit_radius - target) <= 1e-6, (omega, L0)
        assert record.column("sup_deviation")[-1] <= 1e-8, (omega, L0)
    announce(5, "attractor radius")


def test_criterion_06_identity_checks():
    profile = make_perturbed_circle(TWO_PI, 1, 256, [(2, 0.05, 0.0)])
    assert diagnostics.constraint_identity_residual(profile) <= 1e-10
    record = flow.run(profile, IntegratorConfig(dt=1e-5, t_max=0.02), output_stride=1)
    residuals = diagnostics.energy_rate_residuals(record)
    assert residuals.max() <= 1e-2
    announce(6, "identity checks")


def test_criterion_07_bound_tracking(conservation_run, rate_runs):
    for record in (conservation_run, rate_runs[2], rate_runs[3]):
        profile = record.final_state.profile
        L0, omega = profile.L0, profile.omega
        energy = record.column("E")
        lhs_sup = L0 * record.column("k_sup")
        rhs_sup = np.sqrt(L0**3 * 2.0 * energy) + TWO_PI * omega
        assert (lhs_sup <= rhs_sup + 1e-10).all()
        lhs_dev = record.column("sup_deviation") ** 2
        rhs_dev = (L0 / TWO_PI) * 2.0 * energy
        assert (lhs_dev <= rhs_dev + 1e-10).all()
    announce(7, "bound tracking")


def test_criterion_08_inequality_suites():
    sampler = ProfileSampler(seed=2024)
    psw_i, psw_ii = psw_suite(sampler, 1000)
    assert psw_i.violation_count == 0
    assert psw_ii.violation_count == 0
    sup_rep = sup_curvature_suite(sampler, 1000)
    assert sup_rep.violation_count == 0

    # equality cases: the lowest harmonic saturates the L2 bound, circles
    # saturate the winding-corrected sup bound
    n = 128
    s = np.arange(n) * TWO_PI / n
    lhs_i, rhs_i, _, _ = psw_bounds(GridFunction(np.sin(s), TWO_PI))
    assert abs(lhs_i - rhs_i) <= 1e-10
    lhs, rhs = sup_curvature_bounds(make_circle(TWO_PI, 1, 128))
    assert abs(lhs - rhs) <= 1e-12
    announce(8, "inequality suites")


def test_criterion_09_integrator_order():
    # self-convergence of imex_bdf2 on fixed smooth data
    p = make_perturbed_circle(TWO_PI, 1, 64, [(2, 0.05, 0.0)])
    finals = {}
    for dt in (2e-4, 1e-4, 5e-5):
        cfg = IntegratorConfig(dt=dt, t_max=0.02)
        finals[dt] = flow.run(p, cfg, output_stride=10**9).final_state.profile.k.samples
    err_coarse = np.abs(finals[2e-4] - finals[1e-4]).max()
    err_fine = np.abs(finals[1e-4] - finals[5e-5]).max()
    order = math.log2(err_coarse / err_fine)
    assert 1.8 <= order <= 2.2, order

    # reference-scheme agreement at tiny dt
    p32 = make_perturbed_circle(TWO_PI, 1, 32, [(2, 0.05, 0.0)])
    ends = {}
    for scheme in ("imex_bdf2", "explicit_rk4"):
        stepper = Stepper(IntegratorConfig(scheme=scheme, dt=1e-7, t_max=1.0), p32)
        state = FlowState(profile=p32)
        for _ in range(1000):
            state = stepper.advance(state)
        ends[scheme] = state.profile.k.samples
    assert np.abs(ends["imex_bdf2"] - ends["explicit_rk4"]).max() <= 1e-6
    announce(9, "integrator order")


def test_criterion_10_determinism(tmp_path):
    cfg = dataclasses.replace(experiments.preset_config("theorem1-demo"), t_max=0.01)
    experiments.run_experiment(cfg, tmp_path / "a")
    experiments.run_experiment(cfg, tmp_path / "b")
    artifacts = ("timeseries.csv", "summary.json", "final_curve.csv")
    for name in artifacts:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    base = experiments.config_to_dict(cfg)
    docs = []
    for m in (2, 3):
        doc = json.loads(json.dumps(base))
        doc["initial"]["modes"] = [[m, 1e-3, 0.0]]
        doc["label"] = f"m{m}"
        docs.append(doc)
    configs = experiments.parse_batch_config(json.dumps(docs))
    experiments.run_batch(configs, tmp_path / "serial", parallelism=1)
    experiments.run_batch(configs, tmp_path / "parallel", parallelism=4)
    for label in ("m2", "m3"):
        for name in artifacts:
            a = (tmp_path / "serial" / label / name).read_bytes()
            b = (tmp_path / "parallel" / label / name).read_bytes()
            assert a == b
    announce(10, "determinism")
