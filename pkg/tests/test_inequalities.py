import dataclasses

import numpy as np
import pytest

from curveflow.curves import make_circle, make_perturbed_circle
from curveflow.grid import GridFunction, MeanNotZeroError
from curveflow.inequalities import (
    ProfileSampler,
    RegimeViolationError,
    interpolation_constant_study,
    psw_bounds,
    psw_suite,
    speed_coercivity_study,
    sup_curvature_bounds,
    sup_curvature_suite,
)

TWO_PI = 2 * np.pi


def harmonic(n=128, mode=1, amp=1.0, phase=0.0, length=TWO_PI):
    s = np.arange(n) * length / n
    return GridFunction(amp * np.sin(2 * np.pi * mode * s / length + phase), length)


# ------------------------------------------------------------- single checks

def test_psw_equality_for_single_lowest_harmonic():
    lhs_i, rhs_i, lhs_ii, rhs_ii = psw_bounds(harmonic())
    assert abs(lhs_i - rhs_i) <= 1e-10
    assert lhs_ii <= rhs_ii


def test_psw_two_mode_ratio_matches_parseval():
    # f = sin(s) + 0.3 sin(3s): ratio of sides in (i) is (1 + 0.09)/(1 + 0.81)
    f = harmonic()
    g = harmonic(mode=3, amp=0.3)
    both = GridFunction(f.samples + g.samples, TWO_PI)
    lhs_i, rhs_i, _, _ = psw_bounds(both)
    assert lhs_i / rhs_i == pytest.approx(1.09 / 1.81, abs=1e-12)
    assert lhs_i < rhs_i


def test_psw_rejects_nonzero_mean():
    with pytest.raises(MeanNotZeroError):
        psw_bounds(GridFunction(np.ones(64), TWO_PI))


def test_sup_bound_equality_on_circles():
    for omega in (1, 2, -1):
        lhs, rhs = sup_curvature_bounds(make_circle(TWO_PI, omega, 128))
        assert lhs == pytest.approx(2 * np.pi * abs(omega), rel=1e-14)
        assert abs(lhs - rhs) <= 1e-12


def test_sup_bound_strict_for_perturbed_circle():
    p = make_perturbed_circle(TWO_PI, 1, 256, [(2, 0.1, 0.0)])
    lhs, rhs = sup_curvature_bounds(p)
    assert lhs == pytest.approx(TWO_PI * 1.1, rel=1e-12)
    # rhs = sqrt(L^3 * 0.04 pi) + 2 pi = sqrt(0.32 pi^4) + 2 pi
    assert rhs == pytest.approx(np.pi**2 * np.sqrt(0.32) + TWO_PI, rel=1e-12)
    assert lhs < rhs


# --------------------------------------------------------------------- suites

def test_psw_suite_has_no_violations():
    rep_i, rep_ii = psw_suite(ProfileSampler(seed=101), 200)
    assert rep_i.violation_count == 0
    assert rep_ii.violation_count == 0
    assert rep_i.worst_ratio <= 1.0 + 1e-12
    assert 0 < rep_ii.worst_ratio <= 1.0 + 1e-12


def test_sup_curvature_suite_has_no_violations():
    rep = sup_curvature_suite(ProfileSampler(seed=202, a_max=0.5), 200)
    assert rep.violation_count == 0
    assert 0 < rep.worst_ratio <= 1.0 + 1e-12


def test_suites_are_reproducible_bitwise():
    a = psw_suite(ProfileSampler(seed=7), 50)
    b = psw_suite(ProfileSampler(seed=7), 50)
    assert a == b
    c = sup_curvature_suite(ProfileSampler(seed=7), 50)
    d = sup_curvature_suite(ProfileSampler(seed=7), 50)
    assert c == d


def test_sampler_same_seed_same_sequence():
    s1 = ProfileSampler(seed=11).deviations(3)
    s2 = ProfileSampler(seed=11).deviations(5)
    for a, b in zip(s1, s2):
        assert np.array_equal(a, b)


# --------------------------------------------------------------- the studies

def test_coercivity_ratio_approaches_linearization():
    # single small mode q: int G^2 / int k_ssss^2 -> (1 - kbar^2/q^2)^2
    eps = 1e-4
    q = 3
    from curveflow import flow, grid

    p = make_perturbed_circle(TWO_PI, 1, 128, [(q, eps, 0.0)])
    g = flow.normal_speed(p).samples
    k4 = grid.deriv(p.k, 4).samples
    ratio = grid.integrate_samples(g * g, TWO_PI) / grid.integrate_samples(k4 * k4, TWO_PI)
    assert ratio == pytest.approx((1 - 1 / q**2) ** 2, abs=1e-3)


def test_coercivity_study_reports_positive_floor():
    rep = speed_coercivity_study(ProfileSampler(seed=5, a_max=0.2), 100)
    assert rep.sample_count == 100
    assert rep.violation_count == 0
    assert rep.fitted_constant > 0
    assert rep.paired_constant is not None and rep.paired_constant >= 0


def test_coercivity_study_requires_enough_samples():
    with pytest.raises(ValueError):
        speed_coercivity_study(ProfileSampler(seed=5), 10)


def test_coercivity_study_deterministic():
    a = speed_coercivity_study(ProfileSampler(seed=9), 100)
    b = speed_coercivity_study(ProfileSampler(seed=9), 100)
    assert a == b


def test_interpolation_study_zero_on_circles():
    sampler = ProfileSampler(seed=3, a_max=1e-12)
    # k k_s^2 with nearly vanishing k_s: ratio collapses to ~0
    rep = interpolation_constant_study(sampler, (0, 1, 1), 2, 20)
    assert rep.worst_ratio <= 1e-12


def test_interpolation_study_finite_ratio():
    sampler = ProfileSampler(seed=4, a_max=0.3)
    rep = interpolation_constant_study(sampler, (0, 1, 1), 2, 50)
    assert 0 < rep.worst_ratio < np.inf
    assert rep.violation_count == 0
    again = interpolation_constant_study(sampler, (0, 1, 1), 2, 50)
    assert rep == again


def test_interpolation_study_analytic_monomial_value():
    # int |k| k_s^2 for k = 1 + 0.1 cos 2s is 0.04 pi (cross term integrates away)
    from curveflow import grid

    p = make_perturbed_circle(TWO_PI, 1, 256, [(2, 0.1, 0.0)])
    ks = grid.deriv(p.k, 1).samples
    lhs = grid.integrate_samples(np.abs(p.k.samples) * ks * ks, TWO_PI)
    assert lhs == pytest.approx(0.04 * np.pi, rel=1e-12)


def test_interpolation_regime_violation():
    sampler = ProfileSampler(seed=6)
    with pytest.raises(RegimeViolationError):
        # six undifferentiated factors at smoothness 1 gives p = 2
        interpolation_constant_study(sampler, (0, 0, 0, 0, 0, 0), 1, 10)


def test_interpolation_rejects_bad_terms():
    sampler = ProfileSampler(seed=6)
    with pytest.raises(ValueError):
        interpolation_constant_study(sampler, (0,), 2, 10)
    with pytest.raises(ValueError):
        interpolation_constant_study(sampler, (0, 3), 2, 10)  # order > l - 1


def test_report_is_a_frozen_value():
    rep = sup_curvature_suite(ProfileSampler(seed=15), 10)
    with pytest.raises(dataclasses.FrozenInstanceError):
        rep.worst_ratio = 0.0
