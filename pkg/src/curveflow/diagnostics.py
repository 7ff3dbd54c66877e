"""Post-processing of run records: decay fitting, identity checks, reports.

All operations here are pure functions over immutable records or profiles,
independent of the engine's own right-hand side.  In particular the
energy-rate identity is checked with centered differences of the stored
energy samples, never with extra engine evaluations, so it remains an
independent test of the evolution rather than a restatement of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import flow
from .curves import CurvatureProfile
from .flow import RunRecord

__all__ = [
    "DecayFit",
    "InvariantReport",
    "EmptyWindowError",
    "NonPositiveEnergyError",
    "fit_decay",
    "energy_rate_residuals",
    "constraint_identity_residual",
    "invariant_report",
]

# Relative residuals get this absolute floor in the denominator so the
# stationary circle (both sides exactly zero) does not divide 0 by 0.
RESIDUAL_FLOOR = 1e-14


class EmptyWindowError(ValueError):
    """The requested fit window contains no samples."""


class NonPositiveEnergyError(ValueError):
    """log E is undefined somewhere in the fit window."""


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line through (t, log E): E ~ exp(intercept - rate*t)."""

    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def fit_decay(record: RunRecord, window: tuple[float, float] | None = None) -> DecayFit:
    """Fit the exponential decay rate of the energy over a time window.

    The default window is the middle half of the run: early times carry
    nonlinear corrections to the asymptotic rate, late times sit on the
    round-off floor.
    """
    t = record.column("t")
    e = record.column("E")
    if window is None:
        lo = t[0] + 0.25 * (t[-1] - t[0])
        hi = t[0] + 0.75 * (t[-1] - t[0])
    else:
        lo, hi = window
    mask = (t >= lo) & (t <= hi)
    if not mask.any():
        raise EmptyWindowError(f"no samples in window ({lo}, {hi})")
    if (e[mask] <= 0).any():
        raise NonPositiveEnergyError("energy must be positive throughout the fit window")

    tw = t[mask]
    logw = np.log(e[mask])
    # center the abscissa for conditioning; the slope is unaffected
    shift = tw.mean()
    slope, intercept_c = np.polyfit(tw - shift, logw, 1)
    fitted = slope * (tw - shift) + intercept_c
    ss_res = float(((logw - fitted) ** 2).sum())
    ss_tot = float(((logw - logw.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return DecayFit(
        rate=float(-slope),
        intercept=float(intercept_c - slope * shift),
        r_squared=r_squared,
        window=(float(lo), float(hi)),
    )


def energy_rate_residuals(record: RunRecord, floor: float = RESIDUAL_FLOOR) -> np.ndarray:
    """Relative mismatch of dE/dt against -int G^2 ds - h int G ds per row.

    dE/dt comes from centered differences of the recorded energies, the
    right-hand side from the per-row stored integrals; one value per
    interior row.  Requires a uniformly strided record (stride 1 runs give
    the cleanest estimate).
    """
    t = record.column("t")
    e = record.column("E")
    h = record.column("h")
    if t.size < 3:
        raise EmptyWindowError("need at least three rows for centered differences")
    de_dt = (e[2:] - e[:-2]) / (t[2:] - t[:-2])
    identity = -record.speed_l2sq - h * record.speed_integral
    denom = np.maximum(np.abs(record.speed_l2sq[1:-1]), floor)
    return np.abs(de_dt - identity[1:-1]) / denom


def constraint_identity_residual(p: CurvatureProfile, dealias_on: bool = True) -> float:
    """|h from the derivative integrals - h from -(1/(2 pi omega)) int k G|.

    The two forms agree identically in the continuum; discretely they
    differ by the integration-by-parts error of the spectral calculus,
    which is round-off for band-limited profiles.
    """
    return abs(
        flow.length_constraint(p) - flow.length_constraint_via_speed(p, dealias_on)
    )


@dataclass(frozen=True)
class InvariantReport:
    """Maxima of the monitored quantities over a run and pass/fail flags.

    The curvature sup bound checked per row is L0*max|k| <= sqrt(L0^3*2E)
    + 2*pi*|omega| + slack, and the pointwise one is sup_deviation^2 <=
    (L0/(2*pi))*2E + slack; both are flow-independent facts about any
    closed curve, so a violation always indicates a discretization problem.
    """

    status: str
    winding_drift: float
    max_constraint_integral: float
    max_k_sup: float
    max_kss_l2sq: float
    max_abs_h: float
    max_energy_increase: float
    max_sup_bound_excess: float
    max_pointwise_bound_excess: float
    final_energy: float
    final_sup_deviation: float
    final_closure_defect: float
    monotone_checked: bool
    failed_monitors: tuple[str, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.failed_monitors


def invariant_report(
    record: RunRecord,
    *,
    winding_tol: float = flow.WINDING_TOL,
    constraint_tol: float = flow.CONSTRAINT_TOL,
    monotone_slack: float = flow.MONOTONE_SLACK,
    monotone_energy_cap: float = flow.MONOTONE_ENERGY_CAP,
    closure_tol: float = 1e-6,
    bound_slack: float = 1e-10,
) -> InvariantReport:
    """Summarize a run against the conservation and bound monitors.

    A failed run (blowup or in-loop invariant violation) reports the
    engine's failed monitor rather than asserting convergence.
    """
    if record.rows.shape[0] == 0:
        raise ValueError("empty record")
    profile = record.final_state.profile
    l0 = profile.L0
    omega = profile.omega

    e = record.column("E")
    wind = record.column("winding_integral")
    cons = record.column("constraint_integral")
    k_sup = record.column("k_sup")
    sup_dev = record.column("sup_deviation")
    kss = record.column("kss_l2sq")
    h = record.column("h")
    closure = record.column("closure_defect")

    winding_drift = float(np.abs(wind - 2.0 * np.pi * omega).max())
    max_cons = float(np.abs(cons).max())
    d_e = np.diff(e)
    max_increase = float(d_e.max()) if d_e.size else 0.0
    monotone_checked = record.initial_energy <= monotone_energy_cap

    sup_excess = l0 * k_sup - (np.sqrt(l0**3 * 2.0 * e) + 2.0 * np.pi * abs(omega))
    pointwise_excess = sup_dev**2 - (l0 / (2.0 * np.pi)) * 2.0 * e

    failed = []
    if record.failed_monitor:
        failed.append(record.failed_monitor)
    if record.status == "blowup" and "blowup_cap" not in failed:
        failed.append("blowup_cap")
    if winding_drift > winding_tol:
        failed.append("winding_integral")
    if max_cons > constraint_tol:
        failed.append("constraint_integral")
    if monotone_checked and max_increase > monotone_slack:
        failed.append("energy_monotonicity")
    if float(sup_excess.max()) > bound_slack:
        failed.append("curvature_sup_bound")
    if float(pointwise_excess.max()) > bound_slack:
        failed.append("pointwise_bound")
    if float(closure[-1]) > closure_tol:
        failed.append("closure_defect")
    # dedupe, preserving order
    failed = tuple(dict.fromkeys(failed))

    return InvariantReport(
        status=record.status,
        winding_drift=winding_drift,
        max_constraint_integral=max_cons,
        max_k_sup=float(k_sup.max()),
        max_kss_l2sq=float(kss.max()),
        max_abs_h=float(np.abs(h).max()),
        max_energy_increase=max_increase,
        max_sup_bound_excess=float(sup_excess.max()),
        max_pointwise_bound_excess=float(pointwise_excess.max()),
        final_energy=float(e[-1]),
        final_sup_deviation=float(sup_dev[-1]),
        final_closure_defect=float(closure[-1]),
        monotone_checked=monotone_checked,
        failed_monitors=failed,
    )
