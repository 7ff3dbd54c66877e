"""Experiment configuration, presets, execution, and serialization.

Configs are JSON documents with the schema documented in the README; every
validation problem in a document is reported, not just the first.  Outputs
are bit-stable: identical configs produce byte-identical timeseries.csv,
summary.json and final_curve.csv, and batch parallelism cannot change
per-run bytes because runs share nothing.  All files are written to a
temporary name and renamed into place, so readers never observe partial
artifacts.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import curves, diagnostics, flow, grid
from .curves import CurvatureProfile
from .flow import RECORD_COLUMNS, IntegratorConfig, RunRecord

__all__ = [
    "ConfigIssue",
    "ConfigError",
    "InitialSpec",
    "RunConfig",
    "parse_config",
    "parse_batch_config",
    "config_to_json",
    "preset_config",
    "preset_names",
    "build_initial",
    "run_experiment",
    "run_batch",
    "ExperimentResult",
    "BatchResult",
]

INITIAL_KINDS = ("circle", "perturbed_circle", "samples_file")

# every CSV float gets 17 significant digits: exact round-trip for doubles
_FMT = "{:.17g}"


@dataclass(frozen=True)
class ConfigIssue:
    code: str  # UnknownKey | OutOfRange | MissingRequired
    key: str
    message: str

    def __str__(self):
        return f"{self.code}({self.key}): {self.message}"


class ConfigError(ValueError):
    """Carries every problem found in a config document."""

    def __init__(self, issues: list[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    L0: float | None = None
    omega: int | None = None
    n_nodes: int | None = None
    modes: tuple[tuple[int, float, float], ...] = ()
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    initial: InitialSpec
    label: str = ""
    scheme: str = "imex_bdf2"
    dt: float = 1e-4
    dealias: bool = True
    t_max: float = 1.0
    energy_tol: float = 0.0
    blowup_cap: float | None = None
    output_stride: int = 100
    seed: int = 0
    winding_tol: float = flow.WINDING_TOL
    constraint_tol: float = flow.CONSTRAINT_TOL
    monotone_slack: float = flow.MONOTONE_SLACK
    monotone_energy_cap: float = flow.MONOTONE_ENERGY_CAP
    closure_tol: float = 1e-6
    bound_slack: float = 1e-10


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "initial", "label", "scheme", "dt", "dealias", "t_max", "energy_tol",
    "blowup_cap", "output_stride", "seed", "winding_tol", "constraint_tol",
    "monotone_slack", "monotone_energy_cap", "closure_tol", "bound_slack",
}
_INITIAL_KEYS = {"kind", "L0", "omega", "N", "modes", "path"}


def _check_number(issues, doc, key, path, *, required=False, positive=False,
                  nonnegative=False, default=None):
    if key not in doc:
        if required:
            issues.append(ConfigIssue("MissingRequired", path, "key is required"))
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        issues.append(ConfigIssue("OutOfRange", path, f"expected a finite number, got {value!r}"))
        return default
    if positive and value <= 0:
        issues.append(ConfigIssue("OutOfRange", path, f"must be > 0, got {value}"))
        return default
    if nonnegative and value < 0:
        issues.append(ConfigIssue("OutOfRange", path, f"must be >= 0, got {value}"))
        return default
    return float(value)


def _check_int(issues, doc, key, path, *, required=False, minimum=None,
               even=False, nonzero=False, default=None):
    if key not in doc:
        if required:
            issues.append(ConfigIssue("MissingRequired", path, "key is required"))
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        issues.append(ConfigIssue("OutOfRange", path, f"expected an integer, got {value!r}"))
        return default
    if minimum is not None and value < minimum:
        issues.append(ConfigIssue("OutOfRange", path, f"must be >= {minimum}, got {value}"))
        return default
    if even and value % 2 != 0:
        issues.append(ConfigIssue("OutOfRange", path, f"must be even, got {value}"))
        return default
    if nonzero and value == 0:
        issues.append(ConfigIssue("OutOfRange", path, "must be nonzero"))
        return default
    return int(value)


def _validate_initial(issues, doc, prefix="initial"):
    for key in doc:
        if key not in _INITIAL_KEYS:
            issues.append(ConfigIssue("UnknownKey", f"{prefix}.{key}", "unrecognized key"))
    kind = doc.get("kind")
    if kind is None:
        issues.append(ConfigIssue("MissingRequired", f"{prefix}.kind", "key is required"))
        return None
    if kind not in INITIAL_KINDS:
        issues.append(
            ConfigIssue("OutOfRange", f"{prefix}.kind", f"expected one of {INITIAL_KINDS}, got {kind!r}")
        )
        return None

    if kind == "samples_file":
        path = doc.get("path")
        if not isinstance(path, str) or not path:
            issues.append(ConfigIssue("MissingRequired", f"{prefix}.path", "a file path is required"))
            return None
        return InitialSpec(kind=kind, path=path)

    l0 = _check_number(issues, doc, "L0", f"{prefix}.L0", required=True, positive=True)
    omega = _check_int(issues, doc, "omega", f"{prefix}.omega", required=True, nonzero=True)
    n_nodes = _check_int(issues, doc, "N", f"{prefix}.N", required=True, minimum=16, even=True)

    modes: list[tuple[int, float, float]] = []
    if kind == "perturbed_circle":
        raw = doc.get("modes")
        if raw is None:
            issues.append(ConfigIssue("MissingRequired", f"{prefix}.modes", "key is required"))
        elif not isinstance(raw, list):
            issues.append(ConfigIssue("OutOfRange", f"{prefix}.modes", "expected a list of [m, amplitude, phase]"))
        else:
            for i, entry in enumerate(raw):
                where = f"{prefix}.modes[{i}]"
                if (
                    not isinstance(entry, list)
                    or len(entry) not in (2, 3)
                    or isinstance(entry[0], bool)
                    or not isinstance(entry[0], int)
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry[1:])
                ):
                    issues.append(ConfigIssue("OutOfRange", where, "expected [m, amplitude] or [m, amplitude, phase]"))
                    continue
                if entry[0] < 1:
                    issues.append(ConfigIssue("OutOfRange", where, f"mode index must be >= 1, got {entry[0]}"))
                    continue
                phase = float(entry[2]) if len(entry) == 3 else 0.0
                modes.append((int(entry[0]), float(entry[1]), phase))
    elif "modes" in doc:
        issues.append(ConfigIssue("UnknownKey", f"{prefix}.modes", "modes only apply to perturbed_circle"))

    if l0 is None or omega is None or n_nodes is None:
        return None
    return InitialSpec(kind=kind, L0=l0, omega=omega, n_nodes=n_nodes, modes=tuple(modes))


def _validate(doc: dict, prefix: str = "") -> tuple[RunConfig | None, list[ConfigIssue]]:
    issues: list[ConfigIssue] = []
    dot = f"{prefix}." if prefix else ""
    if not isinstance(doc, dict):
        return None, [ConfigIssue("OutOfRange", prefix or "<document>", "expected a JSON object")]
    for key in doc:
        if key not in _TOP_KEYS:
            issues.append(ConfigIssue("UnknownKey", f"{dot}{key}", "unrecognized key"))

    if "initial" not in doc:
        issues.append(ConfigIssue("MissingRequired", f"{dot}initial", "key is required"))
        initial = None
    elif not isinstance(doc["initial"], dict):
        issues.append(ConfigIssue("OutOfRange", f"{dot}initial", "expected a JSON object"))
        initial = None
    else:
        initial = _validate_initial(issues, doc["initial"], prefix=f"{dot}initial")

    label = doc.get("label", "")
    if not isinstance(label, str):
        issues.append(ConfigIssue("OutOfRange", f"{dot}label", "expected a string"))
        label = ""

    scheme = doc.get("scheme", "imex_bdf2")
    if scheme not in flow.SCHEMES:
        issues.append(
            ConfigIssue("OutOfRange", f"{dot}scheme", f"expected one of {flow.SCHEMES}, got {scheme!r}")
        )
        scheme = "imex_bdf2"

    dealias = doc.get("dealias", True)
    if not isinstance(dealias, bool):
        issues.append(ConfigIssue("OutOfRange", f"{dot}dealias", "expected true or false"))
        dealias = True

    dt = _check_number(issues, doc, "dt", f"{dot}dt", positive=True, default=1e-4)
    t_max = _check_number(issues, doc, "t_max", f"{dot}t_max", positive=True, default=1.0)
    energy_tol = _check_number(issues, doc, "energy_tol", f"{dot}energy_tol", nonnegative=True, default=0.0)
    if doc.get("blowup_cap") is None:
        blowup_cap = None
    else:
        blowup_cap = _check_number(issues, doc, "blowup_cap", f"{dot}blowup_cap", positive=True)
    output_stride = _check_int(issues, doc, "output_stride", f"{dot}output_stride", minimum=1, default=100)
    seed = _check_int(issues, doc, "seed", f"{dot}seed", minimum=0, default=0)
    winding_tol = _check_number(issues, doc, "winding_tol", f"{dot}winding_tol", positive=True, default=flow.WINDING_TOL)
    constraint_tol = _check_number(issues, doc, "constraint_tol", f"{dot}constraint_tol", positive=True, default=flow.CONSTRAINT_TOL)
    monotone_slack = _check_number(issues, doc, "monotone_slack", f"{dot}monotone_slack", nonnegative=True, default=flow.MONOTONE_SLACK)
    monotone_energy_cap = _check_number(issues, doc, "monotone_energy_cap", f"{dot}monotone_energy_cap", nonnegative=True, default=flow.MONOTONE_ENERGY_CAP)
    closure_tol = _check_number(issues, doc, "closure_tol", f"{dot}closure_tol", positive=True, default=1e-6)
    bound_slack = _check_number(issues, doc, "bound_slack", f"{dot}bound_slack", positive=True, default=1e-10)

    if issues or initial is None:
        return None, issues
    return (
        RunConfig(
            initial=initial,
            label=label,
            scheme=scheme,
            dt=dt,
            dealias=dealias,
            t_max=t_max,
            energy_tol=energy_tol,
            blowup_cap=blowup_cap,
            output_stride=output_stride,
            seed=seed,
            winding_tol=winding_tol,
            constraint_tol=constraint_tol,
            monotone_slack=monotone_slack,
            monotone_energy_cap=monotone_energy_cap,
            closure_tol=closure_tol,
            bound_slack=bound_slack,
        ),
        issues,
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document, reporting every problem."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError([ConfigIssue("OutOfRange", "<document>", f"invalid JSON: {err}")]) from err
    cfg, issues = _validate(doc)
    if issues or cfg is None:
        raise ConfigError(issues)
    return cfg


def parse_batch_config(text: str) -> list[RunConfig]:
    """Parse a batch document: either a JSON array of configs or
    {"runs": [...]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError([ConfigIssue("OutOfRange", "<document>", f"invalid JSON: {err}")]) from err
    if isinstance(doc, dict) and set(doc) == {"runs"}:
        doc = doc["runs"]
    if not isinstance(doc, list) or not doc:
        raise ConfigError([ConfigIssue("OutOfRange", "<document>", "expected a nonempty array of configs")])
    configs = []
    issues: list[ConfigIssue] = []
    for i, entry in enumerate(doc):
        cfg, entry_issues = _validate(entry, prefix=f"runs[{i}]")
        issues.extend(entry_issues)
        if cfg is not None:
            configs.append(cfg)
    if issues:
        raise ConfigError(issues)
    return configs


def config_to_dict(cfg: RunConfig) -> dict:
    initial: dict = {"kind": cfg.initial.kind}
    if cfg.initial.kind == "samples_file":
        initial["path"] = cfg.initial.path
    else:
        initial["L0"] = cfg.initial.L0
        initial["omega"] = cfg.initial.omega
        initial["N"] = cfg.initial.n_nodes
        if cfg.initial.kind == "perturbed_circle":
            initial["modes"] = [list(mode) for mode in cfg.initial.modes]
    out = {"initial": initial}
    for key in (
        "label", "scheme", "dt", "dealias", "t_max", "energy_tol", "blowup_cap",
        "output_stride", "seed", "winding_tol", "constraint_tol",
        "monotone_slack", "monotone_energy_cap", "closure_tol", "bound_slack",
    ):
        out[key] = getattr(cfg, key)
    return out


def config_to_json(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_TWO_PI = 2.0 * math.pi

_PRESETS: dict[str, RunConfig] = {
    # the exact stationary point: ten thousand steps of nothing happening
    "circle": RunConfig(
        initial=InitialSpec(kind="circle", L0=_TWO_PI, omega=1, n_nodes=128),
        label="circle", t_max=1.0, output_stride=100,
    ),
    # small single-mode perturbation whose energy decays at rate 72
    "theorem1-demo": RunConfig(
        initial=InitialSpec(kind="perturbed_circle", L0=_TWO_PI, omega=1,
                            n_nodes=256, modes=((2, 1e-3, 0.0),)),
        label="theorem1-demo", t_max=0.25, output_stride=1,
    ),
    # m = 3 variant, rate 1152
    "theorem1-m3": RunConfig(
        initial=InitialSpec(kind="perturbed_circle", L0=_TWO_PI, omega=1,
                            n_nodes=256, modes=((3, 1e-3, 0.0),)),
        label="theorem1-m3", t_max=0.016, output_stride=1,
    ),
    # larger perturbation for watching the conserved quantities per step
    "conservation-demo": RunConfig(
        initial=InitialSpec(kind="perturbed_circle", L0=_TWO_PI, omega=1,
                            n_nodes=256, modes=((2, 0.05, 0.0),)),
        label="conservation-demo", t_max=0.2, output_stride=1,
    ),
    # doubly covered circle attractor, radius 0.5
    "attractor-omega2": RunConfig(
        initial=InitialSpec(kind="perturbed_circle", L0=_TWO_PI, omega=2,
                            n_nodes=256, modes=((3, 1e-3, 0.0),)),
        label="attractor-omega2", t_max=0.1, energy_tol=1e-16, output_stride=1,
    ),
    # same winding but doubled length, radius 2
    "attractor-4pi": RunConfig(
        initial=InitialSpec(kind="perturbed_circle", L0=2 * _TWO_PI, omega=1,
                            n_nodes=256, modes=((3, 1e-3, 0.0),)),
        label="attractor-4pi", t_max=2.0, energy_tol=1e-16, output_stride=10,
    ),
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset_config(name: str) -> RunConfig:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def build_initial(cfg: RunConfig) -> CurvatureProfile:
    spec = cfg.initial
    if spec.kind == "circle":
        return curves.make_circle(spec.L0, spec.omega, spec.n_nodes)
    if spec.kind == "perturbed_circle":
        return curves.make_perturbed_circle(spec.L0, spec.omega, spec.n_nodes, list(spec.modes))
    with open(spec.path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        samples = np.asarray(doc["samples"], dtype=float)
        return curves.profile_from_samples(samples, float(doc["L0"]), int(doc["omega"]))
    except KeyError as err:
        raise ValueError(f"curve file {spec.path} is missing key {err}") from None


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _timeseries_csv(record: RunRecord) -> str:
    lines = [",".join(RECORD_COLUMNS)]
    for row in record.rows:
        lines.append(",".join(_FMT.format(v) for v in row))
    return "\n".join(lines) + "\n"


def _final_curve_csv(record: RunRecord) -> str:
    profile = record.final_state.profile
    curve = curves.reconstruct(profile)
    n = profile.n_nodes
    l0 = profile.L0
    s = np.append(profile.k.nodes(), l0)
    theta = np.append(curve.theta.samples, curve.theta.samples[0] + grid.integrate(profile.k))
    k = np.append(profile.k.samples, profile.k.samples[0])
    lines = ["s,x,y,theta,k"]
    for j in range(n + 1):
        lines.append(
            ",".join(
                _FMT.format(v)
                for v in (s[j], curve.points[j, 0], curve.points[j, 1], theta[j], k[j])
            )
        )
    return "\n".join(lines) + "\n"


@dataclass
class ExperimentResult:
    passed: bool
    summary: dict
    record: RunRecord


def run_experiment(cfg: RunConfig, out_dir: str | Path) -> ExperimentResult:
    """Run one experiment and write timeseries.csv, summary.json and
    final_curve.csv into out_dir.  passed means the run terminated cleanly
    and every hard monitor held."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    initial = build_initial(cfg)
    integ = IntegratorConfig(
        scheme=cfg.scheme,
        dt=cfg.dt,
        dealias_on=cfg.dealias,
        t_max=cfg.t_max,
        energy_tol=cfg.energy_tol,
        blowup_cap=cfg.blowup_cap,
    )
    record = flow.run(
        initial,
        integ,
        output_stride=cfg.output_stride,
        winding_tol=cfg.winding_tol,
        constraint_tol=cfg.constraint_tol,
        monotone_slack=cfg.monotone_slack,
        monotone_energy_cap=cfg.monotone_energy_cap,
        config_echo=config_to_dict(cfg),
    )
    report = diagnostics.invariant_report(
        record,
        winding_tol=cfg.winding_tol,
        constraint_tol=cfg.constraint_tol,
        monotone_slack=cfg.monotone_slack,
        monotone_energy_cap=cfg.monotone_energy_cap,
        closure_tol=cfg.closure_tol,
        bound_slack=cfg.bound_slack,
    )
    try:
        fit = diagnostics.fit_decay(record)
        fit_dict = {
            "rate": fit.rate,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "window": list(fit.window),
        }
    except (diagnostics.EmptyWindowError, diagnostics.NonPositiveEnergyError):
        fit_dict = None

    profile = record.final_state.profile
    curve = curves.reconstruct(profile)
    passed = record.clean and report.passed
    summary = {
        "config": config_to_dict(cfg),
        "status": record.status,
        "passed": passed,
        "failed_monitors": list(report.failed_monitors),
        "steps_taken": record.steps_taken,
        "rows_recorded": int(record.rows.shape[0]),
        "invariants": {
            "winding_drift": report.winding_drift,
            "max_constraint_integral": report.max_constraint_integral,
            "max_k_sup": report.max_k_sup,
            "max_kss_l2sq": report.max_kss_l2sq,
            "max_abs_h": report.max_abs_h,
            "max_energy_increase": report.max_energy_increase,
            "max_sup_bound_excess": report.max_sup_bound_excess,
            "max_pointwise_bound_excess": report.max_pointwise_bound_excess,
            "monotone_checked": report.monotone_checked,
        },
        "decay_fit": fit_dict,
        "final": {
            "t": record.final_state.t,
            "energy": report.final_energy,
            "h": record.final_state.h,
            "sup_deviation": report.final_sup_deviation,
            "closure_defect": report.final_closure_defect,
            "winding": curves.winding(profile),
            "best_fit_radius": curve.best_fit_radius,
            "best_fit_center": list(curve.best_fit_center),
            "target_radius": profile.L0 / (2.0 * math.pi * abs(profile.omega)),
        },
    }

    _atomic_write(out / "timeseries.csv", _timeseries_csv(record))
    _atomic_write(out / "final_curve.csv", _final_curve_csv(record))
    _atomic_write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    return ExperimentResult(passed=passed, summary=summary, record=record)


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------

@dataclass
class BatchResult:
    passed: bool
    summaries: list[dict]
    run_dirs: list[str]


def _run_dir_names(configs: list[RunConfig]) -> list[str]:
    names = []
    seen: dict[str, int] = {}
    for i, cfg in enumerate(configs):
        base = cfg.label if cfg.label else f"run_{i:03d}"
        if base in seen:
            seen[base] += 1
            base = f"{base}_{seen[base]}"
        else:
            seen[base] = 0
        names.append(base)
    return names


def _batch_worker(args: tuple[RunConfig, str]) -> dict:
    cfg, out_dir = args
    return run_experiment(cfg, out_dir).summary


def _aggregate_csv(summaries: list[dict], names: list[str]) -> str:
    header = (
        "run,label,status,passed,steps,final_energy,decay_rate,decay_r_squared,"
        "final_sup_deviation,final_closure_defect,best_fit_radius"
    )
    lines = [header]
    for name, s in zip(names, summaries):
        fit = s["decay_fit"]
        lines.append(
            ",".join(
                [
                    name,
                    s["config"]["label"],
                    s["status"],
                    "1" if s["passed"] else "0",
                    str(s["steps_taken"]),
                    _FMT.format(s["final"]["energy"]),
                    _FMT.format(fit["rate"]) if fit else "",
                    _FMT.format(fit["r_squared"]) if fit else "",
                    _FMT.format(s["final"]["sup_deviation"]),
                    _FMT.format(s["final"]["closure_defect"]),
                    _FMT.format(s["final"]["best_fit_radius"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def run_batch(
    configs: list[RunConfig], out_dir: str | Path, parallelism: int = 1
) -> BatchResult:
    """Run independent experiments with bounded parallelism.

    Each run writes its artifacts into its own subdirectory; results are
    collected by index, so the aggregate report and all per-run bytes are
    independent of scheduling order.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = _run_dir_names(configs)
    jobs = [(cfg, str(out / name)) for cfg, name in zip(configs, names)]

    if parallelism == 1 or len(jobs) == 1:
        summaries = [_batch_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(jobs))) as pool:
            summaries = list(pool.map(_batch_worker, jobs))

    _atomic_write(out / "batch_summary.csv", _aggregate_csv(summaries, names))
    return BatchResult(
        passed=all(s["passed"] for s in summaries),
        summaries=summaries,
        run_dirs=[str(out / name) for name in names],
    )
