"""curveflow: length-preserving sixth-order curvature flow of closed planar
curves, plus the measurement lab for its conserved, monotone and decaying
quantities."""

from .grid import GridFunction, MeanNotZeroError, antideriv, dealias, deriv, integrate
from .curves import (
    CurvatureProfile,
    GaussBonnetError,
    ReconstructedCurve,
    energy,
    fit_circle,
    make_circle,
    make_perturbed_circle,
    mean_curvature,
    profile_from_samples,
    reconstruct,
    sup_deviation,
    winding,
)
from .flow import (
    BlowupError,
    FlowState,
    IntegratorConfig,
    RunRecord,
    Stepper,
    curvature_rhs,
    length_constraint,
    length_constraint_via_speed,
    normal_speed,
    run,
    step,
    tangential_velocity,
)
from .diagnostics import (
    DecayFit,
    EmptyWindowError,
    InvariantReport,
    NonPositiveEnergyError,
    constraint_identity_residual,
    energy_rate_residuals,
    fit_decay,
    invariant_report,
)
from .inequalities import (
    ConstantFitReport,
    ProfileSampler,
    RegimeViolationError,
    interpolation_constant_study,
    psw_bounds,
    psw_suite,
    speed_coercivity_study,
    sup_curvature_bounds,
    sup_curvature_suite,
)
from .experiments import (
    ConfigError,
    RunConfig,
    parse_batch_config,
    parse_config,
    preset_config,
    preset_names,
    run_batch,
    run_experiment,
)

__version__ = "0.1.0"
