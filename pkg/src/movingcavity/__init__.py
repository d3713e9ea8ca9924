"""Bogoliubov transformations of a confined scalar field.

Tools for a real scalar field in a cavity whose walls move or whose
background metric carries a small time-dependent perturbation: static
eigenbases, first-order mode couplings and perturbative Bogoliubov
coefficients, a non-perturbative 1+1D evolver, ready-made scenarios, and
a command-line interface.
"""

from .core import (
    POSITIVITY_EPS,
    BoundaryCondition,
    DerivedMetricScalars,
    EvaluationError,
    FieldParams,
    InvalidMetricError,
    MetricProfile,
    derive_metric_scalars,
)
from .staticmodes import (
    Box,
    EmptyBasisError,
    Interval,
    StaticBasis,
    StaticMode,
    eval_mode,
    eval_mode_gradient,
    orthonormality_residual,
    solve_box_modes,
    solve_interval_modes,
)
from .perturb import (
    BogoliubovMatrix,
    CouplingMatrices,
    GaussianEnvelope,
    HarmonicSum,
    HarmonicTerm,
    PerturbationSpec,
    RaisedCosineEnvelope,
    Resonance,
    ResonanceKind,
    UnsupportedSpecError,
    ValidityWindowWarning,
    bogoliubov_asymptotic,
    bogoliubov_perturbative,
    build_coupling_matrices,
    coupling_alpha,
    coupling_beta,
    find_resonances,
)
from .exact1d import (
    BoundaryTrajectory,
    InstantaneousBasis,
    InstantaneousMode,
    InvalidTrajectoryError,
    SolverError,
    StabilityError,
    TransformationState,
    assemble_vhat,
    bogoliubov_identity_residual,
    evolve_transformation,
    generator_matrix,
    mode_transform_matrix,
    solve_instantaneous_basis,
)
from .scenarios import (
    DceConfig,
    DcePredictor,
    DceScenario,
    DceVariant,
    GwConfig,
    GwPredictor,
    GwScenario,
    SCENARIO_NAMES,
    build_dce,
    build_gw,
    build_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "POSITIVITY_EPS",
    "BoundaryCondition",
    "DerivedMetricScalars",
    "EvaluationError",
    "FieldParams",
    "InvalidMetricError",
    "MetricProfile",
    "derive_metric_scalars",
    "Box",
    "EmptyBasisError",
    "Interval",
    "StaticBasis",
    "StaticMode",
    "eval_mode",
    "eval_mode_gradient",
    "orthonormality_residual",
    "solve_box_modes",
    "solve_interval_modes",
    "BogoliubovMatrix",
    "CouplingMatrices",
    "GaussianEnvelope",
    "HarmonicSum",
    "HarmonicTerm",
    "PerturbationSpec",
    "RaisedCosineEnvelope",
    "Resonance",
    "ResonanceKind",
    "UnsupportedSpecError",
    "ValidityWindowWarning",
    "bogoliubov_asymptotic",
    "bogoliubov_perturbative",
    "build_coupling_matrices",
    "coupling_alpha",
    "coupling_beta",
    "find_resonances",
    "BoundaryTrajectory",
    "InstantaneousBasis",
    "InstantaneousMode",
    "InvalidTrajectoryError",
    "SolverError",
    "StabilityError",
    "TransformationState",
    "assemble_vhat",
    "bogoliubov_identity_residual",
    "evolve_transformation",
    "generator_matrix",
    "mode_transform_matrix",
    "solve_instantaneous_basis",
    "DceConfig",
    "DcePredictor",
    "DceScenario",
    "DceVariant",
    "GwConfig",
    "GwPredictor",
    "GwScenario",
    "SCENARIO_NAMES",
    "build_dce",
    "build_gw",
    "build_scenario",
    "__version__",
]
