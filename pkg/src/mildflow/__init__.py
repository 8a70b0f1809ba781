"""Mild-solution integration of semilinear parabolic problems with Hölder nonlinearities."""

from mildflow._backend import BACKEND
from mildflow.errors import HypothesisViolation, ScenarioError, SolverError
from mildflow.operators import (
    BoundaryCondition,
    DiscreteDomain,
    SemigroupOperator,
    SpectralField,
    VectorField,
    apply_semigroup,
    build_domain,
    gradient,
    interp_norm,
    laplacian_eigensystem,
    phi1_apply,
    smoothing_check,
    transform,
)
from mildflow.solver import SolverConfig, TimeMesh, Trajectory, build_graded_mesh, solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundaryCondition",
    "DiscreteDomain",
    "HypothesisViolation",
    "ScenarioError",
    "SemigroupOperator",
    "SolverConfig",
    "SolverError",
    "SpectralField",
    "TimeMesh",
    "Trajectory",
    "VectorField",
    "apply_semigroup",
    "build_domain",
    "build_graded_mesh",
    "gradient",
    "interp_norm",
    "laplacian_eigensystem",
    "phi1_apply",
    "smoothing_check",
    "solve",
    "transform",
]
