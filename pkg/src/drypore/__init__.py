"""Pore-scale drying and binder migration simulator."""

from .backend import BACKEND
from .errors import (
    ConfigError,
    ConservationUnreachable,
    DegenerateFit,
    DimensionMismatch,
    DryporeError,
    EmptyProfile,
    MalformedFile,
    NoConvergence,
    PackingFailed,
    StabilityViolation,
)
from .grid import Grid, ScalarField, VectorField

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConservationUnreachable",
    "DegenerateFit",
    "DimensionMismatch",
    "DryporeError",
    "EmptyProfile",
    "Grid",
    "MalformedFile",
    "NoConvergence",
    "PackingFailed",
    "ScalarField",
    "StabilityViolation",
    "VectorField",
]

__version__ = "0.1.0"
