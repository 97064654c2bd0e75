"""Numerical verification toolkit for the integrable chiral Potts model."""

from chiralpotts.curve import (
    CurvePoint,
    CurveViolation,
    ModelParams,
    crossing_conjugate,
    make_point_from_chart,
    make_point_xyz,
)
from chiralpotts.errors import SingularWeight
from chiralpotts.weights import WeightTable, build_weights

__all__ = [
    "CurvePoint",
    "CurveViolation",
    "ModelParams",
    "SingularWeight",
    "WeightTable",
    "build_weights",
    "crossing_conjugate",
    "make_point_from_chart",
    "make_point_xyz",
]

__version__ = "0.1.0"
