"""Numerical certification of universal magnification invariants for the
catastrophe normal-form lensing maps, via holomorphic fixed-point indices."""

from . import catalog, caustics, imaging, lefschetz, polycore
from .catalog import CatastropheModel, ControlParams, ModelId, instantiate
from .imaging import invariant_report, solve_images, verify_invariant
from .lefschetz import lefschetz_total, rational_fixed_point_check

__version__ = "0.1.0"

__all__ = [
    "CatastropheModel",
    "ControlParams",
    "ModelId",
    "catalog",
    "caustics",
    "imaging",
    "instantiate",
    "invariant_report",
    "lefschetz",
    "lefschetz_total",
    "polycore",
    "rational_fixed_point_check",
    "solve_images",
    "verify_invariant",
]
