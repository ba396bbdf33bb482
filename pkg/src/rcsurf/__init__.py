"""Numerical laboratory for surfaces embedded in Riemann-Cartan 3-manifolds.

Computes the complex-valued mean curvature H + i*tau together with its
supporting apparatus (connection, torsion, curvature, fundamental forms,
Weingarten map, Gauss map, Hopf differential) on closed-form scenes, and
machine-checks the governing identities as quantitative residuals.
"""

from . import errors
from .ambient import Ambient, coefficient_ambient, frame_ambient
from .expr import Expr, diff, parse
from .gaussmap import GaugeField
from .scenes import (
    Scene, builtin, builtin_names, export_fields, gauss_degree, integrate,
    load_scene, make_grid, save_scene,
)
from .surface import Surface
from .verify import VerificationReport, run_verification

__version__ = "0.1.0"

__all__ = [
    "errors", "Expr", "parse", "diff",
    "Ambient", "frame_ambient", "coefficient_ambient", "Surface", "GaugeField",
    "Scene", "builtin", "builtin_names", "load_scene", "save_scene",
    "make_grid", "integrate", "gauss_degree", "export_fields",
    "VerificationReport", "run_verification",
]
