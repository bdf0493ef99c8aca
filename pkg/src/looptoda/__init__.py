"""Loop-group Toda equations: rational dressing, soliton solutions and their numerical verification."""

from .dressing import DressingData, gamma_dressing, gamma_inv_dressing
from .errors import (DimensionError, PoleError, SingularFieldError, SingularMatrixError, TodaError,
                     ValidationError)
from .harness import GridSpec, VerificationReport, campaign, equivalence_report, residual_report, sample_field
from .model import CoordinateMode, GammaField, TodaSystem, apply_symmetry, build_system, toda_residual
from .solitons import (SolitonData, gamma_multi_soliton, gamma_one_soliton, gamma_soliton_e28)

__version__ = "0.1.0"

__all__ = [
    "CoordinateMode", "DimensionError", "DressingData", "GammaField", "GridSpec", "PoleError",
    "SingularFieldError", "SingularMatrixError", "SolitonData", "TodaError", "TodaSystem",
    "ValidationError", "VerificationReport", "apply_symmetry", "build_system", "campaign",
    "equivalence_report", "gamma_dressing", "gamma_inv_dressing", "gamma_multi_soliton",
    "gamma_one_soliton", "gamma_soliton_e28", "residual_report", "sample_field", "toda_residual",
]
