"""Inelastic matter-wave scattering on a Bose-Einstein condensate in a double well."""

__version__ = "0.1.0"

from .bhcore import (BHParams, EigenSystem, LevelTag, QMatrix, SeparatrixInfo,
                     diagonalize, q_matrix, separatrix)
from .errors import DimerscatError, NumericalError, ValidationError
from .meanfield import BlochState, MFParams, Trajectory, integrate
from .scattering import LeadParams, RescaledTarget, rescale, s_matrix, sweep

__all__ = [
    "BHParams", "BlochState", "DimerscatError", "EigenSystem", "LeadParams",
    "LevelTag", "MFParams", "NumericalError", "QMatrix", "RescaledTarget",
    "SeparatrixInfo", "Trajectory", "ValidationError", "diagonalize", "integrate",
    "q_matrix", "rescale", "s_matrix", "separatrix", "sweep",
]
