"""Scherk's first surface, the helicoid, and numerical checks of their decompositions."""

from .errors import (BadBracket, CorePoint, DerivativeUnavailable, EmptyGrid, InvalidAngle,
                     InvalidPair, IoFailure, LogBranchPoint, NonFiniteEnergy, PoleError,
                     ScherkError)
from .surface import (PRINCIPAL, BranchPolicy, CoreSet, GrainAngle, HeightSample, Point, Window,
                      cores_in_window, helicoid_height, helicoid_limit_error, scherk_gradient,
                      scherk_height, scherk_hessian)

__version__ = "0.1.0"
