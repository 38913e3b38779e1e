"""Isochronous constants of 3D polynomial systems on center manifolds."""

from .scalar import GaussianRational, Param, ParamPoly, ParamSet, Scalar
from .expr import parse_expr, parse_scalar, print_scalar, lower

__version__ = "0.1.0"
