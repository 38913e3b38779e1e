"""Builders for the shipped example systems."""

from __future__ import annotations

from .expr import parse_scalar
from .fileformat import load_fixture
from .scalar import Param, ParamSet
from .sysmodel import ComplexSystemSpec, substitute_params


def moon_rand():
    """Real Moon-Rand system (orientation -1), parameters c0 (real, nonzero), c1, c2, c3."""
    return load_fixture("moon_rand")


def quad_complex():
    """Complex quadratic system with invariant plane u = 0, complex parameters and real r."""
    return load_fixture("quad_complex")


def linear():
    return load_fixture("linear")


def quad_real_family() -> ComplexSystemSpec:
    """The quadratic complex system restricted to its real concomitant family.

    a1 = a1r + i*a1i, b1 = b1r + i*b1i, c1 = c1r + i*c1i, a3 = a3r + i*a3i,
    a2 = conj(b1), b2 = conj(a1), c2 = conj(c1), b3 = -conj(a3), c3 = i*c3i.
    """
    names = ["a1r", "a1i", "b1r", "b1i", "c1r", "c1i", "a3r", "a3i", "c3i"]
    ps = ParamSet([Param(n, True, False) for n in names] + [Param("r", True, True)])
    e = lambda t: parse_scalar(t, ps)
    z = {(2, 0, 0): "a1r+i*a1i", (1, 1, 0): "b1r+i*b1i", (1, 0, 1): "c1r+i*c1i"}
    # b-coefficients: b_{200} = b2, b_{110} = a2, b_{101} = c2
    w = {(2, 0, 0): "a1r-i*a1i", (1, 1, 0): "b1r-i*b1i", (1, 0, 1): "c1r-i*c1i"}
    u = {(1, 0, 1): "a3r+i*a3i", (0, 1, 1): "-a3r+i*a3i", (0, 0, 2): "i*c3i"}
    conv = lambda m: {k: e(v) for k, v in m.items()}
    return ComplexSystemSpec(ps, e("r"), conv(z), conv(w), conv(u), name="quad_real_family")


def quad_condition_iv_numeric() -> ComplexSystemSpec:
    """Condition a2 = -a1, b1 = -b2 with a1 = 1, c1 = c2 = 0, r = 1, a3 = 1, b3 = -1, c3 = 0."""
    values = {"a1": "1", "b1": "-1", "c1": "0", "a2": "-1", "b2": "1", "c2": "0",
              "a3": "1", "b3": "-1", "c3": "0", "r": "1"}
    return substitute_params(quad_complex(), values)
