"""Formal center manifold u = h(z, w) and the planar system on it.

The invariance equation in complex coordinates,

    h_z * dz/dT + h_w * dw/dT = du/dT |_{u = h},

is diagonal degree by degree: the coefficient of z^a w^b satisfies
(a - b - i*d) h_ab = -E_ab, where E_ab collects lower-order data.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import series
from .nfengine import DegenerateSystemError
from .scalar import GaussianRational, ParamSet, Scalar
from .sysmodel import ComplexSystemSpec, RealSystemSpec, check_invariant_plane, complexify, validate

I = GaussianRational(0, 1)


@dataclass
class ManifoldApprox:
    """Coefficients h_ab of z^a w^b, 2 <= a+b <= degree."""

    params: ParamSet
    coeffs: dict
    degree: int

    def is_zero(self) -> bool:
        return not self.coeffs

    def real_form(self) -> dict:
        """h as a polynomial in (x, y) via z = x + i y, w = x - i y."""
        ps = self.params
        one = Scalar.const(ps, 1)
        images = [{(1, 0): one, (0, 1): Scalar.const(ps, I)}, {(1, 0): one, (0, 1): Scalar.const(ps, -I)}]
        return series.substitute(self.coeffs, images, 2, ps)


def _as_complex(spec) -> ComplexSystemSpec:
    if isinstance(spec, RealSystemSpec):
        return complexify(spec)
    validate(spec).raise_if_invalid()
    return spec


def _images(ps: ParamSet, h: dict) -> list:
    one = Scalar.const(ps, 1)
    return [{(1, 0): one}, {(0, 1): one}, h]


def _invariance_defect(spec: ComplexSystemSpec, h: dict, N: int) -> dict:
    """h_z*dz + h_w*dw - du restricted to u = h, through degree N."""
    ps = spec.params
    dz, dw, du = spec.full_equations()
    img = _images(ps, h)
    dz2 = series.substitute(dz, img, 2, ps, N)
    dw2 = series.substitute(dw, img, 2, ps, N)
    du2 = series.substitute(du, img, 2, ps, N)
    out = series.mul(series.deriv(h, 0), dz2, N)
    out = series.add(out, series.mul(series.deriv(h, 1), dw2, N))
    return series.add(out, du2, -1)


def compute_manifold(spec, N: int) -> ManifoldApprox:
    spec = _as_complex(spec)
    if N < 2:
        raise ValueError("manifold degree N must be at least 2")
    ps = spec.params
    if check_invariant_plane(spec).invariant:
        return ManifoldApprox(ps, {}, N)
    h: dict = {}
    id_ = spec.d * I
    for n in range(2, N + 1):
        E = series.homogeneous_part(_invariance_defect(spec, h, n), n)
        for (a, b), c in sorted(E.items()):
            divisor = -id_ + (a - b)
            if divisor.is_zero():
                raise DegenerateSystemError(f"manifold divisor vanishes at z^{a} w^{b}")
            h[(a, b)] = -c / divisor
    return ManifoldApprox(ps, series.clean(h), N)


def manifold_residual(spec, approx: ManifoldApprox) -> dict:
    """Invariance defect through the approximation degree; empty when exact."""
    spec = _as_complex(spec)
    return _invariance_defect(spec, approx.coeffs, approx.degree)


def reduce_on_manifold(spec, approx: ManifoldApprox) -> ComplexSystemSpec:
    """Planar (z, w) system with u <- h, truncated at the approximation degree.

    Returned as a complex spec whose u-equation is the decoupled du/dT = i*d*u.
    """
    spec = _as_complex(spec)
    ps, N = spec.params, approx.degree
    dz, dw, _ = spec.full_equations()
    img = _images(ps, approx.coeffs)
    dz2 = series.substitute(dz, img, 2, ps, N)
    dw2 = series.substitute(dw, img, 2, ps, N)
    z_terms = {(a, b, 0): c for (a, b), c in dz2.items() if a + b >= 2}
    # dw/dT = -w - sum b_kj w^k z^j
    w_terms = {(b, a, 0): -c for (a, b), c in dw2.items() if a + b >= 2}
    for label, poly, lin in (("dz", dz2, (1, 0)), ("dw", dw2, (0, 1))):
        extra = [e for e in poly if sum(e) < 2 and e != lin]
        if extra:
            raise DegenerateSystemError(f"{label}: reduced system gained linear terms {extra}")
    name = f"{spec.name} on manifold" if spec.name else "reduced"
    max_deg = max([sum(k) for k in (*z_terms, *w_terms)] + [2])
    out = ComplexSystemSpec(ps, spec.d, z_terms, w_terms, {}, max_deg, spec.orientation, name)
    validate(out).raise_if_invalid()
    return out
