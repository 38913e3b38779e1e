"""Real and complex 3D polynomial systems with a center-type linear part.

Real form (orientation ``sigma`` = +1 or -1)::

    dx/dt = -sigma*y + sum A_kjl x^k y^j u^l
    dy/dt =  sigma*x + sum B_kjl x^k y^j u^l
    du/dt = -d*u     + sum D_kjl x^k y^j u^l

Complex (concomitant) form::

    dz/dT =  z + sum a_kjl z^k w^j u^l
    dw/dT = -w - sum b_kjl w^k z^j u^l      (note the swapped z/w roles)
    du/dT = i*d*u + sum d_kjl z^k w^j u^l

The coefficient maps hold only the terms beyond the canonical linear part;
any linear key found there is reported by :func:`validate` as a linear-part
mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import series
from .expr import parse_scalar
from .scalar import EvaluationError, GaussianRational, ParamSet, Scalar, UsageError

I = GaussianRational(0, 1)


class SpecError(ValueError):
    """A system spec is malformed or an operation's preconditions fail."""


class RealityError(SpecError):
    """A complex spec is not the concomitant of any real system."""


class SubstitutionError(SpecError):
    pass


@dataclass(frozen=True, eq=False)
class RealSystemSpec:
    params: ParamSet
    d: Scalar
    orientation: int
    x_terms: Mapping[tuple, Scalar]
    y_terms: Mapping[tuple, Scalar]
    u_terms: Mapping[tuple, Scalar]
    max_degree: int | None = None
    name: str = ""

    def __post_init__(self):
        if self.max_degree is None:
            degs = [sum(e) for m in (self.x_terms, self.y_terms, self.u_terms) for e in m]
            object.__setattr__(self, "max_degree", max(degs + [2]))

    def full_equations(self) -> tuple[dict, dict, dict]:
        """Right-hand sides including the linear part, keyed by (k, j, l)."""
        ps, s = self.params, self.orientation
        X = series.add({(0, 1, 0): Scalar.const(ps, -s)}, self.x_terms)
        Y = series.add({(1, 0, 0): Scalar.const(ps, s)}, self.y_terms)
        U = series.add({(0, 0, 1): -self.d}, self.u_terms)
        return X, Y, U

    def __eq__(self, other) -> bool:
        if not isinstance(other, RealSystemSpec):
            return NotImplemented
        return (
            self.params == other.params
            and self.orientation == other.orientation
            and self.d == other.d
            and dict(self.x_terms) == dict(other.x_terms)
            and dict(self.y_terms) == dict(other.y_terms)
            and dict(self.u_terms) == dict(other.u_terms)
        )


@dataclass(frozen=True, eq=False)
class ComplexSystemSpec:
    params: ParamSet
    d: Scalar
    z_terms: Mapping[tuple, Scalar]
    w_terms: Mapping[tuple, Scalar]
    u_terms: Mapping[tuple, Scalar]
    max_degree: int | None = None
    orientation: int = 1
    name: str = ""

    def __post_init__(self):
        if self.max_degree is None:
            degs = [sum(e) for m in (self.z_terms, self.w_terms, self.u_terms) for e in m]
            object.__setattr__(self, "max_degree", max(degs + [2]))

    def full_equations(self) -> tuple[dict, dict, dict]:
        """(dz/dT, dw/dT, du/dT) as polynomials keyed by (z, w, u) exponents."""
        ps = self.params
        dz = series.add({(1, 0, 0): Scalar.const(ps, 1)}, self.z_terms)
        dw = {(0, 1, 0): Scalar.const(ps, -1)}
        dw = series.add(dw, {(j, k, l): -c for (k, j, l), c in self.w_terms.items()})
        du = series.add({(0, 0, 1): self.d * I}, self.u_terms)
        return dz, dw, du

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexSystemSpec):
            return NotImplemented
        return (
            self.params == other.params
            and self.d == other.d
            and dict(self.z_terms) == dict(other.z_terms)
            and dict(self.w_terms) == dict(other.w_terms)
            and dict(self.u_terms) == dict(other.u_terms)
        )


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok

    def raise_if_invalid(self) -> None:
        if self.issues:
            raise SpecError("; ".join(self.issues))


def _provably_nonzero(s: Scalar) -> bool:
    """True when num and den are constant multiples of monomials in
    declared-nonzero parameters."""
    if s.is_zero():
        return False
    for poly in (s.num, s.den):
        if len(poly.terms) != 1:
            return False
        (e, _), = poly.terms.items()
        for p, x in zip(s.params.params, e):
            if x and not p.nonzero:
                return False
    return True


def _is_real_scalar(s: Scalar) -> bool:
    if any(not s.params[n].real for n in s.variables()):
        return False
    return s.conjugate() == s


def _check_terms(label: str, terms: Mapping, spec, report: ValidationReport) -> None:
    for key, c in terms.items():
        if (not isinstance(key, tuple) or len(key) != 3
                or not all(isinstance(x, int) and x >= 0 for x in key)):
            report.issues.append(f"{label}: malformed exponent key {key!r}")
            continue
        n = sum(key)
        if n < 2:
            report.issues.append(f"{label}: linear part mismatch, extra term {key} (linear terms are fixed)")
        elif n > spec.max_degree:
            report.issues.append(f"{label}: term {key} exceeds max_degree {spec.max_degree}")
        if not isinstance(c, Scalar):
            report.issues.append(f"{label}: coefficient of {key} is not a Scalar")
            continue
        if c.params != spec.params:
            report.issues.append(f"{label}: coefficient of {key} uses a different parameter set")
        if c.is_zero():
            report.issues.append(f"{label}: zero coefficient stored for {key} (canonical-form violation)")


def validate(spec: RealSystemSpec | ComplexSystemSpec) -> ValidationReport:
    report = ValidationReport()
    if isinstance(spec, RealSystemSpec):
        labels = ("dx", "dy", "du")
        maps = (spec.x_terms, spec.y_terms, spec.u_terms)
        if spec.orientation not in (1, -1):
            report.issues.append(f"orientation must be +1 or -1, got {spec.orientation!r}")
    elif isinstance(spec, ComplexSystemSpec):
        labels = ("dz", "dw", "du")
        maps = (spec.z_terms, spec.w_terms, spec.u_terms)
        if spec.orientation not in (1, -1):
            report.issues.append(f"orientation must be +1 or -1, got {spec.orientation!r}")
    else:
        return ValidationReport([f"not a system spec: {type(spec).__name__}"])
    if spec.max_degree < 2:
        report.issues.append("max_degree must be at least 2")
    if not isinstance(spec.d, Scalar) or spec.d.params != spec.params:
        report.issues.append("d must be a Scalar over the spec's parameters")
    else:
        if spec.d.is_zero():
            report.issues.append("d is zero")
        elif not _provably_nonzero(spec.d):
            report.issues.append(f"d = {spec.d} is not provably nonzero from the declarations")
        if not _is_real_scalar(spec.d):
            report.issues.append(f"d = {spec.d} is not real under the declarations")
    for label, terms in zip(labels, maps):
        _check_terms(label, terms, spec, report)
    return report


# ---------------------------------------------------------------------------


def _linear_image(ps: ParamSet, cz, cw) -> dict:
    return series.clean({(1, 0, 0): Scalar.const(ps, cz), (0, 1, 0): Scalar.const(ps, cw)})


def _split_linear(poly: dict, expected: dict, label: str) -> dict:
    """Remove the expected linear part; complain if the rest has linear terms."""
    rest = series.add(poly, expected, -1)
    for key in rest:
        if sum(key) < 2:
            raise SpecError(f"{label}: unexpected linear term {key} after transformation")
    return rest


def complexify(spec: RealSystemSpec) -> ComplexSystemSpec:
    """Concomitant complex system: z = x + i y, w = x - i y, dt/dT = -i*sigma.

    With this time scaling dz/dT = z + h.o.t. for both orientations, and the
    u-equation's linear coefficient becomes i*(sigma*d)*u.
    """
    validate(spec).raise_if_invalid()
    ps, s = spec.params, spec.orientation
    X, Y, U = spec.full_equations()
    half = GaussianRational(Fraction(1, 2))
    images = [
        _linear_image(ps, half, half),  # x = (z + w)/2
        _linear_image(ps, -I * half, I * half),  # y = (z - w)/(2i)
        {(0, 0, 1): Scalar.const(ps, 1)},
    ]
    Xc = series.substitute(X, images, 3, ps)
    Yc = series.substitute(Y, images, 3, ps)
    Uc = series.substitute(U, images, 3, ps)
    factor = -I * s
    dz = series.scale(series.add(Xc, series.scale(Yc, I)), factor)
    dw = series.scale(series.add(Xc, series.scale(Yc, -I)), factor)
    du = series.scale(Uc, factor)
    d_eff = spec.d * s
    one = Scalar.const(ps, 1)
    z_terms = _split_linear(dz, {(1, 0, 0): one}, "dz")
    w_poly = _split_linear(dw, {(0, 1, 0): -one}, "dw")
    u_terms = _split_linear(du, {(0, 0, 1): d_eff * I}, "du")
    w_terms = {(k, j, l): -c for (j, k, l), c in w_poly.items()}
    out = ComplexSystemSpec(ps, d_eff, z_terms, w_terms, u_terms, spec.max_degree, s, spec.name)
    validate(out).raise_if_invalid()
    return out


def check_reality(spec: ComplexSystemSpec) -> None:
    """Raise RealityError unless the spec is the concomitant of a real system."""
    ps = spec.params
    for label, terms in (("a", spec.z_terms), ("b", spec.w_terms), ("d", spec.u_terms)):
        for key, c in terms.items():
            for n in c.variables():
                if not ps[n].real:
                    raise RealityError(f"{label}{key}: parameter {n!r} is not declared real, reality cannot be decided")
    if not _is_real_scalar(spec.d):
        raise RealityError(f"d = {spec.d} is not real")
    zero = Scalar.const(ps, 0)
    for key in sorted(set(spec.z_terms) | set(spec.w_terms)):
        a = spec.z_terms.get(key, zero)
        b = spec.w_terms.get(key, zero)
        if b != a.conjugate():
            raise RealityError(f"b{key} = {b} is not the conjugate of a{key} = {a}")
    for (k, j, l), c in sorted(spec.u_terms.items()):
        partner = spec.u_terms.get((j, k, l), zero)
        if c != -partner.conjugate():
            raise RealityError(f"d{(k, j, l)} = {c} is not minus the conjugate of d{(j, k, l)} = {partner}")


def realify(spec: ComplexSystemSpec, orientation: int | None = None) -> RealSystemSpec:
    """Inverse of :func:`complexify`; ``orientation`` defaults to the spec's."""
    validate(spec).raise_if_invalid()
    check_reality(spec)
    s = spec.orientation if orientation is None else orientation
    ps = spec.params
    dz, dw, du = spec.full_equations()
    images = [
        _linear_image(ps, 1, I),  # z = x + i y
        _linear_image(ps, 1, -I),  # w = x - i y
        {(0, 0, 1): Scalar.const(ps, 1)},
    ]
    factor = I * s
    A = series.scale(series.substitute(dz, images, 3, ps), factor)
    B = series.scale(series.substitute(dw, images, 3, ps), factor)
    X = series.scale(series.add(A, B), GaussianRational(Fraction(1, 2)))
    Y = series.scale(series.add(A, B, -1), (2 * I).inverse())
    U = series.scale(series.substitute(du, images, 3, ps), factor)
    for label, poly in (("dx", X), ("dy", Y), ("du", U)):
        for key, c in poly.items():
            if not _is_real_scalar(c):
                raise RealityError(f"{label}: coefficient of {key} is not real: {c}")
    d = spec.d * s
    one = Scalar.const(ps, 1)
    x_terms = _split_linear(X, {(0, 1, 0): -one * s}, "dx")
    y_terms = _split_linear(Y, {(1, 0, 0): one * s}, "dy")
    u_terms = _split_linear(U, {(0, 0, 1): -d}, "du")
    out = RealSystemSpec(ps, d, s, x_terms, y_terms, u_terms, spec.max_degree, spec.name)
    validate(out).raise_if_invalid()
    return out


def embed_2d(x_terms: Mapping, y_terms: Mapping, params: ParamSet, orientation: int = 1, name: str = "") -> RealSystemSpec:
    """Planar system as a 3D spec with a decoupled u' = -u."""
    def lift(terms, label):
        out = {}
        for key, c in terms.items():
            if not isinstance(key, tuple) or len(key) != 2 or sum(key) < 2 or min(key) < 0:
                raise SpecError(f"{label}: malformed 2D term {key!r}")
            if not isinstance(c, Scalar):
                c = Scalar.const(params, c)
            if not c.is_zero():
                out[(key[0], key[1], 0)] = c
        return out

    spec = RealSystemSpec(params, Scalar.const(params, 1), orientation, lift(x_terms, "dx"), lift(y_terms, "dy"), {}, name=name)
    validate(spec).raise_if_invalid()
    return spec


def embed_2d_complex(z_terms: Mapping, w_terms: Mapping, params: ParamSet, name: str = "") -> ComplexSystemSpec:
    """Planar concomitant system (a_kj, b_kj) as a 3D complex spec with du/dT = i*u."""
    z3 = {(k, j, 0): c for (k, j), c in z_terms.items() if not c.is_zero()}
    w3 = {(k, j, 0): c for (k, j), c in w_terms.items() if not c.is_zero()}
    spec = ComplexSystemSpec(params, Scalar.const(params, 1), z3, w3, {}, name=name)
    validate(spec).raise_if_invalid()
    return spec


@dataclass(frozen=True)
class InvariantPlane:
    invariant: bool
    cofactor: dict | None


def check_invariant_plane(spec: ComplexSystemSpec) -> InvariantPlane:
    """Decide whether u = 0 is invariant; if so return K with du/dT = K*u."""
    if any(l == 0 for (_, _, l) in spec.u_terms):
        return InvariantPlane(False, None)
    K = {(0, 0, 0): spec.d * I}
    for (k, j, l), c in spec.u_terms.items():
        K = series.add(K, {(k, j, l - 1): c})
    return InvariantPlane(True, K)


def _coerce_subs(subs: Mapping, old: ParamSet, new: ParamSet) -> dict:
    out = {}
    for name, value in subs.items():
        if name not in old:
            raise SubstitutionError(f"cannot substitute unknown parameter {name!r}")
        if isinstance(value, str):
            value = parse_scalar(value, new)
        elif isinstance(value, Scalar):
            try:
                value = value.rebase(new) if value.params != new else value
            except UsageError:
                raise SubstitutionError(f"value for {name!r} uses a substituted parameter") from None
        else:
            value = Scalar.const(new, value)
        out[name] = value
    return out


def substitute_params(spec, subs: Mapping):
    """Simultaneously replace parameters; the result lives on the reduced ParamSet."""
    old = spec.params
    new = old.without(subs.keys())
    values = _coerce_subs(subs, old, new)

    def sub(c: Scalar) -> Scalar:
        try:
            return c.substitute(values, new)
        except (EvaluationError, ZeroDivisionError) as exc:
            raise SubstitutionError(f"substitution makes a denominator vanish: {exc}") from None

    def sub_map(m):
        out = {}
        for key, c in m.items():
            v = sub(c)
            if not v.is_zero():
                out[key] = v
        return out

    d = sub(spec.d)
    if d.is_zero():
        raise SubstitutionError("substitution sends d to zero")
    if isinstance(spec, RealSystemSpec):
        out = RealSystemSpec(new, d, spec.orientation, sub_map(spec.x_terms), sub_map(spec.y_terms),
                             sub_map(spec.u_terms), spec.max_degree, spec.name)
    else:
        out = ComplexSystemSpec(new, d, sub_map(spec.z_terms), sub_map(spec.w_terms), sub_map(spec.u_terms),
                                spec.max_degree, spec.orientation, spec.name)
    validate(out).raise_if_invalid()
    return out


def drop_u_equation(spec: RealSystemSpec) -> tuple[dict, dict]:
    """(x_terms, y_terms) of the planar part, keyed by (k, j); requires no u-dependence."""
    out = []
    for label, terms in (("dx", spec.x_terms), ("dy", spec.y_terms)):
        m = {}
        for (k, j, l), c in terms.items():
            if l:
                raise SpecError(f"{label} depends on u")
            m[(k, j)] = c
        out.append(m)
    return out[0], out[1]
