"""Isochronous constants by direct recursion on the complex 3D system.

For the concomitant system the engine builds, degree by degree, the formal
series f = z + sum c_abg z^a w^b u^g with

    df/dT - f = z * sum_m p_m (zw)^m

and g = w + sum e_abg w^a z^b u^g with

    dg/dT + g = w * sum_m q_m (zw)^m .

The sign of q_m is chosen so that for the concomitant of a real system
q_m = -conj(p_m), which is the convention of the tabulated constants for the
Moon-Rand and quadratic families.

Coefficients are read off the sparse product of the already-known part of
f with the nonlinear terms of the vector field, so every index stays inside
the table.  Resonant monomials z^(m+1) w^m yield the constants instead of a
coefficient; all other monomials are divided by 1 + b - a - i*d*g.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import series
from .scalar import GaussianRational, ParamPoly, ParamSet, Scalar, real_imag_split
from .sysmodel import ComplexSystemSpec, RealSystemSpec, complexify, substitute_params, validate

I = GaussianRational(0, 1)

TAU_CAVEAT = (
    "tau_m = p_m + q_m and mu_m = p_m - q_m coincide with the period constant and the "
    "singular point quantity only when all constants of lower order vanish on the reduced "
    "system; mu_m is not a singular point quantity in general."
)


class DegenerateSystemError(ArithmeticError):
    """A homological divisor vanished away from the resonant family."""


@dataclass
class PhaseSeries:
    coeffs: dict
    truncation_degree: int

    def __getitem__(self, key) -> Scalar | None:
        return self.coeffs.get(key)


@dataclass
class CoefficientTable:
    """Coefficients of f (kind 'f', keyed z^a w^b u^g) or g (kind 'g', keyed w^a z^b u^g)."""

    series: PhaseSeries
    normalization_witness: list
    kind: str = "f"
    pruned: bool = False

    def coefficient(self, a: int, b: int, g: int, params: ParamSet) -> Scalar:
        if a < 0 or b < 0 or g < 0:
            return Scalar.const(params, 0)
        c = self.series.coeffs.get((a, b, g))
        return c if c is not None else Scalar.const(params, 0)


@dataclass
class ConstantRecord:
    m: int
    p: Scalar
    q: Scalar
    tau: Scalar
    mu: Scalar


@dataclass
class ConstantsReport:
    records: list
    reduced_under: str
    spec: ComplexSystemSpec
    caveat: str = TAU_CAVEAT
    subs_chain: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.records)

    def p(self, m: int) -> Scalar:
        return self.records[m - 1].p

    def q(self, m: int) -> Scalar:
        return self.records[m - 1].q

    def all_zero(self) -> bool:
        return all(r.p.is_zero() and r.q.is_zero() for r in self.records)

    def first_nonzero(self) -> int | None:
        for r in self.records:
            if not (r.p.is_zero() and r.q.is_zero()):
                return r.m
        return None


def _nonlinear_terms(spec: ComplexSystemSpec) -> list:
    """(kind, key, coeff) with keys in (z, w, u) exponent order.

    kind 'z': term of Z, 'w': term of W (dw/dT = -W), 'u': term of U.
    """
    terms = [("z", k, c) for k, c in spec.z_terms.items()]
    terms += [("w", (j, k, l), c) for (k, j, l), c in spec.w_terms.items()]
    terms += [("u", k, c) for k, c in spec.u_terms.items()]
    return terms


def _u_drop_rate(spec: ComplexSystemSpec) -> float:
    """Minimal degree gain per unit of u-degree removed (inf if U has no u-free terms)."""
    rates = [sum(k) - 1 for k in spec.u_terms if k[2] == 0]
    return min(rates) if rates else float("inf")


def _swap(spec: ComplexSystemSpec) -> ComplexSystemSpec:
    """System seen in (w, z, u) with reversed time: its f-series is the g-series."""
    return ComplexSystemSpec(
        spec.params,
        -spec.d,
        dict(spec.w_terms),
        dict(spec.z_terms),
        {(j, k, l): -c for (k, j, l), c in spec.u_terms.items()},
        spec.max_degree,
        spec.orientation,
        spec.name,
    )


def _as_complex(spec) -> ComplexSystemSpec:
    if isinstance(spec, RealSystemSpec):
        return complexify(spec)
    validate(spec).raise_if_invalid()
    return spec


def _solve(spec: ComplexSystemSpec, M: int, prune: bool, seed: int | None):
    if M < 1:
        raise ValueError("order M must be at least 1")
    ps = spec.params
    N = 2 * M + 1
    rate = _u_drop_rate(spec) if prune else 0

    def needed(n, g):
        return not prune or (g == 0 or n + g * rate <= N)

    id_ = spec.d * I
    by_degree: dict[int, list] = {}
    for t in _nonlinear_terms(spec):
        by_degree.setdefault(sum(t[1]), []).append(t)
    layers: dict[int, list] = {1: [((1, 0, 0), Scalar.const(ps, 1))]}
    coeffs = {(1, 0, 0): Scalar.const(ps, 1)}
    constants = []
    witness = [(0, 1, 0), (0, 0, 1)]
    rng = random.Random(seed) if seed is not None else None
    for n in range(2, N + 1):
        contrib: dict[tuple, list] = {}
        for s in range(2, n + 1):
            terms = by_degree.get(s)
            src = layers.get(n - s + 1)
            if not terms or not src:
                continue
            if rng is not None:
                terms = rng.sample(terms, len(terms))
                src = rng.sample(src, len(src))
            for kind, (k, j, l), coef in terms:
                for (a, b, g), c in src:
                    if kind == "z":
                        if not a:
                            continue
                        tgt = (a - 1 + k, b + j, g + l)
                        factor = a
                    elif kind == "w":
                        if not b:
                            continue
                        tgt = (a + k, b - 1 + j, g + l)
                        factor = -b
                    else:
                        if not g:
                            continue
                        tgt = (a + k, b + j, g - 1 + l)
                        factor = g
                    if not needed(n, tgt[2]):
                        continue
                    contrib.setdefault(tgt, []).append(c * coef * factor)
        layer = []
        resonant = (n // 2 + 1, n // 2, 0) if n % 2 else None
        if resonant is not None:
            witness.append(resonant)
            vals = contrib.pop(resonant, None)
            constants.append(_sum(vals, ps))
        keys = list(contrib)
        if rng is not None:
            rng.shuffle(keys)
        for key in keys:
            R = _sum(contrib[key], ps)
            if R.is_zero():
                continue
            a, b, g = key
            divisor = -id_ * g + (1 + b - a)
            if divisor.is_zero():
                raise DegenerateSystemError(f"homological divisor vanishes at z^{a} w^{b} u^{g}")
            c = R / divisor
            coeffs[key] = c
            layer.append((key, c))
        layer.sort(key=lambda t: t[0], reverse=True)
        layers[n] = layer
    table = CoefficientTable(PhaseSeries(coeffs, N), witness, pruned=prune)
    return table, constants


def _sum(values: Iterable[Scalar] | None, params: ParamSet) -> Scalar:
    total = Scalar.const(params, 0)
    if not values:
        return total
    # combine equal denominators first to limit gcd work
    groups: dict = {}
    for v in values:
        key = frozenset(v.den.terms.items())
        groups.setdefault(key, []).append(v)
    for vs in groups.values():
        acc = vs[0]
        if len(vs) > 1:
            num = ParamPoly.zero(params)
            for v in vs:
                num = num + v.num
            acc = Scalar(num, vs[0].den)
        total = total + acc
    return total


def compute_f(spec, M: int, prune: bool = False, seed: int | None = None):
    """Return (table of c_abg, [p'_1, ..., p'_M]).

    ``prune`` skips coefficients that cannot reach a resonant monomial of
    degree <= 2M+1 (the constants are unchanged; the table is partial).
    ``seed`` shuffles the traversal inside each degree.
    """
    spec = _as_complex(spec)
    table, consts = _solve(spec, M, prune, seed)
    return table, consts


def compute_g(spec, M: int, prune: bool = False, seed: int | None = None):
    """Return (table of e_abg keyed w^a z^b u^g, [q'_1, ..., q'_M])."""
    spec = _as_complex(spec)
    table, consts = _solve(_swap(spec), M, prune, seed)
    table.kind = "g"
    # the swapped system yields dg/dT + g = -w*sum(c_m (zw)^m); report q_m = -c_m
    return table, [-c for c in consts]


def residual(spec, table: CoefficientTable, constants: Sequence[Scalar]) -> dict:
    """Series of the defining identity minus its right-hand side, through the
    truncation degree; empty for a correct full table."""
    spec = _as_complex(spec)
    ps = spec.params
    N = table.series.truncation_degree
    dz, dw, du = spec.full_equations()
    if table.kind == "f":
        f = dict(table.series.coeffs)
        sign = -1
        resonant_factor = lambda m: (m + 1, m, 0)
    else:
        f = {(b, a, g): c for (a, b, g), c in table.series.coeffs.items()}
        sign = 1
        resonant_factor = lambda m: (m, m + 1, 0)
    total = {}
    for var, field_ in ((0, dz), (1, dw), (2, du)):
        total = series.add(total, series.mul(series.deriv(f, var), field_, N))
    total = series.add(total, f, sign)
    for m, p in enumerate(constants, start=1):
        if 2 * m + 1 > N:
            break
        total = series.add(total, {resonant_factor(m): p}, -1)
    return series.truncate(total, N)


def _apply_chain(spec, subs_chain):
    applied = []
    for subs in subs_chain:
        if not subs:
            continue
        spec = substitute_params(spec, subs)
        applied.append({k: (v if isinstance(v, str) else str(v)) for k, v in subs.items()})
    return spec, applied


def _describe_chain(applied: list) -> str:
    if not applied:
        return "(none)"
    return "; ".join(", ".join(f"{k}={v}" for k, v in step.items()) for step in applied)


def constants_report(spec, M: int, subs_chain: Sequence[Mapping] = (), prune: bool = True,
                     seed: int | None = None) -> ConstantsReport:
    spec = _as_complex(spec)
    spec, applied = _apply_chain(spec, subs_chain)
    _, ps_ = compute_f(spec, M, prune=prune, seed=seed)
    _, qs_ = compute_g(spec, M, prune=prune, seed=seed)
    records = [ConstantRecord(m, p, q, p + q, p - q) for m, (p, q) in enumerate(zip(ps_, qs_), start=1)]
    return ConstantsReport(records, _describe_chain(applied), spec, subs_chain=applied)


def _strip_nonzero_monomial(p: ParamPoly) -> ParamPoly:
    params = p.params
    common = None
    for e in p.terms:
        common = list(e) if common is None else [min(x, y) for x, y in zip(common, e)]
    for k, prm in enumerate(params.params):
        if not prm.nonzero:
            common[k] = 0
    if not any(common):
        return p
    return p.exact_div(ParamPoly(params, {tuple(common): 1}))


def vanishing_conditions(report: ConstantsReport, reals: ParamSet | None = None) -> list:
    """Per order m, the distinct real polynomial conditions for p_m = q_m = 0.

    Returns ``[(m, [ParamPoly, ...]), ...]`` for the orders with at least one
    condition; monomial factors in declared-nonzero parameters are removed and
    conditions are compared up to a rational factor.
    """
    out = []
    for rec in report.records:
        conds: list = []
        for s in (rec.p, rec.q):
            for part in real_imag_split(s, reals):
                if part.is_zero():
                    continue
                c = _strip_nonzero_monomial(part).canonical()
                if c not in conds:
                    conds.append(c)
        if conds:
            out.append((rec.m, conds))
    return out
