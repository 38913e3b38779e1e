"""Dense undetermined-coefficients solver used to cross-check the engine.

For each total degree n every monomial of degree n is an unknown.  The
operator L (f -> df/dT - f, or g -> dg/dT + g) is applied to each basis
monomial separately and to the already-known lower-degree part; matching the
degree-n coefficients gives a square linear system that is solved by plain
Gaussian elimination.  Nothing here relies on the system matrix being
diagonal, and none of the engine's sparse extraction is reused.
"""

from __future__ import annotations

from itertools import product

from .nfengine import CoefficientTable, PhaseSeries
from .scalar import GaussianRational, Scalar
from .sysmodel import ComplexSystemSpec, RealSystemSpec, complexify, validate


class OracleError(ArithmeticError):
    pass


def _monomials(n: int) -> list[tuple]:
    return [(a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1)]


def _pmul(p: dict, q: dict, cap: int) -> dict:
    out: dict = {}
    for (e1, c1), (e2, c2) in product(p.items(), q.items()):
        e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
        if sum(e) > cap:
            continue
        out[e] = out[e] + c1 * c2 if e in out else c1 * c2
    return {e: c for e, c in out.items() if not c.is_zero()}


def _pderiv(p: dict, k: int) -> dict:
    out = {}
    for e, c in p.items():
        if e[k]:
            e2 = list(e)
            e2[k] -= 1
            out[tuple(e2)] = c * e[k]
    return out


def _padd(p: dict, q: dict, s: int = 1) -> dict:
    out = dict(p)
    for e, c in q.items():
        out[e] = out[e] + c * s if e in out else c * s
    return {e: c for e, c in out.items() if not c.is_zero()}


def _vector_field(spec: ComplexSystemSpec) -> list[dict]:
    """(dz/dT, dw/dT, du/dT) rebuilt from the coefficient maps, keyed z^k w^j u^l."""
    ps = spec.params
    one = Scalar.const(ps, 1)
    dz = {(1, 0, 0): one}
    dz = _padd(dz, dict(spec.z_terms))
    dw = {(0, 1, 0): -one}
    # b_kjl multiplies w^k z^j u^l and enters with a minus sign
    dw = _padd(dw, {(j, k, l): c for (k, j, l), c in spec.w_terms.items()}, -1)
    du = {(0, 0, 1): spec.d * Scalar.const(ps, GaussianRational(0, 1))}
    du = _padd(du, dict(spec.u_terms))
    return [dz, dw, du]


def _apply(field: list, poly: dict, sign: int, cap: int) -> dict:
    """grad(poly) . field + sign*poly, truncated at total degree ``cap``."""
    out = {e: c * sign for e, c in poly.items()}
    for k in range(3):
        out = _padd(out, _pmul(_pderiv(poly, k), field[k], cap))
    return out


def _gauss_solve(A: list[list[Scalar]], rhs: list[Scalar]) -> list[Scalar]:
    n = len(A)
    M = [row[:] + [r] for row, r in zip(A, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not M[r][col].is_zero()), None)
        if piv is None:
            raise OracleError("singular coefficient-matching system")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _is_numeric(spec: ComplexSystemSpec) -> bool:
    coeffs = [spec.d, *spec.z_terms.values(), *spec.w_terms.values(), *spec.u_terms.values()]
    return all(c.is_constant() for c in coeffs)


def dense_solve(spec, M: int, target: str = "f", symbolic: bool = False):
    """Same contract as ``compute_f`` / ``compute_g``.

    Intended for numeric coefficients; pass ``symbolic=True`` to allow
    parameters (slow, no attempt at efficiency).
    """
    if isinstance(spec, RealSystemSpec):
        spec = complexify(spec)
    validate(spec).raise_if_invalid()
    if target not in ("f", "g"):
        raise ValueError("target must be 'f' or 'g'")
    if M < 1:
        raise ValueError("order M must be at least 1")
    if not symbolic and not _is_numeric(spec):
        raise ValueError("dense_solve expects numeric coefficients (pass symbolic=True to override)")
    ps = spec.params
    zero, one = Scalar.const(ps, 0), Scalar.const(ps, 1)
    field = _vector_field(spec)
    N = 2 * M + 1
    if target == "f":
        sign, lead = -1, (1, 0, 0)
        resonant = lambda m: (m + 1, m, 0)
    else:
        sign, lead = 1, (0, 1, 0)
        resonant = lambda m: (m, m + 1, 0)
    known = {lead: one}
    constants = []
    for n in range(2, N + 1):
        base = _apply(field, known, sign, n)
        rows = _monomials(n)
        res = resonant(n // 2) if n % 2 else None
        unknowns = [e for e in rows if e != res]
        cols = []
        for e in unknowns:
            img = _apply(field, {e: one}, sign, n)
            cols.append([img.get(r, zero) for r in rows])
        if res is not None:
            # the constant enters as -kappa * (resonant monomial)
            cols.append([-one if r == res else zero for r in rows])
        A = [[col[i] for col in cols] for i in range(len(rows))]
        rhs = [-base.get(r, zero) for r in rows]
        sol = _gauss_solve(A, rhs)
        for e, v in zip(unknowns, sol):
            if not v.is_zero():
                known[e] = v
        if res is not None:
            constants.append(sol[-1])
    if target == "f":
        coeffs = dict(known)
    else:
        coeffs = {(w, z, u): c for (z, w, u), c in known.items()}
    witness = [(0, 1, 0), (0, 0, 1)] + [(m + 1, m, 0) for m in range(1, M + 1)]
    return CoefficientTable(PhaseSeries(coeffs, N), witness, kind=target), constants
