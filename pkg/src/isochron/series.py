"""Truncated polynomial algebra in phase variables.

A phase polynomial is a plain dict mapping exponent tuples (one entry per
phase variable, e.g. ``(k, j, l)`` for ``z^k w^j u^l``) to nonzero Scalars.
"""

from __future__ import annotations

from typing import Mapping

from .scalar import ParamSet, Scalar


def degree(e: tuple) -> int:
    return sum(e)


def clean(p: Mapping) -> dict:
    return {e: c for e, c in p.items() if not c.is_zero()}


def add(p: Mapping, q: Mapping, sign: int = 1) -> dict:
    out = dict(p)
    for e, c in q.items():
        if sign < 0:
            c = -c
        v = out.get(e)
        if v is None:
            if not c.is_zero():
                out[e] = c
        else:
            v = v + c
            if v.is_zero():
                del out[e]
            else:
                out[e] = v
    return out


def scale(p: Mapping, s) -> dict:
    return clean({e: c * s for e, c in p.items()})


def mul(p: Mapping, q: Mapping, max_degree: int | None = None) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        d1 = sum(e1)
        for e2, c2 in q.items():
            if max_degree is not None and d1 + sum(e2) > max_degree:
                continue
            e = tuple(x + y for x, y in zip(e1, e2))
            t = c1 * c2
            v = out.get(e)
            out[e] = t if v is None else v + t
    return clean(out)


def power(p: Mapping, n: int, nvars: int, params: ParamSet, max_degree: int | None = None) -> dict:
    result = {(0,) * nvars: Scalar.const(params, 1)}
    for _ in range(n):
        result = mul(result, p, max_degree)
    return result


def deriv(p: Mapping, var: int) -> dict:
    out = {}
    for e, c in p.items():
        k = e[var]
        if k:
            out[e[:var] + (k - 1,) + e[var + 1:]] = c * k
    return out


def truncate(p: Mapping, max_degree: int) -> dict:
    return {e: c for e, c in p.items() if sum(e) <= max_degree}


def homogeneous_part(p: Mapping, n: int) -> dict:
    return {e: c for e, c in p.items() if sum(e) == n}


def substitute(p: Mapping, images: list, nout: int, params: ParamSet, max_degree: int | None = None) -> dict:
    """Compose: replace phase variable k by the polynomial ``images[k]`` in
    ``nout`` new variables.  ``images`` may hold ``None`` for variables that
    must not appear.
    """
    if not p:
        return {}
    cache: dict = {}

    def pw(k, n):
        key = (k, n)
        if key not in cache:
            if n == 0:
                cache[key] = {(0,) * nout: Scalar.const(params, 1)}
            else:
                cache[key] = mul(pw(k, n - 1), images[k], max_degree)
        return cache[key]

    out: dict = {}
    for e, c in p.items():
        term = {(0,) * nout: c}
        for k, x in enumerate(e):
            if x:
                if images[k] is None:
                    raise ValueError(f"phase variable {k} has no image")
                term = mul(term, pw(k, x), max_degree)
        out = add(out, term)
    return out
