"""Exact arithmetic: Gaussian rationals, sparse polynomials over declared
parameters, and normalized rational functions.

Monomials are ordered graded-lexicographically, with the first declared
parameter most significant.  A :class:`Scalar` is kept in lowest terms with
Gaussian-integer coefficients whose rational-integer content is 1 and whose
denominator has a positive integer leading coefficient, so equal values have
identical representations (when simplification is enabled).
"""

from __future__ import annotations

import heapq
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping

Rational = Fraction

__all__ = [
    "Rational",
    "GaussianRational",
    "Param",
    "ParamSet",
    "ParamPoly",
    "Scalar",
    "UsageError",
    "EvaluationError",
    "poly_add",
    "poly_mul",
    "poly_gcd",
    "scalar_arith",
    "scalar_eval",
    "real_imag_split",
    "gcd_enabled",
    "set_gcd_enabled",
    "gcd_disabled",
]


class UsageError(ValueError):
    """Operands or arguments violate an operation's preconditions."""


class EvaluationError(ArithmeticError):
    """Evaluation hit a vanishing denominator."""


_GCD_ENABLED = os.environ.get("ISOCHRON_GCD", "on").strip().lower() not in ("off", "0", "false", "no")


def gcd_enabled() -> bool:
    return _GCD_ENABLED


def set_gcd_enabled(flag: bool) -> None:
    global _GCD_ENABLED
    _GCD_ENABLED = bool(flag)


@contextmanager
def gcd_disabled():
    old = _GCD_ENABLED
    set_gcd_enabled(False)
    try:
        yield
    finally:
        set_gcd_enabled(old)


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussianRational:
    """Exact complex number ``(a + b*i)/d`` with integers a, b and d > 0 coprime."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, re=0, im=0):
        re = Fraction(re)
        im = Fraction(im)
        d = re.denominator * im.denominator // gcd(re.denominator, im.denominator)
        self._a = re.numerator * (d // re.denominator)
        self._b = im.numerator * (d // im.denominator)
        self._d = d

    @classmethod
    def _raw(cls, a: int, b: int, d: int) -> "GaussianRational":
        if d != 1:
            if d < 0:
                a, b, d = -a, -b, -d
            g = gcd(gcd(a, b), d)
            if g != 1:
                a //= g
                b //= g
                d //= g
        obj = object.__new__(cls)
        obj._a = a
        obj._b = b
        obj._d = d
        return obj

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value)
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, _RationalABC):
            return cls(Fraction(value.numerator, value.denominator))
        raise TypeError(f"cannot convert {value!r} to GaussianRational")

    @property
    def re(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def im(self) -> Fraction:
        return Fraction(self._b, self._d)

    @property
    def parts(self) -> tuple[int, int, int]:
        """Raw ``(a, b, d)`` with value ``(a + b i)/d``."""
        return self._a, self._b, self._d

    def is_zero(self) -> bool:
        return self._a == 0 and self._b == 0

    def is_real(self) -> bool:
        return self._b == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational.coerce(other)
            except TypeError:
                return NotImplemented
        return self._a == other._a and self._b == other._b and self._d == other._d

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(Fraction(self._a, self._d))
        return hash((self._a, self._b, self._d))

    def __neg__(self) -> "GaussianRational":
        return GaussianRational._raw(-self._a, -self._b, self._d)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self._a, -self._b, self._d)

    def __add__(self, other) -> "GaussianRational":
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        d1, d2 = self._d, other._d
        if d1 == d2:
            return GaussianRational._raw(self._a + other._a, self._b + other._b, d1)
        return GaussianRational._raw(self._a * d2 + other._a * d1, self._b * d2 + other._b * d1, d1 * d2)

    __radd__ = __add__

    def __sub__(self, other) -> "GaussianRational":
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        return self + (-other)

    def __rsub__(self, other) -> "GaussianRational":
        return GaussianRational.coerce(other) - self

    def __mul__(self, other) -> "GaussianRational":
        if not isinstance(other, GaussianRational):
            if isinstance(other, int):
                return GaussianRational._raw(self._a * other, self._b * other, self._d)
            other = GaussianRational.coerce(other)
        a, b, c, e = self._a, self._b, other._a, other._b
        return GaussianRational._raw(a * c - b * e, a * e + b * c, self._d * other._d)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        a, b, d = self._a, self._b, self._d
        n = a * a + b * b
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        # d/(a+bi) = d(a-bi)/n
        return GaussianRational._raw(d * a, -d * b, n)

    def __truediv__(self, other) -> "GaussianRational":
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "GaussianRational":
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "GaussianRational":
        if n < 0:
            return self.inverse() ** (-n)
        result = _ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __complex__(self) -> complex:
        return complex(self._a / self._d, self._b / self._d)

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        return format_gaussian(self)


_ZERO = GaussianRational._raw(0, 0, 1)
_ONE = GaussianRational._raw(1, 0, 1)
I = GaussianRational._raw(0, 1, 1)


def format_gaussian(c: GaussianRational) -> str:
    """``a/b`` for real values, ``c/d*i`` for imaginary, ``(a/b+c/d*i)`` otherwise."""
    re, im = c.re, c.im
    if im == 0:
        return str(re)
    if im == 1:
        ims = "i"
    elif im == -1:
        ims = "-i"
    else:
        ims = f"{im}*i"
    if re == 0:
        return ims
    sign = "" if ims.startswith("-") else "+"
    return f"({re}{sign}{ims})"


# ---------------------------------------------------------------------------
# Parameters


@dataclass(frozen=True)
class Param:
    name: str
    real: bool = False
    nonzero: bool = False


class ParamSet:
    """Ordered, immutable collection of parameter descriptors."""

    __slots__ = ("_params", "_index", "_hash")

    def __init__(self, params: Iterable[Param | str] = ()):
        ps = []
        for p in params:
            if isinstance(p, str):
                p = Param(p)
            ps.append(p)
        names = [p.name for p in ps]
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate parameter names in {names}")
        for n in names:
            if n == "i":
                raise UsageError("'i' is reserved for the imaginary unit")
        self._params = tuple(ps)
        self._index = {p.name: k for k, p in enumerate(ps)}
        self._hash = hash(self._params)

    @property
    def params(self) -> tuple[Param, ...]:
        return self._params

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self._params)

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self):
        return iter(self._params)

    def __contains__(self, name) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UsageError(f"unknown parameter {name!r}") from None

    def __getitem__(self, name: str) -> Param:
        return self._params[self.index(name)]

    def without(self, names: Iterable[str]) -> "ParamSet":
        drop = set(names)
        return ParamSet(p for p in self._params if p.name not in drop)

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamSet) and self._params == other._params

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ParamSet({list(self.names)})"


EMPTY_PARAMS = ParamSet()


def _check_same(a: ParamSet, b: ParamSet) -> None:
    if a is not b and a != b:
        raise UsageError(f"mismatched parameter sets: {a!r} vs {b!r}")


# ---------------------------------------------------------------------------
# Raw sparse polynomial kernels.  A raw polynomial is a dict mapping exponent
# tuples to nonzero GaussianRational coefficients.


def _grlex(e: tuple) -> tuple:
    return (sum(e), e)


def _heap_key(e: tuple) -> tuple:
    return (-sum(e), tuple(-x for x in e))


def _lead(p: dict) -> tuple:
    e = max(p, key=_grlex)
    return e, p[e]


def _radd(p: dict, q: dict, sign: int = 1) -> dict:
    if len(p) < len(q) and sign == 1:
        p, q = q, p
    out = dict(p)
    for e, c in q.items():
        if sign != 1:
            c = -c
        v = out.get(e)
        if v is None:
            out[e] = c
        else:
            v = v + c
            if v.is_zero():
                del out[e]
            else:
                out[e] = v
    return out


def _rscale(p: dict, c: GaussianRational) -> dict:
    if c.is_zero():
        return {}
    return {e: v * c for e, v in p.items()}


def _rmul(p: dict, q: dict) -> dict:
    if not p or not q:
        return {}
    if len(p) > len(q):
        p, q = q, p
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            c = c1 * c2
            v = out.get(e)
            out[e] = c if v is None else v + c
    return {e: c for e, c in out.items() if not c.is_zero()}


def _rpow(p: dict, n: int, nvars: int) -> dict:
    result = {(0,) * nvars: _ONE}
    base = p
    while n:
        if n & 1:
            result = _rmul(result, base)
        n >>= 1
        if n:
            base = _rmul(base, base)
    return result


class _NotDivisible(Exception):
    pass


def _rdiv_exact(p: dict, q: dict) -> dict:
    """Exact quotient p/q; raises _NotDivisible when q does not divide p."""
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    if not p:
        return {}
    qe, qc = _lead(q)
    if len(q) == 1:
        inv = qc.inverse()
        out = {}
        for e, c in p.items():
            m = tuple(x - y for x, y in zip(e, qe))
            if min(m) < 0:
                raise _NotDivisible
            out[m] = c * inv
        return out
    qinv = qc.inverse()
    rem = dict(p)
    heap = [_heap_key(e) for e in rem]
    heapq.heapify(heap)
    quot = {}
    while rem:
        while True:
            key = heapq.heappop(heap)
            e = tuple(-x for x in key[1])
            if e in rem:
                break
        c = rem[e]
        m = tuple(x - y for x, y in zip(e, qe))
        if min(m) < 0:
            raise _NotDivisible
        t = c * qinv
        quot[m] = t
        for eq, cq in q.items():
            ex = tuple(x + y for x, y in zip(eq, m))
            v = rem.get(ex)
            if v is None:
                rem[ex] = -(t * cq)
                heapq.heappush(heap, _heap_key(ex))
            else:
                v = v - t * cq
                if v.is_zero():
                    del rem[ex]
                else:
                    rem[ex] = v
    return quot


def _is_const(p: dict) -> bool:
    return len(p) == 1 and not any(next(iter(p)))


def _vars_used(p: dict) -> set:
    used = set()
    for e in p:
        for k, x in enumerate(e):
            if x:
                used.add(k)
    return used


def _split(p: dict, v: int) -> dict:
    """View p as univariate in variable v: {degree: coefficient poly without v}."""
    out: dict = {}
    for e, c in p.items():
        k = e[v]
        e0 = e[:v] + (0,) + e[v + 1:]
        out.setdefault(k, {})[e0] = c
    return out


def _join(u: dict, v: int) -> dict:
    out = {}
    for k, coeff in u.items():
        for e, c in coeff.items():
            out[e[:v] + (k,) + e[v + 1:]] = c
    return out


def _monic_scale(p: dict) -> dict:
    """Scale so the leading coefficient is 1."""
    _, c = _lead(p)
    return _rscale(p, c.inverse())


def _integral_primitive(p: dict) -> tuple[dict, GaussianRational]:
    """Return (q, s) with q = s*p, q having Gaussian-integer coefficients of
    rational-integer content 1 and a positive integer leading coefficient."""
    _, lc = _lead(p)
    s = lc.inverse()
    q = {e: c * s for e, c in p.items()}
    L = 1
    for c in q.values():
        d = c._d
        if d != 1:
            L = L * d // gcd(L, d)
    G = 0
    for c in q.values():
        a, b, d = c.parts
        G = gcd(G, a * (L // d))
        G = gcd(G, b * (L // d))
    factor = GaussianRational._raw(L, 0, G)
    return {e: c * factor for e, c in q.items()}, s * factor


def _content(u: dict, nvars: int) -> dict:
    g = None
    for coeff in sorted(u.values(), key=len):
        g = coeff if g is None else _rgcd(g, coeff, nvars)
        if _is_const(g):
            return {(0,) * nvars: _ONE}
    return g


def _prem(A: list, B: list) -> list:
    """Pseudo-remainder of dense univariate polys whose coefficients are raw
    polynomials (lists indexed by degree, no trailing zeros)."""
    db = len(B) - 1
    lcB = B[db]
    r = list(A)
    e = len(A) - len(B) + 1
    while r and len(r) - 1 >= db:
        lr = r[-1]
        shift = len(r) - 1 - db
        new = [_rmul(lcB, c) for c in r]
        for k, bc in enumerate(B):
            new[k + shift] = _radd(new[k + shift], _rmul(lr, bc), -1)
        new.pop()
        while new and not new[-1]:
            new.pop()
        r = new
        e -= 1
    if e > 0 and r:
        f = lcB
        for _ in range(e - 1):
            f = _rmul(f, lcB)
        r = [_rmul(f, c) for c in r]
    return r


def _dense(u: dict) -> list:
    n = max(u)
    return [u.get(k, {}) for k in range(n + 1)]


def _univariate_gcd(p: dict, q: dict, v: int) -> dict:
    """Euclid over Q(i) for polynomials in the single variable v."""
    a = {e[v]: c for e, c in p.items()}
    b = {e[v]: c for e, c in q.items()}
    if max(a) < max(b):
        a, b = b, a
    while b:
        db = max(b)
        lb_inv = b[db].inverse()
        r = dict(a)
        while r and max(r) >= db:
            dr = max(r)
            t = r[dr] * lb_inv
            s = dr - db
            for k, c in b.items():
                kk = k + s
                val = r.get(kk, _ZERO) - t * c
                if val.is_zero():
                    r.pop(kk, None)
                else:
                    r[kk] = val
        a, b = b, r
    nv = len(next(iter(p)))
    out = {}
    for k, c in a.items():
        e = [0] * nv
        e[v] = k
        out[tuple(e)] = c
    return _monic_scale(out)


def _rgcd(p: dict, q: dict, nvars: int) -> dict:
    """Greatest common divisor over Q(i), normalized monic (grlex)."""
    one = {(0,) * nvars: _ONE}
    if not p:
        return _monic_scale(q) if q else {}
    if not q:
        return _monic_scale(p)
    if _is_const(p) or _is_const(q):
        return one
    if len(p) == 1 or len(q) == 1:
        # gcd with a monomial is the common monomial factor
        mono, other = (p, q) if len(p) == 1 else (q, p)
        e = list(next(iter(mono)))
        for eo in other:
            e = [min(x, y) for x, y in zip(e, eo)]
        return {tuple(e): _ONE}
    vp, vq = _vars_used(p), _vars_used(q)
    # a variable present in only one argument can be eliminated through content
    for v in sorted(vp - vq):
        return _rgcd(_content(_split(p, v), nvars), q, nvars)
    for v in sorted(vq - vp):
        return _rgcd(p, _content(_split(q, v), nvars), nvars)
    if len(vp) == 1:
        return _univariate_gcd(p, q, next(iter(vp)))
    # main variable: smallest maximal degree
    v = min(vp, key=lambda k: (max(max(e[k] for e in p), max(e[k] for e in q)), k))
    up, uq = _split(p, v), _split(q, v)
    cp, cq = _content(up, nvars), _content(uq, nvars)
    c = _rgcd(cp, cq, nvars)
    A = _dense({k: _rdiv_exact(x, cp) for k, x in up.items()})
    B = _dense({k: _rdiv_exact(x, cq) for k, x in uq.items()})
    # strip common powers of v (lowest-degree zeros) to keep PRS short
    low = min(next(k for k, x in enumerate(A) if x), next(k for k, x in enumerate(B) if x))
    A, B = A[low:], B[low:]
    if len(A) < len(B):
        A, B = B, A
    g_pp = _subresultant_last(A, B, nvars)
    g_pp = {k: x for k, x in enumerate(g_pp) if x}
    g_pp = {k: _rdiv_exact(x, _content(g_pp, nvars)) for k, x in g_pp.items()}
    g_pp = {k + low: x for k, x in g_pp.items()}
    return _monic_scale(_rmul(_join(g_pp, v), c))


def _subresultant_last(A: list, B: list, nvars: int) -> list:
    """Last nonzero element of the subresultant PRS of primitive A, B
    (deg A >= deg B); returns [1] when the sequence ends in a constant."""
    one = {(0,) * nvars: _ONE}
    g = one
    h = one
    while True:
        delta = len(A) - len(B)
        R = _prem(A, B)
        if not R:
            return B
        if len(R) == 1:
            return [one]
        A = B
        divisor = g
        for _ in range(delta):
            divisor = _rmul(divisor, h)
        B = [_rdiv_exact(c, divisor) for c in R]
        g = A[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            num = g
            for _ in range(delta - 1):
                num = _rmul(num, g)
            den = h
            for _ in range(delta - 2):
                den = _rmul(den, h)
            h = _rdiv_exact(num, den)


# ---------------------------------------------------------------------------
# ParamPoly


class ParamPoly:
    """Sparse polynomial in the parameters of a :class:`ParamSet` with
    Gaussian-rational coefficients."""

    __slots__ = ("params", "terms")

    def __init__(self, params: ParamSet, terms: Mapping[tuple, object] | None = None):
        self.params = params
        n = len(params)
        clean = {}
        if terms:
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != n:
                    raise UsageError(f"exponent vector {e} has wrong length for {params!r}")
                if any(x < 0 for x in e):
                    raise UsageError(f"negative exponent in {e}")
                c = GaussianRational.coerce(c)
                if not c.is_zero():
                    clean[e] = c
        self.terms = clean

    @classmethod
    def _wrap(cls, params: ParamSet, terms: dict) -> "ParamPoly":
        obj = object.__new__(cls)
        obj.params = params
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, params: ParamSet) -> "ParamPoly":
        return cls._wrap(params, {})

    @classmethod
    def const(cls, params: ParamSet, value) -> "ParamPoly":
        c = GaussianRational.coerce(value)
        return cls._wrap(params, {} if c.is_zero() else {(0,) * len(params): c})

    @classmethod
    def var(cls, params: ParamSet, name: str) -> "ParamPoly":
        e = [0] * len(params)
        e[params.index(name)] = 1
        return cls._wrap(params, {tuple(e): _ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or _is_const(self.terms)

    def constant_value(self) -> GaussianRational:
        if not self.terms:
            return _ZERO
        if not _is_const(self.terms):
            raise UsageError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def leading_term(self) -> tuple[tuple, GaussianRational]:
        if not self.terms:
            raise UsageError("zero polynomial has no leading term")
        return _lead(self.terms)

    def sorted_terms(self) -> list[tuple[tuple, GaussianRational]]:
        """Terms in descending graded-lex order."""
        return sorted(self.terms.items(), key=lambda t: _grlex(t[0]), reverse=True)

    def variables(self) -> list[str]:
        return [self.params.params[k].name for k in sorted(_vars_used(self.terms))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self.params == other.params and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.params, frozenset(self.terms.items())))

    def _coerce(self, other) -> "ParamPoly":
        if isinstance(other, ParamPoly):
            _check_same(self.params, other.params)
            return other
        return ParamPoly.const(self.params, other)

    def __add__(self, other) -> "ParamPoly":
        other = self._coerce(other)
        return ParamPoly._wrap(self.params, _radd(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly._wrap(self.params, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "ParamPoly":
        other = self._coerce(other)
        return ParamPoly._wrap(self.params, _radd(self.terms, other.terms, -1))

    def __rsub__(self, other) -> "ParamPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ParamPoly":
        if isinstance(other, ParamPoly):
            _check_same(self.params, other.params)
            return ParamPoly._wrap(self.params, _rmul(self.terms, other.terms))
        return ParamPoly._wrap(self.params, _rscale(self.terms, GaussianRational.coerce(other)))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ParamPoly":
        if n < 0:
            raise UsageError("negative power of a polynomial")
        return ParamPoly._wrap(self.params, _rpow(self.terms, n, len(self.params)))

    def exact_div(self, other: "ParamPoly") -> "ParamPoly":
        """Quotient when ``other`` divides ``self`` exactly; UsageError otherwise."""
        other = self._coerce(other)
        try:
            return ParamPoly._wrap(self.params, _rdiv_exact(self.terms, other.terms))
        except _NotDivisible:
            raise UsageError("polynomial division is not exact") from None

    def divides(self, other: "ParamPoly") -> bool:
        try:
            other.exact_div(self)
        except UsageError:
            return False
        return True

    def conjugate(self) -> "ParamPoly":
        """Coefficient-wise conjugate (the conjugate value when all parameters are real)."""
        return ParamPoly._wrap(self.params, {e: c.conjugate() for e, c in self.terms.items()})

    def canonical(self) -> "ParamPoly":
        """Associate with Gaussian-integer coefficients, integer content 1 and
        positive integer leading coefficient."""
        if not self.terms:
            return self
        q, _ = _integral_primitive(self.terms)
        return ParamPoly._wrap(self.params, q)

    def evaluate(self, assignment: Mapping[str, object]) -> GaussianRational:
        vals = []
        for k, p in enumerate(self.params):
            if p.name in assignment:
                vals.append(GaussianRational.coerce(assignment[p.name]))
            else:
                vals.append(None)
        total = _ZERO
        cache: dict = {}
        for e, c in self.terms.items():
            t = c
            for k, x in enumerate(e):
                if x:
                    if vals[k] is None:
                        raise UsageError(f"assignment does not cover parameter {self.params.params[k].name!r}")
                    key = (k, x)
                    pw = cache.get(key)
                    if pw is None:
                        pw = cache[key] = vals[k] ** x
                    t = t * pw
            total = total + t
        return total

    def rebase(self, params: ParamSet) -> "ParamPoly":
        """Re-express over another parameter set containing every used parameter."""
        if params == self.params:
            return self
        idx = []
        for k in range(len(self.params)):
            idx.append(params.index(self.params.params[k].name) if k in _vars_used(self.terms) else None)
        n = len(params)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for k, x in enumerate(e):
                if x:
                    ne[idx[k]] = x
            out[tuple(ne)] = c
        return ParamPoly._wrap(params, out)

    def __repr__(self) -> str:
        from .expr import print_poly

        return f"ParamPoly({print_poly(self)})"


def poly_add(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    _check_same(a.params, b.params)
    return a + b


def poly_mul(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    _check_same(a.params, b.params)
    return a * b


def poly_gcd(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    """GCD over Q(i) in canonical form (integer coefficients, positive leading coefficient)."""
    _check_same(a.params, b.params)
    if a.is_zero() and b.is_zero():
        raise UsageError("gcd of two zero polynomials")
    g = _rgcd(a.terms, b.terms, len(a.params))
    return ParamPoly._wrap(a.params, g).canonical()


# ---------------------------------------------------------------------------
# Scalar


class Scalar:
    """Rational function ``num/den`` over a ParamSet, coefficients in Q(i)."""

    __slots__ = ("params", "num", "den", "_canon")

    def __init__(self, num: ParamPoly, den: ParamPoly | None = None):
        if den is None:
            den = ParamPoly.const(num.params, 1)
        _check_same(num.params, den.params)
        if den.is_zero():
            raise ZeroDivisionError("Scalar with zero denominator")
        self.params = num.params
        n, d, canon = _normalize(num.terms, den.terms, len(num.params))
        self.num = ParamPoly._wrap(self.params, n)
        self.den = ParamPoly._wrap(self.params, d)
        self._canon = canon

    @classmethod
    def _wrap(cls, params, n: dict, d: dict, canon: bool) -> "Scalar":
        obj = object.__new__(cls)
        obj.params = params
        obj.num = ParamPoly._wrap(params, n)
        obj.den = ParamPoly._wrap(params, d)
        obj._canon = canon
        return obj

    @classmethod
    def const(cls, params: ParamSet, value) -> "Scalar":
        c = GaussianRational.coerce(value)
        n = len(params)
        z = (0,) * n
        if c.is_zero():
            return cls._wrap(params, {}, {z: _ONE}, True)
        a, b, d = c.parts
        return cls._wrap(params, {z: GaussianRational._raw(a, b, 1)}, {z: GaussianRational._raw(d, 0, 1)}, True)

    @classmethod
    def param(cls, params: ParamSet, name: str) -> "Scalar":
        return cls._wrap(params, ParamPoly.var(params, name).terms, {(0,) * len(params): _ONE}, True)

    @classmethod
    def from_poly(cls, p: ParamPoly) -> "Scalar":
        return cls(p)

    def is_zero(self) -> bool:
        return not self.num.terms

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise UsageError("Scalar is not constant")
        return self.num.constant_value() / self.den.constant_value()

    def _const_or_none(self):
        n, d = self.num.terms, self.den.terms
        if len(d) == 1 and len(n) <= 1:
            (ed, cd), = d.items()
            if any(ed):
                return None
            if not n:
                return _ZERO
            (en, cn), = n.items()
            if any(en):
                return None
            return cn / cd
        return None

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            _check_same(self.params, other.params)
            return other
        if isinstance(other, ParamPoly):
            _check_same(self.params, other.params)
            return Scalar(other)
        return Scalar.const(self.params, other)

    def __add__(self, other) -> "Scalar":
        other = self._coerce(other)
        ca, cb = self._const_or_none(), other._const_or_none()
        if ca is not None and cb is not None:
            return Scalar.const(self.params, ca + cb)
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        a, b, c, d = self.num.terms, self.den.terms, other.num.terms, other.den.terms
        if b == d:
            return Scalar._make(self.params, _radd(a, c), b)
        if _is_const(b) or _is_const(d):
            return Scalar._make(self.params, _radd(_rmul(a, d), _rmul(c, b)), _rmul(b, d), coprime_den_hint=True)
        if _GCD_ENABLED:
            g = _rgcd(b, d, len(self.params))
            if not _is_const(g):
                b1 = _rdiv_exact(b, g)
                d1 = _rdiv_exact(d, g)
                return Scalar._make(self.params, _radd(_rmul(a, d1), _rmul(c, b1)), _rmul(b, d1))
        return Scalar._make(self.params, _radd(_rmul(a, d), _rmul(c, b)), _rmul(b, d))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._wrap(self.params, {e: -c for e, c in self.num.terms.items()}, self.den.terms, self._canon)

    def __sub__(self, other) -> "Scalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Scalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Scalar":
        if isinstance(other, int) and not isinstance(other, bool):
            if other == 0:
                return Scalar.const(self.params, 0)
            return Scalar._make(self.params, _rscale(self.num.terms, GaussianRational._raw(other, 0, 1)), self.den.terms)
        other = self._coerce(other)
        ca, cb = self._const_or_none(), other._const_or_none()
        if ca is not None and cb is not None:
            return Scalar.const(self.params, ca * cb)
        if not self.num.terms or not other.num.terms:
            return Scalar.const(self.params, 0)
        a, b, c, d = self.num.terms, self.den.terms, other.num.terms, other.den.terms
        if _GCD_ENABLED and self._canon and other._canon:
            # cross-cancel; both inputs are already in lowest terms
            n = len(self.params)
            g1 = _rgcd(a, d, n) if not _is_const(d) else None
            g2 = _rgcd(c, b, n) if not _is_const(b) else None
            if g1 is not None and not _is_const(g1):
                a, d = _rdiv_exact(a, g1), _rdiv_exact(d, g1)
            if g2 is not None and not _is_const(g2):
                c, b = _rdiv_exact(c, g2), _rdiv_exact(b, g2)
            return Scalar._make(self.params, _rmul(a, c), _rmul(b, d), reduced=True)
        return Scalar._make(self.params, _rmul(a, c), _rmul(b, d))

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self.num.terms:
            raise ZeroDivisionError("division by zero Scalar")
        return Scalar._make(self.params, self.den.terms, self.num.terms, reduced=self._canon)

    def __truediv__(self, other) -> "Scalar":
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero Scalar")
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Scalar":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inverse() ** (-n)
        nv = len(self.params)
        return Scalar._make(self.params, _rpow(self.num.terms, n, nv), _rpow(self.den.terms, n, nv), reduced=self._canon)

    @classmethod
    def _make(cls, params, n: dict, d: dict, reduced: bool = False, coprime_den_hint: bool = False) -> "Scalar":
        n2, d2, canon = _normalize(n, d, len(params), reduced=reduced or (coprime_den_hint and _is_const(d)))
        return cls._wrap(params, n2, d2, canon)

    def normalized(self) -> "Scalar":
        """Fully reduced representative (always runs the GCD)."""
        if self._canon:
            return self
        n, d, _ = _normalize(self.num.terms, self.den.terms, len(self.params), force=True)
        return Scalar._wrap(self.params, n, d, True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            try:
                other = self._coerce(other)
            except (TypeError, UsageError):
                return NotImplemented
        if self.params != other.params:
            return False
        if self._canon and other._canon:
            return self.num.terms == other.num.terms and self.den.terms == other.den.terms
        return not _radd(_rmul(self.num.terms, other.den.terms), _rmul(other.num.terms, self.den.terms), -1)

    def __hash__(self) -> int:
        s = self.normalized()
        return hash((frozenset(s.num.terms.items()), frozenset(s.den.terms.items())))

    def conjugate(self) -> "Scalar":
        """Coefficient-wise conjugate (the conjugate value when all parameters are real)."""
        return Scalar._make(
            self.params,
            {e: c.conjugate() for e, c in self.num.terms.items()},
            {e: c.conjugate() for e, c in self.den.terms.items()},
            reduced=self._canon,
        )

    def evaluate(self, assignment: Mapping[str, object]) -> GaussianRational:
        return scalar_eval(self, assignment)

    def substitute(self, values: Mapping[str, "Scalar"], params: ParamSet) -> "Scalar":
        """Replace parameters by Scalars over ``params``; untouched parameters
        are carried over by name and must exist in ``params``."""
        num = _subs_poly(self.num, values, params)
        den = _subs_poly(self.den, values, params)
        if den.is_zero():
            raise EvaluationError(f"denominator {self.den!r} vanishes under substitution")
        return num / den

    def rebase(self, params: ParamSet) -> "Scalar":
        return Scalar._wrap(params, self.num.rebase(params).terms, self.den.rebase(params).terms, self._canon)

    def variables(self) -> list[str]:
        used = _vars_used(self.num.terms) | _vars_used(self.den.terms)
        return [self.params.params[k].name for k in sorted(used)]

    def __repr__(self) -> str:
        from .expr import print_scalar

        return f"Scalar({print_scalar(self)})"

    def __str__(self) -> str:
        from .expr import print_scalar

        return print_scalar(self)


def _normalize(n: dict, d: dict, nvars: int, reduced: bool = False, force: bool = False):
    """Bring num/den to canonical form.  Returns (num, den, canonical_flag)."""
    z = (0,) * nvars
    if not n:
        return {}, {z: _ONE}, True
    if not d:
        raise ZeroDivisionError("zero denominator")
    canon = True
    if not _is_const(d) and not reduced:
        if _GCD_ENABLED or force:
            g = _rgcd(n, d, nvars)
            if not _is_const(g):
                n = _rdiv_exact(n, g)
                d = _rdiv_exact(d, g)
        else:
            canon = False
    d2, s = _integral_primitive(d)
    n2 = _rscale(n, s)
    # rational-integer content across numerator and denominator together
    L = 1
    for c in n2.values():
        L = L * c._d // gcd(L, c._d)
    if L != 1:
        n2 = _rscale(n2, GaussianRational._raw(L, 0, 1))
        d2 = _rscale(d2, GaussianRational._raw(L, 0, 1))
    G = 0
    for c in d2.values():
        G = gcd(G, c._a)
        G = gcd(G, c._b)
        if G == 1:
            break
    if G != 1:
        for c in n2.values():
            G = gcd(G, c._a)
            G = gcd(G, c._b)
            if G == 1:
                break
    if G > 1:
        f = GaussianRational._raw(1, 0, G)
        n2 = _rscale(n2, f)
        d2 = _rscale(d2, f)
    return n2, d2, canon


def _subs_poly(p: ParamPoly, values: Mapping[str, Scalar], params: ParamSet) -> Scalar:
    gens = []
    for k, prm in enumerate(p.params.params):
        if prm.name in values:
            v = values[prm.name]
            if not isinstance(v, Scalar):
                v = Scalar.const(params, v)
            _check_same(v.params, params)
            gens.append(v)
        elif prm.name in params:
            gens.append(Scalar.param(params, prm.name))
        else:
            gens.append(None)
    cache: dict = {}
    total = Scalar.const(params, 0)
    for e, c in p.terms.items():
        t = Scalar.const(params, c)
        for k, x in enumerate(e):
            if x:
                if gens[k] is None:
                    raise UsageError(f"parameter {p.params.params[k].name!r} has no value in the target set")
                key = (k, x)
                pw = cache.get(key)
                if pw is None:
                    pw = cache[key] = gens[k] ** x
                t = t * pw
        total = total + t
    return total


def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise UsageError(f"unknown operation {op!r}")


def scalar_eval(a: Scalar, assignment: Mapping[str, object]) -> GaussianRational:
    for name in a.variables():
        if name not in assignment:
            raise UsageError(f"assignment does not cover parameter {name!r}")
    den = a.den.evaluate(assignment)
    if den.is_zero():
        point = ", ".join(f"{k}={GaussianRational.coerce(v)}" for k, v in sorted(assignment.items()))
        raise EvaluationError(f"denominator vanishes at {{{point}}}")
    return a.num.evaluate(assignment) / den


def real_imag_split(a: Scalar, reals: ParamSet | None = None) -> tuple[ParamPoly, ParamPoly]:
    """Real and imaginary parts of the numerator of ``a``, all parameters real."""
    reals = reals if reals is not None else a.params
    for name in a.variables():
        if name not in reals or not reals[name].real or not a.params[name].real:
            raise UsageError(f"parameter {name!r} is not declared real")
    re = {e: GaussianRational._raw(*_re_parts(c)) for e, c in a.num.terms.items() if c._a}
    im = {e: GaussianRational._raw(*_im_parts(c)) for e, c in a.num.terms.items() if c._b}
    return ParamPoly._wrap(a.params, re), ParamPoly._wrap(a.params, im)


def _re_parts(c: GaussianRational):
    return c._a, 0, c._d


def _im_parts(c: GaussianRational):
    return c._b, 0, c._d
