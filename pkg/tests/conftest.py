import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from isochron.scalar import GaussianRational, Param, ParamPoly, ParamSet, Scalar
from isochron.sysmodel import ComplexSystemSpec

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

PS3 = ParamSet([Param("c0", True, True), Param("c1", True), Param("c2", True)])

small_int = st.integers(-6, 6)
small_den = st.integers(1, 4)


@st.composite
def gaussians(draw, allow_zero=True):
    re = Fraction(draw(small_int), draw(small_den))
    im = Fraction(draw(small_int), draw(small_den))
    g = GaussianRational(re, im)
    if not allow_zero and g.is_zero():
        g = GaussianRational(1)
    return g


@st.composite
def polys(draw, params=PS3, max_terms=4, max_exp=2):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, max_exp)) for _ in params)
        terms[e] = draw(gaussians())
    return ParamPoly(params, terms)


@st.composite
def nonzero_polys(draw, params=PS3, max_terms=3, max_exp=2):
    p = draw(polys(params, max_terms, max_exp))
    return p if not p.is_zero() else ParamPoly.const(params, draw(gaussians(allow_zero=False)))


@st.composite
def scalars(draw, params=PS3):
    return Scalar(draw(polys(params)), draw(nonzero_polys(params, max_terms=2)))


@st.composite
def points(draw, params=PS3):
    return {p.name: draw(gaussians()) for p in params}


def rand_gauss(rng, lo=-5, hi=5, den=3, nonzero=True):
    while True:
        g = GaussianRational(Fraction(rng.randint(lo, hi), rng.randint(1, den)),
                             Fraction(rng.randint(lo, hi), rng.randint(1, den)))
        if g or not nonzero:
            return g


def random_numeric_spec(rng, z_deg=2, u_deg=2, density=1.0, planar=False, d=None):
    """Random complex spec with exact Gaussian-rational coefficients, no parameters."""
    ps = ParamSet()
    def keys(deg, with_u):
        out = []
        for n in range(2, deg + 1):
            for a in range(n + 1):
                for b in range(n + 1 - a):
                    g = n - a - b
                    if g and not with_u:
                        continue
                    out.append((a, b, g))
        return out
    def fill(deg, with_u):
        return {k: Scalar.const(ps, rand_gauss(rng)) for k in keys(deg, with_u) if rng.random() < density}
    d = d if d is not None else rng.choice([1, 2, -1, Fraction(1, 2), Fraction(-3, 2)])
    z = fill(z_deg, not planar)
    w = fill(z_deg, not planar)
    u = {} if planar else fill(u_deg, True)
    return ComplexSystemSpec(ps, Scalar.const(ps, d), z, w, u)


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=20240611, help="seed for randomized tests")


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return random.Random(seed)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {label}" + (f": {detail}" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
