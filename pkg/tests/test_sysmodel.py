import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from isochron.expr import parse_scalar
from isochron.fixtures import moon_rand, quad_complex, quad_condition_iv_numeric
from isochron.manifold import compute_manifold
from isochron.nfengine import compute_f
from isochron.scalar import GaussianRational as G, Param, ParamSet, Scalar
from isochron.sysmodel import (
    ComplexSystemSpec,
    RealSystemSpec,
    RealityError,
    SpecError,
    SubstitutionError,
    check_invariant_plane,
    check_reality,
    complexify,
    drop_u_equation,
    embed_2d,
    embed_2d_complex,
    realify,
    substitute_params,
    validate,
)

E = ParamSet()


def C(v):
    return Scalar.const(E, v)


def test_moon_rand_valid():
    spec = moon_rand()
    assert validate(spec).ok
    assert spec.orientation == -1


def test_linear_mismatch_detected():
    spec = RealSystemSpec(E, C(1), 1, {(0, 1, 0): C(-1)}, {}, {})
    report = validate(spec)
    assert not report.ok
    assert any("linear part mismatch" in m for m in report.issues)


def test_zero_coefficient_detected():
    spec = RealSystemSpec(E, C(1), 1, {(2, 0, 0): C(0)}, {}, {})
    assert any("canonical-form violation" in m for m in validate(spec).issues)


def test_d_must_be_nonzero_and_real():
    assert not validate(RealSystemSpec(E, C(0), 1, {}, {}, {})).ok
    assert not validate(RealSystemSpec(E, C(G(0, 1)), 1, {}, {}, {})).ok
    ps = ParamSet([Param("k", True, False)])
    # d = k is not provably nonzero
    assert not validate(RealSystemSpec(ps, parse_scalar("k", ps), 1, {}, {}, {})).ok


def test_bad_orientation_and_degree():
    assert not validate(RealSystemSpec(E, C(1), 2, {}, {}, {})).ok
    assert not validate(RealSystemSpec(E, C(1), 1, {(2, 0, 0): C(1)}, {}, {}, max_degree=1)).ok


def test_complexify_moon_rand_u_equation():
    spec = moon_rand()
    ps = spec.params
    S = lambda t: parse_scalar(t, ps)
    c = complexify(spec)
    assert c.d == S("-c0")
    assert c.u_terms[(2, 0, 0)] == S("(i/4)*(c1-c3-i*c2)")
    assert c.u_terms[(1, 1, 0)] == S("(i/2)*(c1+c3)")
    assert c.u_terms[(0, 2, 0)] == S("(i/4)*(c1-c3+i*c2)")
    assert validate(c).ok


def test_complexify_moon_rand_planar_part():
    c = complexify(moon_rand())
    ps = c.params
    # y' = -x - x*u with x = (z+w)/2 gives dz/dT = z + (zu + wu)/2
    half = parse_scalar("1/2", ps)
    assert c.z_terms == {(1, 0, 1): half, (0, 1, 1): half}
    assert c.w_terms == {(0, 1, 1): half, (1, 0, 1): half}


def test_complexify_linear():
    c = complexify(embed_2d({}, {}, E))
    assert not c.z_terms and not c.w_terms and not c.u_terms
    assert c.d == 1


def _random_real(rng, orientation):
    def coeffs():
        out = {}
        for n in (2, 3):
            for k in range(n + 1):
                for j in range(n + 1 - k):
                    if rng.random() < 0.4:
                        out[(k, j, n - k - j)] = C(Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 4)))
        return out
    return RealSystemSpec(E, C(rng.choice([1, 2, Fraction(1, 3), -1])), orientation, coeffs(), coeffs(), coeffs())


@pytest.mark.parametrize("orientation", [1, -1])
def test_complexify_realify_round_trip(orientation, rng):
    for _ in range(30):
        spec = _random_real(rng, orientation)
        c = complexify(spec)
        assert validate(c).ok
        assert realify(c) == spec
        assert complexify(realify(c)) == c


def test_symbolic_round_trip():
    spec = moon_rand()
    assert realify(complexify(spec)) == spec


def test_realify_quadratic_condition_iv():
    real = realify(quad_condition_iv_numeric())
    assert real.orientation == 1 and real.d == 1
    assert real.x_terms == {(1, 1, 0): C(-2)}
    assert real.y_terms == {(0, 2, 0): C(-2)}
    assert real.u_terms == {(0, 1, 1): C(-2)}


def test_realify_trivial():
    spec = ComplexSystemSpec(E, C(1), {}, {}, {})
    r = realify(spec)
    X, Y, U = r.full_equations()
    assert X == {(0, 1, 0): C(-1)} and Y == {(1, 0, 0): C(1)} and U == {(0, 0, 1): C(-1)}


def test_realify_rejects_nonconjugate():
    spec = ComplexSystemSpec(E, C(1), {(2, 0, 0): C(G(1, 1))}, {(2, 0, 0): C(G(1, 1))}, {})
    with pytest.raises(RealityError, match=r"b\(2, 0, 0\)"):
        realify(spec)
    u_bad = ComplexSystemSpec(E, C(1), {}, {}, {(0, 0, 2): C(1)})
    with pytest.raises(RealityError):
        check_reality(u_bad)


def test_embed_2d_properties():
    ps = ParamSet([Param("a", True)])
    a = parse_scalar("a", ps)
    spec = embed_2d({(2, 0): a}, {(1, 1): a * 3}, ps)
    assert spec.d == 1 and not spec.u_terms
    assert all(k[2] == 0 for k in (*spec.x_terms, *spec.y_terms))
    x, y = drop_u_equation(spec)
    assert x == {(2, 0): a} and y == {(1, 1): a * 3}
    with pytest.raises(SpecError):
        embed_2d({(1, 0): a}, {}, ps)


def test_embed_2d_linear_center_has_no_constants():
    _, ps_ = compute_f(embed_2d({}, {}, E), 4)
    assert all(p.is_zero() for p in ps_)


def test_invariant_plane_examples():
    mr = moon_rand()
    S = lambda t: parse_scalar(t, mr.params)
    reduced = substitute_params(mr, {"c1": "0", "c2": "0", "c3": "0"})
    plane = check_invariant_plane(complexify(reduced))
    assert plane.invariant
    assert plane.cofactor == {(0, 0, 0): parse_scalar("-i*c0", reduced.params)}
    assert not check_invariant_plane(complexify(mr)).invariant
    q = quad_complex()
    S = lambda t: parse_scalar(t, q.params)
    plane = check_invariant_plane(q)
    assert plane.invariant
    assert plane.cofactor == {(0, 0, 0): S("i*r"), (1, 0, 0): S("a3"), (0, 1, 0): S("b3"), (0, 0, 1): S("c3")}


def test_invariant_plane_implies_zero_manifold(rng):
    from conftest import random_numeric_spec
    for _ in range(5):
        spec = random_numeric_spec(rng)
        spec = ComplexSystemSpec(spec.params, spec.d, spec.z_terms, spec.w_terms,
                                 {k: c for k, c in spec.u_terms.items() if k[2] > 0})
        assert check_invariant_plane(spec).invariant
        assert compute_manifold(spec, 5).is_zero()


def test_substitute_params_examples():
    mr = moon_rand()
    red = substitute_params(mr, {"c1": "0", "c2": "0", "c3": "0"})
    assert red.params.names == ("c0",)
    assert not red.u_terms
    assert substitute_params(mr, {}) == mr
    red = substitute_params(mr, {"c1": "c0*c2/8", "c3": "-3*c0*c2/8"})
    _, ps_ = compute_f(red, 1)
    assert ps_[0].is_zero()


def test_substitute_params_errors():
    mr = moon_rand()
    with pytest.raises(SubstitutionError):
        substitute_params(mr, {"c0": "0"})
    with pytest.raises(SubstitutionError):
        substitute_params(mr, {"zz": "1"})
    ps = ParamSet([Param("c0", True, True), Param("k", True)])
    spec = RealSystemSpec(ps, parse_scalar("c0", ps), 1, {(2, 0, 0): parse_scalar("1/(k-1)", ps)}, {}, {})
    with pytest.raises(SubstitutionError):
        substitute_params(spec, {"k": "1"})


def test_embed_2d_complex():
    spec = embed_2d_complex({(2, 0): C(1)}, {(1, 1): C(2)}, E)
    assert spec.z_terms == {(2, 0, 0): C(1)} and spec.w_terms == {(1, 1, 0): C(2)}
