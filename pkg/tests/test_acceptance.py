"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import random
import time
from fractions import Fraction

import pytest

from conftest import rand_gauss, random_numeric_spec, record_criterion
from isochron.expr import parse_scalar
from isochron.fixtures import moon_rand, quad_complex, quad_condition_iv_numeric, quad_real_family
from isochron.manifold import compute_manifold, manifold_residual, reduce_on_manifold
from isochron.nfengine import compute_f, compute_g, constants_report, residual
from isochron.numverify import build_system, deviation_slope, scan
from isochron.oracle import dense_solve
from isochron.scalar import GaussianRational, ParamSet, Scalar
from isochron.sysmodel import ComplexSystemSpec, embed_2d, embed_2d_complex, substitute_params

E = ParamSet()
QUAD_CONDITIONS = {
    "i": {"b1": "0", "b2": "0"},
    "ii": {"a1": "0", "a2": "0"},
    "iii": {"b1": "0", "a2": "0"},
    "iv": {"a2": "-a1", "b1": "-b2"},
}


def _check(label, ok, detail):
    record_criterion(label, ok, detail)
    assert ok, detail


def test_criterion_01_moon_rand_first_constant():
    spec = moon_rand()
    ps = spec.params
    t0 = time.perf_counter()
    _, p = compute_f(spec, 1)
    _, q = compute_g(spec, 1)
    dt = time.perf_counter() - t0
    p_ref = parse_scalar("(c0*(3*c1+c3) - i*(4*c1+c0*c2+4*c3))/(8*c0*(c0-2*i))", ps)
    q_ref = parse_scalar("-(c0*(3*c1+c3) + i*(4*c1+c0*c2+4*c3))/(8*c0*(c0+2*i))", ps)
    # cross-multiplied differences
    dp = p[0].num * p_ref.den - p_ref.num * p[0].den
    dq = q[0].num * q_ref.den - q_ref.num * q[0].den
    ok = dp.is_zero() and dq.is_zero() and dt < 5
    _check("1", ok, f"p'1, q'1 exact identities, {dt:.2f}s (< 5s)")


def test_criterion_02_moon_rand_second_constant():
    t0 = time.perf_counter()
    spec = substitute_params(moon_rand(), {"c1": "c0*c2/8", "c3": "-3*c0*c2/8"})
    ps = spec.params
    r = constants_report(spec, 2)
    dt = time.perf_counter() - t0
    p_ref = parse_scalar("-3*(c0+2*i)*c2^2/(1024*(c0-2*i))", ps)
    q_ref = parse_scalar("3*(c0-2*i)*c2^2/(1024*(c0+2*i))", ps)
    dp = r.p(2).num * p_ref.den - p_ref.num * r.p(2).den
    dq = r.q(2).num * q_ref.den - q_ref.num * r.q(2).den
    ok = r.p(1).is_zero() and r.q(1).is_zero() and dp.is_zero() and dq.is_zero() and dt < 30
    _check("2", ok, f"p'2, q'2 on the p'1 = 0 locus, {dt:.2f}s (< 30s)")


def test_criterion_03_moon_rand_vanishing_tail():
    spec = substitute_params(moon_rand(), {"c1": "0", "c2": "0", "c3": "0"})
    assert list(spec.params.names) == ["c0"]
    t0 = time.perf_counter()
    r10 = constants_report(spec, 10)
    dt10 = time.perf_counter() - t0
    t0 = time.perf_counter()
    r20 = constants_report(spec, 20)
    dt20 = time.perf_counter() - t0
    ok = r10.all_zero() and dt10 < 600 and r20.all_zero()
    _check("3", ok, f"p'm = q'm = 0 for m <= 10 in {dt10:.2f}s (< 600s); stretch m <= 20 in {dt20:.2f}s")


def test_criterion_04_quadratic_system():
    t0 = time.perf_counter()
    spec = quad_complex()
    ps = spec.params
    r = constants_report(spec, 1)
    first = r.p(1) == parse_scalar("-b1*(a1+a2)", ps) and r.q(1) == parse_scalar("a2*(b1+b2)", ps)
    symbolic = {}
    for name, cond in QUAD_CONDITIONS.items():
        symbolic[name] = constants_report(spec, 4, [cond]).all_zero()
    rng = random.Random(404)
    numeric = {}
    for name, cond in QUAD_CONDITIONS.items():
        reduced = substitute_params(spec, cond)
        good = True
        for _ in range(10):
            values = {}
            for p in reduced.params.params:
                if p.real:
                    values[p.name] = Fraction(rng.randint(1, 7), rng.randint(1, 3)) * rng.choice([1, -1])
                else:
                    values[p.name] = rand_gauss(rng, nonzero=False)
            num = substitute_params(reduced, values)
            _, ps_ = compute_f(num, 8, prune=True)
            _, qs_ = compute_g(num, 8, prune=True)
            good = good and all(c.is_zero() for c in ps_ + qs_)
        numeric[name] = good
    dt = time.perf_counter() - t0
    ok = first and all(symbolic.values()) and all(numeric.values()) and dt < 600
    _check("4", ok, f"p'1, q'1 exact; conditions symbolic m<=4 {symbolic}; "
                    f"10 random points m<=8 {numeric}; {dt:.2f}s (< 600s)")


def _random_planar_real(rng):
    deg = rng.choice([2, 3])
    keys = [(a, n - a) for n in range(2, deg + 1) for a in range(n + 1)]
    pick = lambda: {k: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for k in keys if rng.random() < 0.7}
    return embed_2d(pick(), pick(), E, orientation=rng.choice([1, -1]))


def _random_planar_complex(rng):
    deg = rng.choice([2, 3])
    keys = [(a, n - a) for n in range(2, deg + 1) for a in range(n + 1)]
    pick = lambda: {k: Scalar.const(E, rand_gauss(rng)) for k in keys if rng.random() < 0.7}
    return embed_2d_complex(pick(), pick(), E)


def test_criterion_05_oracle_equivalence():
    rng = random.Random(505)
    specs = []
    for k in range(40):
        kind = k % 4
        if kind == 0:
            specs.append(random_numeric_spec(rng, z_deg=2, u_deg=2, density=0.7))
        elif kind == 1:
            specs.append(random_numeric_spec(rng, z_deg=3, u_deg=3, density=0.5))
        elif kind == 2:
            specs.append(_random_planar_real(rng))
        else:
            specs.append(_random_planar_complex(rng))
    t0 = time.perf_counter()
    mismatches = 0
    for spec in specs:
        for target, fn in (("f", compute_f), ("g", compute_g)):
            t_eng, c_eng = fn(spec, 4)
            t_orc, c_orc = dense_solve(spec, 4, target)
            if c_eng != c_orc or t_eng.series.coeffs != t_orc.series.coeffs:
                mismatches += 1
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 300
    _check("5", ok, f"40 specs x (f, g) through M=4, {mismatches} mismatches, {dt:.2f}s (< 300s)")


def _reduction_compare(spec, M):
    h = compute_manifold(spec, 2 * M + 1)
    assert manifold_residual(spec, h) == {}
    red = reduce_on_manifold(spec, h)
    p3, q3 = compute_f(spec, M)[1], compute_g(spec, M)[1]
    p2, q2 = compute_f(red, M)[1], compute_g(red, M)[1]
    return [a == b for a, b in zip(p3, p2)], [a == b for a, b in zip(q3, q2)]


@pytest.mark.xfail(strict=True, reason="3D and reduced-2D constants differ at m >= 2 for generic specs; "
                                       "they agree only when all lower constants vanish (see criterion 6b)")
def test_criterion_06_reduction_consistency_generic():
    rng = random.Random(606)
    per_m = [0, 0, 0]
    for _ in range(10):
        spec = random_numeric_spec(rng, z_deg=3, u_deg=2, density=0.7)
        pm, qm = _reduction_compare(spec, 3)
        for m in range(3):
            per_m[m] += pm[m] and qm[m]
    ok = per_m == [10, 10, 10]
    _check("6", ok, f"10 generic specs, M=3: specs agreeing at m=1,2,3 = {per_m}")


def _tune(spec: ComplexSystemSpec, m: int) -> ComplexSystemSpec:
    """Adjust a_{j+1,j,0} and b_{j+1,j,0} so that p'_j = q'_j = 0 for j < m."""
    z, w, u = dict(spec.z_terms), dict(spec.w_terms), dict(spec.u_terms)
    build = lambda: ComplexSystemSpec(E, spec.d, {k: v for k, v in z.items() if v},
                                      {k: v for k, v in w.items() if v}, dict(u))
    for j in range(1, m):
        key = (j + 1, j, 0)
        for terms, fn in ((z, compute_f), (w, compute_g)):
            terms.setdefault(key, Scalar.const(E, 0))
            v0 = fn(build(), j)[1][-1]
            terms[key] = terms[key] + 1
            v1 = fn(build(), j)[1][-1]
            # the constant is affine in this coefficient
            terms[key] = terms[key] - 1 - v0 / (v1 - v0)
    return build()


def test_criterion_06b_reduction_consistency_on_lower_locus():
    rng = random.Random(616)
    agree = 0
    for _ in range(10):
        spec = random_numeric_spec(rng, z_deg=3, u_deg=2, density=0.8)
        tuned = _tune(spec, 3)
        c_f, c_g = compute_f(tuned, 2)[1], compute_g(tuned, 2)[1]
        assert all(c.is_zero() for c in c_f + c_g)
        pm, qm = _reduction_compare(tuned, 3)
        agree += all(pm) and all(qm)
    ok = agree == 10
    _check("6b", ok, f"10 specs with p'1 = q'1 = p'2 = q'2 = 0, M=3: {agree}/10 agree exactly at every m")


def test_criterion_07_residual_identities():
    rng = random.Random(707)
    runs = []
    for spec, M in ((moon_rand(), 1), (quad_complex(), 2), (quad_real_family(), 1),
                    (substitute_params(moon_rand(), {"c1": "c0*c2/8", "c3": "-3*c0*c2/8"}), 2)):
        runs.append((spec, M))
    for _ in range(8):
        runs.append((random_numeric_spec(rng, z_deg=rng.choice([2, 3]), u_deg=2, density=0.7), 3))
    count = bad = 0
    for spec, M in runs:
        for fn in (compute_f, compute_g):
            table, consts = fn(spec, M)
            count += 1
            bad += residual(spec, table, consts) != {}
    ok = count >= 20 and bad == 0
    _check("7", ok, f"{count} engine runs, {bad} with nonzero residual")


def _max_gap_error(res):
    return max(abs(g - 2 * math.pi) for row in res.rows for g in row.gaps)


def test_criterion_08_numeric_isochronicity():
    iso = build_system(moon_rand(), {"c0": "1", "c1": "0", "c2": "0", "c3": "0"})
    e_mr = _max_gap_error(scan(iso, [0.02, 0.05, 0.1], n_returns=6, tol=1e-12))
    quad = build_system(quad_condition_iv_numeric())
    e_q = _max_gap_error(scan(quad, [0.02, 0.05, 0.1], n_returns=6, tol=1e-12))
    gen = build_system(moon_rand(), {"c0": "1", "c1": "1", "c2": "1", "c3": "1"})
    d_gen = scan(gen, [0.1], n_returns=6, tol=1e-12).rows[0].deviation
    ok = e_mr <= 1e-9 and e_q <= 1e-7 and d_gen > 1e-4
    _check("8", ok, f"Moon-Rand centre max gap error {e_mr:.2e} (<= 1e-9); condition (iv) {e_q:.2e} "
                    f"(<= 1e-7); generic deviation {d_gen:.2e} (> 1e-4)")


def test_criterion_09_scaling_exponent():
    params = {"c0": "1", "c1": "1/8", "c2": "1", "c3": "-3/8"}
    spec = substitute_params(moon_rand(), params)
    r = constants_report(spec, 2)
    assert r.p(1).is_zero() and not r.p(2).is_zero()
    sys_ = build_system(moon_rand(), params)
    slope = deviation_slope(scan(sys_, [0.02, 0.04, 0.08], n_returns=6, tol=1e-13))
    ok = abs(slope - 4) <= 0.5
    _check("9", ok, f"log-log slope {slope:.3f} (4 +- 0.5)")


def _conjugation_holds(report, rng, names, nonzero):
    for _ in range(20):
        pt = {}
        for n in names:
            v = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
            if n in nonzero and v == 0:
                v = Fraction(1)
            pt[n] = v
        for rec in report.records:
            p = rec.p.evaluate(pt)
            q = rec.q.evaluate(pt)
            if q != -GaussianRational.coerce(p).conjugate():
                return False
    return True


def test_criterion_10_conjugation_property():
    rng = random.Random(1010)
    mr = constants_report(moon_rand(), 3)
    qf = constants_report(quad_real_family(), 3)
    ok_mr = _conjugation_holds(mr, rng, ["c0", "c1", "c2", "c3"], {"c0"})
    ok_qf = _conjugation_holds(qf, rng, list(qf.spec.params.names), {"r"})
    ok = ok_mr and ok_qf
    _check("10", ok, f"q'm = -conj(p'm) at 20 real points, m <= 3: Moon-Rand {ok_mr}, quadratic family {ok_qf}")
