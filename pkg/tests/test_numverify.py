import math
import random

import pytest

from isochron.fixtures import linear, moon_rand, quad_condition_iv_numeric
from isochron.numverify import (
    NonOscillatoryError,
    PeriodScan,
    _Poly,
    build_system,
    deviation_slope,
    integrate,
    isochronicity_verdict,
    poincare_periods,
    scan,
    verdict_block,
)
from isochron.scalar import ParamSet
from isochron.sysmodel import embed_2d

MR0 = {"c0": "1", "c1": "0", "c2": "0", "c3": "0"}


def test_poly_evaluator_matches_exact():
    spec = build_system(moon_rand(), {"c0": "3/2", "c1": "1/3", "c2": "-2", "c3": "5/7"}).spec
    X, Y, U = spec.full_equations()
    rng = random.Random(3)
    for eq in (X, Y, U):
        p = _Poly({e: float(complex(c.constant_value()).real) for e, c in eq.items()})
        for _ in range(100):
            x, y, u = (rng.uniform(-1, 1) for _ in range(3))
            exact = sum(complex(c.constant_value()).real * x**e[0] * y**e[1] * u**e[2] for e, c in eq.items())
            assert abs(p(x, y, u) - exact) <= 1e-13


def test_linear_period():
    sys = build_system(linear())
    times = poincare_periods(sys, (0.1, 0.0, 0.0), 4, tol=1e-12)
    assert times[0] == 0.0
    for a, b in zip(times, times[1:]):
        assert abs(b - a - 2 * math.pi) < 1e-10


def test_tolerance_refinement_reduces_error():
    sys = build_system(linear())
    errs = []
    for tol in (1e-7, 1e-9, 1e-11):
        t = poincare_periods(sys, (0.5, 0.0, 0.0), 2, tol=tol)
        errs.append(abs(t[-1] - 4 * math.pi))
    assert errs[2] <= errs[0]
    assert errs[2] < 1e-9


def test_u_decays_exponentially():
    sys = build_system(moon_rand(), MR0)
    traj = integrate(sys, (0.1, 0.0, 0.05), 5.0, tol=1e-12)
    for t in (1.0, 2.5, 5.0):
        # u' = -u - 0 * ... since c1 = c2 = c3 = 0, u decouples exactly
        assert abs(traj(t)[2] - 0.05 * math.exp(-t)) < 1e-11


def test_section_crossings_lie_on_section():
    sys = build_system(moon_rand(), {"c0": "1", "c1": "1", "c2": "1", "c3": "1"})
    x0 = (0.1, 0.0, 0.0)
    n = 3
    times = poincare_periods(sys, x0, n, tol=1e-12)
    # same horizon and settings as poincare_periods, so the dense output agrees
    traj = integrate(sys, x0, 2.0 * 2 * math.pi * (n + 1), tol=1e-12)
    assert len(times) == n + 1
    for t in times[1:]:
        x, y, _ = traj(t)
        assert abs(y) <= 1e-12
        assert x > 0


def test_orientation_respected():
    ps = ParamSet()
    spec = embed_2d({}, {}, ps, orientation=-1)
    sys = build_system(spec)
    times = poincare_periods(sys, (0.2, 0.0, 0.0), 2, tol=1e-12)
    assert abs(times[1] - 2 * math.pi) < 1e-9


def test_tolerance_range_enforced():
    sys = build_system(linear())
    with pytest.raises(ValueError):
        integrate(sys, (0.1, 0, 0), 1.0, tol=1e-3)


def test_non_oscillatory_detected():
    # a budget shorter than two turns cannot hold five returns
    sys = build_system(linear())
    with pytest.raises(NonOscillatoryError):
        poincare_periods(sys, (0.1, 0.0, 0.0), 5, tol=1e-10, budget=3.0)


def test_moon_rand_isochronous_center():
    sys = build_system(moon_rand(), MR0)
    res = scan(sys, [0.05, 0.1], n_returns=4, tol=1e-12)
    assert isochronicity_verdict(res, 1e-9) == "isochronous-consistent"


def test_generic_moon_rand_deviates():
    sys = build_system(moon_rand(), {"c0": "1", "c1": "1", "c2": "1", "c3": "1"})
    res = scan(sys, [0.1], n_returns=4, tol=1e-12)
    assert res.rows[0].deviation > 1e-4
    assert isochronicity_verdict(res, 1e-7) == "deviation-detected"


def test_manifold_start_matches_plain_start():
    params = {"c0": "1", "c1": "1/8", "c2": "1", "c3": "-3/8"}
    a = scan(build_system(moon_rand(), params), [0.05], 6, 1e-12)
    b = scan(build_system(moon_rand(), params, manifold_degree=5), [0.05], 6, 1e-12, on_manifold=True)
    assert abs(a.rows[0].mean_period - b.rows[0].mean_period) < 1e-8


def test_csv_and_verdict_block():
    sys = build_system(linear())
    res = scan(sys, [0.05, 0.1], n_returns=2, tol=1e-12)
    lines = res.to_csv().strip().split("\n")
    assert lines[0] == "amplitude,return_index,return_time,gap"
    assert len(lines) == 1 + 2 * 2
    block = verdict_block(res, 1e-7, 1e-12)
    assert block["verdict"] == "isochronous-consistent"
    assert "not a proof" in block["note"]


def test_deviation_slope_synthetic():
    from isochron.numverify import ScanRow
    rows = [ScanRow(a, [0.0, 1.0], 1.0, 3.0 * a**4) for a in (0.02, 0.04, 0.08)]
    assert abs(deviation_slope(PeriodScan(rows)) - 4.0) < 1e-9


def test_missing_parameter():
    with pytest.raises(ValueError):
        build_system(moon_rand(), {"c0": "1"})


def test_condition_iv_fixture_real():
    sys = build_system(quad_condition_iv_numeric())
    res = scan(sys, [0.05], n_returns=4, tol=1e-12)
    assert res.rows[0].deviation < 1e-7
