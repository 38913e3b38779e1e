"""Numerical period measurement for real 3D systems.

Trajectories are integrated with scipy's DOP853 (explicit Runge-Kutta 8(5,3)
with dense output).  Crossings of the half-plane {y = 0, x > 0} in the
rotation direction are bracketed on the step grid and refined by bisection
on the dense interpolant.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .manifold import compute_manifold
from .scalar import ParamSet, Scalar
from .sysmodel import ComplexSystemSpec, RealSystemSpec, complexify, realify, substitute_params

TWO_PI = 2.0 * math.pi
SECTION_TOL = 1e-12


class IntegrationError(RuntimeError):
    """Step-size underflow or another solver failure."""


class DivergenceError(IntegrationError):
    pass


class NonOscillatoryError(IntegrationError):
    pass


def _real_float(s: Scalar, label: str) -> float:
    v = complex(s.constant_value())
    if v.imag != 0:
        raise ValueError(f"{label} is not real at the given parameters: {v}")
    return float(v.real)


class _Poly:
    """x^k y^j u^l polynomial with float coefficients, evaluated term by term."""

    def __init__(self, terms: Mapping[tuple, float]):
        items = sorted(terms.items())
        self.exps = np.array([e for e, _ in items], dtype=int).reshape(-1, 3)
        self.coef = np.array([c for _, c in items], dtype=float)
        self.maxdeg = int(self.exps.max()) if len(items) else 0

    def __call__(self, x: float, y: float, u: float) -> float:
        if not len(self.coef):
            return 0.0
        px = [1.0]
        py = [1.0]
        pu = [1.0]
        for _ in range(self.maxdeg):
            px.append(px[-1] * x)
            py.append(py[-1] * y)
            pu.append(pu[-1] * u)
        total = 0.0
        for (k, j, l), c in zip(self.exps, self.coef):
            total += c * px[k] * py[j] * pu[l]
        return total


@dataclass
class NumSystem:
    """Floating evaluator of (X, Y, U) at a fixed parameter point."""

    spec: RealSystemSpec
    X: _Poly
    Y: _Poly
    U: _Poly
    manifold: dict | None = None

    @property
    def orientation(self) -> int:
        return self.spec.orientation

    def rhs(self, t: float, s) -> np.ndarray:
        x, y, u = s
        return np.array([self.X(x, y, u), self.Y(x, y, u), self.U(x, y, u)])

    def h(self, x: float, y: float) -> float:
        """Center-manifold height at (x, y); zero without a manifold."""
        if not self.manifold:
            return 0.0
        return sum(c * x**a * y**b for (a, b), c in self.manifold.items())


def numeric_spec(spec, assignment: Mapping[str, object]) -> RealSystemSpec:
    """Substitute every parameter and return the real form."""
    missing = [n for n in spec.params.names if n not in assignment]
    if missing:
        raise ValueError(f"parameters without a value: {', '.join(missing)}")
    extra = [n for n in assignment if n not in spec.params]
    if extra:
        raise ValueError(f"unknown parameters: {', '.join(extra)}")
    num = substitute_params(spec, dict(assignment)) if assignment else spec
    if isinstance(num, ComplexSystemSpec):
        num = realify(num)
    return num


def build_system(spec, assignment: Mapping[str, object] | None = None, manifold_degree: int | None = None) -> NumSystem:
    real = numeric_spec(spec, assignment or {})
    X, Y, U = real.full_equations()
    polys = [_Poly({e: _real_float(c, f"coefficient {e}") for e, c in eq.items()}) for eq in (X, Y, U)]
    h = None
    if manifold_degree:
        approx = compute_manifold(complexify(real), manifold_degree)
        h = {e: _real_float(c, f"manifold coefficient {e}") for e, c in approx.real_form().items()}
    return NumSystem(real, *polys, manifold=h)


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    sol: object

    def __call__(self, t):
        return self.sol(t)


def integrate(sys: NumSystem, x0: Sequence[float], t_end: float, tol: float = 1e-10, max_step: float = 0.5) -> Trajectory:
    if not (1e-13 <= tol <= 1e-6):
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (3,) or not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be three finite numbers")

    def rhs(t, s):
        v = sys.rhs(t, s)
        if not np.all(np.isfinite(v)):
            raise DivergenceError(f"non-finite vector field at t={t:.6g}")
        return v

    def blowup(t, s):
        return 1e6 - float(np.max(np.abs(s)))

    blowup.terminal = True
    res = solve_ivp(rhs, (0.0, t_end), x0, method="DOP853", rtol=tol, atol=tol * 1e-3,
                    dense_output=True, max_step=max_step, events=blowup)
    if res.status == -1:
        raise IntegrationError(res.message)
    if res.status == 1 or not np.all(np.isfinite(res.y)):
        raise DivergenceError(f"trajectory left every bounded region near t={res.t[-1]:.6g}")
    return Trajectory(res.t, res.y, res.sol)


def _refine(traj: Trajectory, t0: float, t1: float) -> float:
    y0 = traj(t0)[1]
    for _ in range(200):
        tm = 0.5 * (t0 + t1)
        ym = traj(tm)[1]
        if abs(ym) <= SECTION_TOL or t1 - t0 <= 4 * np.finfo(float).eps * max(1.0, abs(tm)):
            return tm
        if (ym > 0) == (y0 > 0):
            t0, y0 = tm, ym
        else:
            t1 = tm
    return 0.5 * (t0 + t1)


def poincare_periods(sys: NumSystem, x0: Sequence[float], n_returns: int, tol: float = 1e-10,
                     budget: float | None = None) -> list[float]:
    """Times of successive crossings of {y = 0, x > 0} in the rotation direction.

    A start on the section counts as the crossing at t = 0.
    """
    if n_returns < 1:
        raise ValueError("n_returns must be positive")
    x0 = np.asarray(x0, dtype=float)
    if np.hypot(x0[0], x0[1]) == 0:
        raise ValueError("initial state must be off the origin")
    budget = budget or 2.0 * TWO_PI * (n_returns + 1)
    traj = integrate(sys, x0, budget, tol)
    sign = sys.orientation
    times = [0.0] if (x0[1] == 0 and x0[0] > 0) else []
    ts, ys = traj.t, traj.y
    for k in range(len(ts) - 1):
        ya, yb = ys[1, k], ys[1, k + 1]
        if ts[k] == 0.0 and ya == 0.0:
            continue
        # crossing in the rotation direction: y goes from -sign to +sign side
        if sign * ya < 0 <= sign * yb or (ya == 0 and sign * yb > 0 and k > 0):
            tc = _refine(traj, ts[k], ts[k + 1])
            if traj(tc)[0] > 0:
                times.append(tc)
        if len(times) >= n_returns + 1:
            break
    if len(times) < n_returns + 1:
        raise NonOscillatoryError(f"only {len(times)} section crossings within t <= {budget:g}")
    return times[: n_returns + 1]


@dataclass
class ScanRow:
    amplitude: float
    return_times: list
    mean_period: float
    deviation: float

    @property
    def gaps(self) -> list:
        return [b - a for a, b in zip(self.return_times, self.return_times[1:])]


@dataclass
class PeriodScan:
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["amplitude", "return_index", "return_time", "gap"])
        for row in self.rows:
            for k, (t, g) in enumerate(zip(row.return_times[1:], row.gaps), start=1):
                w.writerow([repr(row.amplitude), k, repr(t), repr(g)])
        return buf.getvalue()


def scan(sys: NumSystem, amplitudes: Sequence[float], n_returns: int = 6, tol: float = 1e-12,
         on_manifold: bool = False) -> PeriodScan:
    """Measure return times from (a, 0, u0) for each amplitude a.

    u0 is h(a, 0) when ``on_manifold`` and the system carries a manifold,
    otherwise 0.  The mean period uses the last half of the returns so that
    off-manifold transients have decayed.
    """
    out = PeriodScan()
    for a in amplitudes:
        u0 = sys.h(a, 0.0) if on_manifold else 0.0
        times = poincare_periods(sys, (a, 0.0, u0), n_returns, tol)
        gaps = np.diff(times)
        tail = gaps[len(gaps) // 2:]
        mean = float(np.mean(tail))
        out.rows.append(ScanRow(float(a), list(times), mean, abs(mean - TWO_PI)))
    return out


def isochronicity_verdict(scan: PeriodScan, epsilon: float) -> str:
    """'isochronous-consistent' if every deviation <= epsilon.

    The verdict is numerical evidence, never a proof.
    """
    if not scan.rows:
        raise ValueError("empty scan")
    worst = max(r.deviation for r in scan.rows)
    return "isochronous-consistent" if worst <= epsilon else "deviation-detected"


def verdict_block(scan: PeriodScan, epsilon: float, tol: float) -> dict:
    return {
        "verdict": isochronicity_verdict(scan, epsilon),
        "epsilon": epsilon,
        "tol": tol,
        "max_deviation": max(r.deviation for r in scan.rows),
        "rows": [
            {"amplitude": r.amplitude, "mean_period": r.mean_period, "deviation": r.deviation}
            for r in scan.rows
        ],
        "note": "numerical evidence only; not a proof of isochronicity",
    }


def deviation_slope(scan: PeriodScan) -> float:
    """Least-squares slope of log(deviation) against log(amplitude)."""
    a = np.log([r.amplitude for r in scan.rows])
    d = np.log([r.deviation for r in scan.rows])
    return float(np.polyfit(a, d, 1)[0])


def dumps_verdict(block: dict) -> str:
    return json.dumps(block, indent=2, sort_keys=True)
