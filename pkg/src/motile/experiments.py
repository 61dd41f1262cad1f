"""Convergence and drift studies on the four-ellipse initial curve."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NotSteady, SelfIntersecting, ValidationError
from .geometry import DiscreteCurve, Point2, arclength_reparametrize, build_curve
from .interface_solver import SimConfig, Trajectory, detect_steady_state, run

log = logging.getLogger(__name__)

CIRC_TOL = 1e-3
WINDOW = 10
DENSE_PER_UNIT_LENGTH = 400


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    err: float
    rho: float | None


@dataclass(frozen=True)
class DriftReport:
    beta: float
    zeta: float
    center_beta: Point2
    center_zero: Point2
    drift: float

    @property
    def drift_x(self) -> float:
        return self.center_beta.x - self.center_zero.x

    @property
    def drift_y(self) -> float:
        return self.center_beta.y - self.center_zero.y


def _arc(fn, t0: float, t1: float, length_hint: float) -> np.ndarray:
    k = max(64, int(math.ceil(DENSE_PER_UNIT_LENGTH * length_hint)))
    return fn(np.linspace(t0, t1, k + 1))


def _length(fn, t0, t1) -> float:
    pts = fn(np.linspace(t0, t1, 4001))
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


def four_ellipse_curve(zeta: float, n: int) -> DiscreteCurve:
    """Closed curve glued from four elliptic arcs, with a well of depth ``zeta``.

    The arcs are ``(4 cos t, 3 sin t)`` on the right, lobes
    ``(2 cos t, 3/4 sin t +- 9/4)`` on the left and the well
    ``(zeta cos t, 3/2 sin t)`` between them.  The upper half is sampled
    densely (proportionally to arc length) and mirrored, then resampled to
    ``n`` equally spaced vertices starting at ``(4, 0)``; the result is
    symmetric about the x-axis up to rounding.
    """
    if n < 64:
        raise ValidationError("the four-ellipse curve needs n >= 64")
    return sample_four_ellipse(zeta, n)


def sample_four_ellipse(zeta: float, n: int) -> DiscreteCurve:
    """:func:`four_ellipse_curve` without the ``n >= 64`` floor.

    Used by the convergence study, whose coarsest level is ``n = 32``.
    """
    if not zeta > 0:
        raise ValidationError("zeta must be positive")
    if zeta >= 4.0 - 1e-9:
        raise SelfIntersecting(f"zeta = {zeta} reaches the outer arc at x = 4")

    def outer(t):
        return np.column_stack((4.0 * np.cos(t), 3.0 * np.sin(t)))

    def lobe(t):
        return np.column_stack((2.0 * np.cos(t), 0.75 * np.sin(t) + 2.25))

    def well(t):
        return np.column_stack((zeta * np.cos(t), 1.5 * np.sin(t)))

    half = np.pi / 2
    pieces = [
        (outer, 0.0, half),
        (lobe, half, 3 * half),
        (well, half, 0.0),
    ]
    upper = [_arc(fn, a, b, _length(fn, a, b)) for fn, a, b in pieces]
    top = np.vstack([upper[0], upper[1][1:], upper[2][1:]])
    # top runs (4, 0) -> (zeta, 0); mirror it to close the loop
    bottom = top[-2:0:-1] * np.array([1.0, -1.0])
    dense = build_curve(np.vstack([top, bottom]))
    return arclength_reparametrize(dense, n)


def _steady_center(traj: Trajectory, label: str) -> tuple[Point2, float]:
    steady, center, radius = detect_steady_state(traj, CIRC_TOL, WINDOW)
    if not steady:
        raise NotSteady(f"{label} did not reach a steady circle by t = {traj.times[-1]:.4g}")
    return center, radius


def _run_center(args) -> tuple[Point2, float, dict]:
    zeta, cfg = args
    traj = run(sample_four_ellipse(zeta, cfg.n), cfg)
    center, radius = _steady_center(traj, f"zeta={zeta}, beta={cfg.beta}, n={cfg.n}")
    return center, radius, traj.summary


def _map(fn, jobs: Iterable, n_jobs: int) -> list:
    jobs = list(jobs)
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def default_dt_rule(n: int) -> float:
    return 0.5 / (n * n)


def convergence_study(zeta: float = 2.0, beta: float = 1.0,
                      dt_rule: Callable[[int], float] = default_dt_rule, T: float = 20.0,
                      Ns: Sequence[int] = (32, 64, 128, 256, 512), base: SimConfig | None = None,
                      jobs: int = 1, details: dict | None = None) -> list[ConvergenceRow]:
    """Self-convergence of the steady-state center under ``N -> 2N``.

    Returns one row per ``N`` except the finest, with
    ``err_N = |C_N - C_2N|`` and ``rho_N = log2(err_N / err_2N)`` (``None``
    on the last row).  ``details``, when given, receives the per-run centers
    and run summaries.
    """
    Ns = sorted(Ns)
    if len(Ns) < 2 or any(b != 2 * a for a, b in zip(Ns, Ns[1:])):
        raise ValidationError("Ns must be a doubling sequence of length >= 2")
    base = base or SimConfig()
    cfgs = [base.with_(n=N, dt=dt_rule(N), t_end=T, beta=beta) for N in Ns]
    results = _map(_run_center, [(zeta, c) for c in cfgs], jobs)
    centers = {N: np.array(r[0]) for N, r in zip(Ns, results)}
    if details is not None:
        details.update({N: {"center": tuple(centers[N]), "radius": r[1], "summary": r[2]}
                        for N, r in zip(Ns, results)})
    errs = [float(np.linalg.norm(centers[a] - centers[b])) for a, b in zip(Ns, Ns[1:])]
    rows = []
    for k, N in enumerate(Ns[:-1]):
        rho = math.log2(errs[k] / errs[k + 1]) if k + 1 < len(errs) else None
        rows.append(ConvergenceRow(N, errs[k], rho))
    return rows


def drift(zeta: float, beta: float, cfg: SimConfig | None = None,
          baseline: Point2 | None = None) -> DriftReport:
    """Distance between the steady centers of the ``beta`` run and the ``beta = 0`` run."""
    cfg = (cfg or SimConfig()).with_(beta=beta)
    if baseline is None:
        baseline = _run_center((zeta, cfg.with_(beta=0.0)))[0]
    if beta == 0.0:
        center = baseline
    else:
        center = _run_center((zeta, cfg))[0]
    d = math.hypot(center.x - baseline.x, center.y - baseline.y)
    return DriftReport(beta, zeta, center, baseline, d)


def beta_sweep(zeta: float, betas: Sequence[float], cfg: SimConfig | None = None,
               jobs: int = 1, details: list | None = None) -> list[DriftReport]:
    """Drift for each ``beta``; the ``beta = 0`` baseline is computed once.

    ``details``, when given, receives one run summary per simulation.
    """
    cfg = cfg or SimConfig()
    runs = [0.0] + [b for b in betas if b != 0.0]
    res = _map(_run_center, [(zeta, cfg.with_(beta=b)) for b in runs], jobs)
    if details is not None:
        details.extend(r[2] for r in res)
    centers = dict(zip(runs, (r[0] for r in res)))
    base = centers[0.0]
    return [DriftReport(b, zeta, centers[b], base,
                        math.hypot(centers[b].x - base.x, centers[b].y - base.y)) for b in betas]


def zeta_sweep(beta: float, zetas: Sequence[float], cfg: SimConfig | None = None,
               jobs: int = 1, details: list | None = None) -> list[DriftReport]:
    """Drift for each ``zeta``, each against its own ``beta = 0`` baseline."""
    cfg = cfg or SimConfig()
    jobs_list = [(z, cfg.with_(beta=b)) for z in zetas for b in (0.0, beta)]
    res = _map(_run_center, jobs_list, jobs)
    if details is not None:
        details.extend(r[2] for r in res)
    out = []
    for i, z in enumerate(zetas):
        base, cen = res[2 * i][0], res[2 * i + 1][0]
        out.append(DriftReport(beta, z, cen, base, math.hypot(cen.x - base.x, cen.y - base.y)))
    return out


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line ``y = a x + b``; returns ``(a, b, R^2)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    a, b = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (a * x + b)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(a), float(b), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def segments_intersect(curve: DiscreteCurve) -> bool:
    """Brute-force test for crossings between non-adjacent edges."""
    p = curve.points
    q = np.roll(p, -1, axis=0)
    n = len(p)

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        a, b = p[i], q[i]
        c, d = p[j], q[j]
        o1 = orient(a, b, c)
        o2 = orient(a, b, d)
        o3 = orient(c, d, a[None, :].repeat(len(j), 0))
        o4 = orient(c, d, b[None, :].repeat(len(j), 0))
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return True
    return False
