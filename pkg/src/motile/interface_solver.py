"""Lagrangian point-tracking solver for the non-local interface law.

Each vertex moves along its inward normal with a velocity solving the local
implicit law ``V_i = kappa_i + beta * Phi(V_i) - C``.  The scalar ``C`` plays
the role of the non-local term and is tuned by a feedback loop until the
moved polygon encloses the initial area ``A0``.  The time loop is explicit
and the curve is resampled at equal arc length every ``reparam_every`` steps.

The feedback update is ``C <- C - gain * dA`` with ``dA`` the relative area
discrepancy of the trial curve.  With CCW curves and inward normals a larger
``C`` lowers ``V`` and therefore restores lost area, which fixes the sign.
By default the gain is the inverse of ``d(dA)/dC`` evaluated on the current
trial velocities, so the loop is a Newton iteration on ``C``; a fixed float
gain reproduces plain relaxation.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import _kernels as K
from .errors import (
    BlowUp,
    ConventionError,
    NoConvergence,
    NonFinite,
    ValidationError,
    ZeroTangent,
)
from .geometry import (
    DiscreteCurve,
    Point2,
    arclength_reparametrize,
    build_curve,
    centroid,
    circularity,
    mean_radius,
    shoelace_area,
)
from .phi import PhiModel, beta_critical

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    """Solver knobs.  ``dt=None`` resolves to the largest stable step ``h**2 / 2``."""

    n: int = 128
    dt: float | None = None
    t_end: float = 20.0
    beta: float = 1.0
    model: PhiModel = field(default_factory=PhiModel.gaussian)
    tol: float = 1e-4
    max_fixed_point_iters: int = 100
    max_area_iters: int = 200
    reparam_every: int = 10
    area_gain: float | None = None
    snapshot_stride: int | None = None

    def __post_init__(self):
        if self.n < 8:
            raise ValidationError(f"n = {self.n} < 8")
        h = 1.0 / self.n
        if self.dt is None:
            object.__setattr__(self, "dt", 0.5 * h * h)
        if not self.dt > 0:
            raise ValidationError(f"dt = {self.dt} must be positive")
        ratio = self.dt / (h * h)
        if ratio > 0.5 * (1 + 1e-12):
            raise ValidationError(f"dt/h^2 = {ratio:.6g} > 0.5")
        if not self.t_end > 0:
            raise ValidationError(f"t_end = {self.t_end} must be positive")
        bcr = beta_critical(self.model)
        if not 0 <= self.beta < bcr:
            raise ValidationError(f"beta = {self.beta} outside [0, beta_cr = {bcr:.6g})")
        if not self.tol > 0:
            raise ValidationError(f"tol = {self.tol} must be positive")
        if self.max_fixed_point_iters < 1 or self.max_area_iters < 1:
            raise ValidationError("iteration caps must be positive")
        if self.reparam_every < 0:
            raise ValidationError("reparam_every must be >= 0 (0 disables resampling)")
        if self.area_gain is not None and not self.area_gain > 0:
            raise ValidationError(f"area_gain = {self.area_gain} must be positive")
        if self.snapshot_stride is None:
            object.__setattr__(self, "snapshot_stride", max(1, math.ceil(0.1 / self.dt - 1e-9)))
        if self.snapshot_stride < 1:
            raise ValidationError("snapshot_stride must be >= 1")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_steps(self) -> int:
        k = round(self.t_end / self.dt)
        if abs(k * self.dt - self.t_end) > 1e-9 * self.t_end:
            k = math.ceil(self.t_end / self.dt)
        return int(k)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["model"] = self.model.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        if "model" in data:
            data["model"] = PhiModel.from_dict(data["model"])
        return cls(**data)

    def with_(self, **changes) -> "SimConfig":
        if "n" in changes and "dt" not in changes:
            changes["dt"] = None
        if "dt" in changes and "snapshot_stride" not in changes:
            changes["snapshot_stride"] = None
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class StepReport:
    velocities: np.ndarray
    C: float
    area_residual: float
    fixed_point_iters: int
    area_iters: int
    velocity_residual: float = 0.0


@dataclass
class Trajectory:
    """Time-stamped snapshots of a run.

    ``reports[k]`` describes the step that produced ``snapshots[k + 1]``.
    ``summary`` aggregates over every step, not only the recorded ones.
    """

    times: list[float]
    snapshots: list[DiscreteCurve]
    reports: list[StepReport]
    initial_area: float
    config: SimConfig | None = None
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.snapshots)

    @property
    def final(self) -> DiscreteCurve:
        return self.snapshots[-1]

    def areas(self) -> np.ndarray:
        return np.array([shoelace_area(c) for c in self.snapshots])


def solve_local_velocity(kappa: float, beta: float, model: PhiModel, C: float, tol: float = 1e-4,
                         max_iters: int = 100, v0: float | None = None) -> float:
    """Solve ``V = kappa + beta * Phi(V) - C`` by fixed-point iteration.

    The iteration starts from ``v0`` (default ``kappa - C``, the ``beta = 0``
    solution) and stops once successive iterates differ by at most ``tol``.

    Raises
    ------
    NoConvergence
        ``max_iters`` reached first.
    """
    kind, bx, coef = model.kernel_arrays()
    start = kappa - C if v0 is None else v0
    v, k, ok = K.solve_velocity(float(kappa), float(beta), kind, bx, coef, float(C), float(tol),
                                int(max_iters), float(start))
    if not ok:
        raise NoConvergence(f"velocity iteration stalled after {k} iterations (kappa={kappa}, C={C})")
    return v


def _raise_for(status: int, where: str, stats=None) -> None:
    if status == K.OK:
        return
    if status == K.FP_NO_CONVERGENCE:
        raise NoConvergence(f"{where}: velocity fixed-point iteration did not converge")
    if status == K.AREA_NO_CONVERGENCE:
        dA = stats[0] if stats is not None else float("nan")
        raise NoConvergence(f"{where}: area feedback did not converge (last dA = {dA:.3e})")
    if status == K.ZERO_TANGENT:
        raise ZeroTangent(f"{where}: vanishing tangent; the curve needs reparametrization")
    if status == K.BLOW_UP:
        raise BlowUp(f"{where}: vertex displacement exceeded 10 h in one step")
    if status == K.CONVENTION:
        raise ConventionError(
            f"{where}: |dA| did not decrease across the first two feedback iterations "
            f"({stats[4]:.3e} -> {stats[5]:.3e})"
        )
    if status == K.NON_FINITE:
        raise NonFinite(f"{where}: non-finite area")
    raise RuntimeError(f"{where}: unknown kernel status {status}")


def step(curve: DiscreteCurve, cfg: SimConfig, C_in: float = 0.0, area0: float | None = None,
         v0: np.ndarray | None = None, check_convention: bool = True) -> tuple[DiscreteCurve, StepReport]:
    """Advance ``curve`` by one time step.

    Parameters
    ----------
    curve : DiscreteCurve
        Current state; its vertex count need not equal ``cfg.n`` but ``h``
        is taken from the curve.
    cfg : SimConfig
    C_in : float
        Starting value of the volume constant (warm start).
    area0 : float, optional
        Target area; defaults to the area of ``curve``.
    v0 : ndarray, optional
        Initial velocity guesses; defaults to ``kappa - C_in``.
    """
    n = curve.n
    px = np.array(curve.x)
    py = np.array(curve.y)
    kind, bx, coef = cfg.model.kernel_arrays()
    A0 = shoelace_area(curve) if area0 is None else float(area0)
    h = 1.0 / n
    ox, oy = np.empty(n), np.empty(n)
    kappa, nx, ny, speed = (np.empty(n) for _ in range(4))
    if v0 is None:
        if not K.geometry(px, py, h, kappa, nx, ny, speed):
            raise ZeroTangent("vanishing tangent; the curve needs reparametrization")
        V = kappa - C_in
    else:
        V = np.array(v0, dtype=float)
    stats = np.zeros(7)
    status, C = K.step_core(px, py, h, cfg.dt, cfg.beta, kind, bx, coef, float(C_in), A0, cfg.tol,
                            cfg.max_fixed_point_iters, cfg.max_area_iters, cfg.area_gain is None,
                            1.0 if cfg.area_gain is None else cfg.area_gain, V, ox, oy, kappa, nx, ny,
                            speed, stats)
    if check_convention and stats[1] >= 2 and not abs(stats[5]) < abs(stats[4]):
        _raise_for(K.CONVENTION, "step", stats)
    _raise_for(status, "step", stats)
    report = StepReport(velocities=V.copy(), C=C, area_residual=float(stats[0]),
                        fixed_point_iters=int(stats[2]), area_iters=int(stats[1]),
                        velocity_residual=float(stats[3]))
    return build_curve(np.column_stack((ox, oy))), report


def run(curve0: DiscreteCurve, cfg: SimConfig, warm_velocity: bool = True) -> Trajectory:
    """Integrate from ``curve0`` to ``cfg.t_end``.

    Snapshots are recorded every ``cfg.snapshot_stride`` steps and at the
    final time.  Velocities are warm-started from the previous step unless
    ``warm_velocity`` is false.  On failure the partial trajectory is
    attached to the raised exception as ``exc.trajectory``.
    """
    if curve0.n != cfg.n:
        curve0 = arclength_reparametrize(curve0, cfg.n)
    n = cfg.n
    h = cfg.h
    A0 = shoelace_area(curve0)
    kind, bx, coef = cfg.model.kernel_arrays()
    px = np.array(curve0.x)
    py = np.array(curve0.y)
    kappa, nx, ny, speed = (np.empty(n) for _ in range(4))
    if not K.geometry(px, py, h, kappa, nx, ny, speed):
        raise ZeroTangent("initial curve has a vanishing tangent")
    C = 0.0
    V = kappa - C
    summary = np.zeros(7)
    last = np.zeros(7)
    check = True
    traj = Trajectory(times=[0.0], snapshots=[curve0], reports=[], initial_area=A0, config=cfg)
    total = cfg.n_steps
    done = 0
    t_start = time.perf_counter()
    auto = cfg.area_gain is None
    gain = 1.0 if auto else float(cfg.area_gain)
    while done < total:
        block = min(cfg.snapshot_stride, total - done)
        status, C, check = K.advance(px, py, block, done, cfg.reparam_every, h, cfg.dt, cfg.beta,
                                     kind, bx, coef, C, A0, cfg.tol, cfg.max_fixed_point_iters,
                                     cfg.max_area_iters, auto, gain, V, check, summary, last)
        if status != K.OK:
            done = int(summary[5])
            traj.summary = _summary(summary, time.perf_counter() - t_start)
            try:
                _raise_for(status, f"step {done + 1} (t = {(done + 1) * cfg.dt:.6g})", last)
            except Exception as exc:
                exc.trajectory = traj
                raise
        if not warm_velocity:
            K.geometry(px, py, h, kappa, nx, ny, speed)
            V[:] = kappa - C
        done += block
        traj.times.append(done * cfg.dt)
        traj.snapshots.append(build_curve(np.column_stack((px, py))))
        traj.reports.append(StepReport(velocities=V.copy(), C=C, area_residual=float(last[0]),
                                       fixed_point_iters=int(last[2]), area_iters=int(last[1]),
                                       velocity_residual=float(last[3])))
        log.debug("t=%.4f C=%.6f dA=%.2e circ=%.3e", traj.times[-1], C, last[0],
                  circularity(traj.snapshots[-1]))
    traj.summary = _summary(summary, time.perf_counter() - t_start)
    return traj


def _summary(s: np.ndarray, wall: float) -> dict:
    return {
        "max_area_residual": float(s[0]),
        "max_velocity_residual": float(s[1]),
        "total_area_iters": int(s[2]),
        "max_area_iters": int(s[3]),
        "max_fixed_point_iters": int(s[4]),
        "steps": int(s[5]),
        "max_displacement": float(s[6]),
        "wall_seconds": wall,
    }


def detect_steady_state(traj: Trajectory, circ_tol: float = 1e-3,
                        window: int = 10) -> tuple[bool, Point2, float]:
    """Check whether the last ``window`` snapshots are a resting circle.

    Returns ``(is_steady, center, radius)`` for the final snapshot, with
    ``center`` the vertex mean and ``radius`` the mean vertex distance to it.
    """
    if not traj.snapshots:
        raise ValueError("empty trajectory")
    final = traj.snapshots[-1]
    center = centroid(final)
    radius = mean_radius(final)
    tail = traj.snapshots[-window:]
    if len(tail) < window:
        return False, center, radius
    if any(circularity(c) > circ_tol for c in tail):
        return False, center, radius
    cs = np.array([centroid(c) for c in tail])
    moved = float(np.max(np.hypot(*(cs - cs[-1]).T)))
    return moved <= circ_tol * radius, center, radius
