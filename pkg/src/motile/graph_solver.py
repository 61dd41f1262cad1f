"""Graph solver in tubular coordinates over a reference circle.

A curve near the circle of radius ``R`` is written as
``Gamma(sigma) = Gamma0(sigma) + u(sigma) * nu(sigma)`` with ``sigma`` the arc
length on the circle and ``nu`` its inward normal, so ``u > 0`` moves the
curve inward.  The interface law is resolved for the normal velocity: with
``Psi`` the inverse of ``V -> V - beta * Phi(V)``,

    V = Psi(kappa(u) - lambda),   sum_j V_j S_j dsigma = 0,

and ``u`` is advanced by ``u_t = S(u) / (1 - u kappa0) * V``.  This shares no
code path with :mod:`motile.interface_solver` beyond the kernel evaluation,
which is what makes it useful as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _graph_kernels as GK
from .errors import BlowUp, ChartExit, NoConvergence, ValidationError
from .geometry import DiscreteCurve, build_curve
from .interface_solver import SimConfig
from .phi import PhiModel, phi_deriv, phi_eval, sup_abs_deriv

# lambda is solved far below the solver tolerance; Newton makes it nearly free
LAMBDA_TOL = 1e-12
PSI_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class CurveChart:
    """Uniform arc-length grid on a reference circle of radius ``R``."""

    R: float
    n: int
    delta0: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValidationError("chart radius must be positive")
        if self.n < 8:
            raise ValidationError("chart needs at least 8 nodes")
        if not 0 < self.delta0 * self.kappa0 < 1:
            raise ValidationError(f"delta0 * kappa0 = {self.delta0 * self.kappa0:.4g} must lie in (0, 1)")

    @classmethod
    def circle(cls, R: float = 1.0, n: int = 256, delta0: float | None = None) -> "CurveChart":
        return cls(float(R), int(n), 0.8 * R if delta0 is None else float(delta0))

    @property
    def kappa0(self) -> float:
        return 1.0 / self.R

    @property
    def dsigma(self) -> float:
        return 2.0 * math.pi * self.R / self.n

    @property
    def sigma_grid(self) -> np.ndarray:
        return np.arange(self.n) * self.dsigma

    @property
    def angles(self) -> np.ndarray:
        return self.sigma_grid / self.R


@dataclass(frozen=True, eq=False)
class GraphState:
    u: np.ndarray
    t: float = 0.0
    lam: float = 0.0


def _admissible(u: np.ndarray, chart: CurveChart) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (chart.n,):
        raise ValueError(f"u must have shape ({chart.n},), got {u.shape}")
    if np.max(np.abs(u)) > chart.delta0:
        raise ChartExit(f"max|u| = {np.max(np.abs(u)):.4g} exceeds delta0 = {chart.delta0:.4g}")
    return u


def periodic_derivative(u: np.ndarray, dsigma: float) -> np.ndarray:
    return (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dsigma)


def chart_S(u, chart: CurveChart, u_sigma=None) -> np.ndarray:
    """Length element ``S = sqrt(u_sigma^2 + (1 - u kappa0)^2)``."""
    u = _admissible(u, chart)
    us = periodic_derivative(u, chart.dsigma) if u_sigma is None else np.asarray(u_sigma, dtype=float)
    return np.sqrt(us * us + (1.0 - u * chart.kappa0) ** 2)


def chart_curvature(u, chart: CurveChart) -> np.ndarray:
    """Curvature of the embedded curve from ``u`` (reference curvature is constant)."""
    u = _admissible(u, chart)
    S = np.empty(chart.n)
    kappa = np.empty(chart.n)
    GK.chart_geometry(np.ascontiguousarray(u), chart.dsigma, chart.kappa0, chart.delta0, S, kappa)
    return kappa


def _kernel(model: PhiModel):
    kind, bx, coef = model.kernel_arrays()
    lo, hi = model.bounds()
    return kind, bx, coef, lo, hi, model.sup_abs()


def psi_inverse(w: float, beta: float, model: PhiModel, tol: float = PSI_TOL) -> float:
    """Inverse of ``V -> V - beta * Phi(V)`` at ``w``."""
    if beta * sup_abs_deriv(model) >= 1:
        raise ValidationError("psi_inverse needs beta * sup|Phi'| < 1")
    kind, bx, coef, lo, hi, _ = _kernel(model)
    v, ok = GK.psi_inverse(float(w), float(beta), kind, bx, coef, lo, hi, float(tol), float(w))
    if not ok:
        raise NoConvergence(f"psi_inverse failed at w = {w}")
    return v


def psi_inverse_slope(v, beta: float, model: PhiModel):
    """``Psi'`` at the point whose image is ``v``: ``1 / (1 - beta Phi'(v))``."""
    return 1.0 / (1.0 - beta * phi_deriv(model, v))


def resolving_map(u, chart: CurveChart, beta: float, model: PhiModel,
                  tol: float = LAMBDA_TOL, lam_guess: float | None = None) -> tuple[np.ndarray, float]:
    """Return ``(V, lambda)`` solving the local law with zero net area flux.

    ``lambda`` is bracketed in ``[min kappa - beta sup|Phi| - 1, max kappa +
    beta sup|Phi| + 1]`` and found by bisection accelerated with Newton steps
    on the decreasing function ``G(lambda) = sum Psi(kappa_j - lambda) S_j dsigma``.
    """
    u = np.ascontiguousarray(_admissible(u, chart))
    S = np.empty(chart.n)
    kappa = np.empty(chart.n)
    GK.chart_geometry(u, chart.dsigma, chart.kappa0, chart.delta0, S, kappa)
    kind, bx, coef, lo, hi, sup = _kernel(model)
    V = kappa.copy()
    guess = float(np.sum(kappa * S) / np.sum(S)) if lam_guess is None else float(lam_guess)
    lam, _, ok = GK.resolve(kappa, S, chart.dsigma, float(beta), kind, bx, coef, lo, hi, sup,
                            float(tol), guess, V, PSI_TOL)
    if not ok:
        raise NoConvergence("lambda search did not converge")
    return V, lam


def graph_dt_limit(chart: CurveChart, beta: float, model: PhiModel) -> float:
    """Explicit stability bound ``(1 - beta sup|Phi'|) dsigma^2 / 2``."""
    return (1.0 - beta * sup_abs_deriv(model)) * chart.dsigma**2 / 2.0


def _check_dt(chart: CurveChart, cfg: SimConfig) -> None:
    limit = graph_dt_limit(chart, cfg.beta, cfg.model)
    if cfg.dt > limit * (1 + 1e-12):
        raise ValidationError(f"dt = {cfg.dt:.4g} exceeds the graph stability bound {limit:.4g}")


def step_graph(state: GraphState, chart: CurveChart, cfg: SimConfig) -> GraphState:
    """One explicit Euler step of ``u_t = S / (1 - u kappa0) * V``."""
    return run_graph(state, chart, cfg, 1)


def run_graph(state: GraphState, chart: CurveChart, cfg: SimConfig, n_steps: int,
              V_guess: np.ndarray | None = None) -> GraphState:
    """Advance ``n_steps`` explicit steps from ``state``."""
    _check_dt(chart, cfg)
    u = np.array(_admissible(state.u, chart), dtype=float)
    kind, bx, coef, lo, hi, sup = _kernel(cfg.model)
    V = np.zeros(chart.n) if V_guess is None else np.array(V_guess, dtype=float)
    lam = state.lam
    if state.t == 0.0 and lam == 0.0:
        lam = chart.kappa0
    status, lam, done = GK.advance(u, int(n_steps), cfg.dt, chart.dsigma, chart.kappa0, chart.delta0,
                                   float(cfg.beta), kind, bx, coef, lo, hi, sup, LAMBDA_TOL, PSI_TOL,
                                   float(lam), V)
    t = state.t + done * cfg.dt
    if status == GK.CHART_EXIT:
        raise ChartExit(f"u left [-delta0, delta0] at t = {t:.6g}")
    if status == GK.NO_CONVERGENCE:
        raise NoConvergence(f"lambda search failed at t = {t:.6g}")
    if status == GK.NON_FINITE:
        raise BlowUp(f"non-finite graph state at t = {t:.6g}")
    return GraphState(u=u, t=t, lam=lam)


def embed(state: GraphState, chart: CurveChart) -> DiscreteCurve:
    """Vertices ``Gamma0(sigma_j) + u_j nu(sigma_j)`` of the represented curve."""
    u = _admissible(state.u, chart)
    th = chart.angles
    r = chart.R - u
    return build_curve(np.column_stack((r * np.cos(th), r * np.sin(th))))


def chart_area(u, chart: CurveChart) -> float:
    """Enclosed area ``sum (R - u_j)^2 / (2 R) dsigma`` in polar quadrature.

    Its time derivative along ``u_t = S / (1 - u kappa0) * V`` is exactly
    ``-sum V_j S_j dsigma``, so the flux constraint conserves it to ``O(dt^2)``
    per explicit step.  The shoelace area of :func:`embed` differs by ``O(dsigma^2)``.
    """
    u = _admissible(u, chart)
    return float(np.sum((chart.R - u) ** 2) * chart.dsigma / (2.0 * chart.R))


def graph_state_from_function(fn, chart: CurveChart) -> GraphState:
    """Sample ``u = fn(sigma)`` on the chart grid."""
    return GraphState(u=np.asarray(fn(chart.sigma_grid), dtype=float))


def lambda_closed_form(V: np.ndarray, u, chart: CurveChart, beta: float, model: PhiModel) -> float:
    """``(sum kappa S + beta sum Phi(V) S) dsigma / L``, the closed form of lambda."""
    S = chart_S(u, chart)
    kappa = chart_curvature(u, chart)
    L = float(np.sum(S) * chart.dsigma)
    return float(np.sum((kappa + beta * phi_eval(model, V)) * S) * chart.dsigma / L)
