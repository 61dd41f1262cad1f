"""Shooting integrations for the traveling-wave closure obstruction.

A curve translating upward with speed ``c`` is written locally as a graph
``y(x)`` whose slope ``w = y'`` solves ``w' = f(w)``, ``w(0) = 0``, where

    f_lambda^c(z) = (c / sqrt(1+z^2) - Phi(c / sqrt(1+z^2)) + lambda) (1+z^2)^{3/2}

and ``Phi = beta * phi_eval(model, .)``.  The back of the curve uses ``+c``,
the front ``-c``.  Both slopes blow up in finite ``x`` for the parameter
ranges of interest, and a closed curve would need the two blow-up abscissae
to coincide.

Near blow-up ``f`` grows like ``|w|^3``, so integrating to ``w = +-inf`` is
replaced by integrating to ``|w| = w_cap`` and adding the finite tail
``int dw / f(w)``.  With ``w = tan(theta)`` the tail integrand becomes
``cos(theta) / (s c cos(theta) - Phi(s c cos(theta)) + lambda)``, which is
smooth up to ``theta = +-pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import NoBlowUp, StepUnderflow, ValidationError
from .phi import PhiModel, beta_critical, phi_eval

BACK = "back"
FRONT = "front"

X_CAP = 1e3
W_CAP = 1e6
W_SWITCH = 1e3
RTOL = 1e-10
ATOL = 1e-10
MIN_STEP = 1e-14


@dataclass(frozen=True)
class WaveParams:
    c: float
    lam: float
    beta: float = 1.0
    model: PhiModel = field(default_factory=PhiModel.gaussian)

    def __post_init__(self):
        if self.c < 0:
            raise ValidationError("wave speed c must be >= 0")
        if not 0 <= self.beta < beta_critical(self.model):
            raise ValidationError(f"beta = {self.beta} is not subcritical")

    def phi(self, v):
        if self.beta == 0.0:
            return 0.0 * np.asarray(v, dtype=float)
        return self.beta * phi_eval(self.model, v)


def f_lambda_c(z, p: WaveParams, sign: int = 1):
    """``f_lambda^{sign*c}(z)``."""
    z = np.asarray(z, dtype=float)
    q = sign * p.c / np.sqrt(1.0 + z * z)
    out = (q - p.phi(q) + p.lam) * (1.0 + z * z) ** 1.5
    return float(out) if np.ndim(out) == 0 else out


def g_lambda_c(z, p: WaveParams, sign: int = 1):
    """Right-hand side of the rotated-frame equation ``x'' = g(x')``."""
    z = np.asarray(z, dtype=float)
    q = -sign * p.c * z / np.sqrt(1.0 + z * z)
    out = (q - p.phi(q) + p.lam) * (1.0 + z * z) ** 1.5
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class BlowUpResult:
    """Outcome of one shooting integration.

    ``profile`` has columns ``x, w, y`` at the accepted integrator steps of
    both phases; ``w(x)`` and ``y(x)`` interpolate the first phase, which
    ends at ``x_end``.  ``x_star`` is ``nan`` when ``reached_cap`` is true.
    """

    x_star: float
    profile: np.ndarray
    reached_cap: bool
    side: int = 0
    selector: str = BACK
    direction: int = 1
    dense: object = field(default=None, repr=False)
    x_end: float = math.nan

    def w(self, x):
        return self.dense(np.asarray(x, dtype=float))[0]

    def y(self, x):
        return self.dense(np.asarray(x, dtype=float))[1]


def tail_abscissa(p: WaveParams, sign: int, w_from: float, side: int) -> float:
    """``int_{w_from}^{side * inf} dw / f(w)`` through ``w = tan(theta)``."""
    c = sign * p.c
    th0 = math.atan(w_from)
    th1 = side * math.pi / 2.0

    def integrand(th):
        q = c * math.cos(th)
        return math.cos(th) / (q - float(p.phi(q)) + p.lam)

    val, _ = quad(integrand, th0, th1, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


def _check_steps(t, event_hit: bool) -> None:
    # the last interval ends at the located event, not at a solver step
    steps = np.abs(np.diff(t[:-1] if event_hit else t))
    if steps.size and steps.min() < MIN_STEP:
        raise StepUnderflow(f"adaptive step {steps.min():.2e} fell below {MIN_STEP:g}")


def integrate_w(p: WaveParams, front_or_back: str = BACK, x_cap: float = X_CAP,
                w_cap: float = W_CAP, direction: int = 1, first_step: float | None = None,
                rtol: float = RTOL, w_switch: float = W_SWITCH) -> BlowUpResult:
    """Shoot ``w' = f(w)``, ``w(0) = 0`` until ``|w| = w_cap`` or ``|x| = x_cap``.

    ``front_or_back`` selects ``-c`` (front) or ``+c`` (back).  With
    ``direction = -1`` the integration runs towards negative ``x``.

    Once ``|w|`` reaches ``w_switch`` the slope is taken as the independent
    variable, ``dx/dw = 1/f``, ``dy/dw = w/f``, up to ``|w| = w_cap``.  In
    ``x`` the last stretch to ``w_cap`` has length ``O(w_cap^-2)`` and would
    force steps down to rounding level.

    Raises
    ------
    StepUnderflow
        The adaptive step fell below ``1e-14``.
    """
    if x_cap <= 0 or w_cap <= 0:
        raise ValueError("x_cap and w_cap must be positive")
    if front_or_back not in (BACK, FRONT):
        raise ValueError(f"selector must be {BACK!r} or {FRONT!r}")
    sign = 1 if front_or_back == BACK else -1
    w_switch = min(w_switch, w_cap)

    def rhs(x, s):
        w = s[0]
        return [f_lambda_c(w, p, sign), w]

    def hit_top(x, s):
        return s[0] - w_switch

    def hit_bottom(x, s):
        return s[0] + w_switch

    hit_top.terminal = hit_bottom.terminal = True
    sol = solve_ivp(rhs, (0.0, direction * x_cap), [0.0, 0.0], method="RK45", rtol=rtol, atol=ATOL,
                    events=(hit_top, hit_bottom), dense_output=True, first_step=first_step)
    if sol.status == -1:
        raise StepUnderflow(f"integration failed: {sol.message}")
    _check_steps(sol.t, sol.status == 1)
    profile = np.column_stack((sol.t, sol.y[0], sol.y[1]))
    x_end = float(sol.t[-1])
    if sol.status != 1:
        return BlowUpResult(x_star=math.nan, profile=profile, reached_cap=True, side=0,
                            selector=front_or_back, direction=direction, dense=sol.sol, x_end=x_end)
    side = 1 if sol.t_events[0].size else -1
    w0 = side * w_switch
    x0, y0 = float(sol.t[-1]), float(sol.y[1, -1])
    if abs(w0) < w_cap:
        def rhs_w(w, s):
            f = f_lambda_c(w, p, sign)
            return [1.0 / f, w / f]

        sol2 = solve_ivp(rhs_w, (w0, side * w_cap), [x0, y0], method="RK45", rtol=rtol, atol=ATOL)
        if sol2.status != 0:
            raise StepUnderflow(f"slope-parametrized integration failed: {sol2.message}")
        _check_steps(sol2.t, False)
        profile = np.vstack((profile, np.column_stack((sol2.y[0, 1:], sol2.t[1:], sol2.y[1, 1:]))))
    x_star = profile[-1, 0] + tail_abscissa(p, sign, profile[-1, 1], side)
    return BlowUpResult(x_star=float(x_star), profile=profile, reached_cap=False, side=side,
                        selector=front_or_back, direction=direction, dense=sol.sol, x_end=x_end)


def blowup_quadrature(p: WaveParams, front_or_back: str = BACK) -> float:
    """``x*`` as ``int_0^{+-pi/2} cos / (s c cos - Phi + lambda)``.

    The side follows the sign of ``f(0)``; valid when the denominator keeps that sign.
    """
    sign = 1 if front_or_back == BACK else -1
    side = 1 if f_lambda_c(0.0, p, sign) > 0 else -1
    return tail_abscissa(p, sign, 0.0, side)


@dataclass
class ObstructionReport:
    x_star_B: float
    x_star_F: float
    gap: float
    pointwise_ok: bool
    back: BlowUpResult = field(repr=False, default=None)
    front: BlowUpResult = field(repr=False, default=None)

    @property
    def both_blow_up(self) -> bool:
        return not (self.back.reached_cap or self.front.reached_cap)

    @property
    def comparable(self) -> bool:
        """Both blow up and ``w_B -> +inf``, the case the comparison ``x*_F > x*_B`` addresses.

        A back profile that falls to ``-inf`` has ``y'' < 0`` at its lowest
        point, so it cannot be the trailing edge of a closed curve anyway.
        """
        return self.both_blow_up and self.back.side == 1

    def as_row(self, p: WaveParams) -> dict:
        return {"c": p.c, "lambda": p.lam, "beta": p.beta, "x_star_B": self.x_star_B,
                "x_star_F": self.x_star_F, "gap": self.gap, "pointwise_ok": self.pointwise_ok,
                "comparable": self.comparable}


def closure_obstruction(p: WaveParams, x_cap: float = X_CAP, w_cap: float = W_CAP,
                        samples: int = 400) -> ObstructionReport:
    """Compare back and front blow-up abscissae.

    Raises
    ------
    NoBlowUp
        Either profile is a global solution; the report is attached as
        ``exc.report``.
    """
    back = integrate_w(p, BACK, x_cap, w_cap)
    front = integrate_w(p, FRONT, x_cap, w_cap)
    x_end = min(back.x_end, front.x_end)
    xs = np.linspace(0.0, x_end, samples + 1)[1:]
    ok = bool(np.all(back.w(xs) > front.w(xs)))
    report = ObstructionReport(back.x_star, front.x_star, front.x_star - back.x_star, ok, back, front)
    if back.reached_cap or front.reached_cap:
        raise NoBlowUp(f"no finite blow-up (back reached cap: {back.reached_cap}, "
                       f"front reached cap: {front.reached_cap})", report)
    return report


def translated_comparison(back: BlowUpResult, front: BlowUpResult, x2: float, samples: int = 200) -> bool:
    """Check ``w_B(x - (x2 - x1)) >= w_F(x)`` on the overlap, where ``w_B(x1) = w_F(x2)``."""
    target = float(front.w(x2))
    x1 = brentq(lambda x: float(back.w(x)) - target, 0.0, x2, xtol=1e-14)
    shift = x2 - x1
    hi = min(back.x_end + shift, front.x_end)
    xs = np.linspace(x2, hi, samples)
    return bool(np.all(back.w(xs - shift) >= front.w(xs) - 1e-9 * (1 + np.abs(front.w(xs)))))


def sweep(cs, lams, betas, model: PhiModel | None = None) -> list[dict]:
    """``closure_obstruction`` over a parameter grid; rows for global solutions carry ``nan``."""
    model = model or PhiModel.gaussian()
    rows = []
    for c in cs:
        for lam in lams:
            for beta in betas:
                p = WaveParams(float(c), float(lam), float(beta), model)
                try:
                    rep = closure_obstruction(p)
                except NoBlowUp as exc:
                    rep = exc.report
                rows.append(rep.as_row(p))
    return rows
