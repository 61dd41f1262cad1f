"""Compiled loops for the graph solver over a circular reference chart."""

import math

import numpy as np
from numba import njit

from ._kernels import phi_slope, phi_value

OK = 0
NO_CONVERGENCE = 1
CHART_EXIT = 2
NON_FINITE = 3


@njit(cache=True)
def psi_inverse(w, beta, kind, bx, coef, phi_lo, phi_hi, tol, guess):
    """Solve ``V - beta Phi(V) = w`` by Newton steps safeguarded by bisection.

    ``[w + beta*phi_lo, w + beta*phi_hi]`` always brackets the root.
    Returns ``(V, converged)``.
    """
    if beta == 0.0:
        return w, True
    a = w + beta * phi_lo
    b = w + beta * phi_hi
    pad = 1e-12 * (1.0 + abs(w))
    a -= pad
    b += pad
    v = guess
    if not (a < v < b):
        v = 0.5 * (a + b)
    for _ in range(200):
        f = v - beta * phi_value(v, kind, bx, coef) - w
        if abs(f) <= tol:
            return v, True
        if f < 0.0:
            a = v
        else:
            b = v
        d = 1.0 - beta * phi_slope(v, kind, bx, coef)
        vn = v - f / d
        if not (a < vn < b):
            vn = 0.5 * (a + b)
        if b - a <= 4e-16 * (1.0 + abs(v)):
            return vn, True
        v = vn
    return v, False


@njit(cache=True)
def chart_geometry(u, dsig, k0, delta0, S, kappa):
    """``S(u)`` and ``kappa(u)`` by periodic centred differences; False if ``|u| > delta0``."""
    n = u.shape[0]
    for j in range(n):
        if not abs(u[j]) <= delta0:
            return False
    for j in range(n):
        jp = j + 1 if j + 1 < n else 0
        jm = j - 1 if j > 0 else n - 1
        us = (u[jp] - u[jm]) / (2.0 * dsig)
        uss = (u[jp] - 2.0 * u[j] + u[jm]) / (dsig * dsig)
        a = 1.0 - u[j] * k0
        s = math.sqrt(us * us + a * a)
        S[j] = s
        kappa[j] = (a * uss + 2.0 * k0 * us * us + k0 * a * a) / (s * s * s)
    return True


@njit(cache=True)
def resolve(kappa, S, dsig, beta, kind, bx, coef, phi_lo, phi_hi, phi_sup, tol, lam_guess, V,
            inner_tol):
    """Find ``lambda`` with ``sum Psi(kappa - lambda) S dsig = 0`` to ``tol * L``.

    ``V`` holds guesses on entry and ``Psi(kappa - lambda)`` on exit.
    Returns ``(lambda, iterations, converged)``.
    """
    n = kappa.shape[0]
    L = 0.0
    kmin = kappa[0]
    kmax = kappa[0]
    for j in range(n):
        L += S[j] * dsig
        if kappa[j] < kmin:
            kmin = kappa[j]
        if kappa[j] > kmax:
            kmax = kappa[j]
    lo = kmin - beta * phi_sup - 1.0
    hi = kmax + beta * phi_sup + 1.0
    lam = lam_guess
    if not (lo < lam < hi):
        lam = 0.5 * (lo + hi)
    for it in range(1, 301):
        G = 0.0
        dG = 0.0
        for j in range(n):
            v, ok = psi_inverse(kappa[j] - lam, beta, kind, bx, coef, phi_lo, phi_hi, inner_tol, V[j])
            if not ok:
                return lam, it, False
            V[j] = v
            G += v * S[j] * dsig
            dG -= S[j] * dsig / (1.0 - beta * phi_slope(v, kind, bx, coef))
        if abs(G) <= tol * L:
            return lam, it, True
        if G > 0.0:
            lo = lam
        else:
            hi = lam
        nl = lam - G / dG
        if not (lo < nl < hi):
            nl = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * (1.0 + abs(lam)):
            return lam, it, abs(G) <= tol * L
        lam = nl
    return lam, 300, False


@njit(cache=True)
def advance(u, n_steps, dt, dsig, k0, delta0, beta, kind, bx, coef, phi_lo, phi_hi, phi_sup,
            tol, inner_tol, lam, V):
    """Explicit Euler steps ``u <- u + dt * S / (1 - u k0) * V`` in place.

    Returns ``(status, lambda, steps_done)``.
    """
    n = u.shape[0]
    S = np.empty(n)
    kappa = np.empty(n)
    for s in range(n_steps):
        if not chart_geometry(u, dsig, k0, delta0, S, kappa):
            return CHART_EXIT, lam, s
        lam, it, ok = resolve(kappa, S, dsig, beta, kind, bx, coef, phi_lo, phi_hi, phi_sup, tol,
                              lam, V, inner_tol)
        if not ok:
            return NO_CONVERGENCE, lam, s
        for j in range(n):
            u[j] += dt * S[j] / (1.0 - u[j] * k0) * V[j]
            if not math.isfinite(u[j]):
                return NON_FINITE, lam, s
        for j in range(n):
            if not abs(u[j]) <= delta0:
                return CHART_EXIT, lam, s + 1
    return OK, lam, n_steps
