"""Compiled inner loops.

The kernel Phi is passed as ``(kind, bx, coef)``: ``kind == 0`` is the
Gaussian ``exp(-v^2)``, ``kind == 1`` a piecewise cubic with breakpoints
``bx`` and local coefficients ``coef[4, k-1]`` (scipy ``PPoly`` layout),
clamped to the end values outside ``[bx[0], bx[-1]]``.
"""

import math

import numpy as np
from numba import njit

# status codes shared with the Python wrappers
OK = 0
FP_NO_CONVERGENCE = 1
AREA_NO_CONVERGENCE = 2
ZERO_TANGENT = 3
BLOW_UP = 4
CONVENTION = 5
NON_FINITE = 6


@njit(cache=True)
def _locate(v, bx):
    lo = 0
    hi = bx.shape[0] - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if bx[mid] <= v:
            lo = mid
        else:
            hi = mid - 1
    return lo


@njit(cache=True)
def phi_value(v, kind, bx, coef):
    if kind == 0:
        return math.exp(-v * v)
    if v <= bx[0]:
        return coef[3, 0]
    last = bx.shape[0] - 2
    if v >= bx[-1]:
        d = bx[-1] - bx[last]
        return ((coef[0, last] * d + coef[1, last]) * d + coef[2, last]) * d + coef[3, last]
    j = _locate(v, bx)
    d = v - bx[j]
    return ((coef[0, j] * d + coef[1, j]) * d + coef[2, j]) * d + coef[3, j]


@njit(cache=True)
def phi_slope(v, kind, bx, coef):
    if kind == 0:
        return -2.0 * v * math.exp(-v * v)
    if v < bx[0] or v > bx[-1]:
        return 0.0
    j = _locate(v, bx)
    d = v - bx[j]
    return (3.0 * coef[0, j] * d + 2.0 * coef[1, j]) * d + coef[2, j]


@njit(cache=True)
def solve_velocity(kappa, beta, kind, bx, coef, C, tol, max_iters, v0):
    """Fixed-point iteration ``V <- kappa + beta Phi(V) - C`` from ``v0``.

    Returns ``(V, iterations, converged)``.
    """
    v = v0
    for k in range(1, max_iters + 1):
        nv = kappa + beta * phi_value(v, kind, bx, coef) - C
        if abs(nv - v) <= tol:
            return nv, k, True
        v = nv
    return v, max_iters, False


@njit(cache=True)
def shoelace(px, py):
    n = px.shape[0]
    s = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        s += px[i] * py[j] - px[j] * py[i]
    return 0.5 * abs(s)


@njit(cache=True)
def _march(px, py, cum, m, d, out_x, out_y, store):
    """Walk ``m`` chords of length ``d`` from vertex 0, each ending at the first exit
    from the ball of radius ``d`` around the previous point.  Returns the unwrapped
    arc position of the ``m``-th point, or ``inf`` if the walk runs off two laps."""
    n = px.shape[0]
    total = cum[n]
    seg = 0
    t = 0.0
    cx = px[0]
    cy = py[0]
    if store:
        out_x[0] = cx
        out_y[0] = cy
    pos = 0.0
    for k in range(1, m + 1):
        found = False
        while seg < 2 * n:
            i = seg % n
            j = i + 1 if i + 1 < n else 0
            ax = px[i]
            ay = py[i]
            bx = px[j] - ax
            by = py[j] - ay
            fx = ax - cx
            fy = ay - cy
            a = bx * bx + by * by
            b = 2.0 * (fx * bx + fy * by)
            c = fx * fx + fy * fy - d * d
            disc = b * b - 4.0 * a * c
            if disc >= 0.0:
                s = (-b + math.sqrt(disc)) / (2.0 * a)
                if s >= t and s <= 1.0:
                    t = s
                    cx = ax + s * bx
                    cy = ay + s * by
                    pos = cum[i] + s * (cum[i + 1] - cum[i]) + (seg // n) * total
                    found = True
                    break
            seg += 1
            t = 0.0
        if not found:
            return np.inf
        if store and k < m:
            out_x[k] = cx
            out_y[k] = cy
    return pos


@njit(cache=True)
def resample(px, py, m, out_x, out_y):
    """Resample a closed polygon to ``m`` vertices lying on it with equal chord lengths.

    Vertex 0 is kept.  The common chord length is the root of
    ``march(d) - L`` (``L`` the perimeter), found by safeguarded regula falsi
    starting from the bracket ``[L / (2m), L / m]``.
    """
    n = px.shape[0]
    cum = np.empty(n + 1)
    cum[0] = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        cum[i + 1] = cum[i] + math.hypot(px[j] - px[i], py[j] - py[i])
    total = cum[n]
    hi = total / m
    g_hi = _march(px, py, cum, m, hi, out_x, out_y, False) - total
    lo = 0.5 * hi
    g_lo = _march(px, py, cum, m, lo, out_x, out_y, False) - total
    while g_lo > 0.0:
        lo *= 0.5
        g_lo = _march(px, py, cum, m, lo, out_x, out_y, False) - total
    d = hi
    if g_hi > 1e-14 * total:
        side = 0
        for _ in range(200):
            if math.isfinite(g_hi):
                d = hi - g_hi * (hi - lo) / (g_hi - g_lo)
                if not lo < d < hi:
                    d = 0.5 * (lo + hi)
            else:
                d = 0.5 * (lo + hi)
            g = _march(px, py, cum, m, d, out_x, out_y, False) - total
            if abs(g) <= 1e-14 * total or hi - lo <= 1e-15 * hi:
                break
            if g > 0.0:
                hi, g_hi = d, g
                if side == 1:
                    g_lo *= 0.5
                side = 1
            else:
                lo, g_lo = d, g
                if side == -1 and math.isfinite(g_hi):
                    g_hi *= 0.5
                side = -1
    _march(px, py, cum, m, d, out_x, out_y, True)


@njit(cache=True)
def geometry(px, py, h, kappa, nx, ny, speed):
    """Curvature, inward normals and ``||Dp||``; returns False on a zero tangent."""
    n = px.shape[0]
    mean_seg = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        mean_seg += math.hypot(px[j] - px[i], py[j] - py[i])
    floor = 1e-3 * (mean_seg / n) / h
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        dx = (px[ip] - px[im]) / (2.0 * h)
        dy = (py[ip] - py[im]) / (2.0 * h)
        ddx = (px[ip] - 2.0 * px[i] + px[im]) / (h * h)
        ddy = (py[ip] - 2.0 * py[i] + py[im]) / (h * h)
        sp = math.hypot(dx, dy)
        if not sp >= floor:
            return False
        speed[i] = sp
        kappa[i] = (dx * ddy - dy * ddx) / (sp * sp * sp)
        nx[i] = -dy / sp
        ny[i] = dx / sp
    return True


@njit(cache=True)
def step_core(px, py, h, dt, beta, kind, bx, coef, C, A0, tol, max_fp, max_area,
              auto_gain, gain, V, out_x, out_y, kappa, nx, ny, speed, stats):
    """One time step of the split velocity / volume-feedback scheme.

    ``V`` holds the initial guess on entry and the accepted velocities on exit.
    ``stats`` receives ``[dA, area_iters, fp_iters, vel_residual, dA_0, dA_1,
    max_displacement]``.  Returns ``(status, C)``.
    """
    n = px.shape[0]
    stats[1] = 0.0
    stats[4] = 0.0
    stats[5] = 0.0
    if not geometry(px, py, h, kappa, nx, ny, speed):
        return ZERO_TANGENT, C
    fp_max = 0
    dA0 = 0.0
    dA1 = 0.0
    for it in range(max_area):
        sens = 0.0
        for i in range(n):
            v, k, ok = solve_velocity(kappa[i], beta, kind, bx, coef, C, tol, max_fp, V[i])
            if not ok:
                stats[2] = k
                return FP_NO_CONVERGENCE, C
            if k > fp_max:
                fp_max = k
            V[i] = v
            out_x[i] = px[i] + v * nx[i] * dt
            out_y[i] = py[i] + v * ny[i] * dt
        a = shoelace(out_x, out_y)
        dA = (a - A0) / A0
        if it == 0:
            dA0 = dA
        elif it == 1:
            dA1 = dA
        stats[1] = it + 1
        stats[4] = dA0
        stats[5] = dA1
        if not math.isfinite(dA):
            return NON_FINITE, C
        if auto_gain:
            # d(dA)/dC = dt * sum_i l_i Psi'(kappa_i - C) / A0, with l_i = ||Dp_i|| h
            for i in range(n):
                sens += speed[i] * h / (1.0 - beta * phi_slope(V[i], kind, bx, coef))
            dC = dA * A0 / (dt * sens)
        else:
            dC = gain * dA
        if abs(dA) <= tol and abs(dC) <= tol:
            res = 0.0
            disp = 0.0
            for i in range(n):
                r = abs(V[i] - kappa[i] - beta * phi_value(V[i], kind, bx, coef) + C)
                if r > res:
                    res = r
                d = abs(V[i]) * dt
                if d > disp:
                    disp = d
            stats[0] = dA
            stats[1] = it + 1
            stats[2] = fp_max
            stats[3] = res
            stats[4] = dA0
            stats[5] = dA1
            stats[6] = disp
            if disp > 10.0 * h:
                return BLOW_UP, C
            return OK, C
        C -= dC
        if auto_gain:
            for i in range(n):
                V[i] -= dC / (1.0 - beta * phi_slope(V[i], kind, bx, coef))
    stats[0] = dA
    stats[1] = max_area
    stats[4] = dA0
    stats[5] = dA1
    return AREA_NO_CONVERGENCE, C


@njit(cache=True)
def advance(px, py, n_steps, step_offset, reparam_every, h, dt, beta, kind, bx, coef, C, A0,
            tol, max_fp, max_area, auto_gain, gain, V, check_convention, summary, last):
    """Run ``n_steps`` steps in place on ``px, py``.

    ``summary`` accumulates ``[max |dA|, max vel_residual, total area iters,
    max area iters, max fp iters, steps done, max displacement]``; ``last``
    receives the ``stats`` of the final step.  Returns
    ``(status, C, check_convention)``.
    """
    n = px.shape[0]
    ox = np.empty(n)
    oy = np.empty(n)
    kappa = np.empty(n)
    nx = np.empty(n)
    ny = np.empty(n)
    speed = np.empty(n)
    stats = np.zeros(7)
    for s in range(n_steps):
        status, C = step_core(px, py, h, dt, beta, kind, bx, coef, C, A0, tol, max_fp, max_area,
                              auto_gain, gain, V, ox, oy, kappa, nx, ny, speed, stats)
        for q in range(7):
            last[q] = stats[q]
        if check_convention and stats[1] >= 2:
            if not abs(stats[5]) < abs(stats[4]):
                return CONVENTION, C, check_convention
            check_convention = False
        if status != OK:
            return status, C, check_convention
        if abs(stats[0]) > summary[0]:
            summary[0] = abs(stats[0])
        if stats[3] > summary[1]:
            summary[1] = stats[3]
        summary[2] += stats[1]
        if stats[1] > summary[3]:
            summary[3] = stats[1]
        if stats[2] > summary[4]:
            summary[4] = stats[2]
        summary[5] += 1
        if stats[6] > summary[6]:
            summary[6] = stats[6]
        if reparam_every > 0 and (step_offset + s + 1) % reparam_every == 0:
            resample(ox, oy, n, px, py)
        else:
            for i in range(n):
                px[i] = ox[i]
                py[i] = oy[i]
    return OK, C, check_convention
