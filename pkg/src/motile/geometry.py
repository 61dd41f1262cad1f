"""Discrete differential geometry of closed planar polygons.

Vertices are stored as an ``(n, 2)`` float array with implied closure
(vertex ``n`` wraps to vertex ``0``).  The parameter spacing is ``h = 1/n``,
so the centred difference ``Dp`` approximates the derivative with respect to
a unit-period parameter rather than arc length.  Curvature and normals are
invariant under that choice.

Curves are normalised to counter-clockwise orientation at construction.
With that convention ``(a, b)^perp = (-b, a)`` applied to the tangent gives
the inward normal, curvature is positive on convex curves, and a positive
normal velocity shrinks the enclosed area.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as K
from .errors import DegenerateSegment, NonFinite, TooFewPoints, ZeroTangent

MIN_VERTICES = 8
# ||Dp_i|| below this fraction of the typical ||Dp|| raises ZeroTangent
ZERO_TANGENT_FRACTION = 1e-3


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Closed CCW polygon.  Build with :func:`build_curve`."""

    points: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def vertices(self) -> list[Point2]:
        return [Point2(float(a), float(b)) for a, b in self.points]

    def translated(self, dx: float, dy: float) -> "DiscreteCurve":
        return build_curve(self.points + np.array([dx, dy]))

    def scaled(self, factor: float) -> "DiscreteCurve":
        return build_curve(self.points * factor)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DiscreteCurve):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    __hash__ = None


def signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def build_curve(points: Sequence[Point2] | np.ndarray) -> DiscreteCurve:
    """Validate vertices and return a CCW :class:`DiscreteCurve`.

    Raises
    ------
    TooFewPoints
        Fewer than 8 vertices.
    NonFinite
        Any coordinate is NaN or infinite.
    DegenerateSegment
        Two consecutive vertices (including the closing pair) coincide.
    """
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of vertices, got shape {pts.shape}")
    if pts.shape[0] < MIN_VERTICES:
        raise TooFewPoints(f"a curve needs at least {MIN_VERTICES} vertices, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise NonFinite("curve vertices must be finite")
    seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
    if np.any(seg == 0.0):
        i = int(np.argmin(seg))
        raise DegenerateSegment(f"vertices {i} and {(i + 1) % len(pts)} coincide")
    if signed_area(pts) < 0:
        pts = pts[::-1].copy()
    pts.setflags(write=False)
    return DiscreteCurve(pts)


def segment_lengths(curve: DiscreteCurve) -> np.ndarray:
    """Length of the edge from vertex ``i`` to vertex ``i+1``."""
    d = np.roll(curve.points, -1, axis=0) - curve.points
    return np.hypot(d[:, 0], d[:, 1])


def polygon_length(curve: DiscreteCurve) -> float:
    return float(np.sum(segment_lengths(curve)))


def _derivatives(points: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    nxt = np.roll(points, -1, axis=0)
    prv = np.roll(points, 1, axis=0)
    return (nxt - prv) / (2.0 * h), (nxt - 2.0 * points + prv) / (h * h)


def central_derivatives(curve: DiscreteCurve, i: int) -> tuple[Point2, Point2]:
    """Centred first and second differences at vertex ``i`` (periodic)."""
    n = curve.n
    if not -n <= i < n:
        raise IndexError(f"vertex index {i} out of range for n={n}")
    p = curve.points
    prv, cur, nxt = p[(i - 1) % n], p[i % n], p[(i + 1) % n]
    h = curve.h
    dp = (nxt - prv) / (2.0 * h)
    d2p = (nxt - 2.0 * cur + prv) / (h * h)
    return Point2(*map(float, dp)), Point2(*map(float, d2p))


def tangent_lengths(curve: DiscreteCurve) -> np.ndarray:
    """``||Dp_i||`` for every vertex."""
    dp, _ = _derivatives(curve.points, curve.h)
    return np.hypot(dp[:, 0], dp[:, 1])


def _check_tangents(speed: np.ndarray, curve: DiscreteCurve) -> None:
    floor = ZERO_TANGENT_FRACTION * float(np.mean(segment_lengths(curve))) / curve.h
    bad = np.flatnonzero(speed < floor)
    if bad.size:
        raise ZeroTangent(
            f"||Dp|| = {speed[bad[0]]:.3e} at vertex {bad[0]} is below {floor:.3e}; reparametrize"
        )


def discrete_curvature(curve: DiscreteCurve) -> np.ndarray:
    """Signed curvature ``det(Dp, D2p) / ||Dp||^3`` at each vertex."""
    dp, d2p = _derivatives(curve.points, curve.h)
    speed = np.hypot(dp[:, 0], dp[:, 1])
    _check_tangents(speed, curve)
    det = dp[:, 0] * d2p[:, 1] - dp[:, 1] * d2p[:, 0]
    return det / speed**3


def inward_normals(curve: DiscreteCurve) -> np.ndarray:
    """Unit normals ``(Dp)^perp / ||Dp||`` as an ``(n, 2)`` array."""
    dp, _ = _derivatives(curve.points, curve.h)
    speed = np.hypot(dp[:, 0], dp[:, 1])
    _check_tangents(speed, curve)
    return np.column_stack((-dp[:, 1], dp[:, 0])) / speed[:, None]


def shoelace_area(curve: DiscreteCurve | np.ndarray) -> float:
    """Enclosed area by the shoelace formula (absolute value)."""
    pts = curve.points if isinstance(curve, DiscreteCurve) else np.asarray(curve, dtype=float)
    return abs(signed_area(pts))


def _resample_closed(points: np.ndarray, m: int) -> np.ndarray:
    out_x, out_y = np.empty(m), np.empty(m)
    K.resample(np.ascontiguousarray(points[:, 0]), np.ascontiguousarray(points[:, 1]), m, out_x, out_y)
    return np.column_stack((out_x, out_y))


def arclength_reparametrize(curve: DiscreteCurve, m: int) -> DiscreteCurve:
    """Place ``m`` vertices on the polygon ``curve``, equally spaced.

    The new vertices lie on the input polygon (piecewise-linear
    interpolation) and consecutive ones are separated by a common chord
    length, so the output segments are equal to rounding; the corresponding
    arc-length spacing is uniform up to ``O(h^3)``.  Vertex 0 is kept in
    place, so orientation and the starting point survive.
    """
    if m < MIN_VERTICES:
        raise TooFewPoints(f"cannot reparametrize to {m} < {MIN_VERTICES} vertices")
    return build_curve(_resample_closed(curve.points, m))


def centroid(curve: DiscreteCurve) -> Point2:
    """Arithmetic mean of the vertices (not the area centroid)."""
    c = curve.points.mean(axis=0)
    return Point2(float(c[0]), float(c[1]))


def circularity(curve: DiscreteCurve) -> float:
    """``std(r_i) / mean(r_i)`` with ``r_i`` the distance to :func:`centroid`."""
    r = np.hypot(*(curve.points - curve.points.mean(axis=0)).T)
    return float(np.std(r) / np.mean(r))


def mean_radius(curve: DiscreteCurve) -> float:
    return float(np.mean(np.hypot(*(curve.points - curve.points.mean(axis=0)).T)))


def circle_points(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0,
                  clockwise: bool = False) -> np.ndarray:
    """Uniform samples of a circle, starting at angle ``phase``."""
    t = phase + 2.0 * np.pi * np.arange(n) / n
    if clockwise:
        t = -t
    return np.column_stack((center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)))


def ellipse_points(n: int, a: float, b: float, center=(0.0, 0.0)) -> np.ndarray:
    t = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack((center[0] + a * np.cos(t), center[1] + b * np.sin(t)))


def _point_segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from every point to the nearest of the segments ``a[j] -> b[j]``."""
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("ijk,jk->ij", ap, ab) / denom[None, :], 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    return np.min(np.hypot(*(pts[:, None, :] - closest).transpose(2, 0, 1)), axis=1)


def hausdorff_distance(a: DiscreteCurve, b: DiscreteCurve) -> float:
    """Symmetric Hausdorff distance between the vertices of one polygon and the edges of the other."""
    pa, pb = a.points, b.points
    d_ab = _point_segment_distances(pa, pb, np.roll(pb, -1, axis=0))
    d_ba = _point_segment_distances(pb, pa, np.roll(pa, -1, axis=0))
    return float(max(d_ab.max(), d_ba.max()))
