"""The velocity kernel Phi and its analysis.

Two kernel variants are supported:

* ``gaussian``: the closed-form surrogate ``exp(-V**2)``;
* ``table``: samples of the physically derived kernel ``Phi0`` on a uniform
  velocity grid, interpolated by a shape-preserving piecewise cubic Hermite
  rule and clamped to the endpoint values outside the grid.

``Phi0(V)`` is the integral of ``psi(z; V) * theta0'(z)**2`` where ``psi``
solves the linear two-point problem ``psi'' + V psi' - psi + theta0' = 0``
with ``psi(+-inf) = 0``.  The problem is truncated to ``[-Z, Z]`` with
homogeneous Dirichlet data and discretised by second-order centred
differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import LinAlgError, solve_banded

from .errors import SingularSystem

GAUSSIAN = "gaussian"
TABLE = "table"

DEFAULT_Z = 20.0
DEFAULT_M = 4001

_SQRT2 = math.sqrt(2.0)
# sup |d/dV exp(-V^2)|, attained at V = +-1/sqrt(2)
GAUSSIAN_SUP_DERIV = _SQRT2 * math.exp(-0.5)


def theta0(z):
    """Standing wave ``(tanh(z / (2 sqrt 2)) + 1) / 2`` of the Allen-Cahn equation."""
    return 0.5 * (np.tanh(np.asarray(z, dtype=float) / (2.0 * _SQRT2)) + 1.0)


def theta0_prime(z):
    """Derivative of :func:`theta0`: ``sech(z / (2 sqrt 2))**2 / (4 sqrt 2)``."""
    z = np.asarray(z, dtype=float)
    out = 1.0 / (4.0 * _SQRT2 * np.cosh(z / (2.0 * _SQRT2)) ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PsiSolution:
    z_grid: np.ndarray
    psi: np.ndarray
    V: float


def psi_operator_bands(V: float, dz: float, m_interior: int) -> np.ndarray:
    """Banded form (``solve_banded`` layout) of ``psi'' + V psi' - psi`` scaled by ``dz**2``."""
    lower = 1.0 - 0.5 * V * dz
    upper = 1.0 + 0.5 * V * dz
    diag = -2.0 - dz * dz
    ab = np.empty((3, m_interior))
    ab[0, :] = upper
    ab[1, :] = diag
    ab[2, :] = lower
    ab[0, 0] = 0.0
    ab[2, -1] = 0.0
    return ab


def solve_psi(V: float, Z: float = DEFAULT_Z, m: int = DEFAULT_M,
              source: Callable[[np.ndarray], np.ndarray] | None = None) -> PsiSolution:
    """Solve the truncated two-point problem for ``psi(z; V)``.

    Parameters
    ----------
    V : float
        Velocity parameter multiplying ``psi'``.
    Z : float
        Half-width of the truncated domain.
    m : int
        Number of grid nodes including both endpoints; must be odd so that
        ``z = 0`` is a node.
    source : callable, optional
        Replaces ``theta0'`` as the forcing term.
    """
    if Z <= 0:
        raise ValueError("Z must be positive")
    if m < 3 or m % 2 == 0:
        raise ValueError("m must be an odd integer >= 3")
    z = np.linspace(-Z, Z, m)
    dz = z[1] - z[0]
    forcing = theta0_prime(z) if source is None else np.asarray(source(z), dtype=float)
    psi = np.zeros(m)
    if m > 2:
        ab = psi_operator_bands(V, dz, m - 2)
        rhs = -dz * dz * forcing[1:-1]
        try:
            psi[1:-1] = solve_banded((1, 1), ab, rhs, check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise SingularSystem(f"psi system singular for V={V}, dz={dz}") from exc
        if not np.all(np.isfinite(psi)):
            raise SingularSystem(f"psi system produced non-finite values for V={V}")
    return PsiSolution(z_grid=z, psi=psi, V=float(V))


def psi_residual(sol: PsiSolution, source=None) -> float:
    """Max-norm residual of the ``dz**2``-scaled discrete system at the interior nodes."""
    z, psi = sol.z_grid, sol.psi
    dz = z[1] - z[0]
    forcing = theta0_prime(z) if source is None else np.asarray(source(z), dtype=float)
    V = sol.V
    lap = (1.0 + 0.5 * V * dz) * psi[2:] + (-2.0 - dz * dz) * psi[1:-1] + (1.0 - 0.5 * V * dz) * psi[:-2]
    return float(np.max(np.abs(lap + dz * dz * forcing[1:-1])))


def phi0(V: float, Z: float = DEFAULT_Z, m: int = DEFAULT_M) -> float:
    """``Phi0(V)`` by trapezoidal quadrature of ``psi * theta0'**2``."""
    sol = solve_psi(V, Z, m)
    return float(np.trapezoid(sol.psi * theta0_prime(sol.z_grid) ** 2, sol.z_grid))


@dataclass(frozen=True, eq=False)
class PhiModel:
    """Velocity kernel, immutable.  Use :meth:`gaussian` or :func:`phi0_table`."""

    variant: str = GAUSSIAN
    v_grid: np.ndarray | None = None
    values: np.ndarray | None = None
    _interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)

    @classmethod
    def gaussian(cls) -> "PhiModel":
        return cls(GAUSSIAN)

    @classmethod
    def from_table(cls, v_min: float, v_max: float, values) -> "PhiModel":
        values = np.array(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a kernel table needs at least two samples")
        if not v_min < v_max:
            raise ValueError("v_min must be below v_max")
        if not np.all(np.isfinite(values)):
            raise ValueError("kernel table values must be finite")
        grid = np.linspace(v_min, v_max, values.size)
        grid.setflags(write=False)
        values.setflags(write=False)
        return cls(TABLE, grid, values, PchipInterpolator(grid, values, extrapolate=False))

    @classmethod
    def constant(cls, value: float, v_min: float = -10.0, v_max: float = 10.0) -> "PhiModel":
        """Flat table; ``value = 0`` switches the kernel off."""
        return cls.from_table(v_min, v_max, np.full(33, float(value)))

    def __post_init__(self):
        if self.variant not in (GAUSSIAN, TABLE):
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == TABLE and self._interp is None:
            raise ValueError("use PhiModel.from_table to build a table kernel")

    @property
    def v_min(self) -> float:
        return float(self.v_grid[0])

    @property
    def v_max(self) -> float:
        return float(self.v_grid[-1])

    def sup_abs(self) -> float:
        """``sup |Phi|``."""
        if self.variant == GAUSSIAN:
            return 1.0
        return float(np.max(np.abs(self.values)))

    def bounds(self) -> tuple[float, float]:
        """``(inf Phi, sup Phi)``; the Hermite interpolant never leaves the data range."""
        if self.variant == GAUSSIAN:
            return 0.0, 1.0
        return float(np.min(self.values)), float(np.max(self.values))

    def kernel_arrays(self) -> tuple[int, np.ndarray, np.ndarray]:
        """``(kind, breakpoints, coefficients)`` consumed by the compiled kernels."""
        if self.variant == GAUSSIAN:
            return 0, np.zeros(2), np.zeros((4, 1))
        return 1, np.ascontiguousarray(self._interp.x), np.ascontiguousarray(self._interp.c)

    def to_dict(self) -> dict:
        if self.variant == GAUSSIAN:
            return {"variant": GAUSSIAN}
        return {"variant": TABLE, "v_min": self.v_min, "v_max": self.v_max,
                "values": [float(v) for v in self.values]}

    @classmethod
    def from_dict(cls, data: dict) -> "PhiModel":
        variant = data.get("variant", TABLE if "values" in data else GAUSSIAN)
        if variant == GAUSSIAN:
            return cls.gaussian()
        return cls.from_table(float(data["v_min"]), float(data["v_max"]), data["values"])

    def __eq__(self, other):
        if not isinstance(other, PhiModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


def phi_eval(model: PhiModel, V):
    """Kernel value at ``V`` (scalar or array)."""
    v = np.asarray(V, dtype=float)
    if model.variant == GAUSSIAN:
        out = np.exp(-v * v)
    else:
        out = model._interp(np.clip(v, model.v_min, model.v_max))
    return float(out) if out.ndim == 0 else out


def phi_deriv(model: PhiModel, V):
    """Kernel derivative at ``V``; zero outside a table's grid (clamped branch)."""
    v = np.asarray(V, dtype=float)
    if model.variant == GAUSSIAN:
        out = -2.0 * v * np.exp(-v * v)
    else:
        inside = (v >= model.v_min) & (v <= model.v_max)
        out = np.where(inside, model._interp(np.clip(v, model.v_min, model.v_max), 1), 0.0)
    return float(out) if out.ndim == 0 else out


def phi0_table(v_min: float = -5.0, v_max: float = 5.0, k: int = 129,
               Z: float = DEFAULT_Z, m: int = DEFAULT_M) -> PhiModel:
    """Tabulate ``Phi0`` on ``k`` uniform nodes of ``[v_min, v_max]``."""
    if not v_min < 0 < v_max:
        raise ValueError("the table range must straddle V = 0")
    if k < 33:
        raise ValueError("a Phi0 table needs k >= 33 nodes")
    grid = np.linspace(v_min, v_max, k)
    return PhiModel.from_table(v_min, v_max, [phi0(v, Z, m) for v in grid])


def sup_abs_deriv(model: PhiModel, refine: int = 10) -> float:
    """``sup |Phi'|``: analytic for the Gaussian, an estimate on a refined grid for tables."""
    if model.variant == GAUSSIAN:
        return GAUSSIAN_SUP_DERIV
    k = model.v_grid.size
    v = np.linspace(model.v_min, model.v_max, refine * (k - 1) + 1)
    return float(np.max(np.abs(model._interp(v, 1))))


def beta_critical(model: PhiModel) -> float:
    """Largest ``beta`` keeping ``v -> v - beta * Phi(v)`` monotone: ``1 / sup |Phi'|``.

    A constant kernel has no critical value; ``math.inf`` is returned.
    """
    j = sup_abs_deriv(model)
    if j == 0.0:
        return math.inf
    return 1.0 / j


def save_table(model: PhiModel, path: str | Path) -> None:
    if model.variant != TABLE:
        raise ValueError("only table kernels are cached")
    payload = {"v_min": model.v_min, "v_max": model.v_max, "values": [float(v) for v in model.values]}
    Path(path).write_text(json.dumps(payload, indent=1))


def load_table(path: str | Path) -> PhiModel:
    data = json.loads(Path(path).read_text())
    return PhiModel.from_table(float(data["v_min"]), float(data["v_max"]), data["values"])
