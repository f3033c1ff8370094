"""Grids, quadrature, differentiation and the initial-value integrator.

Everything operates on uniform grids over [0, pi].  The second-order equation
-y'' + q(x) y = mu y is integrated by a fixed-step 4th-order Magnus method
(two Gauss-Legendre nodes per step).  The one-step matrix is the exponential
of a traceless 2x2 matrix, evaluated in closed form, which makes the scheme
exact for constant coefficients and keeps the Wronskian of solution pairs
constant to machine precision.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DomainError, IntegrationOverflowError

PI = math.pi

DEFAULT_GRID_POINTS = 2049
MIN_GRID_POINTS = 33

# Gauss-Legendre nodes on [0, 1] for the Magnus step
_GAUSS_LO = 0.5 - math.sqrt(3.0) / 6.0
_GAUSS_HI = 0.5 + math.sqrt(3.0) / 6.0

_OVERFLOW_GUARD = 1e250


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n_points nodes spanning exactly [0, pi]."""

    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.n_points < MIN_GRID_POINTS:
            raise DomainError(f"grid needs at least {MIN_GRID_POINTS} points, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return PI / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, PI, self.n_points)

    def refined(self, factor: int) -> "Grid":
        """Grid with spacing divided by factor (same endpoints)."""
        return Grid((self.n_points - 1) * factor + 1)


@dataclass(frozen=True)
class Potential:
    """Real-valued potential sampled on a uniform grid, linear between nodes."""

    grid: Grid
    values: np.ndarray
    mean: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise DimensionMismatchError(
                f"potential has {vals.shape} values for a {self.grid.n_points}-point grid"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("potential values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mean", quad_trapz(self.grid, vals) / PI)

    @classmethod
    def from_callable(cls, f, grid: Grid | None = None) -> "Potential":
        grid = grid or Grid()
        return cls(grid, np.asarray(f(grid.nodes), dtype=float) * np.ones(grid.n_points))

    @classmethod
    def zero(cls, grid: Grid | None = None) -> "Potential":
        grid = grid or Grid()
        return cls(grid, np.zeros(grid.n_points))

    @classmethod
    def constant(cls, c: float, grid: Grid | None = None) -> "Potential":
        grid = grid or Grid()
        return cls(grid, np.full(grid.n_points, float(c)))

    @classmethod
    def from_samples(cls, x, q, grid: Grid | None = None) -> "Potential":
        """Resample (x, q) pairs onto the uniform grid by linear interpolation.

        x must be strictly increasing and span [0, pi].
        """
        grid = grid or Grid()
        x = np.asarray(x, dtype=float)
        q = np.asarray(q, dtype=float)
        if x.ndim != 1 or x.shape != q.shape:
            raise DimensionMismatchError("x and q must be 1-d arrays of equal length")
        if x.size < 2 or np.any(np.diff(x) <= 0):
            raise DomainError("sample abscissae must be strictly increasing")
        if abs(x[0]) > 1e-9 or abs(x[-1] - PI) > 1e-9:
            raise DomainError("samples must span [0, pi]")
        return cls(grid, np.interp(grid.nodes, x, q))

    def reversed(self) -> "Potential":
        """The reflected potential x -> q(pi - x)."""
        return Potential(self.grid, self.values[::-1])

    def on_grid(self, grid: Grid) -> "Potential":
        """Linear resample onto another grid."""
        if grid.n_points == self.grid.n_points:
            return self
        return Potential(grid, np.interp(grid.nodes, self.grid.nodes, self.values))


@dataclass(frozen=True)
class IvpSolution:
    """Solution values and derivative on the grid."""

    grid: Grid
    y: np.ndarray
    dy: np.ndarray


def quad_trapz(grid: Grid, values) -> float:
    """Composite trapezoidal integral of nodal values over [0, pi]."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_points,):
        raise DimensionMismatchError(
            f"{values.shape} values on a {grid.n_points}-point grid"
        )
    h = grid.spacing
    return h * (values.sum() - 0.5 * (values[0] + values[-1]))


def quad_trapz_corrected(grid: Grid, values, d_left: float, d_right: float) -> float:
    """Trapezoid with the h^2/12 Euler-Maclaurin endpoint-slope correction.

    d_left, d_right are the integrand derivatives at x = 0 and x = pi.
    """
    h = grid.spacing
    return quad_trapz(grid, values) - h * h / 12.0 * (d_right - d_left)


def diff_central(grid: Grid, values) -> np.ndarray:
    """Second-order derivative on the grid: central interior, one-sided ends.

    Exact for quadratic data.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_points,):
        raise DimensionMismatchError(
            f"{values.shape} values on a {grid.n_points}-point grid"
        )
    if values.size < 3:
        raise DimensionMismatchError("need at least 3 values to differentiate")
    h = grid.spacing
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    # one-sided stencils in difference form, so constant data gives exact zeros
    out[0] = (3.0 * (values[1] - values[0]) - (values[2] - values[1])) / (2.0 * h)
    out[-1] = (3.0 * (values[-1] - values[-2]) - (values[-2] - values[-3])) / (2.0 * h)
    return out


def _gauss_values(qvals: np.ndarray):
    """Potential at the two Gauss nodes of every step (linear interpolation)."""
    dq = np.diff(qvals)
    return qvals[:-1] + _GAUSS_LO * dq, qvals[:-1] + _GAUSS_HI * dq


def propagate(qvals, h, mus, y0, dy0, store=False):
    """Magnus sweep of -y'' + q y = mu y for a batch of mu values.

    qvals are nodal potential values in sweep order; h is the (positive)
    spacing.  Returns (y, dy) at the final node, or full (ys, dys) arrays of
    shape (n_nodes, n_mu) when store is set.

    Raises IntegrationOverflowError when |y| passes the overflow guard.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    q1, q2 = _gauss_values(np.asarray(qvals, dtype=float))
    n_steps = q1.size
    y = np.full(mus.shape, float(y0))
    dy = np.full(mus.shape, float(dy0))
    if store:
        ys = np.empty((n_steps + 1,) + mus.shape)
        dys = np.empty_like(ys)
        ys[0] = y
        dys[0] = dy
    # Omega = (h/2)(A1+A2) + (sqrt(3) h^2/12)[A2, A1]; for A = [[0,1],[v,0]]
    # the commutator is (v1 - v2) diag(1, -1), so Omega = [[d, h], [w, -d]].
    csqr = math.sqrt(3.0) * h * h / 12.0
    dvals = csqr * (q1 - q2)  # mu-independent diagonal entry per step
    for i in range(n_steps):
        v_sum = q1[i] + q2[i] - 2.0 * mus
        w = 0.5 * h * v_sum
        d = dvals[i]
        delta = d * d + h * w
        s = np.sqrt(np.abs(delta))
        pos = delta >= 0.0
        c = np.where(pos, np.cosh(s), np.cos(s))
        with np.errstate(invalid="ignore", divide="ignore"):
            sc = np.where(pos, np.sinh(s) / s, np.sin(s) / s)
        sc = np.where(s < 1e-8, 1.0 + delta / 6.0, sc)
        y, dy = (c + sc * d) * y + (sc * h) * dy, (sc * w) * y + (c - sc * d) * dy
        if store:
            ys[i + 1] = y
            dys[i + 1] = dy
        peak = np.max(np.abs(y))
        if not peak < _OVERFLOW_GUARD:
            raise IntegrationOverflowError(i + 1, peak)
    if store:
        return ys, dys
    return y, dy


def integrate_ivp(q: Potential, mu: float, y0: float, dy0: float,
                  direction: str = "left-to-right") -> IvpSolution:
    """Integrate -y'' + q y = mu y with Cauchy data at x=0 or x=pi.

    direction "left-to-right" places (y0, dy0) at x = 0; "right-to-left"
    places them at x = pi.  The returned arrays are indexed by the grid nodes
    regardless of sweep direction.
    """
    if direction not in ("left-to-right", "right-to-left"):
        raise DomainError(f"unknown direction {direction!r}")
    if not (np.isfinite(mu) and np.isfinite(y0) and np.isfinite(dy0)):
        raise DomainError("mu and Cauchy data must be finite")
    h = q.grid.spacing
    if direction == "left-to-right":
        ys, dys = propagate(q.values, h, [mu], y0, dy0, store=True)
        return IvpSolution(q.grid, ys[:, 0].copy(), dys[:, 0].copy())
    # sweep in s = pi - x: q_rev(s) = q(pi - s), dy/ds = -dy/dx
    ys, dys = propagate(q.values[::-1], h, [mu], y0, -dy0, store=True)
    return IvpSolution(q.grid, ys[::-1, 0].copy(), -dys[::-1, 0].copy())


def load_potential_csv(path, grid: Grid | None = None) -> Potential:
    """Load a potential from CSV with header ``x,q`` and resample to the grid."""
    xs, qs = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["x", "q"]:
            raise DomainError(f"{path}: expected CSV header 'x,q'")
        for row in reader:
            if not row:
                continue
            xs.append(float(row[0]))
            qs.append(float(row[1]))
    return Potential.from_samples(np.array(xs), np.array(qs), grid)


def save_potential_csv(path, potential: Potential) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "q"])
        for x, q in zip(potential.grid.nodes, potential.values):
            writer.writerow([repr(float(x)), repr(float(q))])
