"""Gelfand-Levitan reconstruction of (q, alpha, beta) from spectral data.

The data kernel is assembled through its one-variable profile,

    F(x, t) = (H(x - t) + H(x + t)) / 2,
    H(u) = sum_n [ w_n(u)/a~_n - cos(n u)/a0_n ],

where w_n(u) = cos(lambda_n u) (cosh for mu_n < 0) and a0_0 = pi,
a0_n = pi/2.  On a uniform grid the arguments x_i +/- t_j land on grid
multiples of the spacing, so H is evaluated once per multiple.

Supplied data cover finitely many modes; the series is completed with model
modes lambda_n = n + omega/n, a~_n = pi/2 + kappa/n^2 up to the requested
truncation and, beyond it, with closed-form tails of the linearized terms
(a sawtooth series for the omega part, a Bernoulli-type series for the
second-order and kappa parts).  Without this completion the reconstruction
acquires O(1) high-frequency artifacts whenever omega != 0, i.e. whenever
the potential mean or the boundary angles shift the eigenvalues.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import (
    CompletionError,
    DomainError,
    EndpointDegeneracyError,
    MalformedDataError,
    UnsolvableGLError,
)
from .numerics import PI, Grid, Potential, diff_central, propagate
from .forward import Spectrum
from .identities import AsymptoticModel, fit_asymptotics, MIN_FIT_RECORDS

__all__ = [
    "SpectralData",
    "TriangularKernel",
    "Reconstruction",
    "build_F",
    "solve_GL",
    "reconstruct",
    "worker_count",
]

CONDITION_LIMIT = 1e12


def worker_count() -> int:
    """Worker cap from the SLSPEC_THREADS environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("SLSPEC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SpectralData:
    """The two sequences {mu_n}, {a~_n}, optionally with a fitted tail model."""

    mus: np.ndarray
    a_tildes: np.ndarray
    tail: AsymptoticModel | None = field(default=None, compare=False)

    def __post_init__(self):
        mus = np.asarray(self.mus, dtype=float)
        ats = np.asarray(self.a_tildes, dtype=float)
        if mus.ndim != 1 or mus.shape != ats.shape:
            raise MalformedDataError("mus and a_tildes must be 1-d and equally long")
        if not (np.all(np.isfinite(mus)) and np.all(np.isfinite(ats))):
            raise MalformedDataError("spectral data must be finite")
        if np.any(np.diff(mus) <= 0):
            raise MalformedDataError("mus must be strictly increasing")
        if np.any(ats <= 0):
            raise MalformedDataError("a_tildes must be positive")
        mus = mus.copy()
        ats = ats.copy()
        mus.setflags(write=False)
        ats.setflags(write=False)
        object.__setattr__(self, "mus", mus)
        object.__setattr__(self, "a_tildes", ats)

    def __len__(self):
        return len(self.mus)

    @classmethod
    def from_spectrum(cls, spectrum: Spectrum, n_modes: int | None = None) -> "SpectralData":
        n = len(spectrum) if n_modes is None else min(n_modes, len(spectrum))
        return cls(spectrum.mus[:n], spectrum.a_tildes[:n])

    def with_fitted_tail(self) -> "SpectralData":
        if self.tail is not None:
            return self
        return replace(self, tail=fit_asymptotics(self))

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "mu": [float(v) for v in self.mus],
            "a_tilde": [float(v) for v in self.a_tildes],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SpectralData":
        return cls(np.asarray(data["mu"], dtype=float),
                   np.asarray(data["a_tilde"], dtype=float))


@dataclass(frozen=True)
class TriangularKernel:
    """Two-variable kernel on the closed triangle 0 <= t <= x <= pi.

    Stored as a full square matrix; symmetric kernels (like F) fill both
    triangles, solution kernels (like G) leave the upper strictly zero.
    """

    grid: Grid
    values: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = self.grid.n_points
        if vals.shape != (n, n):
            raise DomainError(f"kernel shape {vals.shape} does not match grid {n}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("kernel values must be finite")
        object.__setattr__(self, "values", vals)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()


def _sawtooth_tail(u: np.ndarray, m_start: int) -> np.ndarray:
    """sum_{n >= m_start} sin(n u)/n on [0, 2 pi].

    Closed form (pi - u)/2 minus the partial sum.  The full series jumps at
    u = 0 and u = 2 pi; the interior limit is used at 2 pi because the kernel
    enters the integral equation only through values on the closed triangle,
    approached from inside.
    """
    full = np.where(u <= 0.0, 0.0, 0.5 * (PI - u))
    if m_start <= 1:
        return full
    n = np.arange(1, m_start)
    return full - np.sin(np.outer(u, n)) @ (1.0 / n)


def _cos_n2_tail(u: np.ndarray, m_start: int) -> np.ndarray:
    """sum_{n >= m_start} cos(n u)/n^2 on [0, 2 pi] (Bernoulli closed form)."""
    full = PI**2 / 6.0 - PI * u / 2.0 + u * u / 4.0
    if m_start <= 1:
        return full
    n = np.arange(1, m_start)
    return full - np.cos(np.outer(u, n)) @ (1.0 / n**2)


def _profile(u: np.ndarray, data: SpectralData, n_modes: int,
             tail_to_infinity: bool) -> np.ndarray:
    """H(u): data modes, model-completed modes, then analytic tails."""
    n_data = len(data)
    used = min(n_modes, n_data)
    h_vals = np.zeros_like(u)
    for n in range(used):
        mu = data.mus[n]
        wave = np.cos(math.sqrt(mu) * u) if mu >= 0 else np.cosh(math.sqrt(-mu) * u)
        a0_inv = 1.0 / PI if n == 0 else 2.0 / PI
        h_vals += wave / data.a_tildes[n] - a0_inv * np.cos(n * u)
    if n_modes <= n_data and not tail_to_infinity:
        return h_vals
    if data.tail is None:
        raise CompletionError(
            f"series completion past the {n_data} supplied modes needs a tail model"
        )
    omega = data.tail.omega
    kappa = data.tail.kappa_coeff
    for n in range(n_data, n_modes):
        lam = n + omega / n
        h_vals += np.cos(lam * u) / (PI / 2.0 + kappa / n**2) - (2.0 / PI) * np.cos(n * u)
    if tail_to_infinity:
        m = max(n_modes, n_data, 1)
        s_tail = _sawtooth_tail(u, m)
        c_tail = _cos_n2_tail(u, m)
        h_vals += (2.0 / PI) * (-omega * u * s_tail - 0.5 * omega**2 * u**2 * c_tail)
        h_vals += -(4.0 * kappa / PI**2) * c_tail
    return h_vals


def build_F(data: SpectralData, grid: Grid, n_modes: int,
            tail_to_infinity: bool = False) -> TriangularKernel:
    """Data kernel F(x, t) truncated at n_modes terms (symmetric, full square).

    n_modes may exceed the supplied data when a tail model is attached; the
    extra modes are synthesized from the model with residuals zeroed.  With
    tail_to_infinity the remaining infinite tail is added in closed form.
    """
    if n_modes < 1:
        raise DomainError("n_modes must be >= 1")
    h = grid.spacing
    k = np.arange(2 * grid.n_points - 1)
    profile = _profile(k * h, data, n_modes, tail_to_infinity)
    i = np.arange(grid.n_points)
    diff_idx = np.abs(i[:, None] - i[None, :])
    sum_idx = i[:, None] + i[None, :]
    values = 0.5 * (profile[diff_idx] + profile[sum_idx])
    return TriangularKernel(grid, values, symmetric=True)


def _solve_row(f_vals: np.ndarray, weights_template: np.ndarray, i: int):
    """Solve the Nystrom system for row x_i; returns (g_row, condition)."""
    m = i + 1
    w = weights_template[:m].copy()
    w[0] = 0.5 * w[0]
    w[-1] = 0.5 * w[-1]
    if i == 0:
        # zero-width interval: the equation degenerates to G(0,0) = -F(0,0)
        return np.array([-f_vals[0, 0]]), 1.0
    a_mat = np.eye(m) + f_vals[:m, :m] * w[None, :]
    anorm = np.linalg.norm(a_mat, 1)
    try:
        lu, piv = lu_factor(a_mat)
    except np.linalg.LinAlgError as exc:
        raise UnsolvableGLError(math.inf, i) from exc
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    cond = math.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or not cond < CONDITION_LIMIT:
        raise UnsolvableGLError(cond, i)
    g_row = lu_solve((lu, piv), -f_vals[i, :m])
    return g_row, cond


def solve_GL(f_kernel: TriangularKernel, grid: Grid | None = None):
    """Solve G + F + int_0^x G(x,s) F(s,t) ds = 0 row by row (Nystrom/trapezoid).

    Returns (G kernel, per-row condition estimates).  Raises UnsolvableGLError
    when any row system is singular or its 1-norm condition exceeds 1e12,
    which signals inadmissible spectral data.
    """
    grid = grid or f_kernel.grid
    if grid.n_points != f_kernel.grid.n_points:
        raise DomainError("grid does not match the kernel grid")
    n = grid.n_points
    f_vals = f_kernel.values
    weights = np.full(n, grid.spacing)
    g_vals = np.zeros((n, n))
    conds = np.empty(n)
    threads = worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: _solve_row(f_vals, weights, i), range(n)))
    else:
        results = [_solve_row(f_vals, weights, i) for i in range(n)]
    for i, (row, cond) in enumerate(results):
        g_vals[i, : i + 1] = row
        conds[i] = cond
    return TriangularKernel(grid, g_vals), conds


def _smooth_diag(diag: np.ndarray) -> np.ndarray:
    """5-point quadratic least-squares smoothing, endpoints kept."""
    if diag.size < 5:
        return diag
    kernel = np.array([-3.0, 12.0, 17.0, 12.0, -3.0]) / 35.0
    out = diag.copy()
    out[2:-2] = np.convolve(diag, kernel, mode="valid")
    return out


@dataclass(frozen=True)
class Reconstruction:
    """Recovered potential, boundary angles and diagnostics."""

    q_hat: Potential
    alpha_hat: float
    beta_hat: float
    beta_consistency: float
    diag: np.ndarray
    gl_condition_max: float
    endpoint_ratios: np.ndarray


def _arccot(v: float) -> float:
    """Inverse cotangent mapping the reals onto (0, pi)."""
    return math.atan2(1.0, v)


def reconstruct(data: SpectralData, grid: Grid | None = None,
                n_modes: int | None = None, smooth_diag: bool = False,
                tail_to_infinity: bool = True, n_avg: int = 8) -> Reconstruction:
    """Full inverse pass: build F, solve for G, read off q and the angles.

    q = 2 d/dx G(x,x); alpha from G(0,0) = -cot(alpha); beta from the
    endpoint ratios r_n = phi'(pi)/phi(pi) of the reconstructed left
    solutions, averaged over the lowest n_avg nonnegative eigenvalues
    (hyperbolic modes are excluded: their endpoint ratio conditioning
    degrades like exp(2 |lambda_0| pi)).  The scatter of the ratios is
    reported as beta_consistency.
    """
    grid = grid or Grid(401)
    if n_modes is None:
        n_modes = max(2 * len(data), 64)
    needs_tail = tail_to_infinity or n_modes > len(data)
    if needs_tail and data.tail is None:
        if len(data) >= MIN_FIT_RECORDS:
            data = data.with_fitted_tail()
        elif n_modes > len(data):
            raise CompletionError(
                "too few modes to fit a tail model; supply data.tail explicitly"
            )
        else:
            tail_to_infinity = False
    f_kernel = build_F(data, grid, n_modes, tail_to_infinity=tail_to_infinity)
    g_kernel, conds = solve_GL(f_kernel)
    diag = g_kernel.diagonal()
    if smooth_diag:
        diag = _smooth_diag(diag)
    q_hat = Potential(grid, 2.0 * diff_central(grid, diag))
    g00 = diag[0]
    alpha_hat = _arccot(-g00)

    sel = data.mus[data.mus >= 0.0][:n_avg]
    if sel.size == 0:
        raise DomainError("no nonnegative eigenvalues available for the beta estimate")
    y, dy = propagate(q_hat.values, grid.spacing, sel, 1.0, g00)
    small = np.abs(y) < 1e-10 * max(1.0, float(np.max(np.abs(y))))
    if np.any(small):
        raise EndpointDegeneracyError(
            f"reconstructed solution vanishes at pi for mu = {sel[small]}"
        )
    ratios = dy / y
    beta_hat = _arccot(-float(np.mean(ratios)))
    return Reconstruction(
        q_hat=q_hat,
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        beta_consistency=float(np.std(ratios)),
        diag=diag,
        gl_condition_max=float(np.max(conds)),
        endpoint_ratios=ratios,
    )
