"""Forward spectral solver: eigenvalues, eigenfunctions and norming constants.

The characteristic function Phi(mu) = phi(pi) cos(beta) + phi'(pi) sin(beta)
is evaluated by sweeping the initial-value integrator; eigenvalues are the
sign changes of Phi, bracketed around asymptotic seeds and polished by
bisection plus secant steps.  Each located root is validated by Sturm
oscillation count (the n-th eigenfunction has exactly n interior zeros) and
repaired by re-bracketing between verified neighbours if the count is off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateRootError,
    DomainError,
    MissingEigenvalueError,
)
from .numerics import (
    PI,
    Grid,
    IvpSolution,
    Potential,
    propagate,
    quad_trapz_corrected,
)

__all__ = [
    "BoundaryAngles",
    "EigenRecord",
    "Spectrum",
    "char_fn",
    "psi_char_fn",
    "eigenvalues",
    "reflect_problem",
]


@dataclass(frozen=True)
class BoundaryAngles:
    """Boundary-condition angles (alpha, beta), both strictly inside (0, pi)."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name, val in (("alpha", self.alpha), ("beta", self.beta)):
            if not (0.0 < val < PI) or math.sin(val) <= 0.0:
                raise DomainError(f"{name} = {val} is outside the open interval (0, pi)")

    def reflected(self) -> "BoundaryAngles":
        return BoundaryAngles(PI - self.beta, PI - self.alpha)


@dataclass(frozen=True)
class EigenRecord:
    """One eigenvalue with its norming constants and endpoint values."""

    index: int
    mu: float
    a_n: float
    b_n: float
    c_n: float
    a_tilde: float
    b_tilde: float
    phi_end: float
    dphi_end: float

    @property
    def lam(self):
        """sqrt(mu) as (sign, magnitude); sign -1 marks an imaginary root."""
        return (1.0 if self.mu >= 0 else -1.0), math.sqrt(abs(self.mu))


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigen-records of one problem, plus the data needed to recheck it."""

    angles: BoundaryAngles
    q_mean: float
    records: tuple
    potential: Potential | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        mus = self.mus
        if np.any(np.diff(mus) <= 0):
            raise DomainError("eigenvalues must be strictly increasing")
        for i, rec in enumerate(self.records):
            if rec.index != i:
                raise DomainError("record indices must be contiguous from 0")

    def __len__(self):
        return len(self.records)

    @property
    def mus(self) -> np.ndarray:
        return np.array([r.mu for r in self.records])

    @property
    def a_tildes(self) -> np.ndarray:
        return np.array([r.a_tilde for r in self.records])

    @property
    def b_tildes(self) -> np.ndarray:
        return np.array([r.b_tilde for r in self.records])

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "alpha": self.angles.alpha,
            "beta": self.angles.beta,
            "q_mean": self.q_mean,
            "records": [
                {
                    "n": r.index,
                    "mu": r.mu,
                    "a_tilde": r.a_tilde,
                    "b_tilde": r.b_tilde,
                    "c_n": r.c_n,
                    "phi_end": r.phi_end,
                    "dphi_end": r.dphi_end,
                }
                for r in self.records
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Spectrum":
        angles = BoundaryAngles(float(data["alpha"]), float(data["beta"]))
        sa, sb = math.sin(angles.alpha) ** 2, math.sin(angles.beta) ** 2
        records = tuple(
            EigenRecord(
                index=int(r["n"]),
                mu=float(r["mu"]),
                a_n=float(r["a_tilde"]) * sa,
                b_n=float(r["b_tilde"]) * sb,
                c_n=float(r["c_n"]),
                a_tilde=float(r["a_tilde"]),
                b_tilde=float(r["b_tilde"]),
                phi_end=float(r["phi_end"]),
                dphi_end=float(r["dphi_end"]),
            )
            for r in data["records"]
        )
        return cls(angles, float(data["q_mean"]), records)


def char_fn_many(q: Potential, angles: BoundaryAngles, mus) -> np.ndarray:
    """Phi(mu) for an array of mu values (one integrator sweep)."""
    y, dy = propagate(q.values, q.grid.spacing, mus,
                      math.sin(angles.alpha), -math.cos(angles.alpha))
    return y * math.cos(angles.beta) + dy * math.sin(angles.beta)


def char_fn(q: Potential, angles: BoundaryAngles, mu: float) -> float:
    """Characteristic function Phi(mu); its zeros are the eigenvalues."""
    return float(char_fn_many(q, angles, np.array([float(mu)]))[0])


def psi_char_fn(q: Potential, angles: BoundaryAngles, mu: float) -> float:
    """Right-endpoint characteristic function Psi(mu) = -Phi(mu).

    Built from the right-to-left solution: the sweep runs in s = pi - x, so
    the Cauchy slope flips sign.
    """
    y, dy = propagate(q.values[::-1], q.grid.spacing, np.array([float(mu)]),
                      math.sin(angles.beta), math.cos(angles.beta))
    # y, dy are psi(0), -psi'(0)
    return float(y[0] * math.cos(angles.alpha) - dy[0] * math.sin(angles.alpha))


def reflect_problem(q: Potential, angles: BoundaryAngles):
    """Map (q, alpha, beta) to the reflected problem (q(pi-x), pi-beta, pi-alpha).

    Both problems share the same spectrum; the roles of the two endpoints and
    of the two norming sequences swap.
    """
    return q.reversed(), angles.reflected()


def _count_interior_zeros(ys: np.ndarray) -> np.ndarray:
    """Sign changes per column, skipping samples that sit on a zero."""
    counts = np.zeros(ys.shape[1], dtype=int)
    scale = np.max(np.abs(ys), axis=0)
    for j in range(ys.shape[1]):
        z = ys[1:-1, j]
        z = z[np.abs(z) > 1e-9 * scale[j]]
        counts[j] = int(np.sum(z[:-1] * z[1:] < 0.0))
    return counts


class _Sweeper:
    """Batched Phi evaluation on one integration grid."""

    def __init__(self, q: Potential, angles: BoundaryAngles, grid: Grid):
        self.q = q.on_grid(grid)
        self.grid = grid
        self.angles = angles
        self.sin_a = math.sin(angles.alpha)
        self.cos_a = math.cos(angles.alpha)
        self.sin_b = math.sin(angles.beta)
        self.cos_b = math.cos(angles.beta)

    def phi(self, mus) -> np.ndarray:
        y, dy = propagate(self.q.values, self.grid.spacing, mus, self.sin_a, -self.cos_a)
        return y * self.cos_b + dy * self.sin_b

    def phi_and_counts(self, mus):
        ys, dys = propagate(self.q.values, self.grid.spacing, mus,
                            self.sin_a, -self.cos_a, store=True)
        phi = ys[-1] * self.cos_b + dys[-1] * self.sin_b
        return phi, _count_interior_zeros(ys)

    def solution(self, mus):
        """Left and right solutions phi, psi stored over the grid."""
        ys, dys = propagate(self.q.values, self.grid.spacing, mus,
                            self.sin_a, -self.cos_a, store=True)
        ys_r, dys_r = propagate(self.q.values[::-1], self.grid.spacing, mus,
                                self.sin_b, self.cos_b, store=True)
        return ys, dys, ys_r[::-1], -dys_r[::-1]


def _grid_level(mu_estimate: float, base: Grid) -> int:
    """Doublings of the base grid needed for h <= 1/(4 sqrt(mu))."""
    target_h = 1.0 / (4.0 * math.sqrt(max(abs(mu_estimate), 1.0)))
    level = 0
    while base.spacing / (1 << level) > target_h:
        level += 1
    return level


def _bisect_secant(sweep: _Sweeper, lo, hi, phi_lo, phi_hi,
                   n_bisect: int = 48, n_secant: int = 8):
    """Vector bisection to relative width 1e-12, then bracketed secant polish."""
    lo, hi = lo.copy(), hi.copy()
    phi_lo, phi_hi = phi_lo.copy(), phi_hi.copy()
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        phi_mid = sweep.phi(mid)
        left = phi_lo * phi_mid <= 0.0
        hi = np.where(left, mid, hi)
        phi_hi = np.where(left, phi_mid, phi_hi)
        lo = np.where(left, lo, mid)
        phi_lo = np.where(left, phi_lo, phi_mid)
        if np.max((hi - lo) / (1.0 + np.abs(mid))) < 1e-12:
            break
    a, b, fa, fb = lo, hi, phi_lo, phi_hi
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(n_secant):
        denom = np.where(f1 == f0, 1.0, f1 - f0)
        x2 = x1 - f1 * (x1 - x0) / denom
        inside = (x2 > a) & (x2 < b)
        x2 = np.where(inside, x2, 0.5 * (a + b))
        f2 = sweep.phi(x2)
        left = fa * f2 <= 0.0
        b = np.where(left, x2, b)
        fb = np.where(left, f2, fb)
        a = np.where(left, a, x2)
        fa = np.where(left, fa, f2)
        x0, f0 = x1, f1
        x1, f1 = x2, f2
        if np.max((b - a) / (1.0 + np.abs(x2))) < 5e-15:
            break
    return 0.5 * (a + b)


def _locate_group(sweep: _Sweeper, ns: np.ndarray, seeds_all: np.ndarray,
                  floor0: float, qdev: float, n_expand: int = 8):
    """Locate eigenvalues for the given index subset on one grid."""
    seeds = seeds_all[ns]
    count_all = len(seeds_all)
    gaps = np.diff(seeds_all)
    gap_lo = np.concatenate([[np.inf], gaps])[ns]
    gap_hi = np.concatenate([gaps, [2.0 * count_all + 1.0]])[ns]
    cap = 0.48 * np.minimum(gap_lo, gap_hi)
    half = np.minimum(0.45 * gap_hi, cap)
    lo, hi = seeds - half, seeds + half
    if ns[0] == 0:
        lo[0] = min(floor0, lo[0])
    phi_lo, phi_hi = sweep.phi(lo), sweep.phi(hi)
    for attempt in range(n_expand):
        bad = phi_lo * phi_hi > 0.0
        if not np.any(bad):
            break
        grow = np.minimum(half * 1.6 ** (attempt + 1), cap)
        lo = np.where(bad, np.minimum(lo, seeds - grow), lo)
        hi = np.where(bad, np.maximum(hi, seeds + grow), hi)
        # the ground state may sit well below its seed; nothing exists below
        # it, so the first window keeps extending downward
        if ns[0] == 0 and bad[0]:
            lo[0] = min(lo[0], floor0 - 1.6 ** (attempt + 1) * (1.0 + 2.0 * qdev))
        phi_lo, phi_hi = sweep.phi(lo), sweep.phi(hi)
    bad = phi_lo * phi_hi > 0.0
    mus = _bisect_secant(sweep, lo, hi, phi_lo, phi_hi)
    mus[bad] = np.nan
    return mus, lo, hi, gap_hi


def _repair(sweep: _Sweeper, mus: np.ndarray, n: int, lo_n: float, hi_n: float,
            phi_scale: float):
    """Re-bracket index n on [lo_n, hi_n] and accept the root whose count is n."""
    probes = np.linspace(lo_n, hi_n, 65)
    phis = sweep.phi(probes)
    sgn = np.sign(phis)
    flips = np.nonzero(sgn[:-1] * sgn[1:] < 0.0)[0]
    for k in flips:
        root = _bisect_secant(sweep, probes[[k]], probes[[k + 1]],
                              phis[[k]], phis[[k + 1]])
        _, cnt = sweep.phi_and_counts(root)
        if cnt[0] == n:
            return float(root[0])
    # no usable sign change: either a near-double root or a genuine miss
    if np.min(np.abs(phis)) < 1e-12 * phi_scale and hi_n - lo_n > 1e-6:
        raise DegenerateRootError(
            f"|Phi| < 1e-12 relative over [{lo_n:.6g}, {hi_n:.6g}] without a sign "
            f"change near index {n}"
        )
    raise MissingEigenvalueError(n)


def eigenvalues(q: Potential, angles: BoundaryAngles, count: int) -> Spectrum:
    """The lowest ``count`` eigenvalues with fully populated records.

    Bracket windows are centered on the asymptotic seeds (n + delta_n)^2 + [q]
    and grown until Phi changes sign; the integration grid is refined per
    eigenvalue so that h <= 1/(4 sqrt(mu)).  Norming integrals use the
    endpoint-corrected trapezoid on the potential's own grid.
    """
    from .identities import delta_sequence  # deferred: identities imports forward types

    if count < 1:
        raise DomainError("count must be >= 1")
    qmean = q.mean
    qdev = float(np.max(np.abs(q.values - qmean)))
    deltas = delta_sequence(angles, count)
    idx = np.arange(count)
    seeds = (idx + deltas) ** 2 + qmean
    floor0 = qmean - 2.0 * qdev - 1.0 - 1e-6

    levels = np.array([_grid_level(s, q.grid) for s in seeds])
    mus = np.full(count, np.nan)
    sweepers = {}
    for level in np.unique(levels):
        sweepers[level] = _Sweeper(q, angles, q.grid.refined(1 << level))
    for level in np.unique(levels):
        ns = idx[levels == level]
        mus[ns], _, _, _ = _locate_group(sweepers[level], ns, seeds, floor0, qdev)

    # oscillation-count validation (per grid level), repair failures
    counts = np.full(count, -1, dtype=int)
    for level in np.unique(levels):
        ns = idx[levels == level]
        probe = np.where(np.isnan(mus[ns]), seeds[ns], mus[ns])
        _, counts[ns] = sweepers[level].phi_and_counts(probe)
    gap_hi_all = np.concatenate([np.diff(seeds), [2.0 * count + 1.0]])
    for n in range(count):
        if not math.isnan(mus[n]) and counts[n] == n:
            continue
        sweep = sweepers[levels[n]]
        lo_n = mus[n - 1] + 1e-9 * (1 + abs(mus[n - 1])) if n > 0 else floor0 - 3.0 * (1 + 2 * qdev)
        if n + 1 < count and not math.isnan(mus[n + 1]):
            hi_n = mus[n + 1] - 1e-9 * (1 + abs(mus[n + 1]))
        else:
            hi_n = seeds[n] + gap_hi_all[n]
        scale = max(abs(char_fn(sweep.q, angles, seeds[n])), 1e-300)
        mus[n] = _repair(sweep, mus, n, lo_n, hi_n, scale)

    if np.any(np.diff(mus) <= 0):
        raise DegenerateRootError("located eigenvalues are not strictly increasing")

    return _populate(q, angles, mus, levels, sweepers)


def _populate(q: Potential, angles: BoundaryAngles, mus, levels, sweepers) -> Spectrum:
    """Integrate eigenfunctions and assemble records."""
    count = len(mus)
    sin_a2 = math.sin(angles.alpha) ** 2
    sin_b2 = math.sin(angles.beta) ** 2
    a = np.empty(count)
    b = np.empty(count)
    c = np.empty(count)
    phi_end = np.empty(count)
    dphi_end = np.empty(count)
    idx = np.arange(count)
    for level in np.unique(levels):
        ns = idx[levels == level]
        sweep = sweepers[level]
        phis, dphis, psis, dpsis = sweep.solution(mus[ns])
        stride = 1 << level
        # resample to the potential's own grid for the norming integrals
        phi_c, dphi_c = phis[::stride], dphis[::stride]
        psi_c, dpsi_c = psis[::stride], dpsis[::stride]
        for j, n in enumerate(ns):
            a[n] = quad_trapz_corrected(
                q.grid, phi_c[:, j] ** 2,
                2.0 * phi_c[0, j] * dphi_c[0, j], 2.0 * phi_c[-1, j] * dphi_c[-1, j])
            b[n] = quad_trapz_corrected(
                q.grid, psi_c[:, j] ** 2,
                2.0 * psi_c[0, j] * dpsi_c[0, j], 2.0 * psi_c[-1, j] * dpsi_c[-1, j])
            k = int(np.argmax(np.abs(psi_c[:, j])))
            c[n] = phi_c[k, j] / psi_c[k, j]
            phi_end[n] = phi_c[-1, j]
            dphi_end[n] = dphi_c[-1, j]
    records = tuple(
        EigenRecord(
            index=int(n),
            mu=float(mus[n]),
            a_n=float(a[n]),
            b_n=float(b[n]),
            c_n=float(c[n]),
            a_tilde=float(a[n] / sin_a2),
            b_tilde=float(b[n] / sin_b2),
            phi_end=float(phi_end[n]),
            dphi_end=float(dphi_end[n]),
        )
        for n in range(count)
    )
    return Spectrum(angles, q.mean, records, potential=q)
