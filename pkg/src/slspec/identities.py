"""Closed-form spectral identities: trace-type sums, infinite products, asymptotics.

The two norming-constant sums

    1/a~_0 - 1/pi + sum_n (1/a~_n - 2/pi) = cot(alpha)
    1/b~_0 - 1/pi + sum_n (1/b~_n - 2/pi) = -cot(beta)

are evaluated from finitely many terms; the remainder is estimated from the
fitted decay of the residuals kappa_n = n (a~_n - pi/2) and reported together
with a Cauchy-Schwarz uncertainty, so an identity "holds" when the target
lies inside value +/- uncertainty.

The derivative of the characteristic function at an eigenvalue is an
infinite product over the remaining eigenvalues; it is evaluated in
log-magnitude-plus-sign form with an analytic tail beyond the truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .errors import DomainError, InsufficientDataError, IterationFailureError
from .numerics import PI, Potential, quad_trapz
from .forward import BoundaryAngles, Spectrum, char_fn

__all__ = [
    "solve_delta_n",
    "delta_sequence",
    "AsymptoticModel",
    "fit_asymptotics",
    "SumEvaluation",
    "sum_identity_a",
    "sum_identity_b",
    "sum_shell",
    "extend_mus",
    "phidot_product",
    "b_tilde_from_data",
    "phidot_finite_difference",
    "verify_cn_relation",
]

MIN_FIT_RECORDS = 16


def _delta_rhs(angles: BoundaryAngles, m):
    """Right side of the shift equation evaluated at n + delta = m."""
    ca, cb = math.cos(angles.alpha), math.cos(angles.beta)
    sa2, sb2 = math.sin(angles.alpha) ** 2, math.sin(angles.beta) ** 2
    ta = np.arccos(ca / np.sqrt(m * m * sa2 + ca * ca))
    tb = np.arccos(cb / np.sqrt(m * m * sb2 + cb * cb))
    return (ta - tb) / PI


def solve_delta_n(angles: BoundaryAngles, n: int, tol: float = 1e-12,
                  max_iter: int = 200) -> float:
    """Boundary shift delta_n solving the transcendental fixed-point equation.

    For alpha == beta the two arccos terms cancel for any n, so delta_n = 0
    exactly.  For n >= 1 the iteration from delta = 0 is a contraction; for
    n = 0 it need not be, so the residual is bisected over (-0.9, 0.9).
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if angles.alpha == angles.beta:
        return 0.0
    if n >= 1:
        d = 0.0
        for _ in range(max_iter):
            d_new = float(_delta_rhs(angles, n + d))
            if abs(d_new - d) < tol:
                return d_new
            d = d_new
        raise IterationFailureError(f"delta_{n} fixed point did not converge")
    resid = lambda d: d - float(_delta_rhs(angles, d))
    a, b = -0.9, 0.9
    fa, fb = resid(a), resid(b)
    if fa * fb > 0:
        raise IterationFailureError("delta_0 residual has no sign change on (-0.9, 0.9)")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = resid(mid)
        if fa * fm <= 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        if b - a < tol:
            break
    return 0.5 * (a + b)


def delta_sequence(angles: BoundaryAngles, count: int) -> np.ndarray:
    """delta_n for n = 0..count-1 (vectorized fixed point for n >= 1)."""
    if angles.alpha == angles.beta:
        return np.zeros(count)
    out = np.zeros(count)
    out[0] = solve_delta_n(angles, 0)
    if count > 1:
        n = np.arange(1, count, dtype=float)
        d = np.zeros_like(n)
        for _ in range(200):
            d_new = _delta_rhs(angles, n + d)
            if np.max(np.abs(d_new - d)) < 1e-12:
                d = d_new
                break
            d = d_new
        else:
            raise IterationFailureError("delta sequence fixed point did not converge")
        out[1:] = d
    return out


def _mu_a_arrays(data):
    """Accept a Spectrum or anything exposing mus / a_tildes arrays."""
    mus = np.asarray(data.mus, dtype=float)
    a_tildes = np.asarray(data.a_tildes, dtype=float)
    if mus.shape != a_tildes.shape or mus.ndim != 1:
        raise DomainError("mus and a_tildes must be 1-d arrays of equal length")
    return mus, a_tildes


@dataclass(frozen=True)
class AsymptoticModel:
    """Fitted large-n behaviour of eigenvalues and norming constants.

    omega is the coefficient in lambda_n ~ n + omega/n; kappa_coeff the
    coefficient in a~_n ~ pi/2 + kappa_coeff/n^2.  Residual sequences
    {omega_n}, {kappa_n} should be square-summable for admissible data; their
    running l2 norms are kept for trend checks.  omega_target_residual
    compares the fit against (cot beta - cot alpha + (pi/2)[q]) / pi when the
    angles and potential mean are known.
    """

    omega: float
    kappa_coeff: float
    omega_resid: np.ndarray
    kappa_resid: np.ndarray
    omega_resid_l2_partial: np.ndarray
    kappa_resid_l2_partial: np.ndarray
    n_records: int
    delta: np.ndarray | None = None
    l_terms: np.ndarray | None = None
    q_mean: float | None = None
    omega_target_residual: float | None = None

    def synth_mu(self, n) -> np.ndarray:
        """Model eigenvalues (n + omega/n)^2 for indices n >= 1."""
        n = np.asarray(n, dtype=float)
        return (n + self.omega / n) ** 2

    def synth_a_tilde(self, n) -> np.ndarray:
        """Model norming constants pi/2 + kappa_coeff/n^2 for n >= 1."""
        n = np.asarray(n, dtype=float)
        return PI / 2.0 + self.kappa_coeff / n**2


def fit_asymptotics(data) -> AsymptoticModel:
    """Fit the large-n model from a Spectrum or raw spectral data.

    omega is the least-squares constant fitted to n (lambda_n - n) over the
    last half of the indices; residuals come from subtracting it.  When the
    input is a Spectrum the boundary shifts delta_n, the oscillatory terms
    l_n and the target value of omega are attached as well.
    """
    mus, a_tildes = _mu_a_arrays(data)
    n_rec = len(mus)
    if n_rec < MIN_FIT_RECORDS:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_RECORDS} records to fit asymptotics, got {n_rec}"
        )
    if np.any(a_tildes <= 0):
        raise DomainError("norming constants must be positive")
    idx = np.arange(n_rec)
    positive = mus > 0
    lam = np.sqrt(np.abs(mus))
    y = np.where(positive, idx * (lam - idx), 0.0)
    fit_sel = idx >= n_rec // 2
    omega = float(np.mean(y[fit_sel & positive]))

    omega_resid = np.where(positive, y - omega, 0.0)
    omega_resid[0] = 0.0
    kappa_resid = np.zeros(n_rec)
    kappa_resid[1:] = idx[1:] * (a_tildes[1:] - PI / 2.0)
    quart = idx >= max(1, (3 * n_rec) // 4)
    kappa_coeff = float(np.mean(idx[quart] ** 2 * (a_tildes[quart] - PI / 2.0)))

    om_l2 = np.sqrt(np.cumsum(omega_resid**2))
    ka_l2 = np.sqrt(np.cumsum(kappa_resid**2))

    delta = l_terms = q_mean = target_resid = None
    if isinstance(data, Spectrum):
        delta = delta_sequence(data.angles, n_rec)
        q_mean = data.q_mean
        expected = (
            1.0 / math.tan(data.angles.beta)
            - 1.0 / math.tan(data.angles.alpha)
            + PI / 2.0 * q_mean
        ) / PI
        target_resid = omega - expected
        if data.potential is not None:
            x = data.potential.grid.nodes
            l_terms = np.zeros(n_rec)
            for n in range(1, n_rec):
                if mus[n] <= 0:
                    continue
                integ = quad_trapz(
                    data.potential.grid,
                    data.potential.values * np.cos(2.0 * lam[n] * x),
                )
                l_terms[n] = integ / (PI * (n + delta[n]))
    return AsymptoticModel(
        omega=omega,
        kappa_coeff=kappa_coeff,
        omega_resid=omega_resid,
        kappa_resid=kappa_resid,
        omega_resid_l2_partial=om_l2,
        kappa_resid_l2_partial=ka_l2,
        n_records=n_rec,
        delta=delta,
        l_terms=l_terms,
        q_mean=q_mean,
        omega_target_residual=target_resid,
    )


@dataclass(frozen=True)
class SumEvaluation:
    """Partial sum, extrapolated tail and uncertainty of one identity."""

    partial: float
    tail_estimate: float
    uncertainty: float
    n_used: int

    def __post_init__(self):
        if self.uncertainty < 0:
            raise DomainError("uncertainty must be nonnegative")

    @property
    def value(self) -> float:
        return self.partial + self.tail_estimate

    def brackets(self, target: float, slack: float = 0.0) -> bool:
        return abs(self.value - target) <= self.uncertainty + slack


def sum_shell(values: np.ndarray) -> SumEvaluation:
    """Evaluate 1/v_0 - 1/pi + sum_{n>=1} (1/v_n - 2/pi) with tail model.

    The tail uses 1/v_n - 2/pi ~ -(4/pi^2) kappa_n / n with kappa_n
    extrapolated as kbar/n^p (log-log least squares over the last quartile);
    the uncertainty is the Cauchy-Schwarz bound
    (4/pi^2) ||kappa_tail||_2 (sum_{n>N} n^-2)^(1/2).
    """
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise DomainError("sum identities need positive finite constants")
    n_used = len(values)
    partial = (1.0 / values[0] - 1.0 / PI) + float(np.sum(1.0 / values[1:] - 2.0 / PI))
    idx = np.arange(n_used)
    kappa = np.zeros(n_used)
    kappa[1:] = idx[1:] * (values[1:] - PI / 2.0)
    sel = idx[max(1, (3 * n_used) // 4):]
    ks = kappa[sel]
    if ks.size == 0 or np.max(np.abs(ks)) < 1e-8:
        return SumEvaluation(partial, 0.0, 1e-9, n_used)
    sgn = 1.0 if float(np.mean(ks)) >= 0 else -1.0
    mask = np.abs(ks) > 1e-14
    rms = float(np.sqrt(np.mean(ks**2)))
    cs_weight = math.sqrt(float(zeta(2.0, n_used)))
    if int(np.sum(mask)) < 4:
        return SumEvaluation(partial, 0.0, max(4.0 / PI**2 * rms * cs_weight, 1e-9), n_used)
    p, logk = np.polyfit(np.log(sel[mask]), np.log(np.abs(ks[mask])), 1)
    p = float(min(max(-p, 0.25), 4.0))
    kbar = sgn * math.exp(float(logk))
    tail = -(4.0 / PI**2) * kbar * float(zeta(1.0 + p, n_used))
    l2_tail = max(abs(kbar) * math.sqrt(float(zeta(2.0 * p, n_used))), rms)
    unc = max(4.0 / PI**2 * l2_tail * cs_weight, 1e-9)
    return SumEvaluation(partial, tail, unc, n_used)


def sum_identity_a(data) -> SumEvaluation:
    """Left-endpoint norming-constant sum; equals cot(alpha) for true data."""
    _, a_tildes = _mu_a_arrays(data)
    return sum_shell(a_tildes)


def sum_identity_b(data) -> SumEvaluation:
    """Right-endpoint norming-constant sum; equals -cot(beta) for true data."""
    b_tildes = np.asarray(data.b_tildes, dtype=float)
    return sum_shell(b_tildes)


def _fit_omega_from_mus(mus: np.ndarray) -> float:
    n_rec = len(mus)
    idx = np.arange(n_rec)
    lam = np.sqrt(np.abs(mus))
    sel = (idx >= n_rec // 2) & (mus > 0)
    return float(np.mean(idx[sel] * (lam[sel] - idx[sel])))


def extend_mus(mus, total: int, omega: float | None = None) -> np.ndarray:
    """Append model eigenvalues (k + omega/k)^2 for k = len(mus)..total-1."""
    mus = np.asarray(mus, dtype=float)
    if total <= len(mus):
        return mus.copy()
    if omega is None:
        omega = _fit_omega_from_mus(mus)
    k = np.arange(len(mus), total, dtype=float)
    return np.concatenate([mus, (k + omega / k) ** 2])


def _log_product(mus: np.ndarray, n: int, K: int):
    """(sign, log|.|) of prod_{k=1..K, k != n} (mu_k - mu_n)/k^2 with tail.

    Early factors can be negative (mu_k < mu_n for k < n), so the sign is
    tracked separately.  Beyond K the factors follow the eigenvalue model
    mu_k ~ k^2 + 2 omega, giving the analytic log-tail
    (2 omega - mu_n) (1/K - 1/(2K^2) + 1/(6K^3)).
    """
    if len(mus) < K + 1:
        raise DomainError(f"need mus up to index {K}, got {len(mus)}")
    if np.any(np.diff(mus) <= 0):
        raise DomainError("mus must be strictly increasing (repeated values)")
    k = np.arange(1, K + 1)
    k = k[k != n]
    diff = mus[k] - mus[n]
    sign = -1.0 if int(np.sum(diff < 0)) % 2 else 1.0
    log_abs = float(np.sum(np.log(np.abs(diff)) - 2.0 * np.log(k)))
    omega = _fit_omega_from_mus(mus)
    c = 2.0 * omega - mus[n]
    log_abs += c * (1.0 / K - 0.5 / K**2 + 1.0 / (6.0 * K**3))
    return sign, log_abs


def phidot_product(mus, angles: BoundaryAngles, n: int, K: int) -> float:
    """d Phi/d mu at mu_n from the infinite-product representation.

    mus must supply at least K+1 strictly increasing eigenvalues (synthesize
    the tail with extend_mus when only data for fewer indices exists).
    """
    mus = np.asarray(mus, dtype=float)
    if n >= len(mus):
        raise DomainError("index n beyond supplied eigenvalues")
    sign, log_abs = _log_product(mus, n, K)
    if n == 0:
        prefactor = -PI * math.sin(angles.alpha) * math.sin(angles.beta)
    else:
        prefactor = (
            -(PI / n**2) * (mus[0] - mus[n]) * math.sin(angles.alpha) * math.sin(angles.beta)
        )
    return prefactor * sign * math.exp(log_abs)


def b_tilde_from_data(mus, a_tildes, n: int, K: int) -> float:
    """1/b~_n from eigenvalues and a~_n alone (no boundary angles enter)."""
    mus = np.asarray(mus, dtype=float)
    a_tildes = np.asarray(a_tildes, dtype=float)
    if np.any(a_tildes <= 0):
        raise DomainError("a_tildes must be positive")
    if n >= len(a_tildes):
        raise DomainError("index n beyond supplied norming constants")
    _, log_abs = _log_product(mus, n, K)
    prod_sq = math.exp(2.0 * log_abs)
    if n == 0:
        return float(a_tildes[0] / (PI**2 * prod_sq))
    return float(a_tildes[n] * n**4 / (PI**2 * (mus[0] - mus[n]) ** 2 * prod_sq))


def phidot_finite_difference(q: Potential, angles: BoundaryAngles, mu: float,
                             rel_step: float = 1e-4) -> float:
    """Central-difference d Phi/d mu with step rel_step * (1 + |mu|)."""
    step = rel_step * (1.0 + abs(mu))
    return (char_fn(q, angles, mu + step) - char_fn(q, angles, mu - step)) / (2.0 * step)


def verify_cn_relation(spectrum: Spectrum, q: Potential | None = None) -> np.ndarray:
    """Relative residuals |a_n + c_n dPhi(mu_n)| / a_n (finite-difference Phi-dot)."""
    q = q if q is not None else spectrum.potential
    if q is None:
        raise DomainError("spectrum carries no potential; pass q explicitly")
    out = np.empty(len(spectrum))
    for rec in spectrum.records:
        pd = phidot_finite_difference(q, spectrum.angles, rec.mu)
        out[rec.index] = abs(rec.a_n + rec.c_n * pd) / rec.a_n
    return out
