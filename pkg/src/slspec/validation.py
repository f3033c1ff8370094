"""Decision procedure for candidate spectral data against fixed target angles.

Four conditions are checked: the eigenvalue asymptotics (cond6), the norming
constant asymptotics (cond7), the left-endpoint sum against cot(alpha)
(cond8) and, via the product conversion to 1/b~_n, the right-endpoint sum
against -cot(beta) (cond9).  Square-summability of residual sequences is
undecidable from finitely many terms, so cond6/cond7 use a bounded
last-quartile l2 increment as a finite-data surrogate; the thresholds are
empirical and live in the Tolerances config.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import MalformedDataError
from .numerics import PI
from .forward import BoundaryAngles
from .gl import SpectralData
from .identities import (
    b_tilde_from_data,
    extend_mus,
    fit_asymptotics,
    sum_shell,
)

__all__ = [
    "Tolerances",
    "Perturbation",
    "ConditionVerdict",
    "ValidationReport",
    "check_conditions",
    "perturb_and_classify",
]


@dataclass(frozen=True)
class Tolerances:
    """Pass thresholds; cond8/cond9 slack matches truncation error at N=200."""

    cond6_resid_l2: float = 0.1
    cond7_resid_l2: float = 0.5
    cond8_slack: float = 1e-2
    cond9_slack: float = 1e-2
    product_truncation: int = 2000


@dataclass(frozen=True)
class Perturbation:
    """Single-entry modification of spectral data."""

    index: int
    field: str  # "mu" or "a_tilde"
    delta: float


@dataclass(frozen=True)
class ConditionVerdict:
    name: str
    passed: bool
    value: float
    target: float | None
    margin: float
    detail: dict

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["detail"] = {k: v for k, v in sorted(self.detail.items())}
        return d


@dataclass(frozen=True)
class ValidationReport:
    cond6: ConditionVerdict
    cond7: ConditionVerdict
    cond8: ConditionVerdict
    cond9: ConditionVerdict

    @property
    def overall(self) -> bool:
        return all(c.passed for c in (self.cond6, self.cond7, self.cond8, self.cond9))

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "cond6": self.cond6.to_json_dict(),
            "cond7": self.cond7.to_json_dict(),
            "cond8": self.cond8.to_json_dict(),
            "cond9": self.cond9.to_json_dict(),
            "overall": self.overall,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _resid_verdict(name: str, resid: np.ndarray, partial_l2: np.ndarray,
                   fitted: float, tol: float) -> ConditionVerdict:
    n = len(resid)
    quart = resid[max(1, (3 * n) // 4):]
    increment = float(np.sqrt(np.sum(quart**2)))
    return ConditionVerdict(
        name=name,
        passed=increment < tol,
        value=increment,
        target=None,
        margin=tol - increment,
        detail={
            "fitted_constant": fitted,
            "resid_l2_total": float(partial_l2[-1]),
            "resid_l2_last_quartile": increment,
            "threshold": tol,
        },
    )


def _sum_verdict(name: str, evaluation, target: float, slack: float) -> ConditionVerdict:
    err = abs(evaluation.value - target)
    budget = evaluation.uncertainty + slack
    return ConditionVerdict(
        name=name,
        passed=bool(err <= budget),
        value=evaluation.value,
        target=target,
        margin=budget - err,
        detail={
            "partial": evaluation.partial,
            "tail_estimate": evaluation.tail_estimate,
            "uncertainty": evaluation.uncertainty,
            "slack": slack,
            "n_used": evaluation.n_used,
        },
    )


def check_conditions(data: SpectralData, target: BoundaryAngles,
                     tolerances: Tolerances | None = None) -> ValidationReport:
    """Check the four admissibility conditions of the data for (alpha, beta)."""
    tol = tolerances or Tolerances()
    mus = np.asarray(data.mus, dtype=float)
    ats = np.asarray(data.a_tildes, dtype=float)
    if np.any(np.diff(mus) <= 0):
        raise MalformedDataError("mus must be strictly increasing")
    if np.any(ats <= 0):
        raise MalformedDataError("a_tildes must be positive")

    model = fit_asymptotics(data)
    cond6 = _resid_verdict("lambda_asymptotics", model.omega_resid,
                           model.omega_resid_l2_partial, model.omega, tol.cond6_resid_l2)
    cond7 = _resid_verdict("norming_asymptotics", model.kappa_resid,
                           model.kappa_resid_l2_partial, model.kappa_coeff,
                           tol.cond7_resid_l2)

    cond8 = _sum_verdict("alpha_sum", sum_shell(ats),
                         1.0 / math.tan(target.alpha), tol.cond8_slack)

    k_max = tol.product_truncation
    mus_ext = extend_mus(mus, k_max + 1, omega=model.omega)
    inv_bt = np.array([b_tilde_from_data(mus_ext, ats, n, k_max)
                       for n in range(len(ats))])
    cond9 = _sum_verdict("beta_sum", sum_shell(1.0 / inv_bt),
                         -1.0 / math.tan(target.beta), tol.cond9_slack)
    return ValidationReport(cond6, cond7, cond8, cond9)


def perturb_and_classify(data: SpectralData, target: BoundaryAngles,
                         perturbation: Perturbation,
                         tolerances: Tolerances | None = None) -> ValidationReport:
    """Apply one single-entry perturbation and re-run the checks.

    Demonstrates how the sum conditions pin the angles: shifting a~_0 alone
    moves the alpha sum by exactly the change of 1/a~_0.
    """
    mus = np.array(data.mus, dtype=float)
    ats = np.array(data.a_tildes, dtype=float)
    if not (0 <= perturbation.index < len(mus)):
        raise MalformedDataError(f"perturbation index {perturbation.index} out of range")
    if perturbation.field == "mu":
        mus[perturbation.index] += perturbation.delta
        if np.any(np.diff(mus) <= 0):
            raise MalformedDataError("perturbed mus are no longer increasing")
    elif perturbation.field == "a_tilde":
        ats[perturbation.index] += perturbation.delta
        if ats[perturbation.index] <= 0:
            raise MalformedDataError("perturbed a_tilde is not positive")
    else:
        raise MalformedDataError(f"unknown perturbation field {perturbation.field!r}")
    return check_conditions(SpectralData(mus, ats), target, tolerances)
