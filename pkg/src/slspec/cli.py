"""Command-line interface: forward solve, invert, validate, identities, roundtrip.

All structured results are JSON with a top-level format_version field;
function-on-grid data travels as CSV with header ``x,q``.  Angles are always
radians.  The process exit code is 0 on success, 1 when a validation verdict
is negative, and 2 on malformed input or numerical failure (with a
machine-readable error object on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import SlspecError
from .numerics import Grid, Potential, load_potential_csv, save_potential_csv, quad_trapz
from .forward import BoundaryAngles, Spectrum, eigenvalues
from .gl import SpectralData, reconstruct
from .identities import fit_asymptotics, sum_identity_a, sum_identity_b
from .validation import Tolerances, check_conditions

FORMAT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: subcommand plus the numeric knobs it uses."""

    subcommand: str
    grid_points: int
    n_modes: int
    input_path: str
    alpha: float | None = None
    beta: float | None = None


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _angles(args) -> BoundaryAngles:
    return BoundaryAngles(args.alpha, args.beta)


def _forward_spectrum(args) -> Spectrum:
    q = load_potential_csv(args.potential, Grid(args.grid))
    return eigenvalues(q, _angles(args), args.modes)


def cmd_forward(args) -> int:
    spectrum = _forward_spectrum(args)
    _emit(spectrum.to_json_dict(), args.out)
    return 0


def cmd_invert(args) -> int:
    with open(args.data) as fh:
        data = SpectralData.from_json_dict(json.load(fh))
    rec = reconstruct(
        data,
        Grid(args.grid),
        n_modes=args.modes,
        smooth_diag=args.smooth_diag,
    )
    save_potential_csv(args.out_potential, rec.q_hat)
    _emit(
        {
            "format_version": FORMAT_VERSION,
            "alpha_hat": rec.alpha_hat,
            "beta_hat": rec.beta_hat,
            "beta_consistency": rec.beta_consistency,
            "gl_condition_max": rec.gl_condition_max,
            "potential_csv": args.out_potential,
        },
        args.out_summary,
    )
    return 0


def cmd_validate(args) -> int:
    with open(args.data) as fh:
        data = SpectralData.from_json_dict(json.load(fh))
    tol = Tolerances(
        cond6_resid_l2=args.tol_cond6,
        cond7_resid_l2=args.tol_cond7,
        cond8_slack=args.tol_cond8,
        cond9_slack=args.tol_cond9,
        product_truncation=args.product_k,
    )
    report = check_conditions(data, _angles(args), tol)
    payload = report.to_json_dict()
    payload["format_version"] = FORMAT_VERSION
    _emit(payload, args.out)
    return 0 if report.overall else 1


def cmd_identities(args) -> int:
    spectrum = _forward_spectrum(args)
    ev_a = sum_identity_a(spectrum)
    ev_b = sum_identity_b(spectrum)
    target_a = 1.0 / math.tan(spectrum.angles.alpha)
    target_b = -1.0 / math.tan(spectrum.angles.beta)
    model = fit_asymptotics(spectrum)
    payload = {
        "format_version": FORMAT_VERSION,
        "identity_a": {
            "value": ev_a.value,
            "uncertainty": ev_a.uncertainty,
            "target": target_a,
            "pass": ev_a.brackets(target_a),
        },
        "identity_b": {
            "value": ev_b.value,
            "uncertainty": ev_b.uncertainty,
            "target": target_b,
            "pass": ev_b.brackets(target_b),
        },
        "omega": {
            "fitted": model.omega,
            "target_residual": model.omega_target_residual,
        },
        "n_modes": args.modes,
    }
    _emit(payload, args.out)
    return 0


def cmd_roundtrip(args) -> int:
    q = load_potential_csv(args.potential, Grid(args.forward_grid))
    angles = BoundaryAngles(args.alpha, args.beta)
    spectrum = eigenvalues(q, angles, args.modes)
    data = SpectralData.from_spectrum(spectrum)
    rec = reconstruct(data, Grid(args.grid))
    q_resampled = q.on_grid(rec.q_hat.grid)
    diff = rec.q_hat.values - q_resampled.values
    l2 = math.sqrt(quad_trapz(rec.q_hat.grid, diff**2))
    payload = {
        "format_version": FORMAT_VERSION,
        "q_l2_error": l2,
        "q_max_error": float(np.max(np.abs(diff))),
        "alpha_error": abs(rec.alpha_hat - angles.alpha),
        "beta_error": abs(rec.beta_hat - angles.beta),
        "beta_consistency": rec.beta_consistency,
        "gl_condition_max": rec.gl_condition_max,
        "n_modes": args.modes,
    }
    if args.out_potential:
        save_potential_csv(args.out_potential, rec.q_hat)
        payload["potential_csv"] = args.out_potential
    _emit(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slspec",
        description="Forward and inverse spectral computations for -y'' + q y = mu y "
                    "on (0, pi) with Robin boundary angles alpha, beta.",
    )
    parser.add_argument("--version", action="version", version=f"slspec {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_angles(p):
        p.add_argument("--alpha", type=float, required=True, help="left angle in (0, pi), radians")
        p.add_argument("--beta", type=float, required=True, help="right angle in (0, pi), radians")

    p = sub.add_parser("forward", help="compute a spectrum from a potential CSV")
    p.add_argument("potential", help="CSV file with header x,q")
    add_angles(p)
    p.add_argument("--modes", type=int, default=50)
    p.add_argument("--grid", type=int, default=2049)
    p.add_argument("--out", default=None, help="write spectrum JSON here instead of stdout")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("invert", help="reconstruct (q, alpha, beta) from spectral data JSON")
    p.add_argument("data", help="JSON file with fields mu, a_tilde")
    p.add_argument("--grid", type=int, default=401)
    p.add_argument("--modes", type=int, default=None)
    p.add_argument("--smooth-diag", action="store_true")
    p.add_argument("--out-potential", default="q_hat.csv")
    p.add_argument("--out-summary", default=None)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("validate", help="check spectral data against target angles")
    p.add_argument("data")
    add_angles(p)
    p.add_argument("--tol-cond6", type=float, default=Tolerances.cond6_resid_l2)
    p.add_argument("--tol-cond7", type=float, default=Tolerances.cond7_resid_l2)
    p.add_argument("--tol-cond8", type=float, default=Tolerances.cond8_slack)
    p.add_argument("--tol-cond9", type=float, default=Tolerances.cond9_slack)
    p.add_argument("--product-k", type=int, default=Tolerances.product_truncation)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("identities", help="evaluate the two norming-constant sums")
    p.add_argument("potential")
    add_angles(p)
    p.add_argument("--modes", type=int, default=200)
    p.add_argument("--grid", type=int, default=2049)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("roundtrip", help="forward solve, invert, report errors")
    p.add_argument("potential")
    add_angles(p)
    p.add_argument("--modes", type=int, default=50)
    p.add_argument("--forward-grid", type=int, default=2049)
    p.add_argument("--grid", type=int, default=401)
    p.add_argument("--out", default=None)
    p.add_argument("--out-potential", default=None)
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SlspecError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        error = {
            "format_version": FORMAT_VERSION,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
