"""Run the full corpus experiment: identities, asymptotics and round trips.

For every (potential, angle-pair) combination this solves the forward
problem, evaluates both norming-constant sums with uncertainties, fits the
eigenvalue asymptotics, reconstructs the potential from the first 50 modes
and reports the errors.  Results land in corpus_report.json.

Usage: python scripts/run_corpus.py [--modes 200] [--out corpus_report.json]
"""

import argparse
import json
import math
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from slspec import (  # noqa: E402
    BoundaryAngles,
    Grid,
    Potential,
    SpectralData,
    eigenvalues,
    fit_asymptotics,
    quad_trapz,
    reconstruct,
    sum_identity_a,
    sum_identity_b,
)

PI = math.pi

CORPUS_POTENTIALS = {
    "zero": lambda x: np.zeros_like(x),
    "one": lambda x: np.ones_like(x),
    "two_cos_2x": lambda x: 2.0 * np.cos(2.0 * x),
    "parabolic": lambda x: x * (PI - x) - PI**2 / 6.0,
}

CORPUS_ANGLES = {
    "neumann": (PI / 2, PI / 2),
    "third_twothirds": (PI / 3, 2 * PI / 3),
    "quarter_third": (PI / 4, PI / 3),
}


def run_one(name, qfun, alpha, beta, n_modes):
    t0 = time.time()
    q = Potential.from_callable(qfun)
    angles = BoundaryAngles(alpha, beta)
    spectrum = eigenvalues(q, angles, n_modes)
    ev_a = sum_identity_a(spectrum)
    ev_b = sum_identity_b(spectrum)
    model = fit_asymptotics(spectrum)
    data = SpectralData.from_spectrum(spectrum, 50)
    rec = reconstruct(data, Grid(401))
    q_true = q.on_grid(rec.q_hat.grid)
    diff = rec.q_hat.values - q_true.values
    elapsed = time.time() - t0
    result = {
        "identity_a": {
            "value": ev_a.value,
            "uncertainty": ev_a.uncertainty,
            "target": 1.0 / math.tan(alpha),
        },
        "identity_b": {
            "value": ev_b.value,
            "uncertainty": ev_b.uncertainty,
            "target": -1.0 / math.tan(beta),
        },
        "omega": {"fitted": model.omega, "target_residual": model.omega_target_residual},
        "roundtrip": {
            "q_l2_error": math.sqrt(quad_trapz(rec.q_hat.grid, diff**2)),
            "alpha_error": abs(rec.alpha_hat - alpha),
            "beta_error": abs(rec.beta_hat - beta),
            "beta_consistency": rec.beta_consistency,
        },
        "seconds": elapsed,
    }
    print(f"{name}: idA {ev_a.value:+.4f}+-{ev_a.uncertainty:.1e} "
          f"idB {ev_b.value:+.4f}+-{ev_b.uncertainty:.1e} "
          f"L2 {result['roundtrip']['q_l2_error']:.2e} ({elapsed:.1f}s)")
    return result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--modes", type=int, default=200)
    ap.add_argument("--out", default="corpus_report.json")
    args = ap.parse_args()
    report = {"format_version": 1, "n_modes": args.modes, "problems": {}}
    for qname, qfun in CORPUS_POTENTIALS.items():
        for aname, (al, be) in CORPUS_ANGLES.items():
            key = f"{qname}:{aname}"
            report["problems"][key] = run_one(key, qfun, al, be, args.modes)
    with open(args.out, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
