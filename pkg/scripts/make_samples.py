"""Regenerate the bundled sample potentials in samples/."""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from slspec import Grid, Potential, save_potential_csv  # noqa: E402

SAMPLES = {
    "q_zero.csv": lambda x: np.zeros_like(x),
    "q_one.csv": lambda x: np.ones_like(x),
    "q_2cos2x.csv": lambda x: 2.0 * np.cos(2.0 * x),
    "q_parabolic.csv": lambda x: x * (np.pi - x) - np.pi**2 / 6.0,
}


def main():
    out_dir = pathlib.Path(__file__).resolve().parents[1] / "samples"
    out_dir.mkdir(exist_ok=True)
    grid = Grid(129)
    for name, fn in SAMPLES.items():
        save_potential_csv(out_dir / name, Potential.from_callable(fn, grid))
        print(f"wrote {out_dir / name}")


if __name__ == "__main__":
    main()
