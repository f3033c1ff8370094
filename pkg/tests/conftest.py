"""Shared fixtures: the test corpus of potentials and angle pairs.

Forward solves at N=200 are the expensive part of the suite, so spectra are
computed lazily and cached for the whole session; tests slice what they need.
"""

import math

import numpy as np
import pytest

from slspec import BoundaryAngles, Potential, Spectrum, eigenvalues

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

CORPUS_KEYS = [(q, a) for q in CORPUS_POTENTIALS for a in CORPUS_ANGLES]


def corpus_potential(qname: str) -> Potential:
    return Potential.from_callable(CORPUS_POTENTIALS[qname])


def corpus_angles(aname: str) -> BoundaryAngles:
    alpha, beta = CORPUS_ANGLES[aname]
    return BoundaryAngles(alpha, beta)


def truncated(spectrum: Spectrum, n: int) -> Spectrum:
    return Spectrum(spectrum.angles, spectrum.q_mean, spectrum.records[:n],
                    potential=spectrum.potential)


@pytest.fixture(scope="session")
def corpus():
    """Callable (qname, aname, count) -> Spectrum, caching N=200 solves."""
    cache = {}

    def get(qname: str, aname: str, count: int = 200) -> Spectrum:
        key = (qname, aname)
        if key not in cache or len(cache[key]) < count:
            q = corpus_potential(qname)
            cache[key] = eigenvalues(q, corpus_angles(aname), max(count, 200))
        return truncated(cache[key], count)

    return get
