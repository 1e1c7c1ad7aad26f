"""Shared helpers for the test suite."""

import numpy as np


def random_spd(rng, n: int, spread: float = 1.0) -> np.ndarray:
    """Well-conditioned random SPD matrix, independent of the library paths."""
    a = rng.standard_normal((n, n)) * spread
    return a @ a.T + np.eye(n)


def random_sym(rng, n: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((n, n)) * scale
    return (g + g.T) / 2.0
