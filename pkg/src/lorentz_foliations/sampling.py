"""Seeded point samplers over axis-aligned boxes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import EmptySampleSet


@dataclass(frozen=True)
class Sampler:
    """``method`` is ``uniform``, ``sobol`` or ``grid``; ``count`` is the total point count
    (for ``grid`` the nodes per axis are ``round(count ** (1/dim))``)."""

    method: str = "sobol"
    count: int = 256
    seed: int = 0

    def points(self, lower, upper) -> np.ndarray:
        return sample_box(lower, upper, self.count, self.method, self.seed)


def sample_box(lower, upper, count: int, method: str = "uniform", seed: int = 0) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    if count <= 0:
        raise EmptySampleSet("sample count must be positive")
    if method == "uniform":
        u = np.random.default_rng(seed).random((count, dim))
    elif method == "sobol":
        u = qmc.Sobol(dim, scramble=True, seed=seed).random(count)
    elif method == "grid":
        k = max(1, int(round(count ** (1.0 / dim))))
        axes = [np.linspace(0.0, 1.0, k)] * dim
        u = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    return lower + u * (upper - lower)
