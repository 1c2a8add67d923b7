"""Deterministic RNG streams.

Every stochastic routine takes an integer seed and derives independent
substreams with ``numpy.random.SeedSequence`` spawn keys. A stream is
keyed by ``(seed, *indices)`` so that trial t of experiment e always
sees the same bits regardless of batching, worker count, or evaluation
order.
"""

from __future__ import annotations

import numpy as np


def stream(seed, *indices: int) -> np.random.Generator:
    """Return the generator for substream ``(seed, *indices)``.

    ``seed`` may itself be a tuple of integers (a parent key)."""
    key = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    key = tuple(int(k) for k in key) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(key))


def uniform_in_ball(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Sample ``size`` points uniformly in the unit ball of R^n.

    Gaussian direction times a Beta-distributed radius; exact, no
    rejection.
    """
    g = rng.standard_normal((size, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # Guard the (measure-zero) all-zero draw.
    norms[norms == 0.0] = 1.0
    radii = rng.random(size) ** (1.0 / n)
    return g / norms * radii[:, None]


def uniform_on_sphere(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Sample ``size`` unit vectors uniformly on S^{n-1}."""
    g = rng.standard_normal((size, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return g / norms
