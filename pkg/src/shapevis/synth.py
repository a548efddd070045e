"""Synthetic point clouds for scaling runs and topology checks."""

from __future__ import annotations

import numpy as np

from .types import PointCloud


def gen_sphere(n: int, d: int, seed: int = 0) -> PointCloud:
    """``n`` points uniform on the unit (d-1)-sphere in R^d."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    while (norms == 0).any():
        bad = norms[:, 0] == 0
        x[bad] = rng.standard_normal((bad.sum(), d))
        norms = np.linalg.norm(x, axis=1, keepdims=True)
    return PointCloud(x / norms)


def gen_blobs(
    n: int, d: int, centers: int = 2, sigma: float = 1.0, separation: float = 20.0, seed: int = 0
) -> PointCloud:
    """Equal-sized isotropic Gaussian blobs labelled by blob index.

    Centres sit on a scaled simplex (orthogonal axes), so every pair is
    exactly ``separation`` apart. ``separation`` is absolute, not in units
    of ``sigma``. Needs ``d >= centers`` when ``centers > 1``.
    """
    if centers < 1:
        raise ValueError("centers must be >= 1")
    if centers > 1 and d < centers:
        raise ValueError("need d >= centers to place equidistant centres")
    rng = np.random.default_rng(seed)
    ctr = np.zeros((centers, d))
    for c in range(centers):
        if centers > 1:
            ctr[c, c] = separation / np.sqrt(2.0)
    sizes = np.full(centers, n // centers)
    sizes[: n % centers] += 1
    labels = np.repeat(np.arange(centers), sizes)
    x = ctr[labels] + sigma * rng.standard_normal((n, d))
    return PointCloud(x, labels)


def gen_annulus(n: int, noise: float = 0.05, seed: int = 0) -> PointCloud:
    """Points at radius uniform in ``[1 - noise, 1 + noise]``, uniform angle, in R^2."""
    if n < 10:
        raise ValueError("need n >= 10")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    r = 1.0 + rng.uniform(-noise, noise, n) if noise > 0 else np.ones(n)
    return PointCloud(np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1))
