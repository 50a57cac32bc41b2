"""Seeded i.i.d. sampling of the uniform measures on S^n and S^n_+."""

import numpy as np

from src.errors import UsageError
from src.geometry.sphere import SpherePoint


def _normalized_gaussians(n: int, count: int, seed: int) -> SpherePoint:
    if n < 1:
        raise UsageError(f"Sphere dimension must be >= 1, got {n}")
    if count < 1:
        raise UsageError(f"Sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, n + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_uniform_sphere(n: int, count: int, seed: int) -> SpherePoint:
    """count points from sigma, the uniform probability on S^n, shape (count, n+1)."""
    return _normalized_gaussians(n, count, seed)


def sample_uniform_halfsphere(n: int, count: int, seed: int) -> SpherePoint:
    """count points from sigma_+, the uniform probability on S^n_+, shape (count, n+1).

    Normalized Gaussian vectors reflected to x_{n+1} >= 0; the reflection
    preserves uniformity because sigma is symmetric under reflect_equator.
    """
    points = _normalized_gaussians(n, count, seed)
    points[:, -1] = np.abs(points[:, -1])
    return points
