"""Weighted point clouds on the sphere, and discretization of radial profiles on S^2_+."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.errors import UnsupportedDimensionError, UsageError
from src.geometry.sphere import SpherePoint, as_point, meridian_point, reflect_equator
from src.logger import Logger
from src.measures.profiles import RadialProfile, density_at, quantile

LOGGER = Logger("measures.discretize")

WEIGHT_TOL = 1e-10
GOLDEN_RATIO = (1.0 + 5.0 ** 0.5) / 2.0
SCHEMES = ("grid", "fibonacci", "equal_mass")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability weights on a cloud of sphere points."""

    points: SpherePoint
    weights: npt.NDArray[np.float64]

    def __post_init__(self):
        points = as_point(self.points)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 2:
            raise UsageError(f"Points must have shape (k, n+1), got {points.shape}")
        if weights.shape != (points.shape[0],):
            raise UsageError(f"{weights.shape[0] if weights.ndim else 0} weights for {points.shape[0]} points")
        if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
            raise UsageError("Weights must be finite and nonnegative")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_TOL:
            raise UsageError(f"Weights sum to {float(weights.sum())!r}, not 1")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, points: npt.ArrayLike) -> DiscreteMeasure:
        points = np.asarray(points, dtype=float)
        return cls(points=points, weights=np.full(points.shape[0], 1.0 / points.shape[0]))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1] - 1

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.size) <= tol))

    def reflected(self) -> DiscreteMeasure:
        """Image under reflect_equator."""
        return DiscreteMeasure(points=reflect_equator(self.points), weights=self.weights)


def symmetrize(measure: DiscreteMeasure) -> DiscreteMeasure:
    """(nu + nu_-) / 2 where nu_- is the image of nu under reflect_equator."""
    mirror = measure.reflected()
    return DiscreteMeasure(
        points=np.concatenate([measure.points, mirror.points]),
        weights=np.concatenate([measure.weights, mirror.weights]) / 2.0,
    )


def _grid_nodes(profile: RadialProfile, count: int, offset: float) -> tuple[SpherePoint, npt.NDArray[np.float64]]:
    """Colatitude x longitude product grid, weights g(t_i) dt dtheta / (2 pi)."""
    n_colat = max(2, int(round(np.sqrt(count / 4.0))))
    n_long = max(2, count // n_colat)
    dt = profile.support / n_colat
    t = (np.arange(n_colat) + 0.5) * dt
    phi = offset + 2.0 * np.pi * np.arange(n_long) / n_long

    tt, pp = np.meshgrid(t, phi, indexing="ij")
    points = meridian_point(tt.ravel(), pp.ravel(), n=2)
    weights = np.repeat(np.asarray(density_at(profile, t)) * dt / n_long, n_long)
    return points, weights


def _fibonacci_nodes(profile: RadialProfile, count: int, offset: float) -> tuple[SpherePoint, npt.NDArray[np.float64]]:
    """Equal-area Fibonacci lattice on the support cap, weights f(d(x, N))."""
    k = np.arange(count, dtype=float)
    cap_height = 1.0 - np.cos(profile.support)
    z = 1.0 - (k + 0.5) / count * cap_height
    t = np.arccos(z)
    phi = offset + 2.0 * np.pi * k / GOLDEN_RATIO
    points = meridian_point(t, phi, n=2)

    log_w = profile.spec.log_weight(t)
    weights = np.exp(log_w - np.max(log_w))
    return points, weights


def _equal_mass_nodes(profile: RadialProfile, count: int, offset: float) -> tuple[SpherePoint, npt.NDArray[np.float64]]:
    """Fibonacci longitudes with colatitudes at the profile quantiles (k + 1/2) / count; equal weights.

    For the uniform profile this is the equal-area lattice. Two profiles
    discretized with the same count and seed share longitudes, and node k of
    the target is, up to table interpolation, the monotone radial image of
    node k of the source.
    """
    k = np.arange(count, dtype=float)
    t = np.asarray(quantile(profile, (k + 0.5) / count))
    phi = offset + 2.0 * np.pi * k / GOLDEN_RATIO
    return meridian_point(t, phi, n=2), np.full(count, 1.0 / count)


def discretize_on_sphere(
    profile: RadialProfile,
    count: int,
    scheme: str = "fibonacci",
    seed: int = 0,
) -> DiscreteMeasure:
    """Discretize a radial profile on S^2_+ into about `count` weighted points.

    The seed sets a random longitude offset of the whole lattice, so distinct
    seeds give rotated copies of the same node set.
    """
    if profile.n != 2:
        raise UnsupportedDimensionError(f"Discretization is implemented for S^2 only, got n={profile.n}")
    if count < 4:
        raise UsageError(f"count must be >= 4, got {count}")
    if scheme not in SCHEMES:
        raise UsageError(f"Unknown discretization scheme {scheme!r}; expected one of {SCHEMES}")

    offset = float(np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi))
    if scheme == "grid":
        points, weights = _grid_nodes(profile, count, offset)
    elif scheme == "equal_mass":
        points, weights = _equal_mass_nodes(profile, count, offset)
    else:
        points, weights = _fibonacci_nodes(profile, count, offset)

    total = float(weights.sum())
    if not np.isfinite(total) or total <= 0.0:
        raise UsageError(f"{profile.spec.describe()} puts no mass on the {scheme} nodes")
    LOGGER.debug(f"Discretized {profile.spec.describe()} on {points.shape[0]} {scheme} nodes")
    return DiscreteMeasure(points=points, weights=weights / total)
