"""Exact spherical geometry on S^n, stored in ambient coordinates of R^(n+1).

Points are plain float arrays whose last axis holds the n+1 coordinates, so
every function here accepts a single point of shape (n+1,) or a batch of
shape (k, n+1) and broadcasts. The height coordinate is the last one; the
north pole N is (0, ..., 0, 1) and the half-sphere is {x_{n+1} >= 0}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.stats import special_ortho_group

from src.errors import AmbiguityError, UsageError

SpherePoint = npt.NDArray[np.float64]

HALF_PI = 0.5 * np.pi
UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10
ROTATION_TOL = 1e-10
ANTIPODAL_TOL = 1e-12


def as_point(coords: npt.ArrayLike, tol: float = UNIT_TOL) -> SpherePoint:
    """Validate and return coords as float point(s) on the unit sphere."""
    arr = np.asarray(coords, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] < 2:
        raise UsageError(f"A sphere point needs at least 2 coordinates, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= tol):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise UsageError(f"Point(s) off the unit sphere: max | |x| - 1 | = {worst:.3e}")
    return arr


def dimension(x: SpherePoint) -> int:
    """Sphere dimension n of a point (or batch) in R^(n+1)."""
    return int(np.shape(x)[-1]) - 1


def north_pole(n: int) -> SpherePoint:
    pole = np.zeros(n + 1)
    pole[-1] = 1.0
    return pole


def basis_vector(n: int, i: int) -> SpherePoint:
    """e_i for i in 1..n+1 (1-based, so basis_vector(n, n + 1) is N)."""
    if not 1 <= i <= n + 1:
        raise UsageError(f"Basis index {i} outside 1..{n + 1}")
    e = np.zeros(n + 1)
    e[i - 1] = 1.0
    return e


def meridian_point(t: npt.ArrayLike, phi: npt.ArrayLike = 0.0, n: int = 2) -> SpherePoint:
    """Point(s) at colatitude t and longitude phi (longitude in the (e1, e2) plane)."""
    t = np.asarray(t, dtype=float)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), t.shape)
    out = np.zeros(t.shape + (n + 1,))
    if n == 1:
        out[..., 0] = np.sin(t)
    else:
        out[..., 0] = np.sin(t) * np.cos(phi)
        out[..., 1] = np.sin(t) * np.sin(phi)
    out[..., -1] = np.cos(t)
    return out


def _check_same_dimension(x: SpherePoint, y: SpherePoint) -> None:
    if np.shape(x)[-1] != np.shape(y)[-1]:
        raise UsageError(
            f"Dimension mismatch: points live in R^{np.shape(x)[-1]} and R^{np.shape(y)[-1]}"
        )


def geodesic_distance(x: SpherePoint, y: SpherePoint) -> npt.NDArray[np.float64] | float:
    """arccos(x . y) with the dot product clamped to [-1, 1], in radians.

    Evaluated through the equivalent half-chord form 2 atan2(|x - y|, |x + y|),
    which keeps full relative precision near 0 and near pi where arccos does not.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dimension(x, y)
    chord = np.linalg.norm(x - y, axis=-1)
    cochord = np.linalg.norm(x + y, axis=-1)
    d = 2.0 * np.arctan2(chord, cochord)
    return float(d) if np.ndim(d) == 0 else d


def colatitude(x: SpherePoint) -> npt.NDArray[np.float64] | float:
    """d(x, N) for point(s) x."""
    x = np.asarray(x, dtype=float)
    horizontal = np.linalg.norm(x[..., :-1], axis=-1)
    t = np.arctan2(horizontal, x[..., -1])
    return float(t) if np.ndim(t) == 0 else t


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector `direction` at `base`; its length is the geodesic arclength."""

    base: SpherePoint
    direction: npt.NDArray[np.float64]

    def __post_init__(self):
        base = as_point(self.base)
        direction = np.asarray(self.direction, dtype=float)
        if base.ndim != 1 or direction.shape != base.shape:
            raise UsageError(
                f"Tangent vector shape {direction.shape} does not match base shape {base.shape}"
            )
        if abs(float(base @ direction)) > TANGENT_TOL:
            raise UsageError(f"Direction is not tangent at base (dot = {float(base @ direction):.3e})")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.direction))

    @classmethod
    def toward(cls, base: SpherePoint, target: SpherePoint, length: float) -> TangentVector:
        """Tangent vector at base pointing along the minimizing geodesic to target."""
        base = as_point(base)
        target = as_point(target)
        along = target - float(base @ target) * base
        size = np.linalg.norm(along)
        if size <= ANTIPODAL_TOL:
            raise AmbiguityError("No unique initial direction toward an equal or antipodal point")
        return cls(base=base, direction=length * along / size)


def exp_map(v: TangentVector) -> SpherePoint:
    """exp_base(v) = cos|v| base + sin|v| v/|v|, for |v| <= pi."""
    length = v.norm
    if length > np.pi + UNIT_TOL:
        raise UsageError(f"Tangent vector length {length:.6f} exceeds pi; geodesics here are minimizing")
    if length == 0.0:
        return v.base.copy()
    point = np.cos(length) * v.base + np.sin(length) * (v.direction / length)
    return point / np.linalg.norm(point)


def geodesic_point(x: SpherePoint, y: SpherePoint, s: float) -> SpherePoint:
    """The point at arclength s from x on the minimizing geodesic from x to y."""
    x = as_point(x)
    y = as_point(y)
    _check_same_dimension(x, y)
    d = geodesic_distance(x, y)
    if s < -UNIT_TOL or s > d + UNIT_TOL:
        raise UsageError(f"Arclength {s} outside [0, {d}]")
    if s <= 0.0:
        return x.copy()
    if s >= d:
        return y.copy()
    if d >= np.pi - ANTIPODAL_TOL:
        raise AmbiguityError("Geodesic between antipodal points is not unique")
    along = y - float(x @ y) * x
    u = along / np.linalg.norm(along)
    point = np.cos(s) * x + np.sin(s) * u
    return point / np.linalg.norm(point)


@dataclass(frozen=True, eq=False)
class Rotation:
    """An element of SO(n+1) acting on ambient coordinates."""

    matrix: npt.NDArray[np.float64]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise UsageError(f"Rotation matrix must be square, got shape {m.shape}")
        if not np.allclose(m.T @ m, np.eye(m.shape[0]), atol=ROTATION_TOL, rtol=0.0):
            raise UsageError("Rotation matrix is not orthogonal")
        if abs(np.linalg.det(m) - 1.0) > ROTATION_TOL:
            raise UsageError("Rotation matrix does not have determinant +1")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    @classmethod
    def about_pole(cls, n: int, theta: float, plane: tuple[int, int] = (0, 1)) -> Rotation:
        """Rotation by theta in the coordinate plane `plane` (0-based), fixing the height axis."""
        i, j = plane
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise UsageError(f"Plane {plane} must name two distinct horizontal axes of R^{n + 1}")
        m = np.eye(n + 1)
        c, s = np.cos(theta), np.sin(theta)
        m[i, i], m[i, j], m[j, i], m[j, j] = c, -s, s, c
        return cls(m)

    @classmethod
    def random(cls, n: int, seed: int) -> Rotation:
        """Haar-random element of SO(n+1), deterministic given seed."""
        return cls(special_ortho_group.rvs(n + 1, random_state=seed))

    def apply(self, x: SpherePoint) -> SpherePoint:
        x = np.asarray(x, dtype=float)
        _check_same_dimension(x, self.matrix[0])
        return x @ self.matrix.T

    def compose(self, other: Rotation) -> Rotation:
        """self after other."""
        return Rotation(self.matrix @ other.matrix)

    def inverse(self) -> Rotation:
        return Rotation(self.matrix.T)


def rotate_about_pole(x: SpherePoint, theta: float, plane: tuple[int, int] = (0, 1)) -> SpherePoint:
    """Rotate the first two coordinates (or `plane`) by theta; x_{n+1} is untouched.

    On the circle (n = 1) there is a single horizontal axis and the map is the identity.
    """
    x = np.asarray(x, dtype=float)
    if dimension(x) == 1:
        return x.copy()
    return Rotation.about_pole(dimension(x), theta, plane).apply(x)


def reflect_equator(x: SpherePoint) -> SpherePoint:
    """Flip the height coordinate x_{n+1}; fixes the equator, swaps hemispheres."""
    out = np.array(x, dtype=float, copy=True)
    out[..., -1] = -out[..., -1]
    return out


def chordal_distance(x: SpherePoint, y: SpherePoint) -> npt.NDArray[np.float64] | float:
    """Ambient Euclidean distance |x - y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dimension(x, y)
    d = np.linalg.norm(x - y, axis=-1)
    return float(d) if np.ndim(d) == 0 else d
