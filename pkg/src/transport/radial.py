"""Optimal transport between radial measures on S^n_+, reduced to monotone maps on colatitude.

For radial source and target the optimal map fixes longitudes and moves
colatitude by r = Q_target o F_source. Its Lipschitz constant on the
half-sphere is sup_t max(|r'(t)|, sin r(t) / sin t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt
from scipy.interpolate import CubicHermiteSpline

from src.errors import AmbiguityError, NumericalFailure, UsageError
from src.geometry.sphere import HALF_PI, UNIT_TOL, SpherePoint, as_point, meridian_point
from src.logger import Logger
from src.measures.profiles import RadialProfile, density_at, quantile
from src.transport.lipschitz import LipschitzReport, empirical_lipschitz

LOGGER = Logger("transport.radial")

MIN_LIPSCHITZ_NODES = 256
VALUE_TOL = 1e-12
EQUATOR_TOL = 1e-9
SCAN_STEP = 1e-3
SCAN_STEP_FRACTION = 0.1
HERMITE_SLOPE_LIMIT = 3.0
MIN_SCAN_PAIRS = 10_000


@dataclass(frozen=True, eq=False)
class RadialMap:
    """Colatitude map t -> r(t) tabulated on [0, pi/2].

    Interpolated linearly, or by cubic Hermite segments when nodal slopes are
    known; the slopes resolve the thin layers where r' changes within a cell.
    """

    grid: npt.NDArray[np.float64]
    values: npt.NDArray[np.float64]
    n: int = 2
    source: RadialProfile | None = None
    target: RadialProfile | None = None
    slopes: npt.NDArray[np.float64] | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise UsageError("grid and values must be equal-length 1D arrays with >= 2 nodes")
        if np.any(np.diff(grid) <= 0.0) or abs(grid[0]) > VALUE_TOL or abs(grid[-1] - HALF_PI) > VALUE_TOL:
            raise UsageError("grid must increase strictly from 0 to pi/2")
        if not np.all(np.isfinite(values)) or np.any(values < -VALUE_TOL) or np.any(values > HALF_PI + VALUE_TOL):
            raise UsageError("Map values must lie in [0, pi/2]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", np.clip(values, 0.0, HALF_PI))
        spline = None
        if self.slopes is not None:
            slopes = np.asarray(self.slopes, dtype=float)
            if slopes.shape != grid.shape or not np.all(np.isfinite(slopes)):
                raise UsageError("slopes must be finite and match the grid")
            object.__setattr__(self, "slopes", slopes)
            spline = CubicHermiteSpline(grid, self.values, slopes)
        object.__setattr__(self, "_spline", spline)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], nodes: int = 4097, n: int = 2) -> RadialMap:
        grid = np.linspace(0.0, HALF_PI, nodes)
        return cls(grid=grid, values=np.asarray(fn(grid), dtype=float), n=n)

    @classmethod
    def identity(cls, nodes: int = 4097, n: int = 2) -> RadialMap:
        return cls.from_function(lambda t: t, nodes=nodes, n=n)

    def evaluate(self, t: npt.ArrayLike) -> npt.NDArray[np.float64]:
        t = np.clip(np.asarray(t, dtype=float), 0.0, HALF_PI)
        if self._spline is None:
            return np.interp(t, self.grid, self.values)
        return np.clip(self._spline(t), 0.0, HALF_PI)

    def __call__(self, t: npt.ArrayLike):
        out = self.evaluate(t)
        return float(out) if np.ndim(out) == 0 else out

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0.0))


def monotone_map(source: RadialProfile, target: RadialProfile) -> RadialMap:
    """r = Q_target o F_source on the source grid.

    The source must have a strictly positive density on (0, pi/2) so that
    F_source is a bijection there.
    """
    if source.n != target.n:
        raise UsageError(f"Source dimension {source.n} differs from target dimension {target.n}")
    if source.support < HALF_PI or np.any(source.support_density[1:-1] <= 0.0):
        raise UsageError(f"Source {source.spec.describe()} needs positive density on (0, pi/2)")

    grid = source.grid.copy()
    values = np.maximum.accumulate(np.asarray(quantile(target, source.cdf)))
    slopes = _monotone_slopes(grid, values, _density_ratio(grid, np.clip(values, 0.0, HALF_PI), source, target))
    LOGGER.debug(f"Monotone map {source.spec.describe()} -> {target.spec.describe()}, r(pi/2)={values[-1]:.6g}")
    return RadialMap(grid=grid, values=values, n=source.n, source=source, target=target, slopes=slopes)


def apply_radial_map(radial: RadialMap, x: npt.ArrayLike) -> SpherePoint:
    """T(x) = sin r(t) u + cos r(t) N with t = d(x, N) and u the horizontal direction of x."""
    x = as_point(x)
    if x.shape[-1] != radial.n + 1:
        raise UsageError(f"Point dimension {x.shape[-1] - 1} differs from map dimension {radial.n}")
    if np.any(x[..., -1] < -UNIT_TOL):
        raise UsageError("Point lies outside the closed upper half-sphere")

    horizontal = x[..., :-1]
    h = np.linalg.norm(horizontal, axis=-1)
    t = np.arctan2(h, x[..., -1])
    r = radial.evaluate(t)

    at_pole = h == 0.0
    if np.any(at_pole & (r > VALUE_TOL)):
        raise AmbiguityError("Map moves the pole (r(0) > 0); the image direction is undefined")

    u = horizontal / np.where(at_pole, 1.0, h)[..., None]
    out = np.concatenate([np.sin(r)[..., None] * u, np.cos(r)[..., None]], axis=-1)
    out[at_pole] = 0.0
    out[at_pole, -1] = 1.0
    return out


def _density_ratio(
    t: npt.NDArray[np.float64],
    r: npt.NDArray[np.float64],
    source: RadialProfile,
    target: RadialProfile,
) -> npt.NDArray[np.float64]:
    """r'(t) = g_s(t) / g_t(r(t)) where the ratio is finite, one-sided differences elsewhere."""
    slope = np.abs(np.gradient(r, t))
    g_source = np.asarray(density_at(source, t))
    g_target = np.asarray(density_at(target, r))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = g_source / g_target
    usable = (t > 0.0) & (g_target > 0.0) & np.isfinite(ratio)
    return np.where(usable, ratio, slope)


def _monotone_slopes(
    t: npt.NDArray[np.float64],
    r: npt.NDArray[np.float64],
    slopes: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    """Clamp nodal slopes to 3x the adjacent secants so the Hermite interpolant stays monotone."""
    secant = np.diff(r) / np.diff(t)
    adjacent = np.minimum(np.append(secant[:1], secant), np.append(secant, secant[-1:]))
    return np.minimum(slopes, HERMITE_SLOPE_LIMIT * adjacent)


def _radial_derivative(radial: RadialMap) -> npt.NDArray[np.float64]:
    """|r'(t)|: density ratio where defined, finite differences elsewhere.

    At the pole the ratio is 0/0 and at the equator the target density may
    underflow; both fall back to one-sided differences.
    """
    t, r = radial.grid, radial.values
    if radial.source is None or radial.target is None:
        return np.abs(np.gradient(r, t))

    g_source = np.asarray(density_at(radial.source, t))
    g_target = np.asarray(density_at(radial.target, r))
    interior = (t > 0.0) & (t < HALF_PI)
    vanishing = interior & (g_target <= 0.0) & (g_source > 0.0)
    if np.any(vanishing):
        location = float(t[np.argmax(vanishing)])
        raise NumericalFailure(f"Target density vanishes at r({location:.6g}) inside the support", location)
    return _density_ratio(t, r, radial.source, radial.target)


def radial_lipschitz(radial: RadialMap) -> LipschitzReport:
    """Lip(T) = sup_t max(|r'(t)|, sin r(t) / sin t), with the maximizing colatitude."""
    t, r = radial.grid, radial.values
    if t.size < MIN_LIPSCHITZ_NODES:
        raise UsageError(f"Need >= {MIN_LIPSCHITZ_NODES} grid nodes, got {t.size}")

    radial_stretch = _radial_derivative(radial)
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.sin(r) / np.sin(t)
    # sin r / sin t -> r'(0) at the pole
    tangential = np.where(t > 0.0, tangential, radial_stretch)
    stretch = np.maximum(radial_stretch, tangential)

    bad = ~np.isfinite(stretch)
    if np.any(bad):
        location = float(t[np.argmax(bad)])
        raise NumericalFailure(f"Non-finite stretch at t={location:.6g}", location)

    k = int(np.argmax(stretch))
    neighbor = k + 1 if k + 1 < t.size else k - 1
    witness = (meridian_point(t[k], n=radial.n), meridian_point(t[neighbor], n=radial.n))
    return LipschitzReport(lip_formula=float(stretch[k]), witness=witness, argmax_location=float(t[k]))


def equator_preserved(radial: RadialMap, tol: float = EQUATOR_TOL) -> bool:
    """r(0) = 0 and r(pi/2) = pi/2."""
    return abs(radial.values[0]) <= tol and abs(radial.values[-1] - HALF_PI) <= tol


def scan_radial_map(
    radial: RadialMap,
    count: int = MIN_SCAN_PAIRS,
    seed: int = 0,
    step: float | None = None,
) -> LipschitzReport:
    """Cross-check radial_lipschitz by empirical ratios over close point pairs.

    Half the pairs lie on meridians at colatitudes t and t + step, the other
    half on parallels at longitudes phi and phi + step. The default step is a
    tenth of the table spacing (at most SCAN_STEP), so difference quotients
    resolve the slope inside a single cell.
    """
    if count < 2:
        raise UsageError(f"count must be >= 2, got {count}")
    if step is None:
        step = min(SCAN_STEP, SCAN_STEP_FRACTION * float(np.min(np.diff(radial.grid))))
    if not 0.0 < step < HALF_PI:
        raise UsageError(f"step must lie in (0, pi/2), got {step}")
    rng = np.random.default_rng(seed)
    half = count // 2
    rest = count - half

    t_meridian = np.linspace(0.0, HALF_PI - step, half)
    phi_meridian = rng.uniform(0.0, 2.0 * np.pi, half)
    t_parallel = np.linspace(step, HALF_PI, rest)
    phi_parallel = rng.uniform(0.0, 2.0 * np.pi, rest)

    first = np.concatenate([
        meridian_point(t_meridian, phi_meridian, radial.n),
        meridian_point(t_parallel, phi_parallel, radial.n),
    ])
    second = np.concatenate([
        meridian_point(t_meridian + step, phi_meridian, radial.n),
        meridian_point(t_parallel, phi_parallel + step, radial.n),
    ])
    inputs = np.empty((2 * count, radial.n + 1))
    inputs[0::2], inputs[1::2] = first, second
    outputs = apply_radial_map(radial, inputs)

    index = np.arange(0, 2 * count, 2)
    empirical = empirical_lipschitz(inputs, outputs, pairs=(index, index + 1))
    formula = radial_lipschitz(radial)
    LOGGER.info(f"Scan over {count} pairs: empirical {empirical.lip_empirical:.6g}, formula {formula.lip_formula:.6g}")
    return LipschitzReport(
        lip_formula=formula.lip_formula,
        lip_empirical=empirical.lip_empirical,
        witness=empirical.witness,
        argmax_location=formula.argmax_location,
        witness_indices=empirical.witness_indices,
    )
