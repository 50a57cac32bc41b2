"""Rotationally invariant measures on S^n_+ and their tabulated radial laws.

A radial measure d nu = f(d(x, N)) d sigma_+ has colatitude law
g(t) ∝ f(t) sin^(n-1)(t) on [0, pi/2]. Profiles tabulate g and its CDF on a
uniform grid with composite Simpson quadrature; all later 1D transport work
(monotone rearrangement, Lipschitz evaluation, blow-up bounds) reads them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from scipy.integrate import cumulative_simpson, simpson

from src.errors import NumericalFailure, UsageError
from src.geometry.sphere import HALF_PI
from src.logger import Logger

LOGGER = Logger("measures.profiles")

DEFAULT_GRID_SIZE = 4096
MIN_GRID_SIZE = 64
RANGE_TOL = 1e-12


class Family(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN_LIKE = "gaussian_like"
    TEMPERED = "tempered"
    CAP_RESTRICTION = "cap_restriction"


class Potential(str, Enum):
    QUADRATIC = "quadratic"  # V(t) = t^2
    LINEAR = "linear"        # V(t) = t

    def evaluate(self, t: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        if self is Potential.QUADRATIC:
            return t * t
        return t


@dataclass(frozen=True)
class RadialDensitySpec:
    """Unnormalized radial density f(t), t = d(x, N), of a measure on S^n_+."""

    n: int = 2
    family: Family = Family.UNIFORM
    beta: float | None = None
    potential: Potential | None = None
    epsilon: float | None = None
    rho: float | None = None
    base: RadialDensitySpec | None = None

    def __post_init__(self):
        if self.n < 2:
            raise UsageError(f"Radial measures need n >= 2, got n={self.n}")
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if family is Family.GAUSSIAN_LIKE:
            if self.beta is None or not self.beta > 0:
                raise UsageError(f"gaussian_like needs stiffness beta > 0, got {self.beta}")
        elif family is Family.TEMPERED:
            if self.potential is None:
                raise UsageError("tempered needs a potential (quadratic or linear)")
            object.__setattr__(self, "potential", Potential(self.potential))
            if self.epsilon is None or not self.epsilon > 0:
                raise UsageError(f"tempered needs temperature epsilon > 0, got {self.epsilon}")
        elif family is Family.CAP_RESTRICTION:
            if self.rho is None or not 0 < self.rho <= HALF_PI + RANGE_TOL:
                raise UsageError(f"cap radius rho must lie in (0, pi/2], got {self.rho}")
            if self.base is None:
                raise UsageError("cap_restriction needs a base family")
            if self.base.family is Family.CAP_RESTRICTION:
                raise UsageError("cap_restriction of a cap is not supported; pass the smaller radius")
            if self.base.n != self.n:
                raise UsageError(f"Cap dimension {self.n} differs from base dimension {self.base.n}")
            object.__setattr__(self, "rho", min(float(self.rho), HALF_PI))

    # --- constructors ---

    @classmethod
    def uniform(cls, n: int = 2) -> RadialDensitySpec:
        return cls(n=n, family=Family.UNIFORM)

    @classmethod
    def gaussian_like(cls, beta: float, n: int = 2) -> RadialDensitySpec:
        return cls(n=n, family=Family.GAUSSIAN_LIKE, beta=beta)

    @classmethod
    def tempered(cls, potential: Potential | str, epsilon: float, n: int = 2) -> RadialDensitySpec:
        return cls(n=n, family=Family.TEMPERED, potential=Potential(potential), epsilon=epsilon)

    @classmethod
    def cap(cls, rho: float, base: RadialDensitySpec) -> RadialDensitySpec:
        return cls(n=base.n, family=Family.CAP_RESTRICTION, rho=rho, base=base)

    # --- evaluation ---

    @property
    def support(self) -> float:
        """Right end of the colatitude support."""
        return self.rho if self.family is Family.CAP_RESTRICTION else HALF_PI

    def log_weight(self, t: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """log f(t); -inf outside the support."""
        t = np.asarray(t, dtype=float)
        if self.family is Family.UNIFORM:
            return np.zeros_like(t)
        if self.family is Family.GAUSSIAN_LIKE:
            return -self.beta * t * t
        if self.family is Family.TEMPERED:
            return -self.potential.evaluate(t) / self.epsilon
        inside = t <= self.rho + RANGE_TOL
        return np.where(inside, self.base.log_weight(t), -np.inf)

    def describe(self) -> str:
        if self.family is Family.GAUSSIAN_LIKE:
            return f"gaussian_like(beta={self.beta:g}, n={self.n})"
        if self.family is Family.TEMPERED:
            return f"tempered({self.potential.value}, eps={self.epsilon:g}, n={self.n})"
        if self.family is Family.CAP_RESTRICTION:
            return f"cap(rho={self.rho:.6g}, {self.base.describe()})"
        return f"uniform(n={self.n})"


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Normalized colatitude density and CDF tabulated on a grid ending at pi/2.

    For cap restrictions the grid is uniform on [0, rho] and carries one
    extra node at pi/2 where the density is 0 and the CDF is 1.
    """

    spec: RadialDensitySpec
    grid: npt.NDArray[np.float64]
    density: npt.NDArray[np.float64]
    cdf: npt.NDArray[np.float64]
    support: float
    support_nodes: int

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def support_grid(self) -> npt.NDArray[np.float64]:
        return self.grid[: self.support_nodes]

    @property
    def support_density(self) -> npt.NDArray[np.float64]:
        return self.density[: self.support_nodes]

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


def build_profile(spec: RadialDensitySpec, grid_size: int = DEFAULT_GRID_SIZE) -> RadialProfile:
    """Tabulate g(t) ∝ f(t) sin^(n-1)(t) with grid_size intervals and normalize it."""
    if grid_size < MIN_GRID_SIZE:
        raise UsageError(f"grid_size must be >= {MIN_GRID_SIZE}, got {grid_size}")

    support = spec.support
    nodes = np.linspace(0.0, support, grid_size + 1)
    with np.errstate(divide="ignore"):
        log_g = spec.log_weight(nodes) + (spec.n - 1) * np.log(np.sin(nodes))

    finite = np.isfinite(log_g)
    if np.any(np.isnan(log_g)) or np.any(log_g == np.inf) or not np.any(finite):
        raise NumericalFailure(f"Non-finite density values for {spec.describe()}")

    # Shift in log space so strongly tempered families do not underflow wholesale.
    unnormalized = np.exp(log_g - np.max(log_g[finite]))
    mass = simpson(unnormalized, x=nodes)
    if not np.isfinite(mass) or mass <= 0.0:
        raise NumericalFailure(f"Density of {spec.describe()} has non-positive mass {mass}")
    density = unnormalized / mass

    cumulative = cumulative_simpson(density, x=nodes, initial=0.0)
    cumulative = np.maximum.accumulate(np.clip(cumulative, 0.0, None))
    cumulative = cumulative / cumulative[-1]

    support_nodes = nodes.size
    if support < HALF_PI:
        nodes = np.append(nodes, HALF_PI)
        density = np.append(density, 0.0)
        cumulative = np.append(cumulative, 1.0)

    LOGGER.debug(f"Built profile {spec.describe()} on {support_nodes} nodes (mass {mass:.6e})")
    return RadialProfile(
        spec=spec,
        grid=nodes,
        density=density,
        cdf=cumulative,
        support=float(support),
        support_nodes=support_nodes,
    )


def _check_colatitude(t: npt.ArrayLike) -> npt.NDArray[np.float64]:
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < -RANGE_TOL) or np.any(t > HALF_PI + RANGE_TOL):
        raise UsageError("Colatitude outside [0, pi/2]")
    return np.clip(t, 0.0, HALF_PI)


def _scalar_or_array(x: npt.NDArray[np.float64]):
    return float(x) if np.ndim(x) == 0 else x


def cdf(profile: RadialProfile, t: npt.ArrayLike):
    """F(t) by piecewise-linear interpolation of the tabulated CDF."""
    t = _check_colatitude(t)
    return _scalar_or_array(np.interp(t, profile.grid, profile.cdf))


def density_at(profile: RadialProfile, t: npt.ArrayLike):
    """g(t) by linear interpolation on the support; 0 beyond it."""
    t = _check_colatitude(t)
    values = np.interp(t, profile.support_grid, profile.support_density, right=0.0)
    return _scalar_or_array(values)


def quantile(profile: RadialProfile, p: npt.ArrayLike):
    """inf{t : F(t) >= p}, inverting the piecewise-linear CDF.

    The bracketing interval is located by bisection over the table
    (searchsorted); p >= 1 returns the sup of the support.
    """
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < -RANGE_TOL) or np.any(p > 1.0 + RANGE_TOL):
        raise UsageError("Probability outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)

    table, nodes = profile.cdf, profile.grid
    idx = np.clip(np.searchsorted(table, p, side="left"), 1, table.size - 1)
    lo, hi = table[idx - 1], table[idx]
    span = hi - lo
    frac = np.where(span > 0.0, (p - lo) / np.where(span > 0.0, span, 1.0), 1.0)
    t = nodes[idx - 1] + np.clip(frac, 0.0, 1.0) * (nodes[idx] - nodes[idx - 1])

    t = np.where(p <= 0.0, 0.0, t)
    t = np.where(p >= 1.0, profile.support, t)
    return _scalar_or_array(t)


def mean_radial_distance(profile: RadialProfile) -> float:
    """m = ∫ d(x, N) d nu = ∫ t g(t) dt."""
    t = profile.support_grid
    return float(simpson(t * profile.support_density, x=t))
