"""Experiment drivers: each builds measures, runs a solver, and returns records.

Drivers never judge their own output; the pass/fail assertions live in
src.experiments.checks so the same records can be re-checked with other
tolerances.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betainc

from src.errors import UsageError
from src.experiments.records import (
    BlowupRecord,
    CapRecord,
    ConcentrationRecord,
    ConfinementReport,
    CrosscheckReport,
    MetricEquivalenceReport,
    RigidityVerdict,
    SphereConcentrationRecord,
)
from src.experiments.sweep import parallel_map
from src.geometry.sampling import sample_uniform_sphere
from src.geometry.sphere import HALF_PI, chordal_distance, geodesic_distance, meridian_point
from src.logger import Logger
from src.measures.discretize import discretize_on_sphere, symmetrize
from src.measures.profiles import (
    DEFAULT_GRID_SIZE,
    Potential,
    RadialDensitySpec,
    build_profile,
    cdf,
    mean_radial_distance,
    quantile,
)
from src.transport.discrete import barycentric_map, sinkhorn
from src.transport.lipschitz import LipschitzReport, empirical_lipschitz
from src.transport.radial import RadialMap, apply_radial_map, monotone_map, radial_lipschitz

LOGGER = Logger("experiments.drivers")

DEFAULT_EPSILONS = tuple(np.geomspace(1.0, 1e-4, 13).tolist())
MIN_RIGIDITY_NODES = 128
STEP_TOL = 1e-12
SURJECTIVITY_SLACK = 0.5
MAX_CROSSCHECK_COUNT = 4096
MIN_METRIC_COUNT = 100
HALF_ANGLE_MIN_GAP = 1e-6


def _uniform_profile(n: int, grid_size: int):
    return build_profile(RadialDensitySpec.uniform(n), grid_size)


# --- counterexample and caps ---

def run_counterexample(beta: float = 1.0, grid_size: int = DEFAULT_GRID_SIZE, n: int = 2) -> LipschitzReport:
    """Lipschitz constant of the transport from sigma_+ to nu ∝ exp(-beta d^2(x, N))."""
    target = build_profile(RadialDensitySpec.gaussian_like(beta, n), grid_size)
    radial = monotone_map(_uniform_profile(n, grid_size), target)
    report = radial_lipschitz(radial)
    LOGGER.info(f"counterexample beta={beta:g}: Lip={report.lip_formula:.8g} at t={report.argmax_location:.6g}")
    return report


def run_cap_restriction(
    beta: float,
    radii: list[float],
    grid_size: int = DEFAULT_GRID_SIZE,
    n: int = 2,
) -> list[CapRecord]:
    """Transport sigma_+ onto the gaussian_like measure restricted to B(N, radius), per radius."""
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0.0 or r > HALF_PI + 1e-12 for r in radii):
        raise UsageError("radii must lie in (0, pi/2]")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise UsageError("radii must be strictly increasing")

    source = _uniform_profile(n, grid_size)
    base = RadialDensitySpec.gaussian_like(beta, n)

    def one(radius: float) -> CapRecord:
        radial = monotone_map(source, build_profile(RadialDensitySpec.cap(radius, base), grid_size))
        report = radial_lipschitz(radial)
        LOGGER.info(f"cap rho={radius:.6g}: Lip={report.lip_formula:.6g}")
        return CapRecord(
            radius=radius,
            lip_formula=report.lip_formula,
            argmax_location=report.argmax_location,
            endpoint=float(radial.values[-1]),
        )

    return parallel_map(one, radii)


# --- blow-up ---

def run_blowup(
    potential: Potential | str = Potential.QUADRATIC,
    epsilons: list[float] = DEFAULT_EPSILONS,
    grid_size: int = DEFAULT_GRID_SIZE,
    n: int = 2,
) -> list[BlowupRecord]:
    """Lower bound (pi/2 - r_eps) / (pi/2 - R_eps) against Lip(T_eps) for nu_eps ∝ exp(-V/eps).

    r_eps is the radius of the ball around N carrying mass 1 - sqrt(m_eps),
    m_eps the mean distance to N, and R_eps the largest colatitude mapped
    into that ball.
    """
    epsilons = [float(e) for e in epsilons]
    if not epsilons or any(e <= 0.0 for e in epsilons):
        raise UsageError("epsilons must be positive")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise UsageError("epsilons must be strictly decreasing")

    source = _uniform_profile(n, grid_size)
    potential = Potential(potential)

    def one(epsilon: float) -> BlowupRecord:
        target = build_profile(RadialDensitySpec.tempered(potential, epsilon, n), grid_size)
        m = mean_radial_distance(target)
        mass = 1.0 - np.sqrt(m)
        if not 0.0 <= mass <= 1.0:
            LOGGER.warning(f"blowup eps={epsilon:g}: 1 - sqrt(m) = {mass:.4g} outside [0, 1], flagged")
            return BlowupRecord(epsilon=epsilon, m=m, flagged=True)

        r_eps = quantile(target, mass)
        radial = monotone_map(source, target)
        R_eps = float(radial.grid[radial.values <= r_eps].max())
        lower_bound = (HALF_PI - r_eps) / (HALF_PI - R_eps)
        lip = radial_lipschitz(radial).lip_formula
        LOGGER.info(f"blowup eps={epsilon:g}: bound={lower_bound:.6g}, Lip={lip:.6g}")
        return BlowupRecord(
            epsilon=epsilon, m=m, r_eps=r_eps, R_eps=R_eps, lower_bound=lower_bound, lip_formula=lip,
        )

    return parallel_map(one, epsilons)


# --- concentration ---

def run_concentration_audit(
    target: RadialDensitySpec,
    r_grid: list[float],
    grid_size: int = DEFAULT_GRID_SIZE,
) -> list[ConcentrationRecord]:
    """Mass of the target support D = B(N, rho) away from its boundary against 2 exp(-(n-1) r^2 / (2 L^2)).

    L is the Lipschitz constant of the radial transport from sigma_+; grid
    entries with r >= pi L / 2 are outside the bound's range and dropped.
    """
    profile = build_profile(target, grid_size)
    radial = monotone_map(_uniform_profile(target.n, grid_size), profile)
    lip = radial_lipschitz(radial).lip_formula
    rho = profile.support

    records = []
    for r in (float(x) for x in r_grid):
        if r <= 0.0:
            raise UsageError(f"r must be > 0, got {r}")
        if r >= np.pi * lip / 2.0:
            LOGGER.warning(f"concentration: r={r:.6g} >= pi L / 2 = {np.pi * lip / 2.0:.6g}, dropped")
            continue
        lhs = cdf(profile, max(rho - r, 0.0))
        rhs = 2.0 * np.exp(-(target.n - 1) * r * r / (2.0 * lip * lip))
        records.append(ConcentrationRecord(r=r, lhs=lhs, rhs=float(rhs), lip=lip))
    LOGGER.info(f"concentration {target.describe()}: L={lip:.6g}, {len(records)} of {len(r_grid)} radii kept")
    return records


def run_sphere_concentration(
    n: int = 2,
    t_grid: list[float] | None = None,
    count: int = 100_000,
    seed: int = 0,
) -> list[SphereConcentrationRecord]:
    """Monte Carlo sigma(S^n minus A^t) for A the lower hemisphere, against exp(-(n-1) t^2 / 2).

    A point lies outside A^t iff its height is at least sin t. The closed
    form is the upper tail of the height law, (1 - sin t) / 2 on S^2.
    """
    t_grid = np.linspace(0.05, HALF_PI, 32) if t_grid is None else np.asarray(t_grid, dtype=float)
    heights = sample_uniform_sphere(n, count, seed)[:, -1]

    records = []
    for t in t_grid:
        s = np.sin(t)
        empirical = float(np.mean(heights >= s))
        closed_form = float(0.5 * betainc(n / 2.0, 0.5, 1.0 - s * s))
        bound = float(np.exp(-(n - 1) * t * t / 2.0))
        records.append(SphereConcentrationRecord(t=float(t), empirical=empirical, closed_form=closed_form, bound=bound))
    return records


# --- rigidity ---

def run_rigidity_1d(candidate: RadialMap, tol: float | None = None, step_tol: float = STEP_TOL) -> RigidityVerdict:
    """Check 1-Lipschitz and surjectivity of r on [0, pi/2], then classify it.

    Surjectivity allows a slack of half a grid spacing h, which keeps every
    admissible map within 1.5h of the identity or the reflection; the
    classification tolerance defaults to 3h.
    """
    t, r = candidate.grid, candidate.values
    if t.size < MIN_RIGIDITY_NODES:
        raise UsageError(f"Need >= {MIN_RIGIDITY_NODES} nodes, got {t.size}")
    h = float(np.max(np.diff(t)))
    tol = 3.0 * h if tol is None else tol

    excess = np.abs(np.diff(r)) - np.diff(t)
    k = int(np.argmax(excess))
    if excess[k] > step_tol:
        return RigidityVerdict(
            classification="rejected",
            deviation=float(excess[k]),
            violation_witness=(float(t[k]), float(t[k + 1])),
            reason="not 1-Lipschitz",
        )

    lo, hi = int(np.argmin(r)), int(np.argmax(r))
    slack = SURJECTIVITY_SLACK * h
    if r[lo] > slack or r[hi] < HALF_PI - slack:
        return RigidityVerdict(
            classification="rejected",
            deviation=float(max(r[lo], HALF_PI - r[hi])),
            violation_witness=(float(t[lo]), float(t[hi])),
            reason="not surjective",
        )

    to_identity = float(np.max(np.abs(r - t)))
    to_reflection = float(np.max(np.abs(r - (HALF_PI - t))))
    classification, deviation = (
        ("identity", to_identity) if to_identity <= to_reflection else ("reflection", to_reflection)
    )
    if deviation > tol:
        k = int(np.argmax(np.abs(r - t) if classification == "identity" else np.abs(r - (HALF_PI - t))))
        return RigidityVerdict(
            classification="rejected",
            deviation=deviation,
            violation_witness=(float(t[k]), float(r[k])),
            reason="unclassified",
        )
    return RigidityVerdict(classification=classification, deviation=deviation)


RIGIDITY_FAMILIES = ("identity", "reflection", "free", "folded", "tent", "plateau", "steep")
_FAMILY_WEIGHTS = (0.2, 0.2, 0.1, 0.15, 0.1, 0.15, 0.1)


def _mirrored(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return HALF_PI - values if rng.random() < 0.5 else values


def _family_values(family: str, grid: np.ndarray, h: float, rng: np.random.Generator) -> np.ndarray:
    dt = np.diff(grid)
    if family == "free":
        slopes = rng.uniform(-1.0, 1.0, grid.size - 1)
        return rng.uniform(0.0, HALF_PI) + np.concatenate([[0.0], np.cumsum(slopes * dt)])
    if family in ("identity", "reflection"):
        # slope 1 - deficit per cell, total deficit at most one cell
        deficit = rng.dirichlet(np.ones(grid.size - 1)) * rng.uniform(0.0, 1.0)
        offset = rng.uniform(0.0, float(np.sum(deficit * dt)))
        walk = offset + np.concatenate([[0.0], np.cumsum((1.0 - deficit) * dt)])
        return walk if family == "identity" else HALF_PI - walk
    if family == "folded":
        # |t - a| + s folded back below pi/2 - e
        a = rng.uniform(0.0, 1.5 * h)
        s, e = rng.uniform(0.0, h, size=2)
        ceiling = HALF_PI - e
        rising = np.abs(grid - a) + s
        return _mirrored(np.minimum(rising, 2.0 * ceiling - rising), rng)
    if family == "tent":
        # slope +1 up to a peak short of pi/2 by up to 3h, then slope -1
        peak = HALF_PI - rng.uniform(0.0, 3.0 * h)
        offset = rng.uniform(0.0, 2.0 * h)
        return _mirrored(offset + peak - np.abs(grid - peak), rng)
    if family == "plateau":
        # slope 1 with one flat stretch of up to 3h
        start = rng.uniform(0.0, 2.0 * h)
        at = rng.uniform(0.0, HALF_PI)
        width = rng.uniform(0.0, 3.0 * h)
        return _mirrored(start + grid - np.clip(grid - at, 0.0, width), rng)
    if family == "steep":
        # slope 1 except one interior cell of slope up to 2
        slopes = np.ones(grid.size - 1)
        slopes[rng.integers(1, slopes.size - 1)] += rng.uniform(1e-3, 1.0)
        start = rng.uniform(0.0, 0.5 * h)
        return _mirrored(start + np.concatenate([[0.0], np.cumsum(slopes * dt)]), rng)
    raise UsageError(f"Unknown rigidity family {family!r}; expected one of {RIGIDITY_FAMILIES}")


def rigidity_candidates(
    nodes: int = 257,
    count: int = 10_000,
    seed: int = 0,
    families: tuple[str, ...] = RIGIDITY_FAMILIES,
) -> list[RadialMap]:
    """Random 1-Lipschitz candidate maps on a uniform grid, clipped into [0, pi/2].

    identity/reflection are perturbed copies of the two rigid maps; free are
    walks with slopes uniform in [-1, 1]. folded, tent and plateau sit on the
    edge of the surjectivity slack: slope +-1 maps folded near both ends,
    tents whose peak falls short of the equator, and slope-1 maps with one
    short flat stretch. steep maps break the 1-Lipschitz bound in one cell.
    Families are drawn with fixed weights, renormalized over `families`.
    """
    unknown = set(families) - set(RIGIDITY_FAMILIES)
    if not families or unknown:
        raise UsageError(f"Unknown rigidity families {sorted(unknown)}; expected a subset of {RIGIDITY_FAMILIES}")
    weights = np.array([_FAMILY_WEIGHTS[RIGIDITY_FAMILIES.index(f)] for f in families])
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, HALF_PI, nodes)
    h = float(np.max(np.diff(grid)))
    candidates = []
    for index in rng.choice(len(families), size=count, p=weights / weights.sum()):
        values = np.clip(_family_values(families[index], grid, h, rng), 0.0, HALF_PI)
        candidates.append(RadialMap(grid=grid, values=values))
    LOGGER.debug(f"Generated {count} rigidity candidates on {nodes} nodes (h={h:.3g})")
    return candidates


# --- metric equivalence ---

def run_metric_equivalence(count: int = 100_000, seed: int = 0) -> MetricEquivalenceReport:
    """Order equivalence of geodesic and chordal distances on S^2, and the half-angle map on S^1_+.

    The half-angle map sends the point at angle theta from N to the point at
    angle theta / 2; it halves geodesic distances but not chords.
    """
    if count < MIN_METRIC_COUNT:
        raise UsageError(f"count must be >= {MIN_METRIC_COUNT}, got {count}")
    a, b, c, d = np.split(sample_uniform_sphere(2, 4 * count, seed), 4)
    geodesic_order = geodesic_distance(a, b) <= geodesic_distance(c, d)
    chordal_order = chordal_distance(a, b) <= chordal_distance(c, d)
    agreements = int(np.sum(geodesic_order == chordal_order))

    def u(theta):
        return meridian_point(theta, n=1)

    image_chord = float(chordal_distance(u(np.pi / 4), u(-np.pi / 4)))
    source_chord = float(chordal_distance(u(np.pi / 2), u(-np.pi / 2)))

    rng = np.random.default_rng(seed + 1)
    theta = rng.uniform(-HALF_PI, HALF_PI, (count, 2))
    theta = theta[np.abs(theta[:, 0] - theta[:, 1]) >= HALF_ANGLE_MIN_GAP]
    x, y = u(theta[:, 0]), u(theta[:, 1])
    tx, ty = u(theta[:, 0] / 2.0), u(theta[:, 1] / 2.0)
    geodesic_ratio = geodesic_distance(tx, ty) / geodesic_distance(x, y)
    euclidean_ratio = chordal_distance(tx, ty) / chordal_distance(x, y)

    report = MetricEquivalenceReport(
        count=count,
        agreements=agreements,
        violations=count - agreements,
        half_angle_image_chord=image_chord,
        half_angle_source_chord=source_chord,
        geodesic_ratio_min=float(geodesic_ratio.min()),
        geodesic_ratio_max=float(geodesic_ratio.max()),
        euclidean_endpoint_ratio=image_chord / source_chord,
        euclidean_ratio_max=float(euclidean_ratio.max()),
    )
    LOGGER.info(f"metric equivalence: {report.violations} order violations in {count} quadruples")
    return report


# --- discrete cross-checks ---

def run_sinkhorn_crosscheck(
    beta: float = 1.0,
    count: int = 2048,
    reg_final: float = 1e-3,
    seed: int = 0,
    tol: float = 1e-4,
    max_iter: int = 5000,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> CrosscheckReport:
    """Barycentric map of an entropic plan from sigma_+ to the gaussian_like target vs the radial map.

    Both measures are equal-mass lattices sharing longitudes. Their radial
    pairing is supported on the graph of the optimal map, hence optimal for
    the discrete problem; the solver has to recover it from the cost matrix,
    and the barycentric map then differs from the radial map by the entropic
    blur only. `tol` bounds the L1 row violation, which the barycenters (row
    normalized) barely feel.
    """
    if count > MAX_CROSSCHECK_COUNT:
        raise UsageError(f"count must be <= {MAX_CROSSCHECK_COUNT}, got {count}")
    source_profile = _uniform_profile(2, grid_size)
    target_profile = build_profile(RadialDensitySpec.gaussian_like(beta, 2), grid_size)
    source = discretize_on_sphere(source_profile, count, scheme="equal_mass", seed=seed)
    target = discretize_on_sphere(target_profile, count, scheme="equal_mass", seed=seed)

    plan, potentials = sinkhorn(source, target, reg_final, tol=tol, max_iter=max_iter)
    mapped = barycentric_map(plan)

    radial = monotone_map(source_profile, target_profile)
    expected = apply_radial_map(radial, source.points)
    deviation = np.asarray(geodesic_distance(mapped, expected))
    empirical = empirical_lipschitz(source.points, mapped)

    report = CrosscheckReport(
        beta=beta,
        count=count,
        reg_final=reg_final,
        max_deviation=float(deviation.max()),
        mean_deviation=float(deviation.mean()),
        lip_empirical=empirical.lip_empirical,
        lip_formula=radial_lipschitz(radial).lip_formula,
        iterations=potentials.iterations,
        violation=potentials.violation,
        witness=[w.tolist() for w in empirical.witness],
    )
    LOGGER.info(
        f"crosscheck beta={beta:g} count={count}: max deviation {report.max_deviation:.4g} rad, "
        f"empirical Lip {report.lip_empirical:.4g}"
    )
    return report


def run_hemisphere_confinement(
    beta: float = 1.0,
    count: int = 1024,
    reg_final: float = 1e-2,
    seed: int = 0,
    tol: float = 1e-4,
    max_iter: int = 5000,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> ConfinementReport:
    """Transport sigma on S^2 onto (nu + nu_-) / 2 and measure the plan mass crossing the equator.

    For the unregularized problem the optimal plan keeps each hemisphere on
    its own side; the entropic plan leaks a blur-sized amount.
    """
    half = count // 2
    source = symmetrize(discretize_on_sphere(_uniform_profile(2, grid_size), half, seed=seed))
    target_profile = build_profile(RadialDensitySpec.gaussian_like(beta, 2), grid_size)
    target = symmetrize(discretize_on_sphere(target_profile, half, seed=seed))

    plan, potentials = sinkhorn(source, target, reg_final, tol=tol, max_iter=max_iter)
    upper_source = source.points[:, -1] > 0.0
    upper_target = target.points[:, -1] > 0.0
    crossing = upper_source[:, None] != upper_target[None, :]
    crossing_mass = float(np.sum(plan.coupling[crossing]))

    LOGGER.info(f"confinement beta={beta:g} count={source.size}: crossing mass {crossing_mass:.3e}")
    return ConfinementReport(
        beta=beta,
        count=source.size,
        reg_final=reg_final,
        crossing_mass=crossing_mass,
        iterations=potentials.iterations,
    )


def concentration_targets(beta: float = 1.0, n: int = 2) -> list[RadialDensitySpec]:
    """Default cap targets for the concentration audit: sigma_+ and gaussian_like caps."""
    base = RadialDensitySpec.gaussian_like(beta, n)
    return [
        RadialDensitySpec.uniform(n),
        RadialDensitySpec.cap(HALF_PI, RadialDensitySpec.uniform(n)),
        RadialDensitySpec.cap(np.pi / 3, base),
        RadialDensitySpec.cap(np.pi / 4, base),
    ]

