"""Pass/fail assertions over driver output.

Each function takes records from src.experiments.drivers and returns a list
of Assertion entries carrying the tolerance used and the observed value, so
a report can be audited without re-running the experiment.
"""

import numpy as np
from scipy.integrate import quad

from src.experiments.records import (
    Assertion,
    BlowupRecord,
    CapRecord,
    ConcentrationRecord,
    ConfinementReport,
    CrosscheckReport,
    MetricEquivalenceReport,
    RigidityVerdict,
    SphereConcentrationRecord,
)
from src.geometry.sphere import HALF_PI
from src.transport.lipschitz import LipschitzReport

BLOWUP_MARGIN = 1e-6
CONCENTRATION_MARGIN = 1e-9
ORACLE_RTOL = 1e-4
CHORD_TOL = 1e-12
RATIO_TOL = 1e-9
ENDPOINT_TOL = 1e-9
DEVIATION_TOL = 0.05
CONFINEMENT_TOL = 0.05
BLOWUP_THRESHOLD = 10.0


def equator_stretch_oracle(beta: float, n: int = 2) -> float:
    """r'(pi/2) for sigma_+ -> nu ∝ exp(-beta t^2), by independent 1D quadrature.

    Equal to Z e^(beta pi^2 / 4) / S with Z = ∫ exp(-beta s^2) sin^(n-1) s ds
    and S = ∫ sin^(n-1) s ds over [0, pi/2].
    """
    z, _ = quad(lambda s: np.exp(-beta * s * s) * np.sin(s) ** (n - 1), 0.0, HALF_PI, epsabs=1e-14, epsrel=1e-12)
    s, _ = quad(lambda s: np.sin(s) ** (n - 1), 0.0, HALF_PI, epsabs=1e-14, epsrel=1e-12)
    return z * np.exp(beta * HALF_PI ** 2) / s


def counterexample_checks(report: LipschitzReport, beta: float, n: int = 2) -> list[Assertion]:
    oracle = equator_stretch_oracle(beta, n)
    relative = abs(report.lip_formula - oracle) / oracle
    return [
        Assertion(
            name="lip_exceeds_one",
            passed=report.lip_formula > 1.0,
            observed=report.lip_formula,
            detail=f"Lip(T) for gaussian_like beta={beta:g}",
        ),
        Assertion(
            name="lip_matches_quadrature_oracle",
            passed=relative <= ORACLE_RTOL,
            tolerance=ORACLE_RTOL,
            observed=relative,
            detail=f"oracle r'(pi/2) = {oracle:.10g}",
        ),
    ]


def cap_checks(records: list[CapRecord]) -> list[Assertion]:
    endpoint_error = max(abs(r.endpoint - r.radius) for r in records)
    above = [r.lip_formula > 1.0 for r in records]
    # smallest radius from which every later cap is non-contracting
    threshold = None
    for k in range(len(records) - 1, -1, -1):
        if not above[k]:
            break
        threshold = records[k].radius
    return [
        Assertion(
            name="cap_endpoint_maps_to_radius",
            passed=endpoint_error <= ENDPOINT_TOL,
            tolerance=ENDPOINT_TOL,
            observed=endpoint_error,
        ),
        Assertion(
            name="largest_cap_lip_exceeds_one",
            passed=above[-1],
            observed=records[-1].lip_formula,
            detail="none" if threshold is None else f"Lip > 1 for every radius >= {threshold:.6g}",
        ),
    ]


def blowup_checks(records: list[BlowupRecord], threshold: float = BLOWUP_THRESHOLD) -> list[Assertion]:
    kept = [r for r in records if not r.flagged]
    if not kept:
        return [Assertion(name="blowup_records_defined", passed=False, detail="every record flagged")]

    worst = min(r.lip_formula - r.lower_bound for r in kept)
    tail = [r.lower_bound for r in kept[len(kept) // 2:]]
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    return [
        Assertion(
            name="lip_dominates_lower_bound",
            passed=worst >= -BLOWUP_MARGIN,
            tolerance=BLOWUP_MARGIN,
            observed=worst,
        ),
        Assertion(
            name="lower_bound_increasing_on_tail",
            passed=increasing,
            detail=f"{len(tail)} smallest epsilons",
        ),
        Assertion(
            name="final_lower_bound_exceeds_threshold",
            passed=kept[-1].lower_bound > threshold,
            tolerance=threshold,
            observed=kept[-1].lower_bound,
        ),
    ]


def concentration_checks(
    records: list[ConcentrationRecord],
    dropped: int = 0,
    sphere_records: list[SphereConcentrationRecord] | None = None,
) -> list[Assertion]:
    margin = max((r.lhs - r.rhs for r in records), default=-np.inf)
    checks = [
        Assertion(
            name="cap_mass_below_concentration_bound",
            passed=bool(records) and margin <= CONCENTRATION_MARGIN,
            tolerance=CONCENTRATION_MARGIN,
            observed=float(margin),
            detail=f"{len(records)} radii checked, {dropped} outside r < pi L / 2",
        )
    ]
    if sphere_records:
        excess = max(r.empirical - r.bound for r in sphere_records)
        checks.append(
            Assertion(
                name="sphere_tail_below_gaussian_bound",
                passed=excess <= 0.0,
                tolerance=0.0,
                observed=float(excess),
                detail=f"Monte Carlo over {len(sphere_records)} values of t",
            )
        )
    return checks


def rigidity_checks(verdicts: list[RigidityVerdict], spacing: float) -> list[Assertion]:
    """Every candidate passing the 1-Lipschitz and surjectivity predicates is rigid."""
    passing = [v for v in verdicts if v.reason not in ("not 1-Lipschitz", "not surjective")]
    limit = 2.0 * spacing
    unclassified = [v for v in passing if v.classification == "rejected" or v.deviation > limit]
    worst = max((v.deviation for v in passing), default=0.0)
    return [
        Assertion(
            name="admissible_candidates_are_rigid",
            passed=not unclassified,
            tolerance=limit,
            observed=worst,
            detail=f"{len(passing)} of {len(verdicts)} candidates admissible, {len(unclassified)} unclassified",
        )
    ]


def metric_checks(report: MetricEquivalenceReport) -> list[Assertion]:
    return [
        Assertion(
            name="distance_order_biconditional",
            passed=report.violations == 0,
            tolerance=0.0,
            observed=float(report.violations),
            detail=f"{report.count} quadruples",
        ),
        Assertion(
            name="half_angle_image_chord_is_sqrt2",
            passed=abs(report.half_angle_image_chord - np.sqrt(2.0)) <= CHORD_TOL,
            tolerance=CHORD_TOL,
            observed=report.half_angle_image_chord,
        ),
        Assertion(
            name="half_angle_source_chord_is_2",
            passed=abs(report.half_angle_source_chord - 2.0) <= CHORD_TOL,
            tolerance=CHORD_TOL,
            observed=report.half_angle_source_chord,
        ),
        Assertion(
            name="half_angle_geodesic_ratio_is_half",
            passed=max(abs(report.geodesic_ratio_min - 0.5), abs(report.geodesic_ratio_max - 0.5)) <= RATIO_TOL,
            tolerance=RATIO_TOL,
            observed=report.geodesic_ratio_max,
        ),
        Assertion(
            name="half_angle_euclidean_endpoint_ratio",
            passed=abs(report.euclidean_endpoint_ratio - np.sqrt(2.0) / 2.0) <= CHORD_TOL
            and report.euclidean_endpoint_ratio > 0.5,
            tolerance=CHORD_TOL,
            observed=report.euclidean_endpoint_ratio,
        ),
    ]


def crosscheck_checks(report: CrosscheckReport, tol: float = DEVIATION_TOL) -> list[Assertion]:
    checks = [
        Assertion(
            name="barycentric_map_matches_radial_map",
            passed=report.max_deviation < tol,
            tolerance=tol,
            observed=report.max_deviation,
        )
    ]
    if report.beta >= 1.0:
        checks.append(
            Assertion(
                name="discrete_map_lip_exceeds_one",
                passed=report.lip_empirical > 1.0,
                observed=report.lip_empirical,
            )
        )
    return checks


def confinement_checks(report: ConfinementReport, tol: float = CONFINEMENT_TOL) -> list[Assertion]:
    return [
        Assertion(
            name="plan_mass_stays_in_hemisphere",
            passed=report.crossing_mass < tol,
            tolerance=tol,
            observed=report.crossing_mass,
        )
    ]
