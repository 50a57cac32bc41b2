"""Records emitted by the experiment drivers and consumed by the report writer."""

from dataclasses import asdict, dataclass, field

import numpy as np


def _plain(value):
    """numpy scalars/arrays to JSON-ready Python values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


class Record:
    """Mixin: dataclass fields as a flat dict of plain values."""

    def to_row(self) -> dict:
        return {k: _plain(v) for k, v in asdict(self).items()}


@dataclass
class Assertion(Record):
    name: str
    passed: bool
    tolerance: float | None = None
    observed: float | None = None
    detail: str = ""


@dataclass
class BlowupRecord(Record):
    epsilon: float
    m: float | None = None
    r_eps: float | None = None
    R_eps: float | None = None
    lower_bound: float | None = None
    lip_formula: float | None = None
    flagged: bool = False  # 1 - sqrt(m) outside [0, 1]


@dataclass
class ConcentrationRecord(Record):
    r: float
    lhs: float
    rhs: float
    lip: float


@dataclass
class SphereConcentrationRecord(Record):
    t: float
    empirical: float
    closed_form: float | None
    bound: float


@dataclass
class CapRecord(Record):
    radius: float
    lip_formula: float
    argmax_location: float
    endpoint: float  # r(pi/2)


@dataclass
class RigidityVerdict(Record):
    classification: str  # identity | reflection | rejected
    deviation: float
    violation_witness: tuple[float, float] | None = None
    reason: str = ""


@dataclass
class MetricEquivalenceReport(Record):
    count: int
    agreements: int
    violations: int
    half_angle_image_chord: float
    half_angle_source_chord: float
    geodesic_ratio_min: float
    geodesic_ratio_max: float
    euclidean_endpoint_ratio: float
    euclidean_ratio_max: float


@dataclass
class CrosscheckReport(Record):
    beta: float
    count: int
    reg_final: float
    max_deviation: float
    mean_deviation: float
    lip_empirical: float
    lip_formula: float
    iterations: int
    violation: float
    witness: list = field(default_factory=list)


@dataclass
class ConfinementReport(Record):
    beta: float
    count: int
    reg_final: float
    crossing_mass: float
    iterations: int
