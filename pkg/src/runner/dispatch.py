"""Dispatch a validated config to its experiment and collect records and assertions."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src import __version__
from src.experiments import checks, drivers
from src.experiments.records import Assertion
from src.experiments.sweep import parallel_map
from src.logger import Logger
from src.measures.profiles import RadialDensitySpec
from src.runner.config import ExperimentConfig
from src.transport.radial import RadialMap

LOGGER = Logger("runner.dispatch")


@dataclass
class RunReport:
    experiment: str
    config: dict
    records: dict[str, list[dict]] = field(default_factory=dict)
    assertions: list[Assertion] = field(default_factory=list)
    durations: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def to_json_dict(self) -> dict:
        """Everything except wall-clock durations, which vary between runs."""
        return {
            "experiment": self.experiment,
            "config": self.config,
            "records": self.records,
            "assertions": [a.to_row() for a in self.assertions],
            "passed": self.passed,
            "version": self.version,
        }


Outcome = tuple[dict[str, list[dict]], list[Assertion]]
_REGISTRY: dict[str, Callable[[ExperimentConfig, dict], Outcome]] = {}


def experiment(name: str):
    def register(fn):
        _REGISTRY[name] = fn
        return fn
    return register


def _base_spec(config: ExperimentConfig) -> RadialDensitySpec:
    if config.family == "uniform":
        return RadialDensitySpec.uniform(config.n)
    if config.family == "tempered":
        return RadialDensitySpec.tempered(config.potential, config.epsilon, config.n)
    return RadialDensitySpec.gaussian_like(config.beta, config.n)


@experiment("counterexample")
def _counterexample(config: ExperimentConfig, durations: dict) -> Outcome:
    with LOGGER.timed("counterexample", sink=durations):
        report = drivers.run_counterexample(config.beta, config.grid_size, config.n)
    row = {"beta": config.beta, **report.to_record()}
    return {"counterexample": [row]}, checks.counterexample_checks(report, config.beta, config.n)


@experiment("cap")
def _cap(config: ExperimentConfig, durations: dict) -> Outcome:
    with LOGGER.timed("cap sweep", sink=durations):
        records = drivers.run_cap_restriction(config.beta, config.radii, config.grid_size, config.n)
    return {"cap": [r.to_row() for r in records]}, checks.cap_checks(records)


@experiment("blowup")
def _blowup(config: ExperimentConfig, durations: dict) -> Outcome:
    with LOGGER.timed("blowup sweep", sink=durations):
        records = drivers.run_blowup(config.potential, config.epsilons, config.grid_size, config.n)
    return {"blowup": [r.to_row() for r in records]}, checks.blowup_checks(records, config.threshold)


@experiment("concentration")
def _concentration(config: ExperimentConfig, durations: dict) -> Outcome:
    target = _base_spec(config)
    if config.rho is not None:
        target = RadialDensitySpec.cap(config.rho, target)
    with LOGGER.timed("concentration audit", sink=durations):
        records = drivers.run_concentration_audit(target, config.r_grid, config.grid_size)
    with LOGGER.timed("sphere Monte Carlo", sink=durations):
        sphere = drivers.run_sphere_concentration(config.n, count=config.count, seed=config.seed)
    dropped = len(config.r_grid) - len(records)
    return (
        {"concentration": [r.to_row() for r in records], "sphere_concentration": [r.to_row() for r in sphere]},
        checks.concentration_checks(records, dropped, sphere),
    )


_EXPLICIT_CANDIDATES = {
    "identity": lambda t: t,
    "reflection": lambda t: np.pi / 2 - t,
    "half": lambda t: t / 2,
}


@experiment("rigidity")
def _rigidity(config: ExperimentConfig, durations: dict) -> Outcome:
    if config.candidate == "random":
        candidates = drivers.rigidity_candidates(config.nodes, config.count, config.seed)
    else:
        candidates = [RadialMap.from_function(_EXPLICIT_CANDIDATES[config.candidate], nodes=config.nodes)]

    with LOGGER.timed("rigidity classification", sink=durations):
        verdicts = parallel_map(drivers.run_rigidity_1d, candidates)

    summary: dict[tuple[str, str], list[float]] = {}
    for v in verdicts:
        summary.setdefault((v.classification, v.reason), []).append(v.deviation)
    rows = [
        {"classification": c, "reason": r, "count": len(devs), "max_deviation": max(devs)}
        for (c, r), devs in sorted(summary.items())
    ]

    spacing = float(np.max(np.diff(candidates[0].grid)))
    assertions = checks.rigidity_checks(verdicts, spacing)
    if config.candidate in ("identity", "reflection"):
        assertions.append(
            Assertion(
                name=f"{config.candidate}_classified",
                passed=verdicts[0].classification == config.candidate,
                detail=f"classified as {verdicts[0].classification}",
            )
        )
    return {"rigidity": rows}, assertions


@experiment("metric")
def _metric(config: ExperimentConfig, durations: dict) -> Outcome:
    with LOGGER.timed("metric equivalence", sink=durations):
        report = drivers.run_metric_equivalence(config.count, config.seed)
    return {"metric": [report.to_row()]}, checks.metric_checks(report)


@experiment("sinkhorn-crosscheck")
def _crosscheck(config: ExperimentConfig, durations: dict) -> Outcome:
    with LOGGER.timed("sinkhorn crosscheck", sink=durations):
        report = drivers.run_sinkhorn_crosscheck(
            config.beta, config.count, config.reg_final, config.seed,
            tol=config.tol, max_iter=config.max_iter, grid_size=config.grid_size,
        )
    return {"crosscheck": [report.to_row()]}, checks.crosscheck_checks(report)


@experiment("confinement")
def _confinement(config: ExperimentConfig, durations: dict) -> Outcome:
    with LOGGER.timed("hemisphere confinement", sink=durations):
        report = drivers.run_hemisphere_confinement(
            config.beta, config.count, config.reg_final, config.seed,
            tol=config.tol, max_iter=config.max_iter, grid_size=config.grid_size,
        )
    return {"confinement": [report.to_row()]}, checks.confinement_checks(report)


def dispatch_run(config: ExperimentConfig) -> RunReport:
    """Run the configured experiment. Numerical failures propagate to the caller."""
    durations: dict[str, float] = {}
    LOGGER.info(f"Running {config.experiment} (seed={config.seed})")
    records, assertions = _REGISTRY[config.experiment](config, durations)
    report = RunReport(
        experiment=config.experiment,
        config=config.model_dump(mode="json"),
        records=records,
        assertions=assertions,
        durations=durations,
    )
    failed = [a.name for a in assertions if not a.passed]
    if failed:
        LOGGER.warning(f"{config.experiment}: failed assertions {failed}")
    return report
