"""Experiment configuration: a JSON document validated into ExperimentConfig."""

import json
from typing import Literal, get_args

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.errors import ConfigError

ExperimentName = Literal[
    "counterexample",
    "cap",
    "blowup",
    "concentration",
    "rigidity",
    "metric",
    "sinkhorn-crosscheck",
    "confinement",
]

EXPERIMENTS = get_args(ExperimentName)

HALF_PI = 0.5 * np.pi

DEFAULT_COUNTS = {
    "metric": 100_000,
    "sinkhorn-crosscheck": 2048,
    "confinement": 1024,
    "rigidity": 10_000,
    "concentration": 100_000,
}
DEFAULT_REG = {"sinkhorn-crosscheck": 1e-3, "confinement": 1e-2}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentName
    n: int = Field(2, ge=2)

    # measure parameters
    family: Literal["uniform", "gaussian_like", "tempered"] = "gaussian_like"
    beta: float = Field(1.0, gt=0)
    potential: Literal["quadratic", "linear"] = "quadratic"
    epsilon: float = Field(0.1, gt=0)
    epsilons: list[float] = Field(default_factory=lambda: np.geomspace(1.0, 1e-4, 13).tolist())
    rho: float | None = Field(None, gt=0, le=HALF_PI)
    radii: list[float] = Field(default_factory=lambda: np.linspace(HALF_PI / 8, HALF_PI, 8).tolist())
    r_grid: list[float] = Field(default_factory=lambda: np.linspace(0.01, 1.5, 1000).tolist())
    candidate: Literal["identity", "reflection", "half", "random"] = "random"

    # numeric parameters
    grid_size: int = Field(4096, ge=64)
    count: int | None = Field(None, ge=1)
    reg_final: float | None = Field(None, gt=0)
    tol: float = Field(1e-4, gt=0)
    max_iter: int = Field(5000, ge=1)
    nodes: int = Field(257, ge=128)
    threshold: float = Field(10.0, gt=0)
    seed: int = 0

    output_dir: str = "results"

    @field_validator("epsilons")
    @classmethod
    def _decreasing_epsilons(cls, v: list[float]) -> list[float]:
        if not v or any(e <= 0 for e in v):
            raise ValueError("epsilons must be a nonempty list of positive reals")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        return v

    @field_validator("radii")
    @classmethod
    def _increasing_radii(cls, v: list[float]) -> list[float]:
        if not v or any(r <= 0 or r > HALF_PI for r in v):
            raise ValueError("radii must lie in (0, pi/2]")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("radii must be strictly increasing")
        return v

    @field_validator("r_grid")
    @classmethod
    def _positive_r_grid(cls, v: list[float]) -> list[float]:
        if not v or any(r <= 0 for r in v):
            raise ValueError("r_grid must be a nonempty list of positive radii")
        return v

    @model_validator(mode="after")
    def _experiment_preconditions(self):
        if self.count is None and self.experiment in DEFAULT_COUNTS:
            self.count = DEFAULT_COUNTS[self.experiment]
        if self.reg_final is None and self.experiment in DEFAULT_REG:
            self.reg_final = DEFAULT_REG[self.experiment]

        if self.experiment in ("sinkhorn-crosscheck", "confinement") and self.n != 2:
            raise ValueError("discrete experiments run on S^2 only (n = 2)")
        if self.experiment == "sinkhorn-crosscheck" and self.count > 4096:
            raise ValueError("sinkhorn-crosscheck needs count <= 4096")
        if self.experiment == "metric" and self.count < 100:
            raise ValueError("metric needs count >= 100")
        return self


def _field_of(error: ValidationError) -> str | None:
    first = error.errors()[0]
    loc = ".".join(str(part) for part in first.get("loc", ()))
    return loc or None


def parse_config(text: str | bytes) -> ExperimentConfig:
    """Validate a JSON document; any failure becomes a ConfigError naming the field."""
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], field=_field_of(e)) from e


def config_from_dict(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(e.errors()[0]["msg"], field=_field_of(e)) from e


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical JSON: sorted keys, two-space indent."""
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=2)
