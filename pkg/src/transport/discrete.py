"""Discrete optimal transport for the cost c(x, y) = d(x, y)^2 / 2 on the sphere.

Two independent solvers: log-domain Sinkhorn with an annealed regularization
schedule, and an exact solver for small problems (assignment for uniform
equal-size measures, optionally a linear program up to 64 points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.optimize import linear_sum_assignment, linprog
from scipy.special import logsumexp

from src.errors import DegenerateBarycenterError, NumericalFailure, SinkhornDivergence, UsageError
from src.geometry.sphere import SpherePoint, geodesic_distance
from src.logger import Logger
from src.measures.discretize import DiscreteMeasure

LOGGER = Logger("transport.discrete")

MARGINAL_TOL = 1e-7
ANNEAL_FACTOR = 0.7
ANNEAL_SPAN = 1e3
STAGE_TOL = 1e-3
STAGE_MAX_ITER = 20
MAX_ASSIGNMENT_SIZE = 12
MAX_LP_SIZE = 64
BARYCENTER_TOL = 1e-9


def cost_matrix(x: SpherePoint, y: SpherePoint) -> npt.NDArray[np.float64]:
    """C_ij = d(x_i, y_j)^2 / 2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = geodesic_distance(x[:, None, :], y[None, :, :])
    return 0.5 * np.asarray(d) ** 2


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling between two discrete measures; marginals hold within 1e-7."""

    source: DiscreteMeasure
    target: DiscreteMeasure
    coupling: npt.NDArray[np.float64]

    def __post_init__(self):
        coupling = np.asarray(self.coupling, dtype=float)
        expected = (self.source.size, self.target.size)
        if coupling.shape != expected:
            raise UsageError(f"Coupling shape {coupling.shape} does not match measures {expected}")
        if np.any(coupling < -MARGINAL_TOL) or not np.all(np.isfinite(coupling)):
            raise UsageError("Coupling must be finite and nonnegative")
        coupling = np.clip(coupling, 0.0, None)
        row_error = np.max(np.abs(coupling.sum(axis=1) - self.source.weights))
        col_error = np.max(np.abs(coupling.sum(axis=0) - self.target.weights))
        if max(row_error, col_error) > MARGINAL_TOL:
            raise UsageError(f"Coupling marginals off by {max(row_error, col_error):.3e}")
        object.__setattr__(self, "coupling", coupling)

    @property
    def cost(self) -> float:
        """sum_ij P_ij d(x_i, y_j)^2 / 2."""
        return float(np.sum(self.coupling * cost_matrix(self.source.points, self.target.points)))


@dataclass(frozen=True, eq=False)
class PotentialPair:
    """Dual potentials with P_ij = a_i b_j exp((psi_i + psi_c_j - C_ij) / reg)."""

    psi: npt.NDArray[np.float64]
    psi_c: npt.NDArray[np.float64]
    reg: float
    violation: float
    iterations: int

    def dual_value(self, source: DiscreteMeasure, target: DiscreteMeasure) -> float:
        return float(source.weights @ self.psi + target.weights @ self.psi_c)

    def max_slack(self, source: DiscreteMeasure, target: DiscreteMeasure) -> float:
        """max_ij psi_i + psi_c_j - C_ij; at most reg * log(count) for uniform weights."""
        c = cost_matrix(source.points, target.points)
        return float(np.max(self.psi[:, None] + self.psi_c[None, :] - c))


def _round_to_polytope(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project an almost-feasible coupling onto the couplings with marginals (a, b)."""
    rows = p.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(rows > 0.0, np.minimum(a / rows, 1.0), 1.0)
    p = p * scale[:, None]
    cols = p.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(cols > 0.0, np.minimum(b / cols, 1.0), 1.0)
    p = p * scale[None, :]
    err_a = a - p.sum(axis=1)
    err_b = b - p.sum(axis=0)
    total = err_a.sum()
    if total > 0.0:
        p = p + np.outer(err_a, err_b) / total
    return p


class _LogSinkhorn:
    """Alternating log-domain scaling for fixed cost and marginals.

    After the g half-step the columns are exact and row i of the plan sums to
    a_i exp((f_i - f'_i) / reg), where f' is the next f half-step; the row
    violation therefore comes for free with each iteration.
    """

    def __init__(self, cost: np.ndarray, a: np.ndarray, b: np.ndarray):
        self.cost = cost
        self.a = a
        self.b = b
        with np.errstate(divide="ignore"):
            self.log_a = np.log(a)
            self.log_b = np.log(b)
        self.active = a > 0.0
        self.f = np.zeros(a.size)
        self.g = np.zeros(b.size)
        self.iterations = 0

    def _f_step(self, reg: float) -> np.ndarray:
        f = -reg * logsumexp(self.log_b[None, :] + (self.g[None, :] - self.cost) / reg, axis=1)
        if not np.all(np.isfinite(f)):
            raise NumericalFailure(f"Sinkhorn produced non-finite potentials at reg={reg:.3g}")
        return f

    def _g_step(self, reg: float) -> np.ndarray:
        return -reg * logsumexp(self.log_a[:, None] + (self.f[:, None] - self.cost) / reg, axis=0)

    def plan(self, reg: float) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_p = self.log_a[:, None] + self.log_b[None, :] + (self.f[:, None] + self.g[None, :] - self.cost) / reg
        return np.exp(log_p)

    def _row_violation(self, f_next: np.ndarray, reg: float) -> float:
        with np.errstate(over="ignore"):
            drift = np.expm1((self.f[self.active] - f_next[self.active]) / reg)
        return float(np.sum(self.a[self.active] * np.abs(drift)))

    def run(self, reg: float, tol: float, max_iter: int) -> float:
        """Iterate at fixed reg until the L1 row violation drops below tol; returns the last violation."""
        f_next = self._f_step(reg)
        violation = np.inf
        for _ in range(max_iter):
            self.f = f_next
            self.g = self._g_step(reg)
            self.iterations += 1
            f_next = self._f_step(reg)
            violation = self._row_violation(f_next, reg)
            if violation < tol:
                break
        return violation


def annealing_schedule(reg: float, start: float, factor: float = ANNEAL_FACTOR) -> list[float]:
    """Geometric sequence start, start*factor, ... ending exactly at reg."""
    schedule = []
    current = start
    while current > reg:
        schedule.append(current)
        current *= factor
    schedule.append(reg)
    return schedule


def sinkhorn(
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    reg: float,
    tol: float = 1e-5,
    max_iter: int = 10_000,
    anneal: bool = True,
) -> tuple[TransportPlan, PotentialPair]:
    """Entropic OT for cost d^2/2 in the log domain.

    With anneal, reg decreases geometrically from min(max(C), 1000 reg) to the
    requested value, warm-starting each stage; intermediate stages stop at a
    loose tolerance or after a few iterations. Only the final stage must reach
    `tol` (L1 row violation) within `max_iter` iterations, else
    SinkhornDivergence. The returned coupling is rounded onto the transport
    polytope, so its marginals hold to 1e-7 whatever `tol` is.
    """
    if not reg > 0:
        raise UsageError(f"reg must be > 0, got {reg}")
    if not tol > 0 or max_iter < 1:
        raise UsageError("tol must be > 0 and max_iter >= 1")
    if source.n != target.n:
        raise UsageError(f"Source dimension {source.n} differs from target dimension {target.n}")

    cost = cost_matrix(source.points, target.points)
    solver = _LogSinkhorn(cost, source.weights, target.weights)
    start = min(float(cost.max()), ANNEAL_SPAN * reg)
    stages = annealing_schedule(reg, start) if anneal else [reg]

    for stage_reg in stages[:-1]:
        solver.run(stage_reg, max(tol, STAGE_TOL), STAGE_MAX_ITER)

    violation = solver.run(reg, tol, max_iter)
    if violation >= tol:
        raise SinkhornDivergence(violation, solver.iterations, reg)

    LOGGER.info(
        f"Sinkhorn {source.size}x{target.size} reg={reg:.3g}: {len(stages)} stages, "
        f"{solver.iterations} iterations, violation {violation:.2e}"
    )
    coupling = _round_to_polytope(solver.plan(reg), source.weights, target.weights)
    potentials = PotentialPair(
        psi=solver.f, psi_c=solver.g, reg=reg, violation=violation, iterations=solver.iterations,
    )
    return TransportPlan(source=source, target=target, coupling=coupling), potentials


def _first_optimal_permutation(cost: np.ndarray, optimum: float, tol: float) -> list[int]:
    """Lexicographically smallest permutation with cost <= optimum + tol (depth-first, pruned)."""
    size = cost.shape[0]
    used = [False] * size
    perm: list[int] = []

    def lower_bound(row: int) -> float:
        free = [j for j in range(size) if not used[j]]
        return float(sum(cost[i, free].min() for i in range(row, size))) if free else 0.0

    def search(row: int, partial: float) -> bool:
        if row == size:
            return True
        for j in range(size):
            if used[j]:
                continue
            candidate = partial + cost[row, j]
            used[j] = True
            if candidate + lower_bound(row + 1) <= optimum + tol:
                perm.append(j)
                if search(row + 1, candidate):
                    return True
                perm.pop()
            used[j] = False
        return False

    if not search(0, 0.0):
        raise NumericalFailure("No permutation reaches the assignment optimum")
    return perm


def exact_ot_small(
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    allow_lp: bool = False,
) -> TransportPlan:
    """Exact OT for small problems.

    Uniform measures of equal size <= 12 are solved as an assignment problem;
    among cost-equal optima the lexicographically first permutation is
    returned. With allow_lp, general weights up to 64 points go through a
    linear program instead.
    """
    if source.n != target.n:
        raise UsageError(f"Source dimension {source.n} differs from target dimension {target.n}")
    cost = cost_matrix(source.points, target.points)
    k, m = cost.shape

    if k == m and k <= MAX_ASSIGNMENT_SIZE and source.is_uniform() and target.is_uniform():
        rows, cols = linear_sum_assignment(cost)
        optimum = float(cost[rows, cols].sum())
        perm = _first_optimal_permutation(cost, optimum, tol=1e-12 * max(1.0, optimum))
        coupling = np.zeros((k, m))
        coupling[np.arange(k), perm] = 1.0 / k
        return TransportPlan(source=source, target=target, coupling=coupling)

    if allow_lp and max(k, m) <= MAX_LP_SIZE:
        return _linear_program(source, target, cost)

    raise UsageError(
        f"exact_ot_small handles uniform equal sizes <= {MAX_ASSIGNMENT_SIZE} "
        f"(or <= {MAX_LP_SIZE} with allow_lp); got {k}x{m}"
    )


def _linear_program(source: DiscreteMeasure, target: DiscreteMeasure, cost: np.ndarray) -> TransportPlan:
    k, m = cost.shape
    rows = np.kron(np.eye(k), np.ones((1, m)))
    cols = np.kron(np.ones((1, k)), np.eye(m))
    result = linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([source.weights, target.weights]),
        bounds=(0.0, None),
        method="highs",
    )
    if not result.success:
        raise NumericalFailure(f"Linear program failed: {result.message}")
    coupling = _round_to_polytope(np.clip(result.x.reshape(k, m), 0.0, None), source.weights, target.weights)
    return TransportPlan(source=source, target=target, coupling=coupling)


def barycentric_map(plan: TransportPlan) -> SpherePoint:
    """Row i: normalize(sum_j P_ij y_j), the projected conditional mean of the targets."""
    means = plan.coupling @ plan.target.points
    mass = plan.coupling.sum(axis=1)
    norms = np.linalg.norm(means, axis=1)
    degenerate = (mass <= 0.0) | (norms <= BARYCENTER_TOL * mass)
    if np.any(degenerate):
        raise DegenerateBarycenterError(int(np.argmax(degenerate)))
    return means / norms[:, None]
