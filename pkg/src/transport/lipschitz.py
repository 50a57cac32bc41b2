"""Lipschitz reports and the pairwise empirical estimator for maps between sphere points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.errors import UsageError
from src.geometry.sphere import SpherePoint, geodesic_distance

MIN_SEPARATION = 1e-8
BLOCK_ROWS = 256


@dataclass(frozen=True, eq=False)
class LipschitzReport:
    """Formula-based and/or empirical Lipschitz constants with a witness pair."""

    lip_formula: float | None = None
    lip_empirical: float | None = None
    witness: tuple[SpherePoint, SpherePoint] | None = None
    argmax_location: float | None = None
    witness_indices: tuple[int, int] | None = None

    def to_record(self) -> dict:
        return {
            "lip_formula": self.lip_formula,
            "lip_empirical": self.lip_empirical,
            "argmax_location": self.argmax_location,
            "witness": None if self.witness is None else [w.tolist() for w in self.witness],
        }


def _pairwise_geodesic(rows: SpherePoint, cols: SpherePoint) -> npt.NDArray[np.float64]:
    diff = np.linalg.norm(rows[:, None, :] - cols[None, :, :], axis=-1)
    summ = np.linalg.norm(rows[:, None, :] + cols[None, :, :], axis=-1)
    return 2.0 * np.arctan2(diff, summ)


def _listed_pairs(x, y, pairs, min_separation):
    i, j = (np.asarray(p, dtype=int) for p in pairs)
    if i.shape != j.shape or i.ndim != 1 or i.size == 0:
        raise UsageError("pairs must be two equal-length, nonempty index arrays")
    d_in = geodesic_distance(x[i], x[j])
    d_out = geodesic_distance(y[i], y[j])
    valid = d_in >= min_separation
    if not np.any(valid):
        raise UsageError("All listed pairs are degenerate (input distance below threshold)")
    ratios = np.where(valid, d_out / np.where(valid, d_in, 1.0), -np.inf)
    k = int(np.argmax(ratios))
    return float(ratios[k]), int(i[k]), int(j[k])


def _all_pairs(x, y, min_separation):
    best, best_i, best_j = -np.inf, -1, -1
    count = x.shape[0]
    cols = np.arange(count)
    for start in range(0, count, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, count)
        d_in = _pairwise_geodesic(x[start:stop], x)
        d_out = _pairwise_geodesic(y[start:stop], y)
        upper = cols[None, :] > np.arange(start, stop)[:, None]
        valid = upper & (d_in >= min_separation)
        if not np.any(valid):
            continue
        ratios = np.where(valid, d_out / np.where(valid, d_in, 1.0), -np.inf)
        flat = int(np.argmax(ratios))
        value = float(ratios.flat[flat])
        if value > best:
            best = value
            best_i, best_j = start + flat // count, flat % count
    if best_i < 0:
        raise UsageError("All input pairs are degenerate (distance below threshold)")
    return best, best_i, best_j


def empirical_lipschitz(
    inputs: npt.ArrayLike,
    outputs: npt.ArrayLike,
    pairs: tuple[npt.ArrayLike, npt.ArrayLike] | None = None,
    min_separation: float = MIN_SEPARATION,
) -> LipschitzReport:
    """max d(out_i, out_j) / d(in_i, in_j) over all pairs i < j (or the listed pairs).

    Pairs whose inputs are closer than min_separation are skipped. Rows are
    scanned in fixed blocks so the reduction order, and hence the witness, is
    deterministic.
    """
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(outputs, dtype=float)
    if x.ndim != 2 or x.shape != y.shape:
        raise UsageError(f"inputs {x.shape} and outputs {y.shape} must be equal (k, n+1) arrays")
    if x.shape[0] < 2:
        raise UsageError("Need at least two points")

    if pairs is None:
        ratio, i, j = _all_pairs(x, y, min_separation)
    else:
        ratio, i, j = _listed_pairs(x, y, pairs, min_separation)
    return LipschitzReport(lip_empirical=ratio, witness=(x[i].copy(), x[j].copy()), witness_indices=(i, j))
