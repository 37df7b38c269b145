"""Run-quality metrics: hypervolume percentage, front size and attainment functions."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import nondominated_set
from .errors import InvalidArgumentError
from .hypervolume import hypervolume
from .problems import Problem, true_front

DENSE_FRONT = 10001
INFLATION = 0.1
EAF_RESOLUTION = 512


@dataclass(frozen=True)
class MetricReference:
    ideal: np.ndarray
    nadir: np.ndarray
    ref: np.ndarray
    hv_true: float
    mode: str


@lru_cache(maxsize=64)
def _reference(name: str, D: int, mode: str, n: int) -> MetricReference:
    from .problems import get_problem

    front = true_front(get_problem(name, D), n)
    ideal, nadir = front.min(axis=0), front.max(axis=0)
    if mode == "range":
        ref = nadir + INFLATION * (nadir - ideal)
    elif mode == "literal":
        ref = (1.0 + INFLATION) * nadir
    else:
        raise InvalidArgumentError(f"unknown reference mode {mode!r}; use 'range' or 'literal'")
    return MetricReference(ideal, nadir, ref, hypervolume(front, ref), mode)


def metric_reference(problem: Problem, mode: str = "range", n: int = DENSE_FRONT) -> MetricReference:
    """Reference point 10% beyond the true nadir and the true front's hypervolume.

    ``mode="range"`` inflates by 10% of the ideal-to-nadir range; ``"literal"``
    multiplies the nadir by 1.1.
    """
    return _reference(problem.name, problem.D, mode, n)


def hv_percent(front, problem: Problem, mode: str = "range") -> float:
    """Hypervolume of ``front`` as a percentage of the true front's."""
    ref = metric_reference(problem, mode)
    front = np.asarray(front, dtype=float)
    if front.size == 0:
        return 0.0
    return 100.0 * hypervolume(front.reshape(-1, ref.ref.size), ref.ref) / ref.hv_true


def nds_size(front) -> int:
    """Number of distinct mutually non-dominated objective vectors."""
    front = np.asarray(front, dtype=float)
    if front.size == 0:
        return 0
    front = front.reshape(len(front), -1)
    return len(np.unique(front[nondominated_set(front)], axis=0))


@dataclass(frozen=True)
class EafGrid:
    """Cell-centred objective-space grid of attainment probabilities.

    ``cells[a, b]`` is the value at ``(axes[0][a], axes[1][b])``. For a
    difference grid ``run_count`` is None and values lie in ``[-1, 1]``.
    """

    ranges: tuple
    resolution: tuple
    cells: np.ndarray
    run_count: int | None

    @property
    def axes(self) -> list[np.ndarray]:
        return [lo + (np.arange(n) + 0.5) * (hi - lo) / n for (lo, hi), n in zip(self.ranges, self.resolution)]

    @property
    def cell_area(self) -> float:
        return float(np.prod([(hi - lo) / n for (lo, hi), n in zip(self.ranges, self.resolution)]))

    def metadata(self, **extra) -> dict:
        return {
            "ranges": [[float(lo), float(hi)] for lo, hi in self.ranges],
            "resolution": list(self.resolution),
            "run_count": self.run_count,
            "cell_centred": True,
            **extra,
        }

    def to_csv(self, path, **meta) -> None:
        """Write the grid as CSV plus a ``.json`` sidecar with axes metadata.

        Two objectives give a matrix: one row per f0 grid line, one column per
        f1 grid line. Otherwise one row per cell.
        """
        axes = self.axes
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if len(axes) == 2:
                writer.writerow(["f0\\f1"] + [repr(float(v)) for v in axes[1]])
                for a, row in zip(axes[0], self.cells):
                    writer.writerow([repr(float(a))] + [repr(float(v)) for v in row])
            else:
                writer.writerow([f"f{k}" for k in range(len(axes))] + ["value"])
                for idx in np.ndindex(self.cells.shape):
                    writer.writerow([repr(float(axes[k][i])) for k, i in enumerate(idx)] + [repr(float(self.cells[idx]))])
        with open(str(path).removesuffix(".csv") + ".json", "w") as fh:
            json.dump(self.metadata(**meta), fh, indent=2, sort_keys=True)


def _as_resolution(resolution, M: int) -> tuple:
    if np.isscalar(resolution):
        return (int(resolution),) * M
    return tuple(int(r) for r in resolution)


def _attained_2d(points: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    pts = points[np.argsort(points[:, 0], kind="stable")]
    best_f2 = np.minimum.accumulate(pts[:, 1])
    k = np.searchsorted(pts[:, 0], x, side="right")
    floor = np.where(k > 0, best_f2[np.maximum(k - 1, 0)], np.inf)
    return y[None, :] >= floor[:, None]


def _attained_nd(points: np.ndarray, axes: list[np.ndarray]) -> np.ndarray:
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    hit = np.zeros(len(mesh), dtype=bool)
    for p in points:
        hit |= np.all(mesh >= p, axis=1)
    return hit.reshape([len(a) for a in axes])


def eaf(fronts, ranges, resolution=EAF_RESOLUTION) -> EafGrid:
    """Fraction of runs whose front weakly dominates each grid point."""
    fronts = [np.asarray(f, dtype=float) for f in fronts]
    if not fronts:
        raise InvalidArgumentError("eaf needs at least one front")
    ranges = tuple((float(lo), float(hi)) for lo, hi in ranges)
    M = len(ranges)
    res = _as_resolution(resolution, M)
    grid = EafGrid(ranges, res, np.zeros(res), len(fronts))
    axes = grid.axes
    counts = np.zeros(res)
    for f in fronts:
        if f.size == 0:
            continue
        f = f.reshape(-1, M)
        counts += _attained_2d(f, *axes) if M == 2 else _attained_nd(f, axes)
    return EafGrid(ranges, res, counts / len(fronts), len(fronts))


def _check_compatible(a: EafGrid, b: EafGrid) -> None:
    if a.resolution != b.resolution or not np.allclose(a.ranges, b.ranges, rtol=0, atol=0):
        raise InvalidArgumentError("EAF grids differ in range or resolution")


def eaf_difference(a: EafGrid, b: EafGrid) -> EafGrid:
    _check_compatible(a, b)
    return EafGrid(a.ranges, a.resolution, a.cells - b.cells, None)


def integrated_eaf_difference(a: EafGrid, b: EafGrid) -> float:
    """Sum of ``(a - b) * cell area``; positive when ``a`` attains more of the space."""
    _check_compatible(a, b)
    return float(np.sum(a.cells - b.cells) * a.cell_area)


def union_bounds(fronts) -> tuple:
    """Bounding box of every point of every front, as per-objective ``(lo, hi)``."""
    pts = np.vstack([np.atleast_2d(f) for f in fronts if np.size(f)])
    return tuple((float(lo), float(hi)) for lo, hi in zip(pts.min(axis=0), pts.max(axis=0)))
