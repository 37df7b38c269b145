"""Decision/objective-space primitives.

Everything here assumes minimisation. Maximised quantities are negated by the
problem that produces them, never inside this module.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .errors import DimensionError, DuplicatePointError, EmptyInputError, InvalidArgumentError

INITIAL = "initial-design"
ACQUIRED = "acquired"
PHASES = (INITIAL, ACQUIRED)


def dominates(a, b) -> bool:
    """Return True iff ``a`` Pareto-dominates ``b`` (minimisation, exact comparison)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare vectors of shape {a.shape} and {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(objs: np.ndarray) -> np.ndarray:
    """Boolean matrix ``D`` with ``D[i, j]`` true when row i dominates row j."""
    objs = np.asarray(objs, dtype=float)
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    return le & lt


def _objectives_of(data) -> np.ndarray:
    objs = data.Y if isinstance(data, Archive) else np.asarray(data, dtype=float)
    if objs.size == 0:
        raise EmptyInputError("no objective vectors supplied")
    if objs.ndim != 2:
        raise DimensionError(f"expected an (n, M) array, got shape {objs.shape}")
    return objs


def nondominated_set(data) -> np.ndarray:
    """Sorted indices of the entries not dominated by any other entry.

    ``data`` is an :class:`Archive` or an ``(n, M)`` array of objective vectors.
    """
    objs = _objectives_of(data)
    if objs.shape[1] == 2:
        return _nondominated_2d(objs)
    dom = dominance_matrix(objs)
    return np.flatnonzero(~dom.any(axis=0))


def _nondominated_2d(objs: np.ndarray) -> np.ndarray:
    # Sort by (f1, f2). A point is dominated if something with smaller f1 has
    # f2 no larger, or something with equal f1 has strictly smaller f2.
    order = np.lexsort((objs[:, 1], objs[:, 0]))
    f1, f2 = objs[order, 0], objs[order, 1]
    start = np.searchsorted(f1, f1, side="left")
    prefix_min = np.concatenate([[np.inf], np.minimum.accumulate(f2)])
    dominated = (prefix_min[start] <= f2) | (f2[start] < f2)
    return np.sort(order[~dominated])


def pareto_shells(data) -> list[np.ndarray]:
    """Decompose entries into Pareto shells by repeatedly peeling the front.

    Shell 0 is the non-dominated set; shell k+1 is the non-dominated set of
    what remains once shells 0..k are removed.
    """
    objs = _objectives_of(data)
    dom = dominance_matrix(objs)
    remaining = np.ones(len(objs), dtype=bool)
    shells = []
    while remaining.any():
        dominated = dom[remaining][:, remaining].any(axis=0)
        idx = np.flatnonzero(remaining)[~dominated]
        shells.append(idx)
        remaining[idx] = False
    return shells


def shell_index(shells: list[np.ndarray], n: int) -> np.ndarray:
    """Per-entry shell number given the output of :func:`pareto_shells`."""
    out = np.empty(n, dtype=int)
    for k, idx in enumerate(shells):
        out[idx] = k
    return out


def latin_hypercube(n: int, d: int, seed: int) -> np.ndarray:
    """``n`` points in ``[0, 1)^d`` with exactly one point per marginal bin.

    Deterministic for a fixed seed.
    """
    if n < 1 or d < 1:
        raise InvalidArgumentError(f"latin hypercube needs n >= 1 and d >= 1, got n={n}, d={d}")
    sampler = qmc.LatinHypercube(d=d, seed=np.random.default_rng(seed))
    return sampler.random(n)


def scale_to_bounds(unit: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float)
    return bounds[:, 0] + np.asarray(unit) * (bounds[:, 1] - bounds[:, 0])


def scale_to_unit(x: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float)
    return (np.asarray(x) - bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass
class Archive:
    """Evaluation history of one run, in evaluation order.

    Entries are append-only. Identical decision vectors are rejected because
    they make the GP kernel matrix singular.
    """

    D: int
    M: int
    _x: list = field(default_factory=list, repr=False)
    _y: list = field(default_factory=list, repr=False)
    phases: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self._x)

    @property
    def X(self) -> np.ndarray:
        return np.array(self._x, dtype=float).reshape(len(self), self.D)

    @property
    def Y(self) -> np.ndarray:
        return np.array(self._y, dtype=float).reshape(len(self), self.M)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return any(np.array_equal(x, row) for row in self._x)

    def append(self, x, y, phase: str = ACQUIRED) -> None:
        x = np.asarray(x, dtype=float).copy()
        y = np.asarray(y, dtype=float).copy()
        if x.shape != (self.D,):
            raise DimensionError(f"decision vector has shape {x.shape}, expected ({self.D},)")
        if y.shape != (self.M,):
            raise DimensionError(f"objective vector has shape {y.shape}, expected ({self.M},)")
        if not np.all(np.isfinite(y)):
            raise InvalidArgumentError(f"objective vector is not finite: {y}")
        if phase not in PHASES:
            raise InvalidArgumentError(f"unknown phase tag {phase!r}")
        if self.contains(x):
            raise DuplicatePointError(f"decision vector {x} is already in the archive")
        self._x.append(x)
        self._y.append(y)
        self.phases.append(phase)

    def header(self) -> list[str]:
        return [f"x{i}" for i in range(self.D)] + [f"f{j}" for j in range(self.M)] + ["phase"]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header())
            for x, y, phase in zip(self._x, self._y, self.phases):
                writer.writerow([_fmt(v) for v in x] + [_fmt(v) for v in y] + [phase])

    @classmethod
    def from_csv(cls, path) -> Archive:
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        D = sum(1 for h in header if h.startswith("x"))
        M = sum(1 for h in header if h.startswith("f"))
        archive = cls(D=D, M=M)
        for row in body:
            archive.append([float(v) for v in row[:D]], [float(v) for v in row[D : D + M]], row[-1])
        return archive
