"""Mono-surrogate infill criteria: xHVI and HypI.

Both map every archive entry to one scalar so a single GP can model it.
Values are recomputed from scratch for the whole archive whenever the
archive changes, because shell membership of old entries shifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Archive, nondominated_set, pareto_shells
from .hypervolume import hv_contributions, hvi_batch_2d, hvi_minus, hvi_minus_batch_2d, hypervolume
from .surrogate import NormalisationRecord, normalise_targets

XHVI = "XHVI"
HYPI = "HYPI"


@dataclass(frozen=True)
class ScalarisedArchive:
    method: str
    ref: np.ndarray
    scalar_fitness: np.ndarray
    normalised_objs: np.ndarray
    base: Archive | None = None


def normalise_objectives(Y, xi: float = 0.0) -> tuple[np.ndarray, list[NormalisationRecord]]:
    """Apply target normalisation independently to each objective column."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    cols, records = [], []
    for j in range(Y.shape[1]):
        col, rec = normalise_targets(Y[:, j], xi)
        cols.append(col)
        records.append(rec)
    return np.column_stack(cols), records


def _prepare(data, ref, xi, normalise):
    base = data if isinstance(data, Archive) else None
    Y = data.Y if base is not None else np.atleast_2d(np.asarray(data, dtype=float))
    objs = normalise_objectives(Y, xi)[0] if normalise else Y
    ref = np.ones(objs.shape[1]) if ref is None else np.asarray(ref, dtype=float)
    return base, objs, ref


def xhvi_values(objs, ref) -> np.ndarray:
    """Per-entry xHVI: own HV contribution if non-dominated, minus the front's HV measured from the entry otherwise."""
    objs = np.atleast_2d(np.asarray(objs, dtype=float))
    ref = np.asarray(ref, dtype=float)
    plus = hv_contributions(objs, ref)
    front = objs[nondominated_set(objs)]
    if objs.shape[1] == 2:
        minus = hvi_minus_batch_2d(front, objs)
    else:
        minus = np.array([hvi_minus(front, y) for y in objs])
    return plus - minus


def hypi_values(objs, ref) -> np.ndarray:
    """Per-entry HypI: HV of the next shell together with the entry."""
    objs = np.atleast_2d(np.asarray(objs, dtype=float))
    ref = np.asarray(ref, dtype=float)
    shells = pareto_shells(objs)
    out = np.empty(len(objs))
    for k, idx in enumerate(shells):
        nxt = objs[shells[k + 1]] if k + 1 < len(shells) else np.empty((0, objs.shape[1]))
        if objs.shape[1] == 2:
            out[idx] = hypervolume(nxt, ref) + hvi_batch_2d(nxt, objs[idx], ref)
        else:
            out[idx] = [hypervolume(np.vstack([nxt, objs[i]]), ref) for i in idx]
    return out


def xhvi_all(data, ref=None, xi: float = 0.0, normalise: bool = True) -> ScalarisedArchive:
    """xHVI for every entry of an archive (or ``(n, M)`` objective array).

    Objectives are normalised per column with ``xi`` first unless
    ``normalise`` is False; ``ref`` defaults to the all-ones point.
    """
    base, objs, ref = _prepare(data, ref, xi, normalise)
    return ScalarisedArchive(XHVI, ref, xhvi_values(objs, ref), objs, base)


def hypi_all(data, ref=None, xi: float = 0.0, normalise: bool = True) -> ScalarisedArchive:
    """HypI for every entry; same normalisation rules as :func:`xhvi_all`."""
    base, objs, ref = _prepare(data, ref, xi, normalise)
    return ScalarisedArchive(HYPI, ref, hypi_values(objs, ref), objs, base)


SCALARISERS = {XHVI: xhvi_all, HYPI: hypi_all}


def scalar_targets_for_gp(s: ScalarisedArchive, xi: float = 0.0) -> np.ndarray:
    # Negate: larger hypervolume contribution must become a smaller (better) target.
    targets, _ = normalise_targets(-np.asarray(s.scalar_fitness), xi)
    return targets
