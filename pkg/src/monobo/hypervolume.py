"""Exact hypervolume and hypervolume-improvement quantities.

Points that do not strictly dominate the reference point contribute nothing.
That is deliberate: in normalised objective space poor solutions regularly
fall outside the reference box and are ranked through :func:`hvi_minus`
instead.
"""

from __future__ import annotations

import numpy as np

from .core import nondominated_set
from .errors import DimensionError, InvalidArgumentError


def _as_points(points, ref) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(ref, dtype=float).ravel()
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return np.empty((0, ref.size)), ref
    pts = pts.reshape(-1, pts.shape[-1]) if pts.ndim > 1 else pts.reshape(1, -1)
    if pts.shape[1] != ref.size:
        raise DimensionError(f"points have {pts.shape[1]} objectives, reference point has {ref.size}")
    return pts, ref


def _inside(pts: np.ndarray, ref: np.ndarray) -> np.ndarray:
    return pts[np.all(pts < ref, axis=1)]


def hv_2d(points, ref) -> float:
    """Two-objective hypervolume by sorting and sweeping, O(n log n)."""
    pts, ref = _as_points(points, ref)
    if ref.size != 2:
        raise DimensionError("hv_2d needs exactly two objectives")
    pts = _inside(pts, ref)
    if len(pts) == 0:
        return 0.0
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    area = 0.0
    ceiling = ref[1]
    for f1, f2 in pts:
        if f2 < ceiling:
            area += (ref[0] - f1) * (ceiling - f2)
            ceiling = f2
    return float(area)


def _limit(pts: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.maximum(pts, p)


def _wfg(pts: np.ndarray, ref: np.ndarray) -> float:
    if len(pts) == 0:
        return 0.0
    if len(pts) == 1:
        return float(np.prod(ref - pts[0]))
    # Sorting by the last objective keeps limit sets small.
    pts = pts[np.argsort(pts[:, -1], kind="stable")]
    total = 0.0
    for k in range(len(pts)):
        p = pts[k]
        incl = float(np.prod(ref - p))
        rest = pts[k + 1 :]
        if len(rest):
            limited = _limit(rest, p)
            limited = limited[np.all(limited < ref, axis=1)]
            if len(limited):
                limited = limited[nondominated_set(limited)]
                limited = np.unique(limited, axis=0)
            incl -= _wfg(limited, ref)
        total += incl
    return total


def hv_recursive(points, ref) -> float:
    """Hypervolume for any number of objectives by WFG-style exclusive slicing."""
    pts, ref = _as_points(points, ref)
    pts = _inside(pts, ref)
    if len(pts) == 0:
        return 0.0
    pts = np.unique(pts[nondominated_set(pts)], axis=0)
    return _wfg(pts, ref)


def hypervolume(points, ref) -> float:
    """Lebesgue measure of the region dominated by ``points`` and bounded by ``ref``."""
    pts, ref = _as_points(points, ref)
    if ref.size == 2:
        return hv_2d(pts, ref)
    return hv_recursive(pts, ref)


def _find_row(objs: np.ndarray, x_obj: np.ndarray) -> int:
    hits = np.flatnonzero(np.all(objs == x_obj, axis=1))
    if hits.size == 0:
        raise InvalidArgumentError(f"{x_obj} is not a member of the archive")
    return int(hits[0])


def hvi_plus(archive_objs, x_obj, ref) -> float:
    """Hypervolume lost when one copy of ``x_obj`` is removed from the archive.

    Always non-negative: ``HV(A, R) - HV(A without x, R)``.
    """
    objs, ref = _as_points(archive_objs, ref)
    x_obj = np.asarray(x_obj, dtype=float)
    row = _find_row(objs, x_obj)
    without = np.delete(objs, row, axis=0)
    return max(hypervolume(objs, ref) - hypervolume(without, ref), 0.0)


def hv_contributions(objs, ref) -> np.ndarray:
    """Exclusive hypervolume contribution of every row of ``objs``.

    Equivalent to calling :func:`hvi_plus` for each row. Two objectives use a
    single sorted sweep; other counts fall back to one HV call per front member.
    """
    objs, ref = _as_points(objs, ref)
    n = len(objs)
    out = np.zeros(n)
    if n == 0:
        return out
    front = nondominated_set(objs)
    front = front[np.all(objs[front] < ref, axis=1)]
    if front.size == 0:
        return out
    if ref.size == 2:
        order = front[np.lexsort((objs[front, 1], objs[front, 0]))]
        f1 = objs[order, 0]
        f2 = objs[order, 1]
        right = np.append(f1[1:], ref[0])
        above = np.insert(f2[:-1], 0, ref[1])
        for k, i in enumerate(order):
            box = (right[k] - f1[k]) * (above[k] - f2[k])
            if box <= 0.0:
                continue
            # dominated entries re-cover part of the box once i is removed
            others = np.maximum(np.delete(objs, i, axis=0), objs[i])
            out[i] = max(box - hv_2d(others, (right[k], above[k])), 0.0)
        return out
    total = hypervolume(objs, ref)
    for i in front:
        out[i] = max(total - hypervolume(np.delete(objs, i, axis=0), ref), 0.0)
    return out


def hvi_minus(pareto_objs, x_obj) -> float:
    """Hypervolume of the front measured with ``x_obj`` as the reference point.

    Zero for any point the front does not strictly dominate in every objective.
    """
    return hypervolume(pareto_objs, x_obj)


def _sorted_front_2d(front: np.ndarray) -> np.ndarray:
    front = np.asarray(front, dtype=float).reshape(-1, 2)
    if len(front) == 0:
        return front
    front = front[nondominated_set(front)]
    return front[np.lexsort((front[:, 1], front[:, 0]))]


def hvi_minus_batch_2d(front, xs) -> np.ndarray:
    """:func:`hvi_minus` for many query points at once, two objectives only."""
    front = _sorted_front_2d(front)
    xs = np.asarray(xs, dtype=float).reshape(-1, 2)
    if len(front) == 0:
        return np.zeros(len(xs))
    f1, f2 = front[:, 0], front[:, 1]
    nxt = np.append(f1[1:], np.inf)
    width = np.minimum(nxt[None, :], xs[:, :1]) - f1[None, :]
    height = xs[:, 1:2] - f2[None, :]
    mask = (f1[None, :] < xs[:, :1]) & (f2[None, :] < xs[:, 1:2])
    return np.where(mask, width * height, 0.0).sum(axis=1)


def hvi_batch_2d(front, ys, ref) -> np.ndarray:
    """Hypervolume improvement ``HV(front + {y}) - HV(front)`` for each row of ``ys``.

    Two objectives only; vectorised over samples for Monte-Carlo EHVI. The
    improvement is the integral over ``u in [y1, r1]`` of ``max(h(u) - y2, 0)``
    where ``h`` is the front's attainment staircase, evaluated from prefix
    sums in O(log n) per sample.
    """
    ref = np.asarray(ref, dtype=float)
    ys = np.asarray(ys, dtype=float).reshape(-1, 2)
    front = np.asarray(front, dtype=float).reshape(-1, 2)
    front = _sorted_front_2d(front[np.all(front < ref, axis=1)]) if len(front) else front
    y1, y2 = ys[:, 0], ys[:, 1]
    inside = (y1 < ref[0]) & (y2 < ref[1])
    if len(front) == 0:
        return np.where(inside, (ref[0] - y1) * (ref[1] - y2), 0.0)
    xs, hs = front[:, 0], front[:, 1]
    cum = np.concatenate([[0.0], np.cumsum(hs[:-1] * np.diff(xs))])

    def integral(u):
        # integral of the staircase from xs[0] to u
        k = np.searchsorted(xs, u, side="right") - 1
        kc = np.maximum(k, 0)
        return np.where(k >= 0, cum[kc] + hs[kc] * (u - xs[kc]), ref[1] * (u - xs[0]))

    k_star = np.searchsorted(-hs, -y2, side="left")
    upper = np.where(k_star < len(xs), xs[np.minimum(k_star, len(xs) - 1)], ref[0])
    upper = np.minimum(upper, ref[0])
    gain = integral(upper) - integral(y1) - y2 * (upper - y1)
    return np.where(inside & (upper > y1), np.maximum(gain, 0.0), 0.0)
