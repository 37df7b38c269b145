"""ZDT and DTLZ benchmark problems (two objectives) with analytic Pareto fronts.

Definitions follow Zitzler, Deb & Thiele (2000) and Deb et al. (2002). DTLZ
problems use ``k = D - M + 1`` distance variables.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .core import nondominated_set
from .errors import DimensionError, InvalidArgumentError

# min over x in [0, 1] of 1 - exp(-4x) sin^6(6 pi x)
ZDT6_F1_MIN = 0.2807753191


@dataclass(frozen=True)
class Problem:
    name: str
    D: int
    M: int
    bounds: np.ndarray
    fn: Callable[[np.ndarray], np.ndarray]
    front_fn: Callable[[int], np.ndarray] | None = None

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)


def evaluate(problem: Problem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.D,):
        raise DimensionError(f"{problem.name} expects {problem.D} variables, got shape {x.shape}")
    lo, hi = problem.bounds[:, 0], problem.bounds[:, 1]
    if np.any(x < lo) or np.any(x > hi):
        raise InvalidArgumentError(f"{x} lies outside the bounds of {problem.name}")
    return np.asarray(problem.fn(x), dtype=float)


def true_front(problem: Problem, n: int) -> np.ndarray:
    """``n`` (or fewer, for disconnected fronts) points on the analytic Pareto front."""
    if problem.front_fn is None:
        raise InvalidArgumentError(f"{problem.name} has no analytic Pareto front")
    if n < 2:
        raise InvalidArgumentError("true_front needs n >= 2")
    return problem.front_fn(n)


def _zdt_g(x):
    return 1.0 + 9.0 * np.sum(x[1:]) / (len(x) - 1)


def zdt1(x):
    g = _zdt_g(x)
    return np.array([x[0], g * (1.0 - np.sqrt(x[0] / g))])


def zdt2(x):
    g = _zdt_g(x)
    return np.array([x[0], g * (1.0 - (x[0] / g) ** 2)])


def zdt3(x):
    g = _zdt_g(x)
    r = x[0] / g
    return np.array([x[0], g * (1.0 - np.sqrt(r) - r * np.sin(10 * np.pi * x[0]))])


def zdt4(x):
    g = 1.0 + 10 * (len(x) - 1) + np.sum(x[1:] ** 2 - 10 * np.cos(4 * np.pi * x[1:]))
    return np.array([x[0], g * (1.0 - np.sqrt(x[0] / g))])


def zdt6(x):
    f1 = 1.0 - np.exp(-4 * x[0]) * np.sin(6 * np.pi * x[0]) ** 6
    g = 1.0 + 9.0 * (np.sum(x[1:]) / (len(x) - 1)) ** 0.25
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


def _rastrigin_g(xm):
    return 100.0 * (len(xm) + np.sum((xm - 0.5) ** 2 - np.cos(20 * np.pi * (xm - 0.5))))


def _sphere_g(xm):
    return np.sum((xm - 0.5) ** 2)


def dtlz1(x):
    g = _rastrigin_g(x[1:])
    return np.array([0.5 * x[0] * (1 + g), 0.5 * (1 - x[0]) * (1 + g)])


def _circle(theta, g):
    return np.array([(1 + g) * np.cos(theta * np.pi / 2), (1 + g) * np.sin(theta * np.pi / 2)])


def dtlz2(x):
    return _circle(x[0], _sphere_g(x[1:]))


def dtlz3(x):
    return _circle(x[0], _rastrigin_g(x[1:]))


def dtlz4(x, alpha=100.0):
    return _circle(x[0] ** alpha, _sphere_g(x[1:]))


def dtlz7(x):
    g = 1.0 + 9.0 * np.mean(x[1:])
    f1 = x[0]
    h = 2.0 - f1 / (1 + g) * (1 + np.sin(3 * np.pi * f1))
    return np.array([f1, (1 + g) * h])


def _filtered(front):
    return front[nondominated_set(front)]


def _front_sqrt(n):
    t = np.linspace(0.0, 1.0, n)
    return np.column_stack([t**2, 1.0 - t])


def _front_concave(lo=0.0):
    def sample(n):
        f1 = np.linspace(lo, 1.0, n)
        return np.column_stack([f1, 1.0 - f1**2])

    return sample


def _disconnected(h, n, dense=1_000_001):
    """Uniform ``f1`` samples of the curve ``(f1, h(f1))`` kept only where no
    smaller ``f1`` on a dense grid reaches a lower ``h``."""
    grid = np.linspace(0.0, 1.0, dense)
    running = np.minimum.accumulate(h(grid))
    f1 = np.linspace(0.0, 1.0, n)
    f2 = h(f1)
    before = np.searchsorted(grid, f1, side="left") - 1
    best_before = np.where(before >= 0, running[np.maximum(before, 0)], np.inf)
    keep = f2 <= best_before
    return _filtered(np.column_stack([f1[keep], f2[keep]]))


def _front_zdt3(n):
    return _disconnected(lambda f1: 1.0 - np.sqrt(f1) - f1 * np.sin(10 * np.pi * f1), n)


def _front_linear(n):
    f1 = np.linspace(0.0, 0.5, n)
    return np.column_stack([f1, 0.5 - f1])


def _front_circle(n):
    theta = np.linspace(0.0, np.pi / 2, n)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def _front_dtlz7(n):
    return _disconnected(lambda f1: 4.0 - f1 * (1 + np.sin(3 * np.pi * f1)), n)


_SUITE = {
    "zdt1": (zdt1, _front_sqrt, "zdt"),
    "zdt2": (zdt2, _front_concave(), "zdt"),
    "zdt3": (zdt3, _front_zdt3, "zdt"),
    "zdt4": (zdt4, _front_sqrt, "zdt4"),
    "zdt6": (zdt6, _front_concave(ZDT6_F1_MIN), "zdt"),
    "dtlz1": (dtlz1, _front_linear, "dtlz"),
    "dtlz2": (dtlz2, _front_circle, "dtlz"),
    "dtlz3": (dtlz3, _front_circle, "dtlz"),
    "dtlz4": (dtlz4, _front_circle, "dtlz"),
    "dtlz7": (dtlz7, _front_dtlz7, "dtlz"),
}

BENCHMARKS = tuple(_SUITE)


def get_problem(name: str, D: int = 10) -> Problem:
    """Look up a problem by name, e.g. ``"zdt1"`` or ``"dtlz7"``."""
    key = name.lower()
    if key == "aerofoil":
        from .aerofoil import aerofoil_problem

        return aerofoil_problem()
    if key not in _SUITE:
        raise InvalidArgumentError(f"unknown problem {name!r}; choose from {sorted(_SUITE)} or 'aerofoil'")
    if D < 2:
        raise InvalidArgumentError("benchmark problems need D >= 2")
    fn, front_fn, family = _SUITE[key]
    bounds = np.tile([0.0, 1.0], (D, 1))
    if family == "zdt4":
        bounds[1:] = [-5.0, 5.0]
    return Problem(name=key, D=D, M=2, bounds=bounds, fn=fn, front_fn=front_fn)
