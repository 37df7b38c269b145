"""Acquisition functions and the inner optimiser that maximises them.

Acquisition callables take a batch of points ``(m, D)`` and return ``(m,)``
values so the finite-difference gradient costs one call per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr

from .errors import DimensionError, InvalidArgumentError
from .hypervolume import hvi_batch_2d, hypervolume
from .surrogate import KernelHyperparameters, SurrogateModel, matern52, predict

EI = "EI"
EHVI = "EHVI"

PERTURBATION = 0.05


@dataclass(frozen=True)
class AcquisitionSpec:
    kind: str = EI
    jitter: float = 0.0
    mc_samples: int = 1000
    restarts: int = 10
    fd_step: float = 1e-6
    maxiter: int = 100

    def __post_init__(self):
        if self.kind not in (EI, EHVI):
            raise InvalidArgumentError(f"unknown acquisition kind {self.kind!r}")
        if self.mc_samples < 1 or self.restarts < 1 or self.fd_step <= 0:
            raise InvalidArgumentError("mc_samples and restarts must be >= 1, fd_step > 0")


def _phi(u):
    return np.exp(-0.5 * u**2) / np.sqrt(2 * np.pi)


def expected_improvement(mu, sigma, y_best: float, zeta: float = 0.0):
    """Closed-form EI for minimisation, with optional jitter ``zeta``.

    Vectorised over ``mu`` and ``sigma``. Where ``sigma == 0`` the improvement
    is deterministic: ``max(y_best + zeta - mu, 0)``.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise InvalidArgumentError("posterior standard deviation must be non-negative")
    gap = y_best + zeta - mu
    safe = np.where(sigma > 0, sigma, 1.0)
    # beyond |u| = 40 both Phi and phi are saturated in double precision
    with np.errstate(over="ignore"):
        u = np.clip(gap / safe, -40.0, 40.0)
    ei = gap * ndtr(u) + safe * _phi(u)
    out = np.where(sigma > 0, ei, np.maximum(gap, 0.0))
    return float(out) if out.ndim == 0 else out


def zeta_equivalent_of_mean_shift(lam: float, x_star, x_train, hp: KernelHyperparameters) -> float:
    """Jitter that reproduces a prior-mean increase ``lam`` with one training point.

    ``lam * (1 - k(x*, x) / k(x, x))``, using the nugget-free kernel. The
    jitter therefore grows with distance from the data instead of acting as a
    constant offset.
    """
    return float(lam * (1.0 - matern52(x_star, x_train, hp) / matern52(x_train, x_train, hp)))


def ehvi_from_moments(mu, sigma, front, ref, z) -> np.ndarray:
    """Monte-Carlo EHVI from per-objective posterior moments.

    ``mu`` and ``sigma`` are ``(m, M)``; ``z`` is a fixed ``(S, M)`` block of
    standard normal draws shared by every query point (common random numbers
    keep the surface deterministic and smooth for gradient estimation).
    """
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    ref = np.asarray(ref, dtype=float)
    m, M = mu.shape
    if z.shape[1] != M or ref.size != M:
        raise DimensionError("sample block, reference point and model count disagree")
    samples = mu[:, None, :] + sigma[:, None, :] * z[None, :, :]
    if M == 2:
        gains = hvi_batch_2d(front, samples.reshape(-1, 2), ref).reshape(m, -1)
        return gains.mean(axis=1)
    front = np.asarray(front, dtype=float).reshape(-1, M)
    base = hypervolume(front, ref)
    out = np.empty(m)
    for i in range(m):
        gains = [max(hypervolume(np.vstack([front, y]), ref) - base, 0.0) for y in samples[i]]
        out[i] = np.mean(gains)
    return out


def standard_normal_block(mc_samples: int, M: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((mc_samples, M))


def ehvi_mc(models: list[SurrogateModel], x, front, ref, mc_samples: int = 1000, seed: int = 0):
    """Expected hypervolume improvement at ``x`` by Monte-Carlo sampling.

    One independent model per objective. Models must share the normalised
    objective space in which ``front`` and ``ref`` are expressed.
    """
    ref = np.asarray(ref, dtype=float)
    if len(models) != ref.size:
        raise DimensionError(f"{len(models)} models for {ref.size} objectives")
    acq = EHVIAcquisition(models, front, ref, standard_normal_block(mc_samples, ref.size, seed))
    x = np.asarray(x, dtype=float)
    values = acq(np.atleast_2d(x))
    return float(values[0]) if x.ndim == 1 else values


class EIAcquisition:
    """EI of a single surrogate against the best normalised target."""

    def __init__(self, model: SurrogateModel, zeta: float = 0.0):
        self.model = model
        self.y_best = float(np.min(model.train_y_normalised))
        self.zeta = zeta

    def __call__(self, X):
        mu, var = predict(self.model, np.atleast_2d(X))
        return expected_improvement(mu, np.sqrt(var), self.y_best, self.zeta)


class EHVIAcquisition:
    """Monte-Carlo EHVI over independent per-objective surrogates."""

    def __init__(self, models: list[SurrogateModel], front, ref, z):
        self.models = models
        self.front = np.asarray(front, dtype=float)
        self.ref = np.asarray(ref, dtype=float)
        self.z = z

    def __call__(self, X):
        X = np.atleast_2d(X)
        moments = [predict(model, X) for model in self.models]
        mu = np.column_stack([m for m, _ in moments])
        sigma = np.column_stack([np.sqrt(v) for _, v in moments])
        return ehvi_from_moments(mu, sigma, self.front, self.ref, self.z)


def _fd_gradient(fn, x: np.ndarray, step: np.ndarray) -> tuple[float, np.ndarray]:
    D = x.size
    offsets = np.diag(step)
    batch = np.vstack([x, x + offsets, x - offsets])
    values = np.asarray(fn(batch), dtype=float)
    grad = (values[1 : D + 1] - values[D + 1 :]) / (2 * step)
    return float(values[0]), grad


def start_points(front_x, bounds, restarts: int, seed: int) -> np.ndarray:
    """Restart locations: perturbed non-dominated decision vectors, topped up uniformly.

    Each restart draws from its own stream seeded by ``(seed, index)``.
    """
    bounds = np.asarray(bounds, dtype=float)
    lo, hi = bounds[:, 0], bounds[:, 1]
    front_x = np.asarray(front_x, dtype=float).reshape(-1, len(bounds))
    chooser = np.random.default_rng([seed, 0xF00D])
    picks = chooser.permutation(len(front_x))[:restarts]
    starts = []
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        if k < len(picks):
            x = front_x[picks[k]] + rng.normal(0.0, PERTURBATION * (hi - lo))
        else:
            x = rng.uniform(lo, hi)
        starts.append(np.clip(x, lo, hi))
    return np.array(starts)


def maximise(fn, starts, bounds, fd_step: float = 1e-6, maxiter: int = 100) -> tuple[np.ndarray, float]:
    """Multi-start L-BFGS-B ascent with central finite-difference gradients.

    Returns the best terminal point; if no restart improves on its start the
    best start point is returned unchanged.
    """
    bounds = np.asarray(bounds, dtype=float)
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    step = fd_step * (bounds[:, 1] - bounds[:, 0])
    start_values = np.asarray(fn(starts), dtype=float)
    best_i = int(np.argmax(start_values))
    best_x, best_v = starts[best_i].copy(), float(start_values[best_i])
    # L-BFGS-B tolerances are absolute for small objectives; rescale so tiny
    # acquisition values still get optimised.
    scale = max(float(np.max(np.abs(start_values))), 1e-300)

    def negated(x):
        value, grad = _fd_gradient(fn, x, step)
        return -value / scale, -grad / scale

    for x0, v0 in zip(starts, start_values):
        res = minimize(
            negated,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": maxiter, "ftol": 1e-12, "gtol": 1e-9},
        )
        x = np.clip(res.x, bounds[:, 0], bounds[:, 1])
        value = float(np.asarray(fn(x[None, :]))[0])
        if value > v0 and value > best_v:
            best_x, best_v = x, value
    return best_x, best_v


def propose_next(spec: AcquisitionSpec, acquisition, front_x, bounds, seed: int) -> tuple[np.ndarray, float]:
    """Next point to evaluate and its acquisition value."""
    starts = start_points(front_x, bounds, spec.restarts, seed)
    return maximise(acquisition, starts, bounds, spec.fd_step, spec.maxiter)
