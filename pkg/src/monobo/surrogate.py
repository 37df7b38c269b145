"""Zero-mean Gaussian-process regression with an ARD Matérn-5/2 kernel.

Targets are shifted and scaled before fitting. The shift interpolates between
the archive mean and the archive best through the exploration parameter
``xi``; since the GP prior mean is zero, the shift *is* the prior mean choice
and is how exploration is controlled (rather than through EI jitter).

Inputs are expected in the unit box; lengthscale bounds assume it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.linalg.lapack import dpotri
from scipy.optimize import minimize

from .errors import (
    ConditioningError,
    DimensionError,
    DuplicatePointError,
    EmptyInputError,
    InvalidArgumentError,
)

SQRT5 = np.sqrt(5.0)

NUGGET = 1e-8
MAX_NUGGET = 1e-4
LENGTHSCALE_BOUNDS = (1e-3, 1e2)
SIGNAL_VARIANCE_BOUNDS = (1e-4, 1e2)
N_RESTARTS = 5


@dataclass(frozen=True)
class KernelHyperparameters:
    signal_variance: float
    lengthscales: np.ndarray
    nugget: float = NUGGET

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if self.signal_variance <= 0 or np.any(ls <= 0) or self.nugget <= 0:
            raise InvalidArgumentError("kernel hyperparameters must be strictly positive")

    @property
    def D(self) -> int:
        return self.lengthscales.size

    def to_log(self) -> np.ndarray:
        return np.log(np.append(self.lengthscales, self.signal_variance))

    @classmethod
    def from_log(cls, theta, nugget: float = NUGGET) -> KernelHyperparameters:
        theta = np.asarray(theta, dtype=float)
        return cls(signal_variance=float(np.exp(theta[-1])), lengthscales=np.exp(theta[:-1]), nugget=nugget)

    def as_dict(self) -> dict:
        return {
            "signal_variance": float(self.signal_variance),
            "lengthscales": [float(v) for v in self.lengthscales],
            "nugget": float(self.nugget),
        }


@dataclass(frozen=True)
class NormalisationRecord:
    offset: float
    scale: float
    xi: float

    def apply(self, raw):
        return (np.asarray(raw, dtype=float) - self.offset) / self.scale

    def invert(self, normalised):
        return np.asarray(normalised, dtype=float) * self.scale + self.offset


def _matern_profile(r):
    return (1.0 + SQRT5 * r + 5.0 / 3.0 * r**2) * np.exp(-SQRT5 * r)


def matern52(a, b, hp: KernelHyperparameters) -> float:
    """Matérn-5/2 covariance between two points with per-dimension lengthscales."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape != hp.lengthscales.shape:
        raise DimensionError(f"kernel inputs {a.shape}, {b.shape} do not match lengthscales {hp.lengthscales.shape}")
    r = np.sqrt(np.sum(((a - b) / hp.lengthscales) ** 2))
    return float(hp.signal_variance * _matern_profile(r))


def kernel_matrix(A, B, hp: KernelHyperparameters) -> np.ndarray:
    """Cross-covariance matrix between the rows of ``A`` and ``B`` (no nugget)."""
    A = np.atleast_2d(np.asarray(A, dtype=float)) / hp.lengthscales
    B = np.atleast_2d(np.asarray(B, dtype=float)) / hp.lengthscales
    sq = np.sum(A**2, 1)[:, None] + np.sum(B**2, 1)[None, :] - 2.0 * A @ B.T
    r = np.sqrt(np.maximum(sq, 0.0))
    return hp.signal_variance * _matern_profile(r)


def normalise_targets(raw, xi: float) -> tuple[np.ndarray, NormalisationRecord]:
    """Shift by ``(1 - xi) * mean + xi * min`` and divide by the sample std.

    ``xi = 0`` centres on the mean; ``xi = 1`` puts the best value at zero.
    A (near-)constant vector gets scale 1.
    """
    raw = np.asarray(raw, dtype=float).ravel()
    if raw.size == 0:
        raise EmptyInputError("cannot normalise an empty target vector")
    if not np.all(np.isfinite(raw)):
        raise InvalidArgumentError("targets must be finite")
    offset = (1.0 - xi) * raw.mean() + xi * raw.min()
    std = raw.std(ddof=1) if raw.size > 1 else 0.0
    scale = float(std) if std >= 1e-12 else 1.0
    record = NormalisationRecord(offset=float(offset), scale=scale, xi=float(xi))
    return record.apply(raw), record


@dataclass(frozen=True)
class SurrogateModel:
    train_x: np.ndarray
    train_y_normalised: np.ndarray
    normalisation: NormalisationRecord
    hyperparameters: KernelHyperparameters
    chol: np.ndarray
    alpha: np.ndarray
    log_likelihood: float

    @property
    def D(self) -> int:
        return self.train_x.shape[1]


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    """Per-dimension squared differences, flattened to ``(n * n, D)``."""
    diff = X[:, None, :] - X[None, :, :]
    return (diff**2).reshape(-1, X.shape[1])


def _factorise(K: np.ndarray, nugget: float) -> tuple[np.ndarray, float]:
    n = len(K)
    while nugget <= MAX_NUGGET * (1 + 1e-9):
        try:
            return cholesky(K + nugget * np.eye(n), lower=True, check_finite=False), nugget
        except np.linalg.LinAlgError:
            nugget *= 10.0
    raise ConditioningError("kernel matrix is not positive definite even with the largest nugget")


def _lml_and_grad(theta: np.ndarray, sqdist: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    n = len(y)
    inv_ls2 = np.exp(-2.0 * theta[:-1])
    sf2 = np.exp(theta[-1])
    r = np.sqrt(sqdist @ inv_ls2).reshape(n, n)
    e = np.exp(-SQRT5 * r)
    K = sf2 * (1.0 + SQRT5 * r + 5.0 / 3.0 * r**2) * e
    L, _ = _factorise(K, NUGGET)
    alpha = cho_solve((L, True), y, check_finite=False)
    lml = -0.5 * y @ alpha - np.log(np.diag(L)).sum() - 0.5 * n * np.log(2 * np.pi)
    Kinv, info = dpotri(L, lower=1)
    if info != 0:
        raise ConditioningError("kernel inverse failed")
    Kinv = np.tril(Kinv) + np.tril(Kinv, -1).T
    W = np.outer(alpha, alpha) - Kinv
    # d k / d log(l_d) = sf2 * 5/3 (1 + sqrt5 r) exp(-sqrt5 r) * diff_d^2 / l_d^2
    common = sf2 * 5.0 / 3.0 * (1.0 + SQRT5 * r) * e * W
    grad = np.empty_like(theta)
    grad[:-1] = 0.5 * (common.ravel() @ sqdist) * inv_ls2
    grad[-1] = 0.5 * np.sum(W * K)
    return float(lml), grad


def log_marginal_likelihood(train_x, y, hp: KernelHyperparameters) -> float:
    """Log evidence of the zero-mean GP for targets ``y`` (already normalised)."""
    X = np.asarray(train_x, dtype=float)
    value, _ = _lml_and_grad(hp.to_log(), _pairwise_sq(X), np.asarray(y, dtype=float))
    return value


def log_marginal_likelihood_grad(train_x, y, hp: KernelHyperparameters) -> np.ndarray:
    """Gradient of :func:`log_marginal_likelihood` w.r.t. log-lengthscales then log-signal-variance."""
    X = np.asarray(train_x, dtype=float)
    _, grad = _lml_and_grad(hp.to_log(), _pairwise_sq(X), np.asarray(y, dtype=float))
    return grad


def _log_bounds(D: int) -> list[tuple[float, float]]:
    lo, hi = np.log(LENGTHSCALE_BOUNDS)
    slo, shi = np.log(SIGNAL_VARIANCE_BOUNDS)
    return [(lo, hi)] * D + [(slo, shi)]


def _check_distinct(X: np.ndarray) -> None:
    uniq = np.unique(X, axis=0)
    if len(uniq) != len(X):
        raise DuplicatePointError("training inputs contain duplicate decision vectors")


def fit(train_x, raw_y, xi: float = 0.0, seed: int = 0, n_restarts: int = N_RESTARTS) -> SurrogateModel:
    """Fit hyperparameters by maximising the log marginal likelihood.

    L-BFGS-B on log-parameters with analytic gradients; the first start is
    lengthscale ``0.5 * sqrt(D)`` and unit signal variance, later starts are
    drawn log-uniformly from a central sub-box of the bounds.
    """
    X = np.atleast_2d(np.asarray(train_x, dtype=float))
    raw_y = np.asarray(raw_y, dtype=float).ravel()
    if len(X) != len(raw_y):
        raise DimensionError(f"{len(X)} inputs but {len(raw_y)} targets")
    if len(X) < 2:
        raise InvalidArgumentError("fitting needs at least two training points")
    _check_distinct(X)
    y, record = normalise_targets(raw_y, xi)
    D = X.shape[1]
    sqdist = _pairwise_sq(X)
    bounds = _log_bounds(D)

    rng = np.random.default_rng(seed)
    starts = [np.append(np.full(D, np.log(0.5 * np.sqrt(D))), 0.0)]
    for _ in range(n_restarts - 1):
        ls = rng.uniform(np.log(1e-2), np.log(1e1), size=D)
        sf = rng.uniform(np.log(1e-1), np.log(1e1))
        starts.append(np.append(ls, sf))

    def objective(theta):
        try:
            value, grad = _lml_and_grad(theta, sqdist, y)
        except ConditioningError:
            return 1e25, np.zeros_like(theta)
        return -value, -grad

    best_theta, best_value = None, np.inf
    for theta0 in starts:
        res = minimize(objective, theta0, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": 200})
        value = float(res.fun)
        if np.isfinite(value) and value < best_value:
            best_theta, best_value = res.x, value
    if best_theta is None or best_value >= 1e25:
        raise ConditioningError("no restart produced a factorisable kernel matrix")

    hp = KernelHyperparameters.from_log(best_theta)
    return condition(X, y, record, hp, log_likelihood=-best_value)


def condition(X, y, record: NormalisationRecord, hp: KernelHyperparameters, log_likelihood=float("nan")) -> SurrogateModel:
    """Build a model from fixed hyperparameters (no fitting)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    K = kernel_matrix(X, X, hp)
    L, nugget = _factorise(K, hp.nugget)
    hp = KernelHyperparameters(hp.signal_variance, hp.lengthscales, nugget)
    alpha = cho_solve((L, True), y, check_finite=False)
    return SurrogateModel(
        train_x=X,
        train_y_normalised=y,
        normalisation=record,
        hyperparameters=hp,
        chol=L,
        alpha=alpha,
        log_likelihood=float(log_likelihood),
    )


def predict(model: SurrogateModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance in normalised target space.

    ``x`` may be one point ``(D,)`` or a batch ``(m, D)``; scalars are returned
    for a single point.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    Xs = np.atleast_2d(x)
    if Xs.shape[1] != model.D:
        raise DimensionError(f"query has {Xs.shape[1]} dimensions, model has {model.D}")
    hp = model.hyperparameters
    Ks = kernel_matrix(Xs, model.train_x, hp)
    mu = Ks @ model.alpha
    v = solve_triangular(model.chol, Ks.T, lower=True, check_finite=False)
    var = np.maximum(hp.signal_variance - np.sum(v**2, axis=0), 0.0)
    if single:
        return float(mu[0]), float(var[0])
    return mu, var
