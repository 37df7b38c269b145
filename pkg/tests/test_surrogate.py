import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from monobo.errors import DimensionError, DuplicatePointError, EmptyInputError, InvalidArgumentError
from monobo.surrogate import (
    KernelHyperparameters,
    condition,
    fit,
    kernel_matrix,
    log_marginal_likelihood,
    log_marginal_likelihood_grad,
    matern52,
    normalise_targets,
    predict,
)


def dense_posterior(X, y, hp, xs):
    """Posterior mean and variance with an explicit inverse; independent of the Cholesky path."""
    def k(a, b):
        r = np.sqrt(np.sum(((a - b) / hp.lengthscales) ** 2))
        return hp.signal_variance * (1 + np.sqrt(5) * r + 5 * r**2 / 3) * np.exp(-np.sqrt(5) * r)

    K = np.array([[k(a, b) for b in X] for a in X]) + hp.nugget * np.eye(len(X))
    Kinv = np.linalg.inv(K)
    mus, vs = [], []
    for x in xs:
        ks = np.array([k(x, b) for b in X])
        mus.append(ks @ Kinv @ y)
        vs.append(hp.signal_variance - ks @ Kinv @ ks)
    return np.array(mus), np.array(vs)


def test_matern_examples(rng):
    hp = KernelHyperparameters(2.0, [0.3, 0.7])
    a = rng.random(2)
    assert matern52(a, a, hp) == pytest.approx(2.0)
    b = rng.random(2)
    assert matern52(a, b, hp) == matern52(b, a, hp)
    unit = KernelHyperparameters(1.0, [1.0])
    exact = (1 + mpmath.sqrt(5) + mpmath.mpf(5) / 3) * mpmath.exp(-mpmath.sqrt(5))
    assert matern52([0.0], [1.0], unit) == pytest.approx(float(exact), rel=1e-14)


def test_matern_errors():
    with pytest.raises(InvalidArgumentError):
        KernelHyperparameters(0.0, [1.0])
    with pytest.raises(InvalidArgumentError):
        KernelHyperparameters(1.0, [1.0, -0.5])
    with pytest.raises(DimensionError):
        matern52([0.0, 1.0], [0.0, 1.0], KernelHyperparameters(1.0, [1.0]))


def test_kernel_matrix_matches_pointwise(rng):
    hp = KernelHyperparameters(1.3, [0.2, 0.5, 1.1])
    A, B = rng.random((4, 3)), rng.random((5, 3))
    expected = np.array([[matern52(a, b, hp) for b in B] for a in A])
    np.testing.assert_allclose(kernel_matrix(A, B, hp), expected, rtol=1e-12)


def test_normalise_examples():
    out, rec = normalise_targets([1, 2, 3], 0.0)
    assert rec.offset == 2.0 and out.mean() == pytest.approx(0.0)
    assert rec.scale == pytest.approx(1.0)  # sample std of {1,2,3}
    _, rec = normalise_targets([1, 2, 3], 1.0)
    assert rec.offset == 1.0
    out, rec = normalise_targets([5, 5, 5], 0.4)
    assert rec.offset == 5.0 and rec.scale == 1.0 and np.all(out == 0)
    with pytest.raises(EmptyInputError):
        normalise_targets([], 0.0)


@given(arrays(float, st.integers(1, 20), elements=st.floats(-1e3, 1e3)), st.floats(0, 1))
def test_normalise_roundtrip(raw, xi):
    out, rec = normalise_targets(raw, xi)
    assert rec.scale > 0
    np.testing.assert_allclose(rec.invert(out), raw, atol=1e-12 * max(1.0, np.abs(raw).max()))


def test_fit_examples():
    x = np.linspace(0, 1, 12)[:, None]
    y = np.sin(6 * x[:, 0])
    model = fit(x, y, seed=0)
    mu, var = predict(model, x)
    np.testing.assert_allclose(mu, model.train_y_normalised, atol=1e-6)
    assert np.all(var <= 10 * model.hyperparameters.nugget + 1e-12)

    xc = np.random.default_rng(1).random((5, 2))
    const = fit(xc, np.full(5, 3.0), seed=0)
    mu, _ = predict(const, np.random.default_rng(2).random((20, 2)))
    np.testing.assert_allclose(const.normalisation.invert(mu), 3.0, atol=1e-3)


def test_fit_errors():
    with pytest.raises(DuplicatePointError):
        fit(np.array([[0.1], [0.1], [0.5]]), [1.0, 2.0, 3.0])
    with pytest.raises(InvalidArgumentError):
        fit(np.array([[0.1]]), [1.0])


def test_fit_is_deterministic(rng):
    X = rng.random((10, 3))
    y = np.sum(X**2, 1)
    a, b = fit(X, y, seed=7), fit(X, y, seed=7)
    np.testing.assert_array_equal(a.hyperparameters.to_log(), b.hyperparameters.to_log())


def test_predict_matches_dense_solve(rng):
    for n in (3, 8, 20):
        X = rng.random((n, 2))
        y = rng.normal(size=n)
        hp = KernelHyperparameters(1.7, [0.4, 0.9])
        _, rec = normalise_targets(y, 0.0)
        model = condition(X, y, rec, hp)
        xs = rng.random((15, 2))
        mu, var = predict(model, xs)
        mu_d, var_d = dense_posterior(X, y, model.hyperparameters, xs)
        np.testing.assert_allclose(mu, mu_d, atol=1e-8)
        np.testing.assert_allclose(var, np.maximum(var_d, 0), atol=1e-8)


def test_predict_far_away_recovers_prior(rng):
    X = rng.random((6, 2))
    model = fit(X, np.cos(3 * X[:, 0]) + X[:, 1], seed=0)
    mu, var = predict(model, np.array([1e4, 1e4]))
    assert abs(mu) < 1e-6
    assert var == pytest.approx(model.hyperparameters.signal_variance, rel=1e-6)


def test_predict_shape_and_dimension_errors(rng):
    model = fit(rng.random((5, 2)), rng.random(5), seed=0)
    mu, var = predict(model, [0.2, 0.3])
    assert isinstance(mu, float) and isinstance(var, float)
    with pytest.raises(DimensionError):
        predict(model, [0.2, 0.3, 0.4])


def test_predict_is_permutation_invariant(rng):
    X, y = rng.random((9, 2)), rng.random(9)
    hp = KernelHyperparameters(1.0, [0.3, 0.6])
    _, rec = normalise_targets(y, 0.0)
    perm = rng.permutation(9)
    xs = X[:4] + 0.01
    a = predict(condition(X, y, rec, hp), xs)
    b = predict(condition(X[perm], y[perm], rec, hp), xs)
    np.testing.assert_allclose(a[0], b[0], atol=1e-9)
    np.testing.assert_allclose(a[1], b[1], atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_posterior_variance_bounded_by_prior(seed):
    r = np.random.default_rng(seed)
    X = r.random((8, 2))
    hp = KernelHyperparameters(float(r.uniform(0.1, 5)), r.uniform(0.05, 2, size=2))
    _, rec = normalise_targets(r.random(8), 0.0)
    model = condition(X, r.random(8), rec, hp)
    _, var = predict(model, r.random((30, 2)))
    assert np.all(var >= 0)
    assert np.all(var <= hp.signal_variance + hp.nugget)


def test_lml_gradient_matches_finite_differences(rng):
    X = rng.random((15, 3))
    y, _ = normalise_targets(np.sin(4 * X[:, 0]) + X[:, 1] * X[:, 2], 0.0)
    for _ in range(5):
        hp = KernelHyperparameters(float(rng.uniform(0.3, 3)), rng.uniform(0.1, 2, size=3))
        theta = hp.to_log()
        grad = log_marginal_likelihood_grad(X, y, hp)
        h = 1e-6
        fd = np.empty_like(theta)
        for k in range(theta.size):
            up, dn = theta.copy(), theta.copy()
            up[k] += h
            dn[k] -= h
            fd[k] = (
                log_marginal_likelihood(X, y, KernelHyperparameters.from_log(up))
                - log_marginal_likelihood(X, y, KernelHyperparameters.from_log(dn))
            ) / (2 * h)
        np.testing.assert_allclose(grad, fd, rtol=1e-4, atol=1e-6)


def test_fitted_likelihood_beats_random_search(rng):
    X = rng.random((12, 2))
    model = fit(X, np.sin(5 * X[:, 0]) * X[:, 1], seed=3)
    best = model.log_likelihood
    for _ in range(100):
        hp = KernelHyperparameters(
            float(np.exp(rng.uniform(np.log(1e-4), np.log(1e2)))), np.exp(rng.uniform(np.log(1e-3), np.log(1e2), 2))
        )
        try:
            value = log_marginal_likelihood(X, model.train_y_normalised, hp)
        except Exception:
            continue
        assert best >= value - 1e-9
