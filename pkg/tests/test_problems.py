import numpy as np
import pytest

from monobo.core import nondominated_set
from monobo.errors import DimensionError, InvalidArgumentError
from monobo.problems import BENCHMARKS, get_problem, true_front


def test_zdt1_closed_form():
    p = get_problem("zdt1", 10)
    np.testing.assert_allclose(p(np.zeros(10)), [0.0, 1.0])
    np.testing.assert_allclose(p(np.eye(10)[0]), [1.0, 0.0])


def test_dtlz2_on_unit_circle(rng):
    p = get_problem("dtlz2", 10)
    for _ in range(10):
        x = np.full(10, 0.5)
        x[0] = rng.random()
        f = p(x)
        assert abs(f[0] ** 2 + f[1] ** 2 - 1.0) < 1e-12


def test_evaluate_errors():
    p = get_problem("zdt1", 4)
    with pytest.raises(InvalidArgumentError):
        p([1.5, 0, 0, 0])
    with pytest.raises(DimensionError):
        p([0.5, 0, 0])
    with pytest.raises(InvalidArgumentError):
        get_problem("wfg1")


def test_zdt4_bounds():
    p = get_problem("zdt4", 5)
    np.testing.assert_array_equal(p.bounds[0], [0, 1])
    np.testing.assert_array_equal(p.bounds[1:], [[-5, 5]] * 4)


def test_true_front_examples():
    np.testing.assert_allclose(true_front(get_problem("zdt1"), 3), [[0, 1], [0.25, 0.5], [1, 0]])
    with pytest.raises(InvalidArgumentError):
        true_front(get_problem("zdt1"), 1)


@pytest.mark.parametrize("name", BENCHMARKS)
def test_true_front_mutually_nondominated(name):
    front = true_front(get_problem(name), 501)
    assert len(nondominated_set(front)) == len(front)


def test_dtlz7_front_membership():
    p = get_problem("dtlz7", 6)
    front = true_front(p, 400)
    f1 = front[:, 0]
    np.testing.assert_allclose(front[:, 1], 4 - f1 * (1 + np.sin(3 * np.pi * f1)), atol=1e-12)
    # dense rejection sample of the optimal manifold: distance variables at zero
    r = np.random.default_rng(0)
    X = np.zeros((20000, 6))
    X[:, 0] = r.random(20000)
    dense = np.array([p(x) for x in X])
    dense = dense[nondominated_set(dense)]
    for y in front:
        assert not np.any(np.all(dense + 1e-3 <= y, axis=1))


@pytest.mark.parametrize("name", BENCHMARKS)
def test_evaluations_are_weakly_dominated_by_front(name):
    p = get_problem(name, 6)
    front = true_front(p, 20001)
    r = np.random.default_rng(1)
    for _ in range(30):
        y = p(r.uniform(p.bounds[:, 0], p.bounds[:, 1]))
        assert np.all(np.isfinite(y))
        assert np.any(np.all(front <= y + 1e-3, axis=1))


def test_deterministic(rng):
    p = get_problem("zdt3", 5)
    x = rng.random(5)
    np.testing.assert_array_equal(p(x), p(x))
