import itertools

import numpy as np
import pytest

from monobo.core import nondominated_set
from monobo.errors import DimensionError, InvalidArgumentError
from monobo.hypervolume import (
    hv_2d,
    hv_contributions,
    hv_recursive,
    hvi_batch_2d,
    hvi_minus,
    hvi_minus_batch_2d,
    hvi_plus,
    hypervolume,
)


def inclusion_exclusion(points, ref):
    """Exact HV by inclusion-exclusion over box intersections (small sets only)."""
    pts = [np.asarray(p) for p in points if np.all(np.asarray(p) < ref)]
    total = 0.0
    for k in range(1, len(pts) + 1):
        for combo in itertools.combinations(pts, k):
            corner = np.max(combo, axis=0)
            total += (-1) ** (k + 1) * np.prod(np.maximum(np.asarray(ref) - corner, 0))
    return total


def test_examples():
    assert hypervolume([(0.5, 0.5)], (1, 1)) == pytest.approx(0.25)
    assert hypervolume([(0.25, 0.75), (0.75, 0.25)], (1, 1)) == pytest.approx(0.1875 + 0.1875 - 0.0625)
    assert hypervolume(np.empty((0, 2)), (1, 1)) == 0.0
    assert hypervolume([(1.5, 0.2), (0.2, 1.0)], (1, 1)) == 0.0


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        hypervolume([(0.1, 0.2, 0.3)], (1, 1))


@pytest.mark.parametrize("M", [2, 3, 4])
def test_matches_inclusion_exclusion(rng, M):
    for _ in range(10):
        pts = rng.random((7, M)) * 1.1
        assert hypervolume(pts, np.ones(M)) == pytest.approx(inclusion_exclusion(pts, np.ones(M)), abs=1e-12)


def test_sweep_and_recursive_agree(rng):
    for _ in range(50):
        pts = rng.random((rng.integers(1, 31), 2))
        assert abs(hv_2d(pts, (1, 1)) - hv_recursive(pts, (1, 1))) < 1e-12


def test_properties(rng):
    pts = rng.random((15, 3))
    ref = np.array([1.0, 1.2, 1.1])
    base = hypervolume(pts, ref)
    assert hypervolume(np.vstack([pts, rng.random(3)]), ref) >= base
    shift = rng.normal(size=3)
    assert hypervolume(pts + shift, ref + shift) == pytest.approx(base, rel=1e-12)
    scale = np.array([1.0, 2.5, 1.0])
    assert hypervolume(pts * scale, ref * scale) == pytest.approx(2.5 * base, rel=1e-12)


def test_hvi_plus_examples(rng):
    assert hvi_plus([(0.5, 0.5)], (0.5, 0.5), (1, 1)) == pytest.approx(0.25)
    assert hvi_plus([(0.2, 0.2), (0.5, 0.6)], (0.5, 0.6), (1, 1)) == 0.0
    front = np.array([(0.1, 0.8), (0.4, 0.4), (0.8, 0.1)])
    for x in front:
        rest = [p for p in front if not np.array_equal(p, x)]
        direct = hypervolume(front, (1, 1)) - hypervolume(rest, (1, 1))
        assert hvi_plus(front, x, (1, 1)) == pytest.approx(direct, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        hvi_plus(front, (0.3, 0.3), (1, 1))


@pytest.mark.parametrize("M", [2, 3])
def test_contributions_match_two_call_difference(rng, M):
    ref = np.ones(M)
    for _ in range(10):
        objs = np.round(rng.random((12, M)) * 1.1, 1)  # rounding forces ties/duplicates
        contrib = hv_contributions(objs, ref)
        for i, x in enumerate(objs):
            expected = hypervolume(objs, ref) - hypervolume(np.delete(objs, i, axis=0), ref)
            assert contrib[i] == pytest.approx(expected, abs=1e-12)


def test_duplicates_contribute_nothing():
    objs = np.array([(0.3, 0.3), (0.3, 0.3), (0.1, 0.9)])
    np.testing.assert_allclose(hv_contributions(objs, (1, 1))[:2], 0.0)


def test_hvi_minus_examples():
    assert hvi_minus([(0.2, 0.2)], (0.6, 0.7)) == pytest.approx(0.4 * 0.5)
    assert hvi_minus([(0.2, 0.6), (0.6, 0.2)], (0.1, 0.9)) == 0.0
    assert hvi_minus([(0.2, 0.6), (0.6, 0.2)], (0.2, 0.6)) == 0.0


def test_hvi_minus_partial_domination_counts_only_dominating_members():
    front = [(0.1, 0.5), (0.5, 0.1)]
    x = (0.4, 0.8)  # only (0.1, 0.5) dominates x
    assert hvi_minus(front, x) == pytest.approx(0.3 * 0.3)


def test_batch_helpers_match_scalar_versions(rng):
    for _ in range(20):
        pts = rng.random((15, 2)) * 1.2
        front = pts[nondominated_set(pts)]
        queries = rng.random((30, 2)) * 1.3 - 0.1
        np.testing.assert_allclose(hvi_minus_batch_2d(front, queries), [hvi_minus(front, q) for q in queries], atol=1e-14)
        base = hypervolume(front, (1, 1))
        direct = [hypervolume(np.vstack([front, q]), (1, 1)) - base for q in queries]
        np.testing.assert_allclose(hvi_batch_2d(front, queries, (1, 1)), direct, atol=1e-14)
