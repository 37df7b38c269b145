import json

import numpy as np
import pytest

from conftest import brute_nondominated
from monobo.errors import InvalidArgumentError
from monobo.hypervolume import hypervolume
from monobo.metrics import (
    EafGrid,
    eaf,
    eaf_difference,
    hv_percent,
    integrated_eaf_difference,
    metric_reference,
    nds_size,
    union_bounds,
)
from monobo.problems import get_problem, true_front


def test_hv_percent_examples():
    p = get_problem("zdt1", 5)
    assert hv_percent(true_front(p, 1000), p) == pytest.approx(100.0, abs=0.5)
    assert hv_percent([[5.0, 5.0]], p) == 0.0
    assert hv_percent(np.empty((0, 2)), p) == 0.0
    half = true_front(p, 1000)[::2]
    ref = metric_reference(p)
    assert hv_percent(half, p) == pytest.approx(100 * hypervolume(half, ref.ref) / ref.hv_true, rel=1e-12)


def test_reference_modes():
    p = get_problem("zdt2", 5)
    r = metric_reference(p, "range")
    np.testing.assert_allclose(r.ref, r.nadir + 0.1 * (r.nadir - r.ideal))
    np.testing.assert_allclose(metric_reference(p, "literal").ref, 1.1 * r.nadir)
    with pytest.raises(InvalidArgumentError):
        metric_reference(p, "bogus")


def test_hv_percent_subset_monotone(rng):
    p = get_problem("zdt1", 5)
    pts = rng.random((40, 2)) * [1.0, 1.5]
    sub = pts[rng.permutation(40)[:15]]
    assert hv_percent(sub, p) <= hv_percent(pts, p)


def test_nds_size():
    assert nds_size(np.empty((0, 2))) == 0
    assert nds_size([[0, 1], [1, 0], [2, 2]]) == 2
    pts = np.random.default_rng(3).random((50, 2))
    assert nds_size(pts) == len(brute_nondominated(pts.tolist()))


def _brute_eaf(fronts, axes):
    out = np.zeros([len(a) for a in axes])
    for idx in np.ndindex(out.shape):
        point = np.array([axes[k][i] for k, i in enumerate(idx)])
        out[idx] = np.mean([any(np.all(p <= point) for p in f) for f in fronts])
    return out


def test_eaf_examples(rng):
    fronts = [rng.random((5, 2)) for _ in range(3)]
    grid = eaf(fronts, [(0, 1), (0, 1)], resolution=10)
    np.testing.assert_array_equal(grid.cells, _brute_eaf(fronts, grid.axes))
    single = eaf(fronts[:1], [(0, 1), (0, 1)], 10)
    assert set(np.unique(single.cells)) <= {0.0, 1.0}
    corner = eaf(fronts, [(-2, -1), (-2, -1)], 4)
    assert np.all(corner.cells == 0)
    far = eaf(fronts, [(2, 3), (2, 3)], 4)
    assert np.all(far.cells == 1)


def test_eaf_three_objectives_matches_brute_force(rng):
    fronts = [rng.random((4, 3)) for _ in range(4)]
    grid = eaf(fronts, [(0, 1)] * 3, resolution=6)
    np.testing.assert_array_equal(grid.cells, _brute_eaf(fronts, grid.axes))


def test_eaf_invariants(rng):
    fronts = [rng.random((8, 2)) for _ in range(5)]
    grid = eaf(fronts, union_bounds(fronts), 64)
    assert np.allclose(grid.cells * 5, np.round(grid.cells * 5))
    assert np.all(np.diff(grid.cells, axis=0) >= 0) and np.all(np.diff(grid.cells, axis=1) >= 0)


def test_integrated_difference(rng):
    a = eaf([rng.random((6, 2))], [(0, 1), (0, 1)], 32)
    b = eaf([rng.random((6, 2))], [(0, 1), (0, 1)], 32)
    assert integrated_eaf_difference(a, a) == 0.0
    assert integrated_eaf_difference(a, b) == pytest.approx(-integrated_eaf_difference(b, a))
    ones = EafGrid(((0, 1), (0, 1)), (8, 8), np.ones((8, 8)), 1)
    zeros = EafGrid(((0, 1), (0, 1)), (8, 8), np.zeros((8, 8)), 1)
    assert integrated_eaf_difference(ones, zeros) == pytest.approx(1.0)
    other = EafGrid(((0, 2), (0, 1)), (8, 8), np.zeros((8, 8)), 1)
    with pytest.raises(InvalidArgumentError):
        integrated_eaf_difference(ones, other)
    with pytest.raises(InvalidArgumentError):
        eaf_difference(ones, EafGrid(((0, 1), (0, 1)), (4, 4), np.zeros((4, 4)), 1))


def test_integrated_difference_stable_under_refinement(rng):
    fa = [rng.random((10, 2)) for _ in range(5)]
    fb = [rng.random((10, 2)) * 1.1 for _ in range(5)]
    box = union_bounds(fa + fb)
    coarse = integrated_eaf_difference(eaf(fa, box, 512), eaf(fb, box, 512))
    fine = integrated_eaf_difference(eaf(fa, box, 2048), eaf(fb, box, 2048))
    assert abs(coarse - fine) <= 0.01 * abs(fine)


def test_eaf_csv_and_sidecar(tmp_path, rng):
    grid = eaf([rng.random((4, 2))], [(0, 1), (0, 2)], (3, 5))
    path = tmp_path / "eaf.csv"
    grid.to_csv(path, method="HYPI")
    rows = path.read_text().splitlines()
    assert len(rows) == 4 and len(rows[0].split(",")) == 6
    meta = json.loads((tmp_path / "eaf.json").read_text())
    assert meta["method"] == "HYPI" and meta["resolution"] == [3, 5] and meta["run_count"] == 1
    np.testing.assert_allclose([float(v) for v in rows[1].split(",")[1:]], grid.cells[0])
