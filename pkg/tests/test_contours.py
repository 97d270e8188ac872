import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mapeval.imgproc import hole_areas, trace_contours

from .oracles import enclosed_background, euler_holes


def ring(img, top, left, bottom, right):
    img[top, left:right + 1] = img[bottom, left:right + 1] = True
    img[top:bottom + 1, left] = img[top:bottom + 1, right] = True


def is_closed_8_path(points):
    if len(points) == 1:
        return True
    steps = np.diff(np.vstack([points, points[:1]]), axis=0)
    return bool((np.abs(steps).max(axis=1) == 1).all())


def test_filled_square(backend):
    img = np.zeros((8, 8), bool)
    img[2:6, 2:6] = True
    h = trace_contours(img)
    assert (h.outer_count, h.hole_count) == (1, 0)
    assert h.parent.tolist() == [-1]


def test_ring(backend):
    img = np.zeros((10, 10), bool)
    ring(img, 1, 1, 8, 8)
    h = trace_contours(img)
    assert (h.outer_count, h.hole_count) == (1, 1)
    assert h.parent[h.holes()[0]] == 0
    assert hole_areas(img, h).tolist() == [36]


def test_nested_rings(backend):
    img = np.zeros((20, 20), bool)
    ring(img, 1, 1, 18, 18)
    ring(img, 5, 5, 14, 14)
    h = trace_contours(img)
    assert (h.outer_count, h.hole_count) == (2, 2)
    assert euler_holes(img) == 2
    # outer0 > hole1 > outer2 > hole3
    assert h.is_hole.tolist() == [False, True, False, True]
    assert h.parent.tolist() == [-1, 0, 1, 2]


def test_single_pixel_and_border_touching(backend):
    img = np.zeros((3, 3), bool)
    img[1, 1] = True
    h = trace_contours(img)
    assert len(h) == 1 and h.contours[0].tolist() == [[1, 1]]
    full = np.ones((4, 5), bool)
    h = trace_contours(full)
    assert (h.outer_count, h.hole_count) == (1, 0)
    assert len(trace_contours(np.zeros((4, 4), bool))) == 0


def test_diagonal_leak_is_not_a_hole(backend):
    # background touching diagonally only is still enclosed (4-connected background)
    img = np.ones((5, 5), bool)
    img[2, 2] = False
    img[0, 0] = False
    assert trace_contours(img).hole_count == 1
    img = np.zeros((5, 5), bool)
    img[1, 2] = img[2, 1] = img[2, 3] = img[3, 2] = True
    assert trace_contours(img).hole_count == 1
    assert enclosed_background(img) == [1]


def check_hierarchy(img, h):
    H, W = img.shape
    for i, pts in enumerate(h.contours):
        assert len(pts) >= 1
        assert (pts[:, 0] >= 0).all() and (pts[:, 0] < H).all()
        assert (pts[:, 1] >= 0).all() and (pts[:, 1] < W).all()
        assert img[pts[:, 0], pts[:, 1]].all()
        assert is_closed_8_path(pts)
        if h.is_hole[i]:
            assert h.parent[i] >= 0 and not h.is_hole[h.parent[i]]
        # parents precede children, so links cannot form cycles
        assert h.parent[i] < i


@pytest.mark.parametrize("density", [0.3, 0.5, 0.7])
def test_random_hole_counts(backend, density):
    rng = np.random.default_rng(int(density * 10))
    for _ in range(15):
        img = rng.random((rng.integers(1, 40), rng.integers(1, 40))) < density
        h = trace_contours(img)
        oracle = enclosed_background(img)
        assert h.hole_count == len(oracle)
        assert sorted(hole_areas(img, h).tolist()) == sorted(oracle)
        assert h.hole_count == euler_holes(img)
        check_hierarchy(img, h)


@settings(max_examples=60, deadline=None)
@given(arrays(bool, st.tuples(st.integers(1, 24), st.integers(1, 24))))
def test_property_holes_match_flood_fill(img):
    h = trace_contours(img)
    assert h.hole_count == len(enclosed_background(img))
    check_hierarchy(img, h)


def test_backends_agree():
    from mapeval import _accel

    if not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(9)
    img = rng.random((30, 30)) < 0.55
    _accel.USE_NUMBA = True
    try:
        a = trace_contours(img)
        _accel.USE_NUMBA = False
        b = trace_contours(img)
    finally:
        _accel.USE_NUMBA = _accel.HAVE_NUMBA
    assert len(a) == len(b)
    assert all(np.array_equal(x, y) for x, y in zip(a.contours, b.contours))
