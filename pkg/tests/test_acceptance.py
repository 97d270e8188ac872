"""Acceptance checks: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py``; the verdict lines are written
to the terminal even when output capture is on.
"""
import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from mapeval import cli
from mapeval.grid import OccupancyGrid, parse_pgm, write_pgm
from mapeval.imgproc import (
    connected_components,
    gaussian_smooth,
    harris_response,
    laplacian,
    laplacian_of_gaussian,
    otsu_threshold,
    trace_contours,
)
from mapeval.metrics import (
    MetricParams,
    corner_count,
    enclosed_area_count,
    evaluate_map,
    occupied_proportion,
)
from mapeval.report import EvaluationSummary, SummaryEntry, render
from mapeval.synthetic import room_vertices, single_room, two_rooms
from mapeval.trajectory import RunStatistics, Trajectory, aggregate_runs, associate, rmse

from .fixtures import build_tree
from .oracles import (
    LAPLACE5,
    convolve2d_reflect,
    enclosed_background,
    flood_components,
    otsu_exhaustive_int,
)


@pytest.fixture
def verdict(request, capsys):
    """Yield a recorder; after the test print ``PASS``/``FAIL`` with its notes."""
    notes = []
    yield notes.append
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    with capsys.disabled():
        detail = f" ({'; '.join(notes)})" if notes else ""
        print(f"\n[{'PASS' if ok else 'FAIL'}] {request.node.name}{detail}")


def random_shape(rng, max_side=64):
    return int(rng.integers(1, max_side + 1)), int(rng.integers(1, max_side + 1))


def random_intensity(rng):
    h, w = random_shape(rng)
    kind = rng.integers(4)
    if kind == 0:
        img = rng.random((h, w))
    elif kind == 1:
        img = rng.integers(0, 5, size=(h, w)) / 4.0
    elif kind == 2:
        img = np.where(rng.random((h, w)) < 0.3, rng.normal(0.8, 0.05, (h, w)), rng.normal(0.2, 0.1, (h, w)))
    else:
        img = rng.integers(0, 256, size=(h, w)) / 255.0
    return img


def random_binary(rng):
    h, w = random_shape(rng)
    return rng.random((h, w)) < rng.uniform(0.2, 0.8)


def test_criterion_01_otsu_oracle(verdict):
    rng = np.random.default_rng(1)
    images = [random_intensity(rng) for _ in range(500)]
    t0 = time.perf_counter()
    results = [otsu_threshold(img, 256) for img in images]
    elapsed = time.perf_counter() - t0
    checked = 0
    for img, res in zip(images, results):
        if np.ptp(img) == 0:
            assert res.degenerate
            continue
        assert (res.bin_index, res.threshold) == otsu_exhaustive_int(img, 256)
        checked += 1
    verdict(f"{checked} non-constant images exact, {elapsed:.2f} s")
    assert elapsed < 10.0


def test_criterion_02_contour_holes_oracle(verdict):
    rng = np.random.default_rng(2)
    images = [random_binary(rng) for _ in range(500)]
    t0 = time.perf_counter()
    hiers = [trace_contours(img) for img in images]
    elapsed = time.perf_counter() - t0
    total = 0
    for img, hier in zip(images, hiers):
        expected = len(enclosed_background(img))
        assert hier.hole_count == expected
        total += expected
    verdict(f"500 images, {total} holes, {elapsed:.2f} s")
    assert elapsed < 30.0


@pytest.mark.parametrize("connectivity", [4, 8])
def test_criterion_03_components_oracle(connectivity, verdict):
    rng = np.random.default_rng(3 + connectivity)
    for _ in range(500):
        img = random_binary(rng)
        comps = connected_components(img, connectivity)
        labels, sizes = flood_components(img, connectivity)
        assert comps.count == len(sizes)
        assert np.array_equal(comps.labels, labels)
        assert np.array_equal(comps.sizes, sizes)
    verdict(f"500 images, {connectivity}-connectivity")


def _max_vertex_distance(corners, rooms):
    verts = room_vertices(rooms)
    return max(int(np.abs(verts - [c.y, c.x]).max(axis=1).min()) for c in corners)


def test_criterion_04_synthetic_rooms(verdict):
    params = MetricParams()
    assert params.corner.min_blob_size == 8
    dots = [(9, 9), (12, 20), (18, 12), (21, 26), (14, 30)]
    cases = [
        ("one room", single_room(), 4, 1),
        ("one room + 5 dots", single_room(dots=dots), 4, 1),
        ("two rooms", two_rooms(), 8, 2),
        ("two rooms + 5 dots", two_rooms(dots=[(9, 9), (14, 20), (20, 40), (10, 50), (18, 30)]), 8, 2),
    ]
    for name, (grid, rooms), corners, enclosed in cases:
        cres = corner_count(grid, params.corner)
        eres = enclosed_area_count(grid, params.enclosed)
        assert (cres.count, eres.count) == (corners, enclosed), name
        dist = _max_vertex_distance(cres.corners, rooms)
        assert dist <= 2, name
        verdict(f"{name}: {cres.count} corners (max offset {dist} px), {eres.count} enclosed")


def test_criterion_05_proportion(verdict):
    occ = np.full((10, 10), 0.1)
    occ.flat[:20] = 0.9
    res = occupied_proportion(OccupancyGrid(occ))
    assert res.threshold == 0.26
    assert res.proportion == 0.20
    rng = np.random.default_rng(5)
    for _ in range(300):
        h, w = random_shape(rng, 32)
        g = rng.random((h, w))
        g[rng.random((h, w)) < rng.random()] = np.nan
        r = occupied_proportion(OccupancyGrid(g))
        assert r.occupied_cells + r.free_cells + r.unknown_cells == h * w
        assert 0.0 <= r.proportion <= 1.0
    verdict("threshold 0.26, proportion 0.2, 300 random grids sum to w*h")


def test_criterion_06_rmse_and_table_format(verdict):
    t = np.arange(50) * 0.1
    xy = np.c_[np.cos(t) * 4, np.sin(t) * 3]
    gt = Trajectory.from_arrays(t, xy[:, 0], xy[:, 1])
    assert abs(rmse(associate(gt, gt))) <= 1e-12
    est = Trajectory.from_arrays(t, xy[:, 0] + 3, xy[:, 1] + 4)
    assert abs(rmse(associate(est, gt)) - 5.0) <= 1e-9
    stats = aggregate_runs([1, 2, 3])
    assert abs(stats.mean - 2.0) <= 1e-12 and abs(stats.stddev - 1.0) <= 1e-12

    entry = SummaryEntry("alg", "seq", (), {}, RunStatistics((), 0.239, 0.011))
    html = render(EvaluationSummary((entry,)), "html")
    assert "<td>0.239 ± 0.011</td>" in html
    verdict("rmse 0 / 5.0, aggregate 2.0 +/- 1.0, cell '0.239 ± 0.011'")


def test_criterion_07_kernel_numerics(verdict):
    for c in (0.0, 0.37, 1.0, 205 / 255):
        img = np.full((20, 17), c)
        assert np.max(np.abs(laplacian_of_gaussian(img, 2.0))) <= 1e-9
        assert np.array_equal(gaussian_smooth(img, 1.3), img)
        assert not np.any(harris_response(img))
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        img = rng.random((16, 16))
        diff = np.max(np.abs(laplacian(img) - convolve2d_reflect(img, LAPLACE5)))
        worst = max(worst, float(diff))
    assert worst <= 1e-9
    verdict(f"max Laplacian deviation {worst:.1e}")


def _batch_json(root, out):
    code = cli.main(["batch", str(root), "-o", str(out)])
    assert code == 0
    return (out / "summary.json").read_bytes()


def test_criterion_08_batch_determinism(tmp_path, monkeypatch, verdict):
    root = build_tree(tmp_path / "tree", ("alg_a", "alg_b"), ("seq1", "seq2"), runs=3)
    first = _batch_json(root, tmp_path / "out1")
    second = _batch_json(root, tmp_path / "out2")
    assert first == second

    original = Path.iterdir
    rnd = random.Random(8)

    def shuffled(self):
        items = list(original(self))
        rnd.shuffle(items)
        return iter(items)

    monkeypatch.setattr(Path, "iterdir", shuffled)
    for k in range(3):
        assert _batch_json(root, tmp_path / f"shuf{k}") == first
    data = json.loads(first)
    assert len(data["entries"]) == 4 and all(len(e["runs"]) == 3 for e in data["entries"])
    verdict(f"{len(first)} identical bytes over 5 runs, 3 with shuffled listing")


def test_criterion_09_pgm_roundtrip(verdict):
    rng = np.random.default_rng(9)
    levels = np.array([v for v in range(256) if v != 205])
    for _ in range(100):
        h, w = random_shape(rng, 40)
        vals = 1 - rng.choice(levels, size=(h, w)) / 255.0
        vals[rng.random((h, w)) < 0.2] = np.nan
        grid = OccupancyGrid(vals)
        assert parse_pgm(write_pgm(grid)) == grid
    for _ in range(10):
        h, w = random_shape(rng, 20)
        raw = rng.integers(0, 256, size=(h, w))
        p5 = f"P5\n{w} {h}\n255\n".encode() + raw.astype(np.uint8).tobytes()
        body = "\n".join(" ".join(str(v) for v in row) for row in raw)
        p2 = f"P2\n# same raster\n{w} {h}\n255\n{body}\n".encode()
        assert parse_pgm(p2) == parse_pgm(p5)
    verdict("100 lattice grids round-trip, 10 P2/P5 pairs agree")


def test_criterion_10_unknown_gap(verdict):
    grid, rooms = two_rooms()
    mid = rooms[0][3]
    top, bottom = rooms[0][0], rooms[0][2]
    gap = [(r, mid) for r in range(top + 3, bottom - 2)]
    grid, _ = two_rooms(unknown_cells=gap)
    res = enclosed_area_count(grid)
    per_u = dict(res.per_u)
    assert per_u[1.0] == 2
    assert res.count == 2 and res.best_u == 1.0
    report = evaluate_map(grid).to_dict()
    assert [list(p) for p in res.per_u] == report["enclosed_per_u"]
    curve = " ".join(f"{u:g}:{c}" for u, c in res.per_u)
    verdict(f"gap of {len(gap)} cells, per-u {curve}")
