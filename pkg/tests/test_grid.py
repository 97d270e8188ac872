import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapeval.grid import (
    CornerRemap,
    EnclosedRemap,
    OccupancyGrid,
    PgmConvention,
    PgmFormatError,
    PgmRangeError,
    PgmTruncatedError,
    parse_pgm,
    to_intensity,
    write_pgm,
)


def test_parse_p5_example():
    data = b"P5\n2 2\n255\n" + bytes([0, 254, 205, 0])
    grid = parse_pgm(data)
    cells = grid.cells()
    assert cells[0] == 1.0
    assert cells[1] == pytest.approx(1 - 254 / 255)
    assert cells[1] == pytest.approx(0.00392, abs=1e-5)
    assert cells[2] is None
    assert cells[3] == 1.0
    assert (grid.width, grid.height) == (2, 2)


def test_parse_p2_single_white_pixel():
    grid = parse_pgm(b"P2\n1 1\n255\n255\n")
    assert grid.cells() == [0.0]


def test_wrong_magic_is_format_error():
    with pytest.raises(PgmFormatError) as info:
        parse_pgm(b"P6\n1 1\n255\n\x00\x00\x00")
    assert info.value.offset == 0
    assert "offset 0" in str(info.value)


def test_header_comments_and_offsets():
    data = b"P5\n# created by map_saver\n3 1 # trailing\n255\n" + bytes([0, 205, 255])
    assert parse_pgm(data).cells() == [1.0, None, 0.0]

    with pytest.raises(PgmFormatError) as info:
        parse_pgm(b"P5\n3 x\n255\n")
    assert info.value.offset == 5


@pytest.mark.parametrize("data", [b"P5\n2 2\n255\n\x00\x00\x00", b"P2\n2 2\n255\n1 2 3\n"])
def test_truncated_raster(data):
    with pytest.raises(PgmTruncatedError):
        parse_pgm(data)


@pytest.mark.parametrize("maxval", [0, 65536])
def test_maxval_out_of_range(maxval):
    with pytest.raises(PgmRangeError):
        parse_pgm(b"P2\n1 1\n%d\n0\n" % maxval)


def test_sample_above_maxval():
    with pytest.raises(PgmRangeError):
        parse_pgm(b"P2\n1 1\n100\n101\n")


def test_write_single_cells():
    occ = OccupancyGrid.from_cells([1.0], 1, 1)
    assert write_pgm(occ)[-1:] == b"\x00"
    unk = OccupancyGrid.from_cells([None], 1, 1)
    assert write_pgm(unk)[-1:] == bytes([205])


def test_write_golden_3x3_free():
    grid = OccupancyGrid(np.zeros((3, 3)))
    data = write_pgm(grid)
    assert data == b"P5\n3 3\n255\n" + bytes([255] * 9)
    assert parse_pgm(data) == grid


def test_write_16bit():
    conv = PgmConvention(unknown_gray=1000, maxval=4000)
    grid = OccupancyGrid.from_cells([0.0, None, 1.0, 0.25], 2, 2)
    data = write_pgm(grid, conv)
    assert data.startswith(b"P5\n2 2\n4000\n")
    assert len(data) == len(b"P5\n2 2\n4000\n") + 8
    assert parse_pgm(data, conv) == grid


def test_sentinel_collision_moves_one_level():
    p = 1 - 205 / 255
    data = write_pgm(OccupancyGrid.from_cells([p], 1, 1))
    assert data[-1] in (204, 206)
    assert parse_pgm(data).cells()[0] is not None


def test_p2_and_p5_agree():
    rng = np.random.default_rng(3)
    raw = rng.integers(0, 256, size=(7, 5))
    p5 = b"P5\n5 7\n255\n" + raw.astype(np.uint8).tobytes()
    rows = "\n".join(" ".join(str(v) for v in row) for row in raw)
    p2 = f"P2\n# ascii\n5 7\n255\n{rows}\n".encode()
    assert parse_pgm(p2) == parse_pgm(p5)


def test_grid_validation():
    with pytest.raises(ValueError):
        OccupancyGrid(np.array([[1.5]]))
    with pytest.raises(ValueError):
        OccupancyGrid(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        OccupancyGrid.from_cells([0.0, 0.0], 3, 1)
    with pytest.raises(ValueError):
        PgmConvention(unknown_gray=300)


def lattice_grids(maxval=255, unknown_gray=205):
    levels = [v for v in range(maxval + 1) if v != unknown_gray]

    @st.composite
    def build(draw):
        h = draw(st.integers(1, 12))
        w = draw(st.integers(1, 12))
        vals = draw(st.lists(st.sampled_from(levels + [None]), min_size=h * w, max_size=h * w))
        cells = [None if v is None else 1 - v / maxval for v in vals]
        return OccupancyGrid.from_cells(cells, w, h)

    return build()


@settings(max_examples=100, deadline=None)
@given(lattice_grids())
def test_roundtrip_on_lattice(grid):
    assert parse_pgm(write_pgm(grid)) == grid


def test_to_intensity_examples():
    grid = OccupancyGrid.from_cells([1.0, None, 0.0], 3, 1)
    assert to_intensity(grid, CornerRemap()).tolist() == [[0.0, 0.0, 1.0]]
    assert to_intensity(OccupancyGrid.from_cells([None], 1, 1), EnclosedRemap(1.0)).tolist() == [[1.0]]
    assert to_intensity(OccupancyGrid.from_cells([0.3], 1, 1), EnclosedRemap(0.5)).tolist() == [[0.3]]


@pytest.mark.parametrize("u", [-0.1, 1.5, math.nan])
def test_enclosed_remap_rejects_bad_u(u):
    with pytest.raises(ValueError):
        EnclosedRemap(u)


@settings(max_examples=50, deadline=None)
@given(lattice_grids(), st.floats(0, 1))
def test_to_intensity_pointwise_and_bounded(grid, u):
    for rule in (CornerRemap(), EnclosedRemap(u)):
        img = to_intensity(grid, rule)
        assert img.shape == grid.shape
        assert img.min() >= 0.0 and img.max() <= 1.0
    img = to_intensity(grid, CornerRemap())
    for (r, c), p in np.ndenumerate(grid.occupancy):
        assert img[r, c] == (0.0 if math.isnan(p) else 1.0 - p)
