"""Hot loops of the image-processing pipeline.

Every kernel comes in two flavours: an ``*_nb`` loop version compiled with
numba, and an ``*_np`` version that uses vectorised numpy only. The public
dispatchers at the bottom pick one based on ``mapeval._accel.USE_NUMBA``.

Border following (Suzuki-Abe) is inherently sequential and has no
vectorised form; without numba the loop version runs as plain Python.
"""
from __future__ import annotations

import numpy as np

from .. import _accel
from .._accel import njit


def reflect_index(n: int, r: int) -> np.ndarray:
    """Source indices for a length-``n`` axis padded by ``r`` on each side.

    Half-sample symmetric reflection (``d c b a | a b c d | d c b a``),
    repeated as often as needed when ``r >= n``.
    """
    idx = np.arange(-r, n + r)
    period = 2 * n
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - 1 - idx, idx).astype(np.int64)


# --------------------------------------------------------------------------
# separable correlation
#
# Output is formed as x[c] + sum_t w[t] * (x[t] - x[c]) so a constant input is
# reproduced bit-exactly whatever the rounding of sum(w).


@njit
def _correlate_rows_nb(img, weights, idx):
    h, w = img.shape
    ntaps = weights.shape[0]
    r = ntaps // 2
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            center = img[y, x]
            acc = 0.0
            for t in range(ntaps):
                acc += weights[t] * (img[y, idx[x + t]] - center)
            out[y, x] = center + acc
    return out


def _correlate_rows_np(img, weights, idx):
    w = img.shape[1]
    padded = img[:, idx]
    acc = np.zeros_like(img)
    for t in range(weights.shape[0]):
        acc += weights[t] * (padded[:, t:t + w] - img)
    return img + acc


def correlate_separable(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Correlate rows then columns with the same symmetric 1D kernel, reflect borders."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    r = weights.shape[0] // 2
    fn = _correlate_rows_nb if _accel.USE_NUMBA else _correlate_rows_np
    tmp = fn(img, weights, reflect_index(img.shape[1], r))
    tmp = fn(np.ascontiguousarray(tmp.T), weights, reflect_index(img.shape[0], r))
    return np.ascontiguousarray(tmp.T)


# --------------------------------------------------------------------------
# 5-point Laplacian and central-difference gradients


@njit
def _laplacian_nb(img, iy, ix):
    h, w = img.shape
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            c = img[y, x]
            out[y, x] = ((img[iy[y], x] - c) + (img[iy[y + 2], x] - c)) + (
                (img[y, ix[x]] - c) + (img[y, ix[x + 2]] - c)
            )
    return out


def _laplacian_np(img, iy, ix):
    h, w = img.shape
    up = img[iy[:h], :]
    down = img[iy[2:], :]
    left = img[:, ix[:w]]
    right = img[:, ix[2:]]
    return ((up - img) + (down - img)) + ((left - img) + (right - img))


def laplacian5(img: np.ndarray) -> np.ndarray:
    img = np.ascontiguousarray(img, dtype=np.float64)
    iy = reflect_index(img.shape[0], 1)
    ix = reflect_index(img.shape[1], 1)
    fn = _laplacian_nb if _accel.USE_NUMBA else _laplacian_np
    return fn(img, iy, ix)


@njit
def _gradients_nb(img, iy, ix):
    h, w = img.shape
    gx = np.empty((h, w), dtype=np.float64)
    gy = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            gx[y, x] = 0.5 * (img[y, ix[x + 2]] - img[y, ix[x]])
            gy[y, x] = 0.5 * (img[iy[y + 2], x] - img[iy[y], x])
    return gx, gy


def _gradients_np(img, iy, ix):
    h, w = img.shape
    gx = 0.5 * (img[:, ix[2:]] - img[:, ix[:w]])
    gy = 0.5 * (img[iy[2:], :] - img[iy[:h], :])
    return gx, gy


def central_gradients(img: np.ndarray):
    img = np.ascontiguousarray(img, dtype=np.float64)
    iy = reflect_index(img.shape[0], 1)
    ix = reflect_index(img.shape[1], 1)
    fn = _gradients_nb if _accel.USE_NUMBA else _gradients_np
    return fn(img, iy, ix)


# --------------------------------------------------------------------------
# strict local maxima


@njit
def _strict_maxima_nb(resp, thresh, radius):
    h, w = resp.shape
    ys = []
    xs = []
    for y in range(h):
        for x in range(w):
            v = resp[y, x]
            if not (v >= thresh):
                continue
            is_max = True
            for yy in range(max(0, y - radius), min(h, y + radius + 1)):
                for xx in range(max(0, x - radius), min(w, x + radius + 1)):
                    if (yy != y or xx != x) and resp[yy, xx] >= v:
                        is_max = False
                        break
                if not is_max:
                    break
            if is_max:
                ys.append(y)
                xs.append(x)
    return np.array(ys, dtype=np.int64), np.array(xs, dtype=np.int64)


def _strict_maxima_np(resp, thresh, radius):
    h, w = resp.shape
    padded = np.full((h + 2 * radius, w + 2 * radius), -np.inf)
    padded[radius:radius + h, radius:radius + w] = resp
    neigh = np.full((h, w), -np.inf)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            if dy == radius and dx == radius:
                continue
            np.maximum(neigh, padded[dy:dy + h, dx:dx + w], out=neigh)
    ys, xs = np.nonzero((resp >= thresh) & (resp > neigh))
    return ys.astype(np.int64), xs.astype(np.int64)


def strict_local_maxima(resp: np.ndarray, thresh: float, radius: int):
    """Row-major coordinates of pixels >= thresh that beat every other pixel in their window."""
    resp = np.ascontiguousarray(resp, dtype=np.float64)
    if _accel.USE_NUMBA:
        return _strict_maxima_nb(resp, float(thresh), int(radius))
    return _strict_maxima_np(resp, float(thresh), int(radius))


# --------------------------------------------------------------------------
# connected-component labelling


@njit
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit
def _label_nb(fg, eight):
    h, w = fg.shape
    labels = np.zeros((h, w), dtype=np.int64)
    parent = np.zeros(h * w + 1, dtype=np.int64)
    nxt = 1
    if eight:
        dys = np.array([0, -1, -1, -1], dtype=np.int64)
        dxs = np.array([-1, -1, 0, 1], dtype=np.int64)
    else:
        dys = np.array([0, -1], dtype=np.int64)
        dxs = np.array([-1, 0], dtype=np.int64)
    for y in range(h):
        for x in range(w):
            if not fg[y, x]:
                continue
            root = 0
            for k in range(dys.shape[0]):
                ny = y + dys[k]
                nx = x + dxs[k]
                if ny < 0 or nx < 0 or nx >= w or not fg[ny, nx]:
                    continue
                other = _find(parent, labels[ny, nx])
                if root == 0:
                    root = other
                elif other != root:
                    if other < root:
                        parent[root] = other
                        root = other
                    else:
                        parent[other] = root
            if root == 0:
                parent[nxt] = nxt
                root = nxt
                nxt += 1
            labels[y, x] = root
    # Final ids follow the raster order of each component's first pixel.
    remap = np.zeros(nxt, dtype=np.int64)
    sizes = np.zeros(nxt, dtype=np.int64)
    count = 0
    for y in range(h):
        for x in range(w):
            lab = labels[y, x]
            if lab == 0:
                continue
            root = _find(parent, lab)
            if remap[root] == 0:
                count += 1
                remap[root] = count
            final = remap[root]
            labels[y, x] = final
            sizes[final - 1] += 1
    return labels, sizes[:count].copy()


def _neighbour_min(lab, eight):
    h, w = lab.shape
    big = np.iinfo(np.int64).max
    padded = np.full((h + 2, w + 2), big, dtype=np.int64)
    padded[1:-1, 1:-1] = lab
    out = lab.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if (dy == 0 and dx == 0) or (not eight and dy != 0 and dx != 0):
                continue
            np.minimum(out, padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w], out=out)
    return out


def _label_np(fg, eight):
    h, w = fg.shape
    big = np.iinfo(np.int64).max
    flat_ids = np.arange(h * w, dtype=np.int64).reshape(h, w)
    lab = np.where(fg, flat_ids, big)
    while True:
        new = np.where(fg, _neighbour_min(lab, eight), big)
        # pointer jumping: adopt the label currently held by the pixel our label names
        flat = new.ravel()
        while True:
            jumped = np.where(fg.ravel(), flat[np.where(fg.ravel(), flat, 0)], big)
            if np.array_equal(jumped, flat):
                break
            flat = jumped
        new = flat.reshape(h, w)
        if np.array_equal(new, lab):
            break
        lab = new
    roots, inverse, sizes = np.unique(lab[fg], return_inverse=True, return_counts=True)
    labels = np.zeros((h, w), dtype=np.int64)
    # roots are minimum flat indices, so ascending order is raster order of first pixels
    labels[fg] = inverse.ravel() + 1
    return labels, sizes.astype(np.int64)


def label(fg: np.ndarray, connectivity: int):
    fg = np.ascontiguousarray(fg, dtype=np.bool_)
    eight = connectivity == 8
    if _accel.USE_NUMBA:
        return _label_nb(fg, eight)
    return _label_np(fg, eight)


# --------------------------------------------------------------------------
# Suzuki-Abe border following
#
# Neighbour directions, clockwise on screen (row index grows downwards):
# 0 E, 1 SE, 2 S, 3 SW, 4 W, 5 NW, 6 N, 7 NE.

_DY = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
_DX = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)
# direction index of offset (dy, dx) is _DIR[dy + 1, dx + 1]
_DIR = np.full((3, 3), -1, dtype=np.int64)
_DIR[_DY + 1, _DX + 1] = np.arange(8)


@njit
def _suzuki_nb(fg, DY, DX, DIR):
    h, w = fg.shape
    f = np.zeros((h + 2, w + 2), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            if fg[y, x]:
                f[y + 1, x + 1] = 1

    cap = 64
    pys = np.empty(cap, dtype=np.int64)
    pxs = np.empty(cap, dtype=np.int64)
    npts = 0
    bcap = 16
    offsets = np.zeros(bcap + 1, dtype=np.int64)
    # per-NBD tables; NBD 1 is the frame (a hole border with no parent)
    btype_hole = np.zeros(bcap + 2, dtype=np.bool_)
    bparent = np.full(bcap + 2, -1, dtype=np.int64)
    btype_hole[1] = True
    nbd = 1

    for i in range(1, h + 1):
        lnbd = 1
        for j in range(1, w + 1):
            fij = f[i, j]
            if fij == 0:
                continue
            start_outer = fij == 1 and f[i, j - 1] == 0
            start_hole = (not start_outer) and fij >= 1 and f[i, j + 1] == 0
            if start_outer or start_hole:
                nbd += 1
                if nbd + 1 >= btype_hole.shape[0]:
                    nb = btype_hole.shape[0] * 2
                    t_hole = np.zeros(nb, dtype=np.bool_)
                    t_hole[: btype_hole.shape[0]] = btype_hole
                    t_par = np.full(nb, -1, dtype=np.int64)
                    t_par[: bparent.shape[0]] = bparent
                    t_off = np.zeros(nb + 1, dtype=np.int64)
                    t_off[: offsets.shape[0]] = offsets
                    btype_hole = t_hole
                    bparent = t_par
                    offsets = t_off
                if start_outer:
                    i2, j2 = i, j - 1
                else:
                    i2, j2 = i, j + 1
                    if fij > 1:
                        lnbd = fij
                btype_hole[nbd] = start_hole
                if start_hole == btype_hole[lnbd]:
                    bparent[nbd] = bparent[lnbd]
                else:
                    bparent[nbd] = lnbd
                # points of border nbd occupy pys/pxs[offsets[nbd - 2]:offsets[nbd - 1]]
                if npts + 1 >= cap:
                    cap *= 2
                    t = np.empty(cap, dtype=np.int64)
                    t[:npts] = pys[:npts]
                    pys = t
                    t = np.empty(cap, dtype=np.int64)
                    t[:npts] = pxs[:npts]
                    pxs = t

                # (3.1) clockwise search around (i, j) starting at (i2, j2)
                d0 = DIR[i2 - i + 1, j2 - j + 1]
                found = -1
                for k in range(8):
                    d = (d0 + k) % 8
                    if f[i + DY[d], j + DX[d]] != 0:
                        found = d
                        break
                if found < 0:
                    f[i, j] = -nbd
                    pys[npts] = i - 1
                    pxs[npts] = j - 1
                    npts += 1
                else:
                    i1 = i + DY[found]
                    j1 = j + DX[found]
                    i2, j2 = i1, j1
                    i3, j3 = i, j
                    while True:
                        if npts >= cap:
                            cap *= 2
                            t = np.empty(cap, dtype=np.int64)
                            t[:npts] = pys[:npts]
                            pys = t
                            t = np.empty(cap, dtype=np.int64)
                            t[:npts] = pxs[:npts]
                            pxs = t
                        pys[npts] = i3 - 1
                        pxs[npts] = j3 - 1
                        npts += 1
                        # (3.3) counter-clockwise search around (i3, j3), after (i2, j2)
                        d0 = DIR[i2 - i3 + 1, j2 - j3 + 1]
                        east_zero = False
                        i4 = -1
                        j4 = -1
                        for k in range(1, 9):
                            d = (d0 - k) % 8
                            yy = i3 + DY[d]
                            xx = j3 + DX[d]
                            if f[yy, xx] != 0:
                                i4 = yy
                                j4 = xx
                                break
                            if d == 0:
                                east_zero = True
                        # (3.4)
                        if east_zero:
                            f[i3, j3] = -nbd
                        elif f[i3, j3] == 1:
                            f[i3, j3] = nbd
                        # (3.5)
                        if i4 == i and j4 == j and i3 == i1 and j3 == j1:
                            break
                        i2, j2 = i3, j3
                        i3, j3 = i4, j4
                offsets[nbd - 1] = npts
            # (4)
            if f[i, j] != 1:
                lnbd = abs(f[i, j])

    nb = nbd - 1
    starts = np.empty(nb, dtype=np.int64)
    ends = np.empty(nb, dtype=np.int64)
    holes = np.empty(nb, dtype=np.bool_)
    parents = np.empty(nb, dtype=np.int64)
    prev = 0
    for b in range(nb):
        starts[b] = prev
        ends[b] = offsets[b + 1]
        prev = offsets[b + 1]
        holes[b] = btype_hole[b + 2]
        p = bparent[b + 2]
        # NBD n maps to contour index n - 2; the frame (NBD 1) maps to -1
        parents[b] = p - 2 if p >= 2 else -1
    return pys[:npts].copy(), pxs[:npts].copy(), starts, ends, holes, parents


def suzuki(fg: np.ndarray):
    fg = np.ascontiguousarray(fg, dtype=np.bool_)
    fn = _suzuki_nb if _accel.USE_NUMBA else getattr(_suzuki_nb, "py_func", _suzuki_nb)
    return fn(fg, _DY, _DX, _DIR)
