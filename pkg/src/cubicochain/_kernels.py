"""Hot loops with a numba path and a pure-numpy path.

The numba path is used when numba imports and the environment variable
``CUBICOCHAIN_NO_NUMBA`` is unset (or ``0``).  Both paths are always importable
so tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def numba_enabled() -> bool:
    """True when the dispatchers below route to the numba kernels."""
    flag = os.environ.get("CUBICOCHAIN_NO_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag in ("", "0", "false", "no")


JIT = {"nogil": True, "cache": True, "fastmath": False, "boundscheck": False}


# ---------------------------------------------------------------------------
# ball masses: for each center and radius, the weight of points inside the ball
# ---------------------------------------------------------------------------


@njit(**JIT)
def _ball_mass_nb(points, weights, centers, radii):
    nr = radii.shape[0]
    nc = centers.shape[0]
    npt = points.shape[0]
    dim = points.shape[1]
    r2 = radii * radii
    out = np.zeros((nr, nc))
    for i in range(nc):
        for j in range(npt):
            d2 = 0.0
            for k in range(dim):
                t = centers[i, k] - points[j, k]
                d2 += t * t
            w = weights[j]
            for q in range(nr):
                if d2 <= r2[q]:
                    out[q, i] += w
    return out


def _ball_mass_np(points, weights, centers, radii):
    nr = radii.shape[0]
    nc = centers.shape[0]
    npt = max(points.shape[0], 1)
    out = np.zeros((nr, nc))
    r2 = radii * radii
    chunk = max(1, 2_000_000 // npt)
    for s in range(0, nc, chunk):
        c = centers[s : s + chunk]
        d2 = ((c[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1)
        for q in range(nr):
            out[q, s : s + chunk] = (d2 <= r2[q]) @ weights
    return out


def ball_mass(points, weights, centers, radii, use_numba=None):
    """Weight of ``points`` inside closed Euclidean balls.

    Parameters
    ----------
    points : (N, n) array
    weights : (N,) array
    centers : (M, n) array
    radii : (R,) array

    Returns
    -------
    (R, M) array with ``out[q, i] = sum(weights[|points - centers[i]| <= radii[q]])``.
    """
    args = (
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(centers, dtype=np.float64),
        np.ascontiguousarray(radii, dtype=np.float64),
    )
    if use_numba is None:
        use_numba = numba_enabled()
    return _ball_mass_nb(*args) if use_numba else _ball_mass_np(*args)


# ---------------------------------------------------------------------------
# incident mean: average an n-cell field over the n-cells incident to m-cells
# ---------------------------------------------------------------------------


@njit(**JIT)
def _incident_mean_nb(values, shape, bases, axes_mask):
    k = bases.shape[0]
    n = bases.shape[1]
    out = np.zeros(k)
    strides = np.ones(n, dtype=np.int64)
    for j in range(n - 2, -1, -1):
        strides[j] = strides[j + 1] * shape[j + 1]
    for c in range(k):
        total = 0.0
        count = 0
        for pat in range(1 << n):
            ok = True
            flat = 0
            for j in range(n):
                d = -((pat >> j) & 1)
                if d != 0 and axes_mask[c, j]:
                    ok = False
                    break
                pos = bases[c, j] + d
                if pos < 0 or pos >= shape[j]:
                    ok = False
                    break
                flat += pos * strides[j]
            if ok:
                total += values[flat]
                count += 1
        if count > 0:
            out[c] = total / count
    return out


def _incident_mean_np(values, shape, bases, axes_mask):
    k, n = bases.shape
    total = np.zeros(k)
    count = np.zeros(k, dtype=np.int64)
    shape_t = tuple(int(s) for s in shape)
    for pat in range(1 << n):
        d = -np.array([(pat >> j) & 1 for j in range(n)], dtype=np.int64)
        ok = ~np.any((d != 0)[None, :] & axes_mask, axis=1)
        pos = bases + d[None, :]
        ok &= np.all((pos >= 0) & (pos < np.asarray(shape)[None, :]), axis=1)
        if not ok.any():
            continue
        flat = np.ravel_multi_index(tuple(pos[ok].T), shape_t)
        total[ok] += values[flat]
        count[ok] += 1
    out = np.zeros(k)
    nz = count > 0
    out[nz] = total[nz] / count[nz]
    return out


def incident_mean(values, bases, axes_mask, use_numba=None):
    """Mean of an n-cell field over the existing n-cells incident to each cell.

    Parameters
    ----------
    values : ndarray, shape = per-axis n-cell counts
    bases : (K, n) int array, cell bases relative to the domain corner
    axes_mask : (K, n) bool array, True on the cell's spanning axes
    """
    shape = np.asarray(values.shape, dtype=np.int64)
    flat = np.ascontiguousarray(values, dtype=np.float64).ravel()
    bases = np.ascontiguousarray(bases, dtype=np.int64)
    axes_mask = np.ascontiguousarray(axes_mask, dtype=np.bool_)
    if use_numba is None:
        use_numba = numba_enabled()
    if bases.shape[0] == 0:
        return np.zeros(0)
    fn = _incident_mean_nb if use_numba else _incident_mean_np
    return fn(flat, shape, bases, axes_mask)


# ---------------------------------------------------------------------------
# shifted gather: sum_c w_c * coeff[index(c + x)] for every shift x
# ---------------------------------------------------------------------------


@njit(**JIT)
def _shifted_sum_nb(coeff, block_offsets, block_shapes, block_ids, bases, weights, shifts):
    nx = shifts.shape[0]
    k = bases.shape[0]
    n = bases.shape[1]
    out = np.zeros(nx)
    for x in range(nx):
        acc = 0.0
        for c in range(k):
            b = block_ids[c]
            flat = 0
            for j in range(n):
                flat = flat * block_shapes[b, j] + bases[c, j] + shifts[x, j]
            acc += weights[c] * coeff[block_offsets[b] + flat]
        out[x] = acc
    return out


def _shifted_sum_np(coeff, block_offsets, block_shapes, block_ids, bases, weights, shifts):
    out = np.zeros(shifts.shape[0])
    n = bases.shape[1]
    for x in range(shifts.shape[0]):
        pos = bases + shifts[x][None, :]
        flat = np.zeros(bases.shape[0], dtype=np.int64)
        shp = block_shapes[block_ids]
        for j in range(n):
            flat = flat * shp[:, j] + pos[:, j]
        out[x] = weights @ coeff[block_offsets[block_ids] + flat]
    return out


def shifted_sum(coeff, block_offsets, block_shapes, block_ids, bases, weights, shifts, use_numba=None):
    """Lattice cross-correlation of a cell-coefficient array with a chain.

    ``bases`` are relative to the domain corner; the caller guarantees that
    every shifted cell stays inside its block.
    """
    args = (
        np.ascontiguousarray(coeff, dtype=np.float64),
        np.ascontiguousarray(block_offsets, dtype=np.int64),
        np.ascontiguousarray(block_shapes, dtype=np.int64),
        np.ascontiguousarray(block_ids, dtype=np.int64),
        np.ascontiguousarray(bases, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(shifts, dtype=np.int64),
    )
    if use_numba is None:
        use_numba = numba_enabled()
    return _shifted_sum_nb(*args) if use_numba else _shifted_sum_np(*args)


# ---------------------------------------------------------------------------
# neighbor quotient max: max over offsets o of |f(x+o) - f(x)| / denom[o]
# ---------------------------------------------------------------------------


@njit(**JIT)
def _neighbor_max_nb(values, shape, offsets, denom):
    n = shape.shape[0]
    k = offsets.shape[0]
    total = values.shape[0]
    out = np.zeros(total)
    strides = np.ones(n, dtype=np.int64)
    for j in range(n - 2, -1, -1):
        strides[j] = strides[j + 1] * shape[j + 1]
    shift = np.zeros(k, dtype=np.int64)
    reach = 0
    for o in range(k):
        for j in range(n):
            shift[o] += offsets[o, j] * strides[j]
            reach = max(reach, abs(offsets[o, j]))
    inv = 1.0 / denom
    pos = np.zeros(n, dtype=np.int64)
    for i in range(total):
        interior = True
        for j in range(n):
            if pos[j] < reach or pos[j] >= shape[j] - reach:
                interior = False
                break
        best = 0.0
        vi = values[i]
        for o in range(k):
            if not interior:
                ok = True
                for j in range(n):
                    q = pos[j] + offsets[o, j]
                    if q < 0 or q >= shape[j]:
                        ok = False
                        break
                if not ok:
                    continue
            v = abs(values[i + shift[o]] - vi) * inv[o]
            if v > best:
                best = v
        out[i] = best
        # advance the row-major position counter
        for j in range(n - 1, -1, -1):
            pos[j] += 1
            if pos[j] < shape[j]:
                break
            pos[j] = 0
    return out


def _neighbor_max_np(values, shape, offsets, denom):
    grid = values.reshape(tuple(int(s) for s in shape))
    out = np.zeros_like(grid)
    n = grid.ndim
    for o in range(offsets.shape[0]):
        off = offsets[o]
        src = []
        dst = []
        for j in range(n):
            d = int(off[j])
            size = grid.shape[j]
            if abs(d) >= size:
                break
            if d >= 0:
                src.append(slice(0, size - d))
                dst.append(slice(d, size))
            else:
                src.append(slice(-d, size))
                dst.append(slice(0, size + d))
        else:
            q = np.abs(grid[tuple(dst)] - grid[tuple(src)]) / denom[o]
            np.maximum(out[tuple(src)], q, out=out[tuple(src)])
    return out.ravel()


def neighbor_max(grid, offsets, denom, use_numba=None):
    """Per-vertex max of ``|f(x+o) - f(x)| / denom[o]`` over in-bounds offsets."""
    grid = np.asarray(grid, dtype=np.float64)
    shape = np.asarray(grid.shape, dtype=np.int64)
    args = (
        np.ascontiguousarray(grid).ravel(),
        shape,
        np.ascontiguousarray(offsets, dtype=np.int64),
        np.ascontiguousarray(denom, dtype=np.float64),
    )
    if use_numba is None:
        use_numba = numba_enabled()
    fn = _neighbor_max_nb if use_numba else _neighbor_max_np
    return fn(*args).reshape(grid.shape)
