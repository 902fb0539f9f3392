"""Hot loops of the point-process code, in numba and numpy flavours.

``matern_keep`` and ``pair_counts`` dispatch to the compiled version when
numba is usable (see :mod:`mhpnet._accel`), otherwise to the KD-tree
versions. Pass ``backend="numba"`` or ``backend="numpy"`` to force one.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from . import _accel
from ._accel import njit

__all__ = ["matern_keep", "pair_counts", "default_backend"]


def default_backend() -> str:
    return "numba" if _accel.USE_NUMBA else "numpy"


@njit
def _cell_index(x, y, cell):
    # bucket points on a square grid with side ``cell``; returns the sorted
    # order, per-cell start offsets and grid geometry
    n = x.shape[0]
    xmin = x.min()
    ymin = y.min()
    nx = int((x.max() - xmin) / cell) + 1
    ny = int((y.max() - ymin) / cell) + 1
    ids = np.empty(n, dtype=np.int64)
    for i in range(n):
        ids[i] = int((x[i] - xmin) / cell) * ny + int((y[i] - ymin) / cell)
    order = np.argsort(ids, kind="mergesort")
    starts = np.zeros(nx * ny + 1, dtype=np.int64)
    for i in range(n):
        starts[ids[i] + 1] += 1
    for c in range(nx * ny):
        starts[c + 1] += starts[c]
    return order, starts, ids, nx, ny


@njit
def _matern_keep_numba(x, y, marks, d):
    n = x.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    if n < 2 or d <= 0.0:
        return keep
    order, starts, ids, nx, ny = _cell_index(x, y, d)
    d2 = d * d
    for i in range(n):
        cx = ids[i] // ny
        cy = ids[i] % ny
        for gx in range(max(cx - 1, 0), min(cx + 2, nx)):
            for gy in range(max(cy - 1, 0), min(cy + 2, ny)):
                c = gx * ny + gy
                for k in range(starts[c], starts[c + 1]):
                    j = order[k]
                    if j == i or marks[j] >= marks[i]:
                        continue
                    dx = x[i] - x[j]
                    dy = y[i] - y[j]
                    if dx * dx + dy * dy <= d2:
                        keep[i] = False
                        break
                if not keep[i]:
                    break
            if not keep[i]:
                break
    return keep


def _matern_keep_numpy(x, y, marks, d):
    n = x.shape[0]
    keep = np.ones(n, dtype=bool)
    if n < 2 or d <= 0.0:
        return keep
    pairs = cKDTree(np.column_stack([x, y])).query_pairs(d, output_type="ndarray")
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        keep[np.where(marks[i] > marks[j], i, j)] = False
    return keep


def matern_keep(x, y, marks, d, backend=None):
    """Type-II thinning mask: a point survives unless a neighbour within
    distance ``d`` carries a smaller mark."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    marks = np.ascontiguousarray(marks, dtype=np.float64)
    if (backend or default_backend()) == "numba":
        return _matern_keep_numba(x, y, marks, float(d))
    return _matern_keep_numpy(x, y, marks, float(d))


@njit
def _pair_counts_numba(x, y, centre, edges):
    nb = edges.shape[0] - 1
    counts = np.zeros(nb, dtype=np.int64)
    n = x.shape[0]
    if n < 2:
        return counts
    rmax = edges[nb]
    order, starts, ids, nx, ny = _cell_index(x, y, rmax)
    lo2 = edges[0] * edges[0]
    hi2 = rmax * rmax
    for i in range(n):
        if not centre[i]:
            continue
        cx = ids[i] // ny
        cy = ids[i] % ny
        for gx in range(max(cx - 1, 0), min(cx + 2, nx)):
            for gy in range(max(cy - 1, 0), min(cy + 2, ny)):
                c = gx * ny + gy
                for k in range(starts[c], starts[c + 1]):
                    j = order[k]
                    if j == i:
                        continue
                    dx = x[i] - x[j]
                    dy = y[i] - y[j]
                    r2 = dx * dx + dy * dy
                    if r2 <= lo2 or r2 > hi2:
                        continue
                    r = math.sqrt(r2)
                    # bins are (e_k, e_k+1]
                    b = np.searchsorted(edges, r) - 1
                    if 0 <= b < nb:
                        counts[b] += 1
    return counts


def _pair_counts_numpy(x, y, centre, edges):
    pts = np.column_stack([x, y])
    if len(pts) < 2 or not centre.any():
        return np.zeros(len(edges) - 1, dtype=np.int64)
    everything = cKDTree(pts)
    centres = cKDTree(pts[centre])
    cumulative = centres.count_neighbors(everything, edges)
    return np.diff(cumulative).astype(np.int64)


def pair_counts(x, y, centre, edges, backend=None):
    """Ordered pair counts (i, j), i != j, with ``centre[i]`` true and the
    separation falling in (edges[k], edges[k+1]]."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    centre = np.ascontiguousarray(centre, dtype=np.bool_)
    edges = np.ascontiguousarray(edges, dtype=np.float64)
    if (backend or default_backend()) == "numba":
        return _pair_counts_numba(x, y, centre, edges)
    return _pair_counts_numpy(x, y, centre, edges)
