"""Kernel dispatch.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy versions in ``_kernels_py`` are used. Set ``BLANCH_BENCH_PURE=1`` to
force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("BLANCH_BENCH_PURE") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def backends():
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out


def _as_inputs(xy, tri):
    return np.ascontiguousarray(xy, dtype=np.float64), np.ascontiguousarray(tri, dtype=np.int64)


def cst_stiffness_triplets(xy, tri, E, nu, impl=None):
    xy, tri = _as_inputs(xy, tri)
    E = np.ascontiguousarray(E, dtype=np.float64)
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    return (impl or _impl).cst_stiffness_triplets(xy, tri, E, nu)


def cst_stress(xy, tri, E, nu, u, impl=None):
    xy, tri = _as_inputs(xy, tri)
    E = np.ascontiguousarray(E, dtype=np.float64)
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64).reshape(-1, 2)
    return (impl or _impl).cst_stress(xy, tri, E, nu, u)


class PointLocator:
    """Bucket-grid point location over a triangle mesh."""

    def __init__(self, xy, tri, cell_size=None):
        self.xy, self.tri = _as_inputs(xy, tri)
        p = self.xy[self.tri]
        lo = p.min(axis=1)
        hi = p.max(axis=1)
        if cell_size is None:
            cell_size = 2.0 * float(np.median(hi - lo))
        self.cell_size = float(cell_size)
        self.origin = self.xy.min(axis=0) - 1e-9
        span = self.xy.max(axis=0) - self.origin
        self.ncell = (np.floor(span / self.cell_size).astype(np.int64) + 1).tolist()
        i0 = np.floor((lo - self.origin) / self.cell_size).astype(np.int64)
        i1 = np.floor((hi - self.origin) / self.cell_size).astype(np.int64)
        ext = i1 - i0 + 1
        cells, elems = [], []
        for dy in range(int(ext[:, 1].max())):
            for dx in range(int(ext[:, 0].max())):
                e = np.flatnonzero((dx < ext[:, 0]) & (dy < ext[:, 1]))
                cells.append((i0[e, 1] + dy) * self.ncell[0] + i0[e, 0] + dx)
                elems.append(e)
        cells = np.concatenate(cells)
        elems = np.concatenate(elems)
        order = np.lexsort((elems, cells))
        self.cell_elems = np.ascontiguousarray(elems[order])
        counts = np.bincount(cells, minlength=self.ncell[0] * self.ncell[1])
        self.cell_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def locate(self, pts, tol=1e-9, impl=None):
        pts = np.ascontiguousarray(pts, dtype=np.float64).reshape(-1, 2)
        return (impl or _impl).locate_points(
            self.xy,
            self.tri,
            pts,
            self.cell_start,
            self.cell_elems,
            self.origin,
            self.cell_size,
            self.ncell,
            tol,
        )


def bilinear_sample(img, rows, cols, impl=None):
    img = np.ascontiguousarray(img, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64).ravel()
    cols = np.ascontiguousarray(cols, dtype=np.float64).ravel()
    return (impl or _impl).bilinear_sample(img, rows, cols)
