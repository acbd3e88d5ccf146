"""CSV and JSON exchange formats for meshes, stress grids and solve logs."""

import csv
import json
from pathlib import Path

import numpy as np

from .grid import VmGrid
from .mesh import Mesh

GRID_HEADER = ("lateral_mm", "depth_mm", "von_mises_pa")


def write_mesh_csv(mesh, nodes_path, elements_path):
    """Write ``nodes.csv`` (id,x,y) and ``elements.csv`` (id,n1,n2,n3,material)."""
    with open(nodes_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y"])
        for i, (x, y) in enumerate(mesh.nodes):
            w.writerow([i, repr(float(x)), repr(float(y))])
    with open(elements_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "n1", "n2", "n3", "material"])
        for i, (tri, mat) in enumerate(zip(mesh.elements, mesh.material)):
            w.writerow([i, int(tri[0]), int(tri[1]), int(tri[2]), int(mat)])


def read_mesh_csv(nodes_path, elements_path):
    """Read a mesh written by :func:`write_mesh_csv`.

    Boundary tags are recovered from the bounding box; the geometry
    record is not stored, so ``mesh.geometry`` is ``None``.
    """
    nodes = np.loadtxt(nodes_path, delimiter=",", skiprows=1, ndmin=2)
    elems = np.loadtxt(elements_path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if not np.array_equal(nodes[:, 0], np.arange(nodes.shape[0])):
        raise ValueError("node ids must be 0..n-1 in order")
    if not np.array_equal(elems[:, 0], np.arange(elems.shape[0])):
        raise ValueError("element ids must be 0..m-1 in order")
    xy = nodes[:, 1:3]
    x, y = xy[:, 0], xy[:, 1]
    tol = 1e-9 * max(float(np.ptp(x)), 1.0)
    left = np.flatnonzero(x <= x.min() + tol)
    right = np.flatnonzero(x >= x.max() - tol)
    bottom = np.flatnonzero(y <= y.min() + tol)
    # top boundary: edges used by one element whose endpoints are not on the sides or bottom
    tri = elems[:, 1:4]
    pairs = np.sort(np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    boundary = np.unique(uniq[counts == 1])
    not_top = np.zeros(xy.shape[0], dtype=bool)
    not_top[bottom] = True
    side = np.zeros(xy.shape[0], dtype=bool)
    side[left] = side[right] = True
    top_mask = np.zeros(xy.shape[0], dtype=bool)
    top_mask[boundary] = True
    top_mask &= ~not_top
    # side nodes belong to the top only at the two upper corners
    top_mask[side] = False
    for ids in (left, right):
        top_mask[ids[np.argmax(y[ids])]] = True
    surface = np.flatnonzero(top_mask)
    surface = surface[np.argsort(x[surface], kind="stable")]
    left = left[np.argsort(-y[left], kind="stable")]
    right = right[np.argsort(-y[right], kind="stable")]
    return Mesh(xy, tri, elems[:, 4], surface, bottom, left, right)


def write_vm_grid_csv(grid, path):
    """Write a grid as ``lateral_mm,depth_mm,von_mises_pa`` rows, depth varying fastest."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GRID_HEADER)
        for i, x in enumerate(grid.lateral_coords):
            for j, d in enumerate(grid.depth_coords):
                w.writerow([_fmt(x), _fmt(d), repr(float(grid.values[i, j]))])


def read_vm_grid_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != GRID_HEADER:
            raise ValueError(f"unexpected grid header {header}")
        rows = np.array([[float(v) for v in row] for row in reader if row])
    if rows.size == 0:
        raise ValueError("grid file has no data rows")
    lat = np.unique(rows[:, 0])
    dep = np.unique(rows[:, 1])
    if rows.shape[0] != lat.size * dep.size:
        raise ValueError("grid is not rectangular and fully populated")
    expected_lat = np.repeat(lat, dep.size)
    expected_dep = np.tile(dep, lat.size)
    if not (np.array_equal(rows[:, 0], expected_lat) and np.array_equal(rows[:, 1], expected_dep)):
        raise ValueError("grid rows must be row-major with depth varying fastest")
    values = rows[:, 2].reshape(lat.size, dep.size)
    steps = np.concatenate([np.diff(lat), np.diff(dep)])
    spacing = float(np.round(steps.min(), 12)) if steps.size else 0.0
    return VmGrid(lat, dep, values, spacing)


def _fmt(v):
    # grid coordinates are multiples of the spacing; print them without float noise
    return format(round(float(v), 10), ".10g")


def write_solve_log(solution, path, extra=None):
    """Write the solve log (per-step residuals, contact counts, reaction) as JSON."""
    payload = dict(solution.log)
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
