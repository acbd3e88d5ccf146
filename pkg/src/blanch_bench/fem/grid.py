"""Resampling of von Mises stress onto a regular lateral x depth grid."""

from dataclasses import dataclass

import numpy as np

from ..kernels import PointLocator

DEFAULT_REGION = (7.0, 2.0)  # lateral extent, depth extent (mm)
DEFAULT_SPACING = 0.1  # mm


@dataclass(frozen=True, eq=False)
class VmGrid:
    """Von Mises stress sampled on a rectangular grid.

    ``values[i, j]`` is the stress at ``lateral_coords[i]`` and
    ``depth_coords[j]``. Lateral distance is measured from the indenter
    axis, depth downward from the local undeformed skin surface.
    """

    lateral_coords: np.ndarray  # mm
    depth_coords: np.ndarray  # mm
    values: np.ndarray  # Pa, shape (n_lateral, n_depth)
    spacing: float

    def __post_init__(self):
        lat = np.array(self.lateral_coords, dtype=float)
        dep = np.array(self.depth_coords, dtype=float)
        vals = np.array(self.values, dtype=float)
        if lat.ndim != 1 or dep.ndim != 1 or vals.shape != (lat.size, dep.size):
            raise ValueError("values must have shape (len(lateral_coords), len(depth_coords))")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        if np.any(vals < 0):
            raise ValueError("von Mises values must be nonnegative")
        if np.any(np.diff(lat) <= 0) or np.any(np.diff(dep) <= 0):
            raise ValueError("grid coordinates must be strictly increasing")
        for name, arr in (("lateral_coords", lat), ("depth_coords", dep), ("values", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def shape(self):
        return self.values.shape

    def max(self):
        return float(self.values.max())

    def value_at(self, lateral, depth):
        """Value at the grid node nearest to (lateral, depth)."""
        i = int(np.argmin(np.abs(self.lateral_coords - lateral)))
        j = int(np.argmin(np.abs(self.depth_coords - depth)))
        return float(self.values[i, j])


def _axis(extent, spacing):
    n = int(round(extent / spacing))
    if n < 1 or abs(n * spacing - extent) > 1e-9 * max(extent, 1.0):
        raise ValueError(f"extent {extent} mm is not a whole number of {spacing} mm steps")
    return np.arange(n + 1) * spacing


def interpolate_nodal(mesh, nodal_values, points, locator=None):
    """Linear interpolation of a nodal field at arbitrary points.

    Parameters
    ----------
    mesh : Mesh
    nodal_values : ndarray, shape (n_nodes,)
    points : ndarray, shape (k, 2)
        (x, y) positions in mesh coordinates.
    locator : PointLocator, optional
        Reused between calls when given.

    Returns
    -------
    ndarray, shape (k,)

    Raises
    ------
    ValueError
        If any point lies outside the mesh.
    """
    locator = locator or PointLocator(mesh.nodes, mesh.elements)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    elem, bary = locator.locate(pts)
    if np.any(elem < 0):
        bad = pts[int(np.flatnonzero(elem < 0)[0])]
        raise ValueError(f"grid point ({bad[0]:.4g}, {bad[1]:.4g}) mm lies outside the mesh")
    vals = np.asarray(nodal_values, dtype=float)[mesh.elements[elem]]
    return np.einsum("ij,ij->i", vals, bary)


def resample_vm_grid(field, mesh, region=DEFAULT_REGION, spacing=DEFAULT_SPACING, mirror=True):
    """Sample nodal-averaged von Mises stress on a lateral x depth grid.

    Parameters
    ----------
    field : StressField
    mesh : Mesh
    region : (float, float)
        Lateral and depth extent in mm; the grid spans [0, lateral] x [0, depth].
    spacing : float
        Grid step in mm, used on both axes.
    mirror : bool
        Average the samples at +x and -x so the grid is symmetric about
        the indenter axis.

    Returns
    -------
    VmGrid
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    lateral_extent, depth_extent = (float(v) for v in region)
    lat = _axis(lateral_extent, spacing)
    dep = _axis(depth_extent, spacing)
    if lateral_extent > mesh.half_width + 1e-12:
        raise ValueError("grid region is wider than the mesh")

    nodal = field.nodal_von_mises(mesh)
    locator = PointLocator(mesh.nodes, mesh.elements)

    def sample(x):
        X = np.repeat(x, dep.size)
        depth = np.tile(dep, x.size)
        Y = mesh.surface_y(X) - depth
        # keep surface samples a hair inside the mesh
        Y = np.minimum(Y, mesh.surface_y(X) - 1e-12)
        vals = interpolate_nodal(mesh, nodal, np.column_stack([X, Y]), locator)
        return vals.reshape(x.size, dep.size)

    values = sample(lat)
    if mirror:
        values = 0.5 * (values + sample(-lat))
    return VmGrid(lat, dep, np.maximum(values, 0.0), spacing)
