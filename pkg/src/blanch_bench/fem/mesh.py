"""Structured, graded triangle mesh of the layered fingertip slab.

The lateral spacing is finest in a band below the surface and doubles
through transition rows (3 triangles per coarse cell) until it reaches
the target edge length, so the mesh stays conforming without hanging
nodes. Quad diagonals are mirrored about x = 0, which makes the mesh
symmetric for a centred indenter.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FingerSectionGeometry
from .materials import LAYERS

SKIN_LAYERS = LAYERS[:3]


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray  # (n, 2) x, y with y up; nominal surface at y = 0
    elements: np.ndarray  # (ne, 3) counter-clockwise node indices
    material: np.ndarray  # (ne,) material id into MaterialTable
    surface: np.ndarray  # top boundary nodes, sorted by x
    bottom: np.ndarray
    left: np.ndarray
    right: np.ndarray
    geometry: FingerSectionGeometry = None
    target_edge: float = None
    surface_refine: float = None

    def __post_init__(self):
        for name in ("nodes", "elements", "material", "surface", "bottom", "left", "right"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def depth(self):
        """Nodal depth below the nominal surface (positive downward)."""
        return -self.nodes[:, 1]

    @property
    def half_width(self):
        return float(self.nodes[:, 0].max())

    def signed_areas(self):
        p = self.nodes[self.elements]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def centroids(self):
        return self.nodes[self.elements].mean(axis=1)

    def edges(self):
        """Unique undirected edges and the number of elements sharing each."""
        e = self.elements
        pairs = np.concatenate([e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]])
        pairs.sort(axis=1)
        uniq, counts = np.unique(pairs, axis=0, return_counts=True)
        return uniq, counts

    def surface_y(self, x):
        """Piecewise-linear undeformed surface through the surface nodes."""
        s = self.nodes[self.surface]
        return np.interp(x, s[:, 0], s[:, 1])

    def surface_tributary(self):
        """Half the x-length of the surface edges adjacent to each surface node."""
        x = self.nodes[self.surface, 0]
        dx = np.diff(x)
        trib = np.zeros_like(x)
        trib[:-1] += 0.5 * dx
        trib[1:] += 0.5 * dx
        return trib


def _layer_of_depth(depth, interfaces):
    return np.searchsorted(np.asarray(interfaces), depth, side="right")


def _march(z, stop, step, stops):
    """Next row boundary below ``z``: one ``step`` clipped at interfaces, no slivers."""
    nxt = min(z + step, stop)
    for s in stops:
        if z + 1e-12 < s < nxt:
            nxt = s
    limit = min([stop] + [s for s in stops if s > z + 1e-12])
    if limit - nxt < 0.5 * step:
        nxt = limit
    return nxt


def _row_plan(geometry, h0, levels):
    """Rows as (z_top, z_bottom, level_top, level_bottom), depth positive down."""
    H = geometry.total_depth
    interfaces = list(geometry.interfaces)
    zf = min(geometry.fine_depth, H)
    rows = []
    z = 0.0
    while z < zf - 1e-12:
        nxt = _march(z, zf, h0, interfaces)
        rows.append((z, nxt, 0, 0))
        z = nxt
    level = 0
    while level < levels and z < H - 1e-12:
        step = h0 * 2 ** (level + 1)
        nxt = _march(z, H, step, interfaces)
        rows.append((z, nxt, level, level + 1))
        level += 1
        z = nxt
    while z < H - 1e-12:
        nxt = _march(z, H, h0 * 2**level, interfaces)
        rows.append((z, nxt, level, level))
        z = nxt
    return rows


def _generate(geometry, h0, levels):
    hc = h0 * 2**levels
    ncoarse = int(math.ceil(0.5 * geometry.domain_width / hc - 1e-9))
    half = ncoarse * hc
    xs = {k: np.linspace(-half, half, 2 * ncoarse * 2 ** (levels - k) + 1) for k in range(levels + 1)}

    rows = _row_plan(geometry, h0, levels)
    blend = min(geometry.fine_depth, geometry.epidermis) if geometry.ridges_enabled else 0.0

    # one node line per row boundary
    boundaries = [(rows[0][0], rows[0][2])] + [(r[1], r[3]) for r in rows]
    coords, line_ids = [], []
    offset = 0
    for z, level in boundaries:
        x = xs[level]
        y = np.full_like(x, -z)
        if blend > 0 and z < blend - 1e-12:
            y = geometry.surface_y(x) * (1.0 - z / blend) - z
        coords.append(np.column_stack([x, y]))
        line_ids.append(np.arange(offset, offset + x.size))
        offset += x.size
    nodes = np.concatenate(coords)

    tris = []
    for i, (_, _, lt, lb) in enumerate(rows):
        top, bot = line_ids[i], line_ids[i + 1]
        if lt == lb:
            xl = xs[lt][:-1]
            bl, br, tr, tl = bot[:-1], bot[1:], top[1:], top[:-1]
            right = xl >= -1e-12
            t1 = np.where(right[:, None], np.column_stack([bl, br, tr]), np.column_stack([bl, br, tl]))
            t2 = np.where(right[:, None], np.column_stack([bl, tr, tl]), np.column_stack([br, tr, tl]))
            tris += [t1, t2]
        else:
            b0, b1 = bot[:-1], bot[1:]
            t0, tm, t2 = top[0:-1:2], top[1::2], top[2::2]
            tris += [
                np.column_stack([b0, b1, tm]),
                np.column_stack([b0, tm, t0]),
                np.column_stack([b1, t2, tm]),
            ]
    elements = np.concatenate(tris).astype(np.int64)
    # stable element order: by centroid row then x, independent of construction details
    cen = nodes[elements].mean(axis=1)
    order = np.lexsort((cen[:, 0], -cen[:, 1]))
    elements = elements[order]
    cen = cen[order]
    material = _layer_of_depth(-cen[:, 1], geometry.interfaces).astype(np.int64)

    surface = line_ids[0]
    bottom = line_ids[-1]
    left = np.array([ids[0] for ids in line_ids])
    right = np.array([ids[-1] for ids in line_ids])
    return Mesh(nodes, elements, material, surface, bottom, left, right, geometry)


def _max_near_surface_edge(mesh, depth_limit=0.5):
    edges, _ = mesh.edges()
    p = mesh.nodes[edges]
    near = np.minimum(-p[:, 0, 1], -p[:, 1, 1]) < depth_limit
    lengths = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    return float(lengths[near].max())


def build_finger_mesh(geometry=None, target_edge=0.2, surface_refine=0.05):
    """Mesh the layered slab.

    Parameters
    ----------
    geometry : FingerSectionGeometry
    target_edge : float
        Upper bound for the lateral spacing in the coarse region (mm).
    surface_refine : float
        Upper bound for every edge within 0.5 mm of the surface (mm).

    Returns
    -------
    Mesh
    """
    geometry = geometry or FingerSectionGeometry()
    if not target_edge > surface_refine > 0:
        raise ValueError("require target_edge > surface_refine > 0")
    if min(geometry.layer_thicknesses) < surface_refine:
        raise ValueError("a layer is thinner than surface_refine and cannot be resolved")

    # fine spacing: ridge crests and valleys must land on nodes
    if geometry.ridges_enabled:
        m = max(1, math.ceil(geometry.ridge_pitch / (2.0 * surface_refine / math.sqrt(2.0))))
        candidates = (geometry.ridge_pitch / (2.0 * (m + k)) for k in range(64))
    else:
        candidates = (surface_refine / math.sqrt(2.0) * 0.95**k for k in range(64))
    for h0 in candidates:
        levels = max(0, int(math.floor(math.log2(target_edge / h0) + 1e-9)))
        mesh = _generate(geometry, h0, levels)
        if _max_near_surface_edge(mesh) <= surface_refine + 1e-12:
            object.__setattr__(mesh, "target_edge", float(target_edge))
            object.__setattr__(mesh, "surface_refine", float(surface_refine))
            return mesh
    raise ValueError("could not satisfy surface_refine with the ridge profile")
