"""Numpy implementations of the numerical kernels.

These mirror ``_kernels.pyx`` exactly and are used when the compiled
extension is unavailable (or when ``BLANCH_BENCH_PURE=1``).
"""

import numpy as np


def _cst_geometry(xy, tri):
    p1 = xy[tri[:, 0]]
    p2 = xy[tri[:, 1]]
    p3 = xy[tri[:, 2]]
    b = np.stack([p2[:, 1] - p3[:, 1], p3[:, 1] - p1[:, 1], p1[:, 1] - p2[:, 1]], axis=1)
    c = np.stack([p3[:, 0] - p2[:, 0], p1[:, 0] - p3[:, 0], p2[:, 0] - p1[:, 0]], axis=1)
    two_area = (p2[:, 0] - p1[:, 0]) * (p3[:, 1] - p1[:, 1]) - (p3[:, 0] - p1[:, 0]) * (
        p2[:, 1] - p1[:, 1]
    )
    return b, c, two_area


def _strain_matrices(b, c, two_area):
    ne = b.shape[0]
    B = np.zeros((ne, 3, 6))
    B[:, 0, 0::2] = b
    B[:, 1, 1::2] = c
    B[:, 2, 0::2] = c
    B[:, 2, 1::2] = b
    return B / two_area[:, None, None]


def _plane_strain_d(E, nu):
    f = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    D = np.zeros((E.shape[0], 3, 3))
    D[:, 0, 0] = f * (1.0 - nu)
    D[:, 1, 1] = f * (1.0 - nu)
    D[:, 0, 1] = f * nu
    D[:, 1, 0] = f * nu
    D[:, 2, 2] = f * (1.0 - 2.0 * nu) / 2.0
    return D


def cst_stiffness_triplets(xy, tri, E, nu):
    """COO triplets of the assembled plane-strain CST stiffness (unit thickness)."""
    b, c, two_area = _cst_geometry(xy, tri)
    B = _strain_matrices(b, c, two_area)
    D = _plane_strain_d(E, nu)
    Ke = 0.5 * two_area[:, None, None] * np.einsum("eki,ekl,elj->eij", B, D, B)
    dofs = np.empty((tri.shape[0], 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * tri
    dofs[:, 1::2] = 2 * tri + 1
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    return rows, cols, Ke.ravel()


def cst_stress(xy, tri, E, nu, u):
    """Per-element (sxx, syy, sxy, szz) for nodal displacements ``u`` of shape (n, 2)."""
    b, c, two_area = _cst_geometry(xy, tri)
    B = _strain_matrices(b, c, two_area)
    ue = np.empty((tri.shape[0], 6))
    ue[:, 0::2] = u[tri, 0]
    ue[:, 1::2] = u[tri, 1]
    strain = np.einsum("eij,ej->ei", B, ue)
    sig = np.einsum("eij,ej->ei", _plane_strain_d(E, nu), strain)
    out = np.empty((tri.shape[0], 4))
    out[:, :3] = sig
    out[:, 3] = nu * (sig[:, 0] + sig[:, 1])
    return out


def locate_points(xy, tri, pts, cell_start, cell_elems, origin, cell_size, ncell, tol):
    """Find the containing triangle and barycentric weights of each point.

    The bucket structure (``cell_start``/``cell_elems``) is a CSR map from
    grid cells to overlapping elements. Points outside every element get
    index -1.
    """
    npts = pts.shape[0]
    index = np.full(npts, -1, dtype=np.int64)
    bary = np.zeros((npts, 3))
    for k in range(npts):
        px, py = pts[k]
        ix = int(np.floor((px - origin[0]) / cell_size))
        iy = int(np.floor((py - origin[1]) / cell_size))
        if ix < 0 or iy < 0 or ix >= ncell[0] or iy >= ncell[1]:
            continue
        cell = iy * ncell[0] + ix
        cand = cell_elems[cell_start[cell] : cell_start[cell + 1]]
        if cand.size == 0:
            continue
        p = xy[tri[cand]]
        x1, y1 = p[:, 0, 0], p[:, 0, 1]
        x2, y2 = p[:, 1, 0], p[:, 1, 1]
        x3, y3 = p[:, 2, 0], p[:, 2, 1]
        det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
        l2 = ((px - x1) * (y3 - y1) - (x3 - x1) * (py - y1)) / det
        l3 = ((x2 - x1) * (py - y1) - (px - x1) * (y2 - y1)) / det
        l1 = 1.0 - l2 - l3
        worst = np.minimum(np.minimum(l1, l2), l3)
        # first candidate (in element order) that contains the point
        hit = np.nonzero(worst >= -tol)[0]
        if hit.size:
            j = hit[0]
            index[k] = cand[j]
            bary[k] = (l1[j], l2[j], l3[j])
    return index, bary


def bilinear_sample(img, rows, cols):
    """Bilinear interpolation of a 2D array at fractional (row, col) positions."""
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    r0 = np.clip(r0, 0, img.shape[0] - 2)
    c0 = np.clip(c0, 0, img.shape[1] - 2)
    fr = rows - r0
    fc = cols - c0
    v00 = img[r0, c0]
    v01 = img[r0, c0 + 1]
    v10 = img[r0 + 1, c0]
    v11 = img[r0 + 1, c0 + 1]
    return (1 - fr) * ((1 - fc) * v00 + fc * v01) + fr * ((1 - fc) * v10 + fc * v11)
