# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline void _plane_strain(double E, double nu, double* D) noexcept nogil:
    cdef double f = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    D[0] = f * (1.0 - nu)
    D[1] = f * nu
    D[2] = f * (1.0 - 2.0 * nu) / 2.0


def cst_stiffness_triplets(const double[:, ::1] xy, const long[:, ::1] tri,
                           const double[::1] E, const double[::1] nu):
    cdef Py_ssize_t ne = tri.shape[0]
    rows_a = np.empty(ne * 36, dtype=np.int64)
    cols_a = np.empty(ne * 36, dtype=np.int64)
    vals_a = np.empty(ne * 36, dtype=np.float64)
    cdef long[::1] rows = rows_a
    cdef long[::1] cols = cols_a
    cdef double[::1] vals = vals_a
    cdef double B[3][6]
    cdef double DB[3][6]
    cdef double D[3]
    cdef long dofs[6]
    cdef double x1, y1, x2, y2, x3, y3, two_a, half_a, s
    cdef Py_ssize_t e, i, j, k, base
    with nogil:
        for e in range(ne):
            x1 = xy[tri[e, 0], 0]; y1 = xy[tri[e, 0], 1]
            x2 = xy[tri[e, 1], 0]; y2 = xy[tri[e, 1], 1]
            x3 = xy[tri[e, 2], 0]; y3 = xy[tri[e, 2], 1]
            two_a = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
            for i in range(3):
                for j in range(6):
                    B[i][j] = 0.0
            B[0][0] = (y2 - y3) / two_a; B[0][2] = (y3 - y1) / two_a; B[0][4] = (y1 - y2) / two_a
            B[1][1] = (x3 - x2) / two_a; B[1][3] = (x1 - x3) / two_a; B[1][5] = (x2 - x1) / two_a
            B[2][0] = B[1][1]; B[2][2] = B[1][3]; B[2][4] = B[1][5]
            B[2][1] = B[0][0]; B[2][3] = B[0][2]; B[2][5] = B[0][4]
            _plane_strain(E[e], nu[e], D)
            for j in range(6):
                DB[0][j] = D[0] * B[0][j] + D[1] * B[1][j]
                DB[1][j] = D[1] * B[0][j] + D[0] * B[1][j]
                DB[2][j] = D[2] * B[2][j]
            for k in range(3):
                dofs[2 * k] = 2 * tri[e, k]
                dofs[2 * k + 1] = 2 * tri[e, k] + 1
            half_a = 0.5 * two_a
            base = e * 36
            for i in range(6):
                for j in range(6):
                    s = B[0][i] * DB[0][j] + B[1][i] * DB[1][j] + B[2][i] * DB[2][j]
                    rows[base + 6 * i + j] = dofs[i]
                    cols[base + 6 * i + j] = dofs[j]
                    vals[base + 6 * i + j] = half_a * s
    return rows_a, cols_a, vals_a


def cst_stress(const double[:, ::1] xy, const long[:, ::1] tri,
               const double[::1] E, const double[::1] nu, const double[:, ::1] u):
    cdef Py_ssize_t ne = tri.shape[0]
    out_a = np.empty((ne, 4), dtype=np.float64)
    cdef double[:, ::1] out = out_a
    cdef double D[3]
    cdef double x1, y1, x2, y2, x3, y3, two_a, exx, eyy, gxy
    cdef long n1, n2, n3
    cdef Py_ssize_t e
    with nogil:
        for e in range(ne):
            n1 = tri[e, 0]; n2 = tri[e, 1]; n3 = tri[e, 2]
            x1 = xy[n1, 0]; y1 = xy[n1, 1]
            x2 = xy[n2, 0]; y2 = xy[n2, 1]
            x3 = xy[n3, 0]; y3 = xy[n3, 1]
            two_a = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
            exx = ((y2 - y3) * u[n1, 0] + (y3 - y1) * u[n2, 0] + (y1 - y2) * u[n3, 0]) / two_a
            eyy = ((x3 - x2) * u[n1, 1] + (x1 - x3) * u[n2, 1] + (x2 - x1) * u[n3, 1]) / two_a
            gxy = ((x3 - x2) * u[n1, 0] + (x1 - x3) * u[n2, 0] + (x2 - x1) * u[n3, 0]
                   + (y2 - y3) * u[n1, 1] + (y3 - y1) * u[n2, 1] + (y1 - y2) * u[n3, 1]) / two_a
            _plane_strain(E[e], nu[e], D)
            out[e, 0] = D[0] * exx + D[1] * eyy
            out[e, 1] = D[1] * exx + D[0] * eyy
            out[e, 2] = D[2] * gxy
            out[e, 3] = nu[e] * (out[e, 0] + out[e, 1])
    return out_a


def locate_points(const double[:, ::1] xy, const long[:, ::1] tri, const double[:, ::1] pts,
                  const long[::1] cell_start, const long[::1] cell_elems,
                  origin, double cell_size, ncell, double tol):
    cdef Py_ssize_t npts = pts.shape[0]
    index_a = np.full(npts, -1, dtype=np.int64)
    bary_a = np.zeros((npts, 3), dtype=np.float64)
    cdef long[::1] index = index_a
    cdef double[:, ::1] bary = bary_a
    cdef double ox = origin[0], oy = origin[1]
    cdef long nx = ncell[0], ny = ncell[1]
    cdef double px, py, x1, y1, x2, y2, x3, y3, det, l1, l2, l3, worst
    cdef long ix, iy, cell, e
    cdef Py_ssize_t k, m
    with nogil:
        for k in range(npts):
            px = pts[k, 0]; py = pts[k, 1]
            ix = <long>floor((px - ox) / cell_size)
            iy = <long>floor((py - oy) / cell_size)
            if ix < 0 or iy < 0 or ix >= nx or iy >= ny:
                continue
            cell = iy * nx + ix
            for m in range(cell_start[cell], cell_start[cell + 1]):
                e = cell_elems[m]
                x1 = xy[tri[e, 0], 0]; y1 = xy[tri[e, 0], 1]
                x2 = xy[tri[e, 1], 0]; y2 = xy[tri[e, 1], 1]
                x3 = xy[tri[e, 2], 0]; y3 = xy[tri[e, 2], 1]
                det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
                l2 = ((px - x1) * (y3 - y1) - (x3 - x1) * (py - y1)) / det
                l3 = ((x2 - x1) * (py - y1) - (px - x1) * (y2 - y1)) / det
                l1 = 1.0 - l2 - l3
                worst = l1
                if l2 < worst:
                    worst = l2
                if l3 < worst:
                    worst = l3
                if worst >= -tol:
                    index[k] = e
                    bary[k, 0] = l1; bary[k, 1] = l2; bary[k, 2] = l3
                    break
    return index_a, bary_a


def bilinear_sample(const double[:, ::1] img, const double[::1] rows, const double[::1] cols):
    cdef Py_ssize_t n = rows.shape[0]
    cdef long nr = img.shape[0], nc = img.shape[1]
    out_a = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_a
    cdef long r0, c0
    cdef double fr, fc
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            r0 = <long>floor(rows[k])
            c0 = <long>floor(cols[k])
            if r0 < 0:
                r0 = 0
            if r0 > nr - 2:
                r0 = nr - 2
            if c0 < 0:
                c0 = 0
            if c0 > nc - 2:
                c0 = nc - 2
            fr = rows[k] - r0
            fc = cols[k] - c0
            out[k] = ((1 - fr) * ((1 - fc) * img[r0, c0] + fc * img[r0, c0 + 1])
                      + fr * ((1 - fc) * img[r0 + 1, c0] + fc * img[r0 + 1, c0 + 1]))
    return out_a
