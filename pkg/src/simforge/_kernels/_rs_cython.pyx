# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython assembly of the free-space coupling matrix (hot kernel).

Same contract as numpy_backend.rs_matrix, computed in a single fused pass
without the large broadcast temporaries.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, M_PI

cnp.import_array()

NAME = "cython"


def rs_matrix(double[:, ::1] src, double[:, ::1] dst, double[::1] normal,
              double area_m2, double lambda_m):
    cdef Py_ssize_t ns = src.shape[0]
    cdef Py_ssize_t nd = dst.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((nd, ns), dtype=np.complex128)
    cdef double complex[:, ::1] w = out
    cdef Py_ssize_t n, m
    cdef double dx, dy, dz, d, cosz, a_re, a_im, ph, c, s
    cdef double nx = normal[0], ny = normal[1], nz = normal[2]
    cdef double k = 2.0 * M_PI / lambda_m
    cdef double dmin = np.inf

    for n in range(nd):
        for m in range(ns):
            dx = dst[n, 0] - src[m, 0]
            dy = dst[n, 1] - src[m, 1]
            dz = dst[n, 2] - src[m, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d < dmin:
                dmin = d
            if d == 0.0:
                return None, 0.0
            cosz = (dx * nx + dy * ny + dz * nz) / d
            a_re = area_m2 * cosz / d * (1.0 / (2.0 * M_PI * d))
            a_im = -area_m2 * cosz / (d * lambda_m)
            ph = k * d
            c = cos(ph)
            s = sin(ph)
            w[n, m] = (a_re * c - a_im * s) + 1j * (a_re * s + a_im * c)
    return out, dmin
