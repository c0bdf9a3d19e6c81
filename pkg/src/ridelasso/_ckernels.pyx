# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, asin, sqrt

cnp.import_array()

cdef double DEG2RAD = 0.017453292519943295


def haversine_matrix(double[::1] lat_a, double[::1] lon_a,
                     double[::1] lat_b, double[::1] lon_b, double radius):
    cdef Py_ssize_t na = lat_a.shape[0], nb = lat_b.shape[0]
    out_arr = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double p1, p2, c1, h, sdlat, sdlon
    for i in range(na):
        p1 = lat_a[i] * DEG2RAD
        c1 = cos(p1)
        for j in range(nb):
            p2 = lat_b[j] * DEG2RAD
            sdlat = sin((p2 - p1) * 0.5)
            sdlon = sin((lon_b[j] * DEG2RAD - lon_a[i] * DEG2RAD) * 0.5)
            h = sdlat * sdlat + (c1 * cos(p2)) * sdlon * sdlon
            if h > 1.0:
                h = 1.0
            out[i, j] = 2.0 * radius * asin(sqrt(h))
    return out_arr


def network_iteration(double[:, ::1] A, double[::1] b, double[:, ::1] x,
                      double[:, :, ::1] z, double[:, :, ::1] u,
                      cnp.int64_t[:, ::1] edges, double[::1] lamw, double[::1] deg,
                      double rho, double mu):
    """One ADMM sweep: node x-update, edge z-update, scaled dual update.

    Updates ``x``, ``z`` and ``u`` in place and returns the squared norms
    ``(r, s, Ax, z, A^T u)`` used by the stopping rule (``s`` includes rho,
    ``A^T u`` does not).
    """
    cdef Py_ssize_t m = A.shape[0], p = A.shape[1], E = edges.shape[0]
    cdef Py_ssize_t i, e, t, j, k
    cdef double c, aa, ar, nrm, theta, v1, v2, d, r2 = 0.0, s2 = 0.0
    cdef double ax2 = 0.0, z2 = 0.0, atu2 = 0.0, zn0, zn1
    acc_arr = np.zeros((m, p), dtype=np.float64)
    cdef double[:, ::1] acc = acc_arr

    for e in range(E):
        j = edges[e, 0]
        k = edges[e, 1]
        for t in range(p):
            acc[j, t] += z[e, 0, t] - u[e, 0, t]
            acc[k, t] += z[e, 1, t] - u[e, 1, t]

    for i in range(m):
        c = mu + rho * deg[i]
        aa = 0.0
        ar = 0.0
        for t in range(p):
            acc[i, t] = A[i, t] * b[i] + rho * acc[i, t]
            aa += A[i, t] * A[i, t]
            ar += A[i, t] * acc[i, t]
        if c > 0.0:
            for t in range(p):
                x[i, t] = (acc[i, t] - A[i, t] * ar / (c + aa)) / c
        elif aa > 0.0:
            for t in range(p):
                x[i, t] = A[i, t] * b[i] / aa
        else:
            for t in range(p):
                x[i, t] = 0.0
        for t in range(p):
            acc[i, t] = 0.0

    # acc now collects per-node sums of z changes
    for e in range(E):
        j = edges[e, 0]
        k = edges[e, 1]
        nrm = 0.0
        for t in range(p):
            d = (x[j, t] + u[e, 0, t]) - (x[k, t] + u[e, 1, t])
            nrm += d * d
        nrm = sqrt(nrm)
        if rho * nrm <= 2.0 * lamw[e]:
            for t in range(p):
                v1 = x[j, t] + u[e, 0, t]
                v2 = x[k, t] + u[e, 1, t]
                zn0 = 0.5 * (v1 + v2)
                acc[j, t] += zn0 - z[e, 0, t]
                acc[k, t] += zn0 - z[e, 1, t]
                z[e, 0, t] = zn0
                z[e, 1, t] = zn0
        else:
            theta = 1.0 - lamw[e] / (rho * nrm)
            for t in range(p):
                v1 = x[j, t] + u[e, 0, t]
                v2 = x[k, t] + u[e, 1, t]
                zn0 = theta * v1 + (1.0 - theta) * v2
                zn1 = theta * v2 + (1.0 - theta) * v1
                acc[j, t] += zn0 - z[e, 0, t]
                acc[k, t] += zn1 - z[e, 1, t]
                z[e, 0, t] = zn0
                z[e, 1, t] = zn1

    for i in range(m):
        for t in range(p):
            s2 += acc[i, t] * acc[i, t]
            acc[i, t] = 0.0
    s2 *= rho * rho

    for e in range(E):
        j = edges[e, 0]
        k = edges[e, 1]
        for t in range(p):
            d = x[j, t] - z[e, 0, t]
            r2 += d * d
            u[e, 0, t] += d
            d = x[k, t] - z[e, 1, t]
            r2 += d * d
            u[e, 1, t] += d
            ax2 += x[j, t] * x[j, t] + x[k, t] * x[k, t]
            z2 += z[e, 0, t] * z[e, 0, t] + z[e, 1, t] * z[e, 1, t]
            acc[j, t] += u[e, 0, t]
            acc[k, t] += u[e, 1, t]

    for i in range(m):
        for t in range(p):
            atu2 += acc[i, t] * acc[i, t]

    return r2, s2, ax2, z2, atu2
