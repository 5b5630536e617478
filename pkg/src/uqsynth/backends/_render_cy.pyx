# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ray-march kernel (float32, bit-identical to numpy_impl.raycast)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floorf

cnp.import_array()


def raycast(cnp.ndarray[cnp.float32_t, ndim=3] grid,
            cnp.ndarray[cnp.float32_t, ndim=2] origins,
            cnp.ndarray[cnp.float32_t, ndim=1] direction,
            cnp.ndarray[cnp.float32_t, ndim=1] t0,
            cnp.ndarray[cnp.int32_t, ndim=1] nsteps,
            float step,
            cnp.ndarray[cnp.float32_t, ndim=2] lut,
            float vmin,
            float vscale):
    cdef Py_ssize_t nz = grid.shape[0]
    cdef Py_ssize_t ny = grid.shape[1]
    cdef Py_ssize_t nx = grid.shape[2]
    cdef Py_ssize_t p = origins.shape[0]
    cdef Py_ssize_t lutn = lut.shape[0]
    out_arr = np.zeros((p, 3), dtype=np.float32)
    cdef cnp.float32_t[:, ::1] color = out_arr
    cdef cnp.float32_t[:, :, ::1] g3 = grid
    cdef cnp.float32_t[:, ::1] org = origins
    cdef cnp.float32_t[:, ::1] tf = lut
    cdef cnp.float32_t[::1] tent = t0
    cdef cnp.int32_t[::1] ns = nsteps
    cdef float dx = direction[0]
    cdef float dy = direction[1]
    cdef float dz = direction[2]
    cdef float one = 1.0  # float, not double: keeps rounding identical to numpy
    cdef Py_ssize_t i, k, ix, iy, iz, i0
    cdef float t, x, y, z, fx, fy, fz
    cdef float c000, c100, c010, c110, c001, c101, c011, c111
    cdef float c00, c10, c01, c11, c0, c1, val, u, s, wgt
    cdef float r, gg, b, a, trans, contrib

    for i in range(p):
        trans = 1.0
        for k in range(ns[i]):
            t = tent[i] + <float> k * step
            x = org[i, 0] + t * dx
            y = org[i, 1] + t * dy
            z = org[i, 2] + t * dz

            ix = <Py_ssize_t> floorf(x)
            if ix < 0:
                ix = 0
            elif ix > nx - 2:
                ix = nx - 2
            iy = <Py_ssize_t> floorf(y)
            if iy < 0:
                iy = 0
            elif iy > ny - 2:
                iy = ny - 2
            iz = <Py_ssize_t> floorf(z)
            if iz < 0:
                iz = 0
            elif iz > nz - 2:
                iz = nz - 2
            fx = x - <float> ix
            fy = y - <float> iy
            fz = z - <float> iz

            c000 = g3[iz, iy, ix]
            c100 = g3[iz, iy, ix + 1]
            c010 = g3[iz, iy + 1, ix]
            c110 = g3[iz, iy + 1, ix + 1]
            c001 = g3[iz + 1, iy, ix]
            c101 = g3[iz + 1, iy, ix + 1]
            c011 = g3[iz + 1, iy + 1, ix]
            c111 = g3[iz + 1, iy + 1, ix + 1]
            c00 = c000 + fx * (c100 - c000)
            c10 = c010 + fx * (c110 - c010)
            c01 = c001 + fx * (c101 - c001)
            c11 = c011 + fx * (c111 - c011)
            c0 = c00 + fy * (c10 - c00)
            c1 = c01 + fy * (c11 - c01)
            val = c0 + fz * (c1 - c0)

            u = (val - vmin) * vscale
            if u < 0.0:
                u = 0.0
            elif u > 1.0:
                u = 1.0
            s = u * <float> (lutn - 1)
            i0 = <Py_ssize_t> floorf(s)
            if i0 < 0:
                i0 = 0
            elif i0 > lutn - 2:
                i0 = lutn - 2
            wgt = s - <float> i0
            r = tf[i0, 0] + wgt * (tf[i0 + 1, 0] - tf[i0, 0])
            gg = tf[i0, 1] + wgt * (tf[i0 + 1, 1] - tf[i0, 1])
            b = tf[i0, 2] + wgt * (tf[i0 + 1, 2] - tf[i0, 2])
            a = tf[i0, 3] + wgt * (tf[i0 + 1, 3] - tf[i0, 3])

            contrib = trans * a
            color[i, 0] += contrib * r
            color[i, 1] += contrib * gg
            color[i, 2] += contrib * b
            trans = trans * (one - a)
            if trans <= 1e-3:
                break

    return out_arr
