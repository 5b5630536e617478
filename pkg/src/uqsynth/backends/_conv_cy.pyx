# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernels.

conv_forward / conv_backward fuse per-sample im2col with BLAS sgemm so the
column buffer stays cache-resident; on low-bandwidth machines this is the
difference between compute-bound and memory-bound training. Standalone
im2col / col2im (folded layout) are kept for the numpy fallback parity
tests and the benchmark.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport sgemm

cnp.import_array()


cdef inline void _im2col_sample(const float* src, float* cols,
                                Py_ssize_t c, Py_ssize_t hp, Py_ssize_t wp,
                                Py_ssize_t kh, Py_ssize_t kw,
                                Py_ssize_t h, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t j, ky, kx, y, x, row
    cdef const float* plane
    for j in range(c):
        for ky in range(kh):
            for kx in range(kw):
                row = (j * kh + ky) * kw + kx
                plane = src + j * hp * wp
                for y in range(h):
                    for x in range(w):
                        cols[row * (h * w) + y * w + x] = plane[(y + ky) * wp + x + kx]


cdef inline void _col2im_sample(const float* cols, float* dst,
                                Py_ssize_t c, Py_ssize_t hp, Py_ssize_t wp,
                                Py_ssize_t kh, Py_ssize_t kw,
                                Py_ssize_t h, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t j, ky, kx, y, x, row
    cdef float* plane
    for ky in range(kh):
        for kx in range(kw):
            for j in range(c):
                row = (j * kh + ky) * kw + kx
                plane = dst + j * hp * wp
                for y in range(h):
                    for x in range(w):
                        plane[(y + ky) * wp + x + kx] += cols[row * (h * w) + y * w + x]


cdef void _gemm_rowmajor(char ta, char tb, int m, int n, int k, float alpha,
                         float* a, int lda, float* b, int ldb,
                         float beta, float* c, int ldc) noexcept nogil:
    # row-major C(m,n) = alpha * op(A)(m,k) @ op(B)(k,n) + beta*C via the
    # column-major identity C^T = op(B)^T op(A)^T
    sgemm(&tb, &ta, &n, &m, &k, &alpha, b, &ldb, a, &lda, &beta, c, &ldc)


def conv_forward(cnp.ndarray[cnp.float32_t, ndim=4] xp,
                 cnp.ndarray[cnp.float32_t, ndim=2] wm, int kh, int kw):
    """Padded input (N,C,Hp,Wp) and kernel matrix (Cout, C*kh*kw) ->
    (N, Cout, H, W), stride 1."""
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t c = xp.shape[1]
    cdef Py_ssize_t hp = xp.shape[2]
    cdef Py_ssize_t wp = xp.shape[3]
    cdef Py_ssize_t h = hp - kh + 1
    cdef Py_ssize_t w = wp - kw + 1
    cdef Py_ssize_t p = h * w
    cdef Py_ssize_t cout = wm.shape[0]
    cdef Py_ssize_t kdim = wm.shape[1]
    out_arr = np.empty((n, cout, h, w), dtype=np.float32)
    cols_arr = np.empty((kdim, p), dtype=np.float32)
    cdef cnp.float32_t[:, :, :, ::1] out = out_arr
    cdef cnp.float32_t[:, :, :, ::1] src = xp
    cdef cnp.float32_t[:, ::1] wmat = wm
    cdef cnp.float32_t[:, ::1] cols = cols_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _im2col_sample(&src[i, 0, 0, 0], &cols[0, 0], c, hp, wp, kh, kw, h, w)
            _gemm_rowmajor(b'N', b'N', <int> cout, <int> p, <int> kdim, 1.0,
                           &wmat[0, 0], <int> kdim, &cols[0, 0], <int> p,
                           0.0, &out[i, 0, 0, 0], <int> p)
    return out_arr


def conv_backward(cnp.ndarray[cnp.float32_t, ndim=4] xp,
                  cnp.ndarray[cnp.float32_t, ndim=2] wm,
                  cnp.ndarray[cnp.float32_t, ndim=4] go, int kh, int kw):
    """Gradients of conv_forward: (dxp, dw, db); dw/db accumulate over samples
    in ascending order (deterministic)."""
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t c = xp.shape[1]
    cdef Py_ssize_t hp = xp.shape[2]
    cdef Py_ssize_t wp = xp.shape[3]
    cdef Py_ssize_t h = hp - kh + 1
    cdef Py_ssize_t w = wp - kw + 1
    cdef Py_ssize_t p = h * w
    cdef Py_ssize_t cout = wm.shape[0]
    cdef Py_ssize_t kdim = wm.shape[1]
    dxp_arr = np.zeros((n, c, hp, wp), dtype=np.float32)
    dw_arr = np.zeros((cout, kdim), dtype=np.float32)
    db_arr = np.zeros(cout, dtype=np.float32)
    cols_arr = np.empty((kdim, p), dtype=np.float32)
    dcols_arr = np.empty((kdim, p), dtype=np.float32)
    cdef cnp.float32_t[:, :, :, ::1] src = xp
    cdef cnp.float32_t[:, :, :, ::1] gout = go
    cdef cnp.float32_t[:, :, :, ::1] dxp = dxp_arr
    cdef cnp.float32_t[:, ::1] wmat = wm
    cdef cnp.float32_t[:, ::1] dw = dw_arr
    cdef cnp.float32_t[::1] db = db_arr
    cdef cnp.float32_t[:, ::1] cols = cols_arr
    cdef cnp.float32_t[:, ::1] dcols = dcols_arr
    cdef Py_ssize_t i, oc, q
    cdef float acc
    cdef const float* gptr
    with nogil:
        for i in range(n):
            _im2col_sample(&src[i, 0, 0, 0], &cols[0, 0], c, hp, wp, kh, kw, h, w)
            # dW += go_i (Cout,P) @ cols^T (P,K)
            _gemm_rowmajor(b'N', b'T', <int> cout, <int> kdim, <int> p, 1.0,
                           &gout[i, 0, 0, 0], <int> p, &cols[0, 0], <int> p,
                           1.0, &dw[0, 0], <int> kdim)
            # dcols = wm^T (K,Cout) @ go_i (Cout,P)
            _gemm_rowmajor(b'T', b'N', <int> kdim, <int> p, <int> cout, 1.0,
                           &wmat[0, 0], <int> kdim, &gout[i, 0, 0, 0], <int> p,
                           0.0, &dcols[0, 0], <int> p)
            _col2im_sample(&dcols[0, 0], &dxp[i, 0, 0, 0], c, hp, wp, kh, kw, h, w)
            for oc in range(cout):
                gptr = &gout[i, oc, 0, 0]
                acc = 0.0
                for q in range(p):
                    acc += gptr[q]
                db[oc] += acc
    return dxp_arr, dw_arr, db_arr


def im2col(cnp.ndarray[cnp.float32_t, ndim=4] xp, int kh, int kw):
    """Folded (C*kh*kw, N*H*W) gather; parity twin of numpy_impl.im2col."""
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t c = xp.shape[1]
    cdef Py_ssize_t hp = xp.shape[2]
    cdef Py_ssize_t wp = xp.shape[3]
    cdef Py_ssize_t h = hp - kh + 1
    cdef Py_ssize_t w = wp - kw + 1
    cdef Py_ssize_t pixels = h * w
    out_arr = np.empty((c * kh * kw, n * pixels), dtype=np.float32)
    cdef cnp.float32_t[:, ::1] cols = out_arr
    cdef cnp.float32_t[:, :, :, ::1] src = xp
    cdef Py_ssize_t i, j, ky, kx, y, x, row, base
    for j in range(c):
        for ky in range(kh):
            for kx in range(kw):
                row = (j * kh + ky) * kw + kx
                for i in range(n):
                    base = i * pixels
                    for y in range(h):
                        for x in range(w):
                            cols[row, base + y * w + x] = src[i, j, y + ky, x + kx]
    return out_arr


def col2im(cnp.ndarray[cnp.float32_t, ndim=2] cols, int n, int c, int hp, int wp,
           int kh, int kw):
    """Adjoint scatter-add; parity twin of numpy_impl.col2im."""
    cdef Py_ssize_t h = hp - kh + 1
    cdef Py_ssize_t w = wp - kw + 1
    cdef Py_ssize_t pixels = h * w
    out_arr = np.zeros((n, c, hp, wp), dtype=np.float32)
    cdef cnp.float32_t[:, :, :, ::1] out = out_arr
    cdef cnp.float32_t[:, ::1] src = cols
    cdef Py_ssize_t i, j, ky, kx, y, x, row, base
    for ky in range(kh):
        for kx in range(kw):
            for j in range(c):
                row = (j * kh + ky) * kw + kx
                for i in range(n):
                    base = i * pixels
                    for y in range(h):
                        for x in range(w):
                            out[i, j, y + ky, x + kx] += src[row, base + y * w + x]
    return out_arr
