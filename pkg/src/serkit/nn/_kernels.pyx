# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: LSTM recurrence, conv1d, and max pooling.

Drop-in replacements for _kernels_py with identical shapes and gate
conventions. Matrix products go through BLAS (scipy's cython bindings);
everything else is plain C loops, so results track the numpy backend to
rounding error.
"""

import numpy as np

from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemm

NAME = "compiled"


cdef inline void gemm_rm(char ta, char tb, int m, int n, int k,
                         double alpha, const double* a, int lda,
                         const double* b, int ldb,
                         double beta, double* c, int ldc) noexcept nogil:
    # Row-major C(m,n) = op(A)(m,k) @ op(B)(k,n) via column-major BLAS:
    # swap the operands and compute C^T. ld* = row-major column counts.
    dgemm(&tb, &ta, &n, &m, &k, &alpha, <double*>b, &ldb, <double*>a, &lda,
          &beta, c, &ldc)


cdef inline double sig(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def lstm_loop_forward(double[:, :, ::1] xp, double[:, ::1] wh,
                      double[:, ::1] h0, double[:, ::1] c0):
    """Recurrence over time-major pre-activations; see the numpy twin."""
    cdef Py_ssize_t t_steps = xp.shape[0]
    cdef Py_ssize_t batch = xp.shape[1]
    cdef Py_ssize_t hidden = xp.shape[2] // 4
    h_arr = np.empty((t_steps, batch, hidden))
    c_arr = np.empty((t_steps, batch, hidden))
    g_arr = np.empty((t_steps, batch, 4 * hidden))
    cdef double[:, :, ::1] h = h_arr
    cdef double[:, :, ::1] c = c_arr
    cdef double[:, :, ::1] gates = g_arr

    cdef Py_ssize_t t, b, u
    cdef int bi = <int>batch, hi = <int>hidden, gi = <int>(4 * hidden)
    cdef const double* h_prev
    cdef const double* c_prev
    cdef double* g
    cdef double iv, fv, gv, ov, cv

    with nogil:
        for t in range(t_steps):
            h_prev = &h0[0, 0] if t == 0 else &h[t - 1, 0, 0]
            c_prev = &c0[0, 0] if t == 0 else &c[t - 1, 0, 0]
            g = &gates[t, 0, 0]
            for b in range(batch):
                for u in range(gi):
                    g[b * gi + u] = xp[t, b, u]
            gemm_rm(c'N', c'N', bi, gi, hi, 1.0, h_prev, hi, &wh[0, 0], gi,
                    1.0, g, gi)
            for b in range(batch):
                for u in range(hidden):
                    iv = sig(g[b * gi + u])
                    fv = sig(g[b * gi + hidden + u])
                    gv = tanh(g[b * gi + 2 * hidden + u])
                    ov = sig(g[b * gi + 3 * hidden + u])
                    cv = fv * c_prev[b * hi + u] + iv * gv
                    c[t, b, u] = cv
                    h[t, b, u] = ov * tanh(cv)
                    g[b * gi + u] = iv
                    g[b * gi + hidden + u] = fv
                    g[b * gi + 2 * hidden + u] = gv
                    g[b * gi + 3 * hidden + u] = ov
    return h_arr, c_arr, g_arr


def lstm_loop_backward(double[:, :, ::1] dh_out, double[:, :, ::1] h,
                       double[:, :, ::1] c, double[:, :, ::1] gates,
                       double[:, ::1] wh, double[:, ::1] h0,
                       double[:, ::1] c0):
    """Backpropagation through time; see the numpy twin for conventions."""
    cdef Py_ssize_t t_steps = dh_out.shape[0]
    cdef Py_ssize_t batch = dh_out.shape[1]
    cdef Py_ssize_t hidden = dh_out.shape[2]
    dxp_arr = np.empty((t_steps, batch, 4 * hidden))
    dwh_arr = np.zeros((hidden, 4 * hidden))
    dh_arr = np.zeros((batch, hidden))
    dc_arr = np.zeros((batch, hidden))
    cdef double[:, :, ::1] dxp = dxp_arr
    cdef double[:, ::1] dwh = dwh_arr
    cdef double[:, ::1] dh_next = dh_arr
    cdef double[:, ::1] dc_next = dc_arr

    cdef Py_ssize_t t, b, u
    cdef int bi = <int>batch, hi = <int>hidden, gi = <int>(4 * hidden)
    cdef const double* h_prev
    cdef const double* c_prev
    cdef double* dg
    cdef double iv, fv, gv, ov, tc, dh_v, dc_v

    with nogil:
        for t in range(t_steps - 1, -1, -1):
            h_prev = &h0[0, 0] if t == 0 else &h[t - 1, 0, 0]
            c_prev = &c0[0, 0] if t == 0 else &c[t - 1, 0, 0]
            dg = &dxp[t, 0, 0]
            for b in range(batch):
                for u in range(hidden):
                    iv = gates[t, b, u]
                    fv = gates[t, b, hidden + u]
                    gv = gates[t, b, 2 * hidden + u]
                    ov = gates[t, b, 3 * hidden + u]
                    tc = tanh(c[t, b, u])
                    dh_v = dh_out[t, b, u] + dh_next[b, u]
                    dc_v = dc_next[b, u] + dh_v * ov * (1.0 - tc * tc)
                    dg[b * gi + u] = dc_v * gv * iv * (1.0 - iv)
                    dg[b * gi + hidden + u] = dc_v * c_prev[b * hi + u] * fv * (1.0 - fv)
                    dg[b * gi + 2 * hidden + u] = dc_v * iv * (1.0 - gv * gv)
                    dg[b * gi + 3 * hidden + u] = dh_v * tc * ov * (1.0 - ov)
                    dc_next[b, u] = dc_v * fv
            gemm_rm(c'T', c'N', hi, gi, bi, 1.0, h_prev, hi, dg, gi,
                    1.0, &dwh[0, 0], gi)
            gemm_rm(c'N', c'T', bi, hi, gi, 1.0, dg, gi, &wh[0, 0], gi,
                    0.0, &dh_next[0, 0], hi)
    return dxp_arr, dwh_arr, dh_arr, dc_arr


def conv1d_forward(double[:, :, ::1] x, double[:, :, ::1] w,
                   double[::1] b, int stride):
    """Valid cross-correlation via im2col + one BLAS product."""
    cdef Py_ssize_t batch = x.shape[0], t_in = x.shape[1], c_in = x.shape[2]
    cdef Py_ssize_t k = w.shape[0], c_out = w.shape[2]
    cdef Py_ssize_t t_out = (t_in - k) // stride + 1
    cols_arr = np.empty((batch * t_out, k * c_in))
    y_arr = np.empty((batch, t_out, c_out))
    cdef double[:, ::1] cols = cols_arr
    cdef double[:, :, ::1] y = y_arr
    cdef Py_ssize_t bb, t, j, ci, co, row
    cdef int m = <int>(batch * t_out), n = <int>c_out, kk = <int>(k * c_in)

    with nogil:
        for bb in range(batch):
            for t in range(t_out):
                row = bb * t_out + t
                for j in range(k):
                    for ci in range(c_in):
                        cols[row, j * c_in + ci] = x[bb, t * stride + j, ci]
        gemm_rm(c'N', c'N', m, n, kk, 1.0, &cols[0, 0], kk, &w[0, 0, 0], n,
                0.0, &y[0, 0, 0], n)
        for bb in range(batch):
            for t in range(t_out):
                for co in range(c_out):
                    y[bb, t, co] += b[co]
    return y_arr


def conv1d_backward(double[:, :, ::1] x, double[:, :, ::1] w, int stride,
                    double[:, :, ::1] dy):
    """Gradients of conv1d_forward: returns (dx, dw, db)."""
    cdef Py_ssize_t batch = x.shape[0], t_in = x.shape[1], c_in = x.shape[2]
    cdef Py_ssize_t k = w.shape[0], c_out = w.shape[2]
    cdef Py_ssize_t t_out = dy.shape[1]
    cols_arr = np.empty((batch * t_out, k * c_in))
    dcols_arr = np.empty((batch * t_out, k * c_in))
    dx_arr = np.zeros((batch, t_in, c_in))
    dw_arr = np.empty((k, c_in, c_out))
    db_arr = np.zeros(c_out)
    cdef double[:, ::1] cols = cols_arr
    cdef double[:, ::1] dcols = dcols_arr
    cdef double[:, :, ::1] dx = dx_arr
    cdef double[:, :, ::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef Py_ssize_t bb, t, j, ci, co, row
    cdef int m = <int>(batch * t_out), n = <int>c_out, kk = <int>(k * c_in)

    with nogil:
        for bb in range(batch):
            for t in range(t_out):
                row = bb * t_out + t
                for j in range(k):
                    for ci in range(c_in):
                        cols[row, j * c_in + ci] = x[bb, t * stride + j, ci]
        gemm_rm(c'T', c'N', kk, n, m, 1.0, &cols[0, 0], kk, &dy[0, 0, 0], n,
                0.0, &dw[0, 0, 0], n)
        gemm_rm(c'N', c'T', m, kk, n, 1.0, &dy[0, 0, 0], n, &w[0, 0, 0], n,
                0.0, &dcols[0, 0], kk)
        for bb in range(batch):
            for t in range(t_out):
                row = bb * t_out + t
                for co in range(c_out):
                    db[co] += dy[bb, t, co]
                for j in range(k):
                    for ci in range(c_in):
                        dx[bb, t * stride + j, ci] += dcols[row, j * c_in + ci]
    return dx_arr, dw_arr, db_arr


def maxpool1d_forward(double[:, :, ::1] x, int pool, int stride):
    """Windowed max over time; argmax keeps absolute indices, first wins."""
    cdef Py_ssize_t batch = x.shape[0], t_in = x.shape[1], ch = x.shape[2]
    cdef Py_ssize_t t_out = (t_in - pool) // stride + 1
    y_arr = np.empty((batch, t_out, ch))
    am_arr = np.empty((batch, t_out, ch), dtype=np.int64)
    cdef double[:, :, ::1] y = y_arr
    cdef long long[:, :, ::1] am = am_arr
    cdef Py_ssize_t bb, t, p, c, base
    cdef double best, v
    cdef Py_ssize_t best_i

    with nogil:
        for bb in range(batch):
            for t in range(t_out):
                base = t * stride
                for c in range(ch):
                    best = x[bb, base, c]
                    best_i = base
                    for p in range(1, pool):
                        v = x[bb, base + p, c]
                        if v > best:
                            best = v
                            best_i = base + p
                    y[bb, t, c] = best
                    am[bb, t, c] = best_i
    return y_arr, am_arr


def maxpool1d_backward(double[:, :, ::1] dy, long long[:, :, ::1] argmax,
                       int t_in):
    """Scatter upstream gradients onto the winning inputs."""
    cdef Py_ssize_t batch = dy.shape[0], t_out = dy.shape[1], ch = dy.shape[2]
    dx_arr = np.zeros((batch, t_in, ch))
    cdef double[:, :, ::1] dx = dx_arr
    cdef Py_ssize_t bb, t, c

    with nogil:
        for bb in range(batch):
            for t in range(t_out):
                for c in range(ch):
                    dx[bb, argmax[bb, t, c], c] += dy[bb, t, c]
    return dx_arr
