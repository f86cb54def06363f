# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot inner loops.

Mirrors _kernels_py; see that module for the contract.  Arithmetic matches
the numpy fallback up to floating-point summation order.
"""

import numpy as np

from libc.math cimport sqrt


def ncc_map(const double[:, ::1] image, const double[:, ::1] templ_centered, double templ_var):
    cdef Py_ssize_t H = image.shape[0], W = image.shape[1]
    cdef Py_ssize_t h = templ_centered.shape[0], w = templ_centered.shape[1]
    cdef Py_ssize_t out_h = H - h + 1, out_w = W - w + 1
    out_arr = np.zeros((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t u, v, i, j
    cdef double s1, s2, cross, x, win_var, denom
    cdef double n = <double> (h * w)
    if templ_var <= 0.0:
        return out_arr
    for u in range(out_h):
        for v in range(out_w):
            s1 = 0.0
            s2 = 0.0
            cross = 0.0
            for i in range(h):
                for j in range(w):
                    x = image[u + i, v + j]
                    s1 += x
                    s2 += x * x
                    cross += x * templ_centered[i, j]
            win_var = s2 - s1 * s1 / n
            if win_var > 0.0:
                denom = sqrt(win_var * templ_var)
                if denom > 0.0:
                    out[u, v] = cross / denom
    return out_arr


def sobel_magnitude(const double[:, ::1] image):
    cdef Py_ssize_t H = image.shape[0], W = image.shape[1]
    out_arr = np.empty((H, W), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, rm, rp, cm, cp
    cdef double gx, gy
    for r in range(H):
        rm = r - 1 if r > 0 else 0
        rp = r + 1 if r < H - 1 else H - 1
        for c in range(W):
            cm = c - 1 if c > 0 else 0
            cp = c + 1 if c < W - 1 else W - 1
            gx = (image[rm, cp] + 2.0 * image[r, cp] + image[rp, cp]) \
                - (image[rm, cm] + 2.0 * image[r, cm] + image[rp, cm])
            gy = (image[rp, cm] + 2.0 * image[rp, c] + image[rp, cp]) \
                - (image[rm, cm] + 2.0 * image[rm, c] + image[rm, cp])
            out[r, c] = sqrt(gx * gx + gy * gy)
    return out_arr


def hough_accumulate(const long long[::1] edge_rows, const long long[::1] edge_cols,
                     const long long[:, ::1] offsets, Py_ssize_t rows, Py_ssize_t cols):
    acc_arr = np.zeros((rows, cols), dtype=np.int64)
    cdef long long[:, ::1] acc = acc_arr
    cdef Py_ssize_t n = edge_rows.shape[0], k = offsets.shape[0]
    cdef Py_ssize_t i, j
    cdef long long cy, cx
    for i in range(n):
        for j in range(k):
            cy = edge_rows[i] - offsets[j, 0]
            cx = edge_cols[i] - offsets[j, 1]
            if 0 <= cy < rows and 0 <= cx < cols:
                acc[cy, cx] += 1
    return acc_arr
