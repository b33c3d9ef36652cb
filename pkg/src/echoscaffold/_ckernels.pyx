# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_pykernels`` exactly, including float order."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, floor

cnp.import_array()

cdef int[4] SECTOR_DX = [1, 1, 0, -1]
cdef int[4] SECTOR_DY = [0, 1, 1, 1]


def mean_shift(img, spatial_radius, range_radius, max_iterations, epsilon):
    cdef const unsigned char[:, ::1] src = np.ascontiguousarray(img, dtype=np.uint8)
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef int r = spatial_radius
    cdef double rr = range_radius
    cdef double eps2 = <double>epsilon * <double>epsilon
    cdef int max_it = max_iterations

    out_arr = np.empty((h, w), dtype=np.uint8)
    it_arr = np.zeros((h, w), dtype=np.int32)
    cdef unsigned char[:, ::1] out = out_arr
    cdef int[:, ::1] its = it_arr

    cdef Py_ssize_t i, j, x, y, bx, by
    cdef int it
    cdef long cnt
    cdef double xc, yc, cc, sx, sy, sc, g, nx, ny, nc, dx, dy, dc, v

    with nogil:
        for i in range(h):
            for j in range(w):
                xc = j
                yc = i
                cc = src[i, j]
                it = 0
                while it < max_it:
                    bx = <Py_ssize_t>floor(xc)
                    by = <Py_ssize_t>floor(yc)
                    sx = 0.0
                    sy = 0.0
                    sc = 0.0
                    cnt = 0
                    for y in range(by - r, by + r + 2):
                        if y < 0 or y >= h or fabs(<double>y - yc) > r:
                            continue
                        for x in range(bx - r, bx + r + 2):
                            if x < 0 or x >= w or fabs(<double>x - xc) > r:
                                continue
                            g = src[y, x]
                            if fabs(g - cc) <= rr:
                                sx = sx + x
                                sy = sy + y
                                sc = sc + g
                                cnt += 1
                    if cnt == 0:
                        break
                    nx = sx / cnt
                    ny = sy / cnt
                    nc = sc / cnt
                    dx = nx - xc
                    dy = ny - yc
                    dc = nc - cc
                    xc = nx
                    yc = ny
                    cc = nc
                    it += 1
                    if dx * dx + dy * dy + dc * dc <= eps2:
                        break
                v = floor(cc + 0.5)
                if v < 0:
                    v = 0
                elif v > 255:
                    v = 255
                out[i, j] = <unsigned char>v
                its[i, j] = it
    return out_arr, it_arr


def non_max_suppression(magnitude, sector):
    cdef const double[:, ::1] mag = np.ascontiguousarray(magnitude, dtype=np.float64)
    cdef const signed char[:, ::1] sec = np.ascontiguousarray(sector, dtype=np.int8)
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, ax, ay, bx, by
    cdef int s
    cdef double m, ahead, behind
    with nogil:
        for i in range(h):
            for j in range(w):
                s = sec[i, j]
                if s < 0 or s > 3:
                    continue
                m = mag[i, j]
                ax = j + SECTOR_DX[s]
                ay = i + SECTOR_DY[s]
                bx = j - SECTOR_DX[s]
                by = i - SECTOR_DY[s]
                ahead = mag[ay, ax] if 0 <= ax < w and 0 <= ay < h else 0.0
                behind = mag[by, bx] if 0 <= bx < w and 0 <= by < h else 0.0
                if m > behind and m >= ahead:
                    out[i, j] = m
    return out_arr


def hysteresis(magnitude, double low, double high):
    cdef const double[:, ::1] mag = np.ascontiguousarray(magnitude, dtype=np.float64)
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    stack_arr = np.empty(h * w, dtype=np.intp)
    cdef Py_ssize_t[::1] stack = stack_arr
    cdef Py_ssize_t top = 0, i, j, k, y, x, ny, nx
    with nogil:
        for i in range(h):
            for j in range(w):
                if mag[i, j] > high and out[i, j] == 0:
                    out[i, j] = 255
                    stack[top] = i * w + j
                    top += 1
                    while top > 0:
                        top -= 1
                        k = stack[top]
                        y = k // w
                        x = k - y * w
                        for ny in range(y - 1, y + 2):
                            if ny < 0 or ny >= h:
                                continue
                            for nx in range(x - 1, x + 2):
                                if nx < 0 or nx >= w:
                                    continue
                                if out[ny, nx] == 0 and mag[ny, nx] > low:
                                    out[ny, nx] = 255
                                    stack[top] = ny * w + nx
                                    top += 1
    return out_arr


def glcm_counts(levels, int dx, int dy, int n_levels):
    cdef const unsigned char[:, ::1] lv = np.ascontiguousarray(levels, dtype=np.uint8)
    cdef Py_ssize_t h = lv.shape[0], w = lv.shape[1]
    counts_arr = np.zeros((n_levels, n_levels), dtype=np.int64)
    cdef long long[:, ::1] counts = counts_arr
    cdef Py_ssize_t i, j, x0, x1, y0, y1
    x0 = -dx if dx < 0 else 0
    x1 = w - dx if dx > 0 else w
    y0 = -dy if dy < 0 else 0
    y1 = h - dy if dy > 0 else h
    with nogil:
        for i in range(y0, y1):
            for j in range(x0, x1):
                counts[lv[i, j], lv[i + dy, j + dx]] += 1
    return counts_arr
