# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_pure.py`` for the reference."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY

cnp.import_array()

cdef double LEG_EPS = 1e-9
cdef double ENDPOINT_TOL = 1e-9
cdef double PARALLEL_EPS = 1e-14


cdef inline bint _blocked(double ax, double ay, double bx, double by,
                          const double[:, ::1] segs, long skip1, long skip2) noexcept nogil:
    cdef Py_ssize_t k
    cdef double cx, cy, ex, ey, lx, ly, denom, wx, wy, t, u
    lx = bx - ax
    ly = by - ay
    for k in range(segs.shape[0]):
        if k == skip1 or k == skip2:
            continue
        cx = segs[k, 0]
        cy = segs[k, 1]
        ex = segs[k, 2] - segs[k, 0]
        ey = segs[k, 3] - segs[k, 1]
        denom = lx * ey - ly * ex
        if not fabs(denom) > PARALLEL_EPS:
            continue
        wx = cx - ax
        wy = cy - ay
        t = (wx * ey - wy * ex) / denom
        u = (wx * ly - wy * lx) / denom
        if t > LEG_EPS and t < 1.0 - LEG_EPS and u >= 0.0 and u <= 1.0:
            return True
    return False


def visible_mask(p, va_pos, va_seq, va_order, segs):
    cdef const double[:, ::1] pos = np.ascontiguousarray(va_pos, dtype=np.float64)
    cdef const long long[:, ::1] seq = np.ascontiguousarray(va_seq, dtype=np.int64)
    cdef const long long[::1] order = np.ascontiguousarray(va_order, dtype=np.int64)
    cdef const double[:, ::1] sg = np.ascontiguousarray(segs, dtype=np.float64)
    cdef Py_ssize_t n = pos.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef double px = float(p[0])
    cdef double py = float(p[1])
    cdef Py_ssize_t i
    cdef long level, w, prev
    cdef double curx, cury, imgx, imgy, cx, cy, dx, dy, ex, ey, lx, ly
    cdef double denom, wx, wy, t, u, wlen, qx, qy, ll, kk, fx, fy
    cdef bint ok
    with nogil:
        for i in range(n):
            curx = px
            cury = py
            imgx = pos[i, 0]
            imgy = pos[i, 1]
            prev = -1
            ok = True
            level = <long>order[i] - 1
            while level >= 0:
                w = <long>seq[i, level]
                cx = sg[w, 0]
                cy = sg[w, 1]
                dx = sg[w, 2]
                dy = sg[w, 3]
                ex = dx - cx
                ey = dy - cy
                lx = imgx - curx
                ly = imgy - cury
                denom = lx * ey - ly * ex
                if not fabs(denom) > PARALLEL_EPS:
                    ok = False
                    break
                wx = cx - curx
                wy = cy - cury
                t = (wx * ey - wy * ex) / denom
                u = (wx * ly - wy * lx) / denom
                wlen = sqrt(ex * ex + ey * ey)
                if not (t > LEG_EPS and t < 1.0 - LEG_EPS):
                    ok = False
                    break
                if not (u * wlen > ENDPOINT_TOL and (1.0 - u) * wlen > ENDPOINT_TOL):
                    ok = False
                    break
                qx = curx + t * lx
                qy = cury + t * ly
                if _blocked(curx, cury, qx, qy, sg, prev, w):
                    ok = False
                    break
                ll = ex * ex + ey * ey
                kk = ((imgx - cx) * ex + (imgy - cy) * ey) / ll
                fx = cx + kk * ex
                fy = cy + kk * ey
                imgx = 2.0 * fx - imgx
                imgy = 2.0 * fy - imgy
                curx = qx
                cury = qy
                prev = w
                level -= 1
            if ok and not _blocked(curx, cury, imgx, imgy, sg, prev, -1):
                out[i] = 1
    return out_arr


def linear_assignment(cost):
    cdef const double[:, ::1] a = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    if n > m:
        raise ValueError("linear_assignment needs rows <= cols")
    u_arr = np.zeros(n + 1)
    v_arr = np.zeros(m + 1)
    p_arr = np.zeros(m + 1, dtype=np.int64)
    way_arr = np.zeros(m + 1, dtype=np.int64)
    minv_arr = np.empty(m + 1)
    used_arr = np.empty(m + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef long long[::1] p = p_arr
    cdef long long[::1] way = way_arr
    cdef double[::1] minv = minv_arr
    cdef unsigned char[::1] used = used_arr
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur, ui0
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(m + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                ui0 = u[i0]
                delta = INFINITY
                j1 = 0
                for j in range(1, m + 1):
                    if not used[j]:
                        cur = a[i0 - 1, j - 1] - ui0 - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                        if minv[j] < delta:
                            delta = minv[j]
                            j1 = j
                for j in range(m + 1):
                    if used[j]:
                        u[p[j]] += delta
                        v[j] -= delta
                    else:
                        minv[j] -= delta
                j0 = j1
                if p[j0] == 0:
                    break
            while True:
                j1 = way[j0]
                p[j0] = p[j1]
                j0 = j1
                if j0 == 0:
                    break
    out = np.full(n, -1, dtype=np.int64)
    for j in range(1, m + 1):
        if p_arr[j] != 0:
            out[p_arr[j] - 1] = j - 1
    return out
