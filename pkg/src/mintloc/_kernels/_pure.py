"""Pure-Python / numpy reference versions of the hot kernels.

Arithmetic is written in the same order as ``_ckernels.pyx`` so both backends
produce identical results, including on borderline geometry.
"""
from __future__ import annotations

import math

import numpy as np

# Leg parameter tolerance: a blocker touching a leg endpoint does not block it.
LEG_EPS = 1e-9
# Reflection points closer than this (meters) to a wall endpoint are invalid.
ENDPOINT_TOL = 1e-9
PARALLEL_EPS = 1e-14


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def mirror_xy(px, py, cx, cy, dx, dy):
    """Reflect (px, py) across the infinite line through (cx, cy)-(dx, dy)."""
    ex = dx - cx
    ey = dy - cy
    ll = ex * ex + ey * ey
    k = ((px - cx) * ex + (py - cy) * ey) / ll
    fx = cx + k * ex
    fy = cy + k * ey
    return 2.0 * fx - px, 2.0 * fy - py


def _blocked_many(ax, ay, bx, by, segs, skip1, skip2):
    """Vectorized leg/segment test. Returns a bool array, one entry per leg."""
    n = ax.shape[0]
    if n == 0 or segs.shape[0] == 0:
        return np.zeros(n, dtype=bool)
    cx = segs[:, 0][None, :]
    cy = segs[:, 1][None, :]
    ex = (segs[:, 2] - segs[:, 0])[None, :]
    ey = (segs[:, 3] - segs[:, 1])[None, :]
    lx = (bx - ax)[:, None]
    ly = (by - ay)[:, None]
    denom = lx * ey - ly * ex
    wx = cx - ax[:, None]
    wy = cy - ay[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (wx * ey - wy * ex) / denom
        u = (wx * ly - wy * lx) / denom
    hit = (np.abs(denom) > PARALLEL_EPS) & (t > LEG_EPS) & (t < 1.0 - LEG_EPS) & (u >= 0.0) & (u <= 1.0)
    idx = np.arange(segs.shape[0])[None, :]
    hit &= (idx != skip1[:, None]) & (idx != skip2[:, None])
    return hit.any(axis=1)


def visible_mask(p, va_pos, va_seq, va_order, segs):
    """Visibility of every virtual anchor at agent position ``p``.

    ``va_seq[i, :va_order[i]]`` lists the segment indices mirrored (BS first).
    ``segs`` holds all segments, mirror walls and pure blockers alike, as rows
    ``(x1, y1, x2, y2)``. Returns a uint8 mask.
    """
    va_pos = np.asarray(va_pos, dtype=np.float64)
    segs = np.asarray(segs, dtype=np.float64)
    va_seq = np.asarray(va_seq, dtype=np.int64)
    va_order = np.asarray(va_order, dtype=np.int64)
    n = va_pos.shape[0]
    alive = np.ones(n, dtype=bool)
    curx = np.full(n, float(p[0]))
    cury = np.full(n, float(p[1]))
    imgx = va_pos[:, 0].copy()
    imgy = va_pos[:, 1].copy()
    prev = np.full(n, -1, dtype=np.int64)
    max_order = int(va_order.max()) if n else 0

    for step in range(max_order):
        level = va_order - 1 - step
        act = alive & (level >= 0)
        if not act.any():
            continue
        ia = np.nonzero(act)[0]
        w = va_seq[ia, level[ia]]
        cx, cy, dx, dy = segs[w, 0], segs[w, 1], segs[w, 2], segs[w, 3]
        ex = dx - cx
        ey = dy - cy
        lx = imgx[ia] - curx[ia]
        ly = imgy[ia] - cury[ia]
        denom = lx * ey - ly * ex
        wx = cx - curx[ia]
        wy = cy - cury[ia]
        ok = np.abs(denom) > PARALLEL_EPS
        safe = np.where(ok, denom, 1.0)
        t = (wx * ey - wy * ex) / safe
        u = (wx * ly - wy * lx) / safe
        wlen = np.sqrt(ex * ex + ey * ey)
        ok &= (t > LEG_EPS) & (t < 1.0 - LEG_EPS)
        ok &= (u * wlen > ENDPOINT_TOL) & ((1.0 - u) * wlen > ENDPOINT_TOL)
        qx = curx[ia] + t * lx
        qy = cury[ia] + t * ly
        blk = _blocked_many(curx[ia], cury[ia], qx, qy, segs, prev[ia], w)
        ok &= ~blk
        alive[ia[~ok]] = False
        good = ia[ok]
        g = ok
        mx, my = mirror_xy(imgx[good], imgy[good], cx[g], cy[g], dx[g], dy[g])
        curx[good] = qx[g]
        cury[good] = qy[g]
        imgx[good] = mx
        imgy[good] = my
        prev[good] = w[g]

    ia = np.nonzero(alive)[0]
    blk = _blocked_many(curx[ia], cury[ia], imgx[ia], imgy[ia], segs, prev[ia], np.full(ia.shape[0], -1))
    alive[ia[blk]] = False
    return alive.astype(np.uint8)


def linear_assignment(cost):
    """Minimum-cost assignment of every row to a distinct column (rows <= cols).

    Shortest augmenting path form of the Hungarian (Munkres) method with row and
    column potentials. Columns are scanned in index order and only a strictly
    smaller slack replaces the incumbent, so ties resolve to the lowest column.
    Returns an int64 array ``col_of_row``.
    """
    a = np.asarray(cost, dtype=np.float64)
    n, m = a.shape
    if n > m:
        raise ValueError("linear_assignment needs rows <= cols")
    rows = a.tolist()
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = rows[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
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
        if p[j] != 0:
            out[p[j] - 1] = j - 1
    return out
