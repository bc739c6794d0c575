"""Independent reference implementations used only by the tests.

They deliberately use different formulations from the package (complex
arithmetic for reflections, explicit enumeration for assignment, integrals of
the closed-form spectrum for bandwidths) so agreement is meaningful.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np
from scipy import integrate

C = 299_792_458.0


def reflect_complex(p: complex, a: complex, b: complex) -> complex:
    """Reflect p across the line through a and b: ``a + (u / conj(u)) * conj(p - a)``."""
    u = b - a
    return a + (u / u.conjugate()) * (p - a).conjugate()


def enumerate_vas(walls, bs, max_order, tol=1e-9):
    """All mirror sequences of length <= max_order without immediate repeats.

    ``walls`` is a list of ((x1, y1), (x2, y2)) reflective walls. Returns a
    list of (complex position, order), positions within ``tol`` merged and the
    lowest order kept.
    """
    zs = [(complex(*w[0]), complex(*w[1])) for w in walls]
    out: list[tuple[complex, int]] = []
    for k in range(max_order + 1):
        for seq in itertools.product(range(len(zs)), repeat=k):
            if any(seq[j] == seq[j + 1] for j in range(k - 1)):
                continue
            p = complex(*bs)
            for w in seq:
                p = reflect_complex(p, *zs[w])
            if all(abs(p - q) > tol for q, _ in out):
                out.append((p, k))
    return out


def _seg_intersect(p, q, a, b):
    """Parameters (t on p->q, u on a->b) of the intersection, or None when parallel."""
    d1, d2 = q - p, b - a
    den = d1.real * d2.imag - d1.imag * d2.real
    if abs(den) < 1e-15:
        return None
    w = a - p
    t = (w.real * d2.imag - w.imag * d2.real) / den
    u = (w.real * d1.imag - w.imag * d1.real) / den
    return t, u


def ray_trace_visible(bs, seq, walls, blockers, p, tol=1e-9):
    """Image-method visibility by backward tracing from ``p`` through the mirror sequence.

    ``walls``: reflective walls by index, ``blockers``: every segment that can
    block a leg (walls and obstructions) as (a, b) tuples.
    """
    zs = [(complex(*w[0]), complex(*w[1])) for w in walls]
    blk = [(complex(*s[0]), complex(*s[1])) for s in blockers]
    images = [complex(*bs)]
    for w in seq:
        images.append(reflect_complex(images[-1], *zs[w]))
    cur = complex(*p)
    points = [cur]
    for level in range(len(seq), 0, -1):
        a, b = zs[seq[level - 1]]
        hit = _seg_intersect(cur, images[level], a, b)
        if hit is None:
            return False
        t, u = hit
        L = abs(b - a)
        if not (0 < t < 1) or u * L <= tol or (1 - u) * L <= tol:
            return False
        cur = a + u * (b - a)
        points.append(cur)
    points.append(complex(*bs))
    pts = points[::-1]  # bs -> q1 -> ... -> p
    wall_on_leg = [None] + [seq[j] for j in range(len(seq))] + [None]
    for j in range(len(pts) - 1):
        s, e = pts[j], pts[j + 1]
        skip = {wall_on_leg[j], wall_on_leg[j + 1]}
        for idx, (a, b) in enumerate(blk):
            if idx in skip:
                continue
            hit = _seg_intersect(s, e, a, b)
            if hit is None:
                continue
            t, u = hit
            if 1e-9 < t < 1 - 1e-9 and 0 <= u <= 1:
                return False
    return True


@functools.lru_cache(maxsize=None)
def injections(rows: int, cols: int) -> np.ndarray:
    """Every one-to-one map of ``rows`` onto distinct columns, shape (n, rows)."""
    return np.array(list(itertools.permutations(range(cols), rows)), dtype=np.intp).reshape(-1, rows)


def brute_force_min_cost(cost: np.ndarray) -> float:
    """Exact minimum over all injections, as a correctly rounded float.

    Floating sums of the same entries in different orders can differ in the last
    bit, so near-minimal candidates are re-summed with ``math.fsum``.
    """
    r, c = cost.shape
    if r == 0:
        return 0.0
    inj = injections(r, c)
    sums = cost[np.arange(r)[None, :], inj].sum(axis=1)
    near = np.flatnonzero(sums <= sums.min() + 1e-9 * max(1.0, abs(sums.min())))
    return min(math.fsum(cost[np.arange(r), inj[j]]) for j in near)


def raised_cosine_spectrum(f, Tp, beta):
    """Closed-form RC spectrum (peak Tp) on |f|."""
    f = np.abs(np.asarray(f, dtype=np.float64))
    lo, hi = (1 - beta) / (2 * Tp), (1 + beta) / (2 * Tp)
    out = np.zeros_like(f)
    out[f <= lo] = Tp
    mid = (f > lo) & (f <= hi)
    out[mid] = Tp / 2 * (1 + np.cos(np.pi * Tp / beta * (f[mid] - lo)))
    return out


def rc_rms_bandwidth(Tp, beta):
    """sqrt of the second moment of |S|^2, by numerical quadrature."""
    hi = (1 + beta) / (2 * Tp)
    g = lambda f: float(raised_cosine_spectrum(f, Tp, beta)) ** 2  # noqa: E731
    num = integrate.quad(lambda f: f * f * g(f), 0, hi, points=[(1 - beta) / (2 * Tp)], limit=200)[0]
    den = integrate.quad(g, 0, hi, points=[(1 - beta) / (2 * Tp)], limit=200)[0]
    return math.sqrt(num / den)


def ekf_update_standard(x, P, anchors, z, r2):
    """Textbook EKF update with ``P = (I - K H) P``."""
    p = x[:2]
    d = p[None, :] - np.asarray(anchors, dtype=np.float64)
    rng = np.sqrt((d ** 2).sum(axis=1))
    H = np.hstack([d / rng[:, None], np.zeros((len(z), 2))])
    S = H @ P @ H.T + r2 * np.eye(len(z))
    K = P @ H.T @ np.linalg.inv(S)
    return x + K @ (np.asarray(z) - rng), (np.eye(4) - K @ H) @ P
