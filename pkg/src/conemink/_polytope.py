"""Float polytope helpers: polygon clipping, facet enumeration, distances."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection


def clip_polygon(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Clip a convex polygon (rows in order) to ``{y : <a, y> <= b}``."""
    if len(poly) == 0:
        return poly
    s = poly @ a - b
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        sp, sq = s[i], s[(i + 1) % k]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.zeros((0, poly.shape[1]))


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of an ordered planar polygon."""
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(math.fsum(x * np.roll(y, -1)) - math.fsum(np.roll(x, -1) * y))


def polygon_area_3d(poly: np.ndarray) -> float:
    """Area of an ordered planar polygon embedded in R^3 (fan from the centroid)."""
    if len(poly) < 3:
        return 0.0
    c = poly.mean(axis=0)
    cr = np.cross(poly - c, np.roll(poly, -1, axis=0) - c)
    tot = np.array([math.fsum(cr[:, j]) for j in range(3)])
    return 0.5 * float(np.linalg.norm(tot))


def order_ccw(pts: np.ndarray) -> np.ndarray:
    c = pts.mean(axis=0)
    return pts[np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))]


def plane_basis(normal: np.ndarray) -> np.ndarray:
    """Two orthonormal vectors spanning ``normal^perp`` (rows)."""
    n = normal / np.linalg.norm(normal)
    e = np.eye(3)[np.argmin(np.abs(n))]
    a = np.cross(n, e)
    a /= np.linalg.norm(a)
    return np.array([a, np.cross(n, a)])


def facet_polygons_3d(A: np.ndarray, b: np.ndarray, radius: float) -> list[np.ndarray]:
    """Facet polygon of every half-space of the bounded polytope ``A x <= b``.

    ``radius`` must bound the polytope.  Empty or degenerate facets come back
    as arrays with fewer than three rows.
    """
    out = []
    for i in range(len(A)):
        a = A[i] / np.linalg.norm(A[i])
        bi = b[i] / np.linalg.norm(A[i])
        basis = plane_basis(a)
        origin = a * bi
        r = 2.0 * radius + abs(bi)
        poly = np.array([[-r, -r], [r, -r], [r, r], [-r, r]], dtype=float)
        for j in range(len(A)):
            if j == i or len(poly) == 0:
                continue
            aj = A[j]
            poly = clip_polygon(poly, basis @ aj, b[j] - origin @ aj)
        out.append(origin + poly @ basis if len(poly) else np.zeros((0, 3)))
    return out


def chebyshev_center(A: np.ndarray, b: np.ndarray):
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(A.shape[1] + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([A, norms[:, None]]), b_ub=b,
                  bounds=[(None, None)] * A.shape[1] + [(0, None)], method="highs")
    if res.status != 0:
        raise ValueError("empty polytope")
    return res.x[:-1], res.x[-1]


def polytope_vertices(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vertices of the bounded full-dimensional polytope ``A x <= b`` (any dimension)."""
    z, r = chebyshev_center(A, b)
    if r <= 1e-12:
        raise ValueError("polytope has empty interior")
    hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), z)
    pts = hs.intersections
    keep: list[np.ndarray] = []
    for p in pts:
        if not any(np.linalg.norm(p - q) < 1e-10 * (1 + np.linalg.norm(p)) for q in keep):
            keep.append(p)
    return np.array(keep)


def facet_measures_nd(A: np.ndarray, b: np.ndarray, verts: np.ndarray,
                      tol: float = 1e-9) -> list[float]:
    """(n-1)-volume of the facet on each half-space of a bounded polytope."""
    n = A.shape[1]
    out = []
    scale = 1.0 + float(np.max(np.abs(verts)))
    for i in range(len(A)):
        a = A[i] / np.linalg.norm(A[i])
        on = verts[np.abs(verts @ a - b[i] / np.linalg.norm(A[i])) < tol * scale]
        if len(on) < n:
            out.append(0.0)
            continue
        q, _ = np.linalg.qr(np.column_stack([a, np.eye(n)]))
        pts = (on - on[0]) @ q[:, 1:n]
        if n - 1 == 1:
            out.append(float(np.ptp(pts[:, 0])))
            continue
        try:
            out.append(float(ConvexHull(pts).volume))
        except Exception:
            out.append(0.0)
    return out


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0 else min(1.0, max(0.0, float((p - a) @ d) / dd))
    return float(np.linalg.norm(p - (a + t * d)))


def point_polygon3d_distance(p: np.ndarray, poly: np.ndarray) -> float:
    """Distance from ``p`` to a planar convex polygon in R^3 (ordered vertices)."""
    c = poly.mean(axis=0)
    nrm = np.cross(poly[1] - poly[0], poly[2] - poly[0])
    for k in range(3, len(poly)):
        if np.linalg.norm(nrm) > 0:
            break
        nrm = np.cross(poly[k - 1] - poly[0], poly[k] - poly[0])
    nrm = nrm / np.linalg.norm(nrm)
    proj = p - ((p - c) @ nrm) * nrm
    inside = True
    k = len(poly)
    for i in range(k):
        e = poly[(i + 1) % k] - poly[i]
        if np.cross(e, proj - poly[i]) @ nrm < -1e-14 * (1 + np.linalg.norm(e)):
            inside = False
            break
    if inside:
        return abs(float((p - c) @ nrm))
    return min(point_segment_distance(p, poly[i], poly[(i + 1) % k]) for i in range(k))


def point_polygon_distance(p: np.ndarray, poly: np.ndarray) -> float:
    """Distance from a planar point to a convex polygon (0 inside)."""
    k = len(poly)
    area2 = 0.0
    for i in range(k):
        area2 += poly[i, 0] * poly[(i + 1) % k, 1] - poly[(i + 1) % k, 0] * poly[i, 1]
    sign = 1.0 if area2 >= 0 else -1.0
    inside = True
    for i in range(k):
        e = poly[(i + 1) % k] - poly[i]
        w = p - poly[i]
        if sign * (e[0] * w[1] - e[1] * w[0]) < 0:
            inside = False
            break
    if inside:
        return 0.0
    return min(point_segment_distance(p, poly[i], poly[(i + 1) % k]) for i in range(k))


def polygon_halfspaces(poly: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Outer half-planes ``A x <= b`` of a convex polygon (any orientation)."""
    poly = order_ccw(poly)
    k = len(poly)
    A, b = [], []
    for i in range(k):
        e = poly[(i + 1) % k] - poly[i]
        nrm = np.array([e[1], -e[0]])
        nrm /= np.linalg.norm(nrm)
        A.append(nrm)
        b.append(nrm @ poly[i])
    return np.array(A), np.array(b)


def hausdorff_polygons(P: np.ndarray, Q: np.ndarray) -> float:
    """Exact Hausdorff distance between two convex polygons given by vertices."""
    P, Q = order_ccw(P), order_ccw(Q)
    d1 = max(point_polygon_distance(p, Q) for p in P)
    d2 = max(point_polygon_distance(q, P) for q in Q)
    return max(d1, d2)


def max_boundary_gap(K: np.ndarray, L: np.ndarray) -> float:
    """``max_{x in ∂K} dist(x, ∂L)`` for convex polygons ``K ⊆ L``.

    On each edge of ``K`` the distance to ``∂L`` is a minimum of affine
    functions of the edge parameter, so its maximum sits at an endpoint or
    at a crossing of two of those functions.
    """
    K = order_ccw(K)
    A, b = polygon_halfspaces(L)
    best = 0.0
    k = len(K)
    for i in range(k):
        p, q = K[i], K[(i + 1) % k]
        # f_j(s) = b_j - A_j (p + s (q - p)) = c_j + s d_j
        c = b - A @ p
        d = -(A @ (q - p))
        cands = [0.0, 1.0]
        for j in range(len(c)):
            for l in range(j + 1, len(c)):
                if d[j] != d[l]:
                    s = (c[l] - c[j]) / (d[j] - d[l])
                    if 0.0 < s < 1.0:
                        cands.append(s)
        best = max(best, max(float(np.min(c + s * d)) for s in cands))
    return best


def hausdorff_lemma_check(K: np.ndarray, L: np.ndarray, z, r: float) -> dict:
    """Compare ``d_H(K, L)`` against ``(1 + max|y - z| / r) * max gap``.

    ``K ⊆ L`` are convex polygons given by vertices and ``B(z, r) ⊆ K``.
    """
    z = np.asarray(z, dtype=float)
    dh = hausdorff_polygons(K, L)
    gap = max_boundary_gap(K, L)
    far = float(np.max(np.linalg.norm(L - z, axis=1)))
    bound = (1.0 + far / r) * gap
    return {"d_H": dh, "gap": gap, "max_radius": far, "r": r, "bound": bound,
            "holds": bool(dh <= bound * (1 + 1e-12) + 1e-15)}
