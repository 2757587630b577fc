"""Polyhedral C-pseudo sets ``K = C ∩ H^-(v_1, h_1) ∩ ... ∩ H^-(v_m, h_m)``.

Every vector handled here is expressed in the internal frame of the cone
(``u_* = -e_1``); use :meth:`Cone.frame` to move user data in and out.

Planar sets keep their offsets as :class:`fractions.Fraction` so that vertex
positions, edge lengths and translations are exact up to a final square
root.  In dimension three facets are obtained by clipping each cut plane
against all other half-spaces below a truncation height; higher dimensions
fall back on a half-space intersection.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _planar, _polytope
from .cone import ANGLE_TOL, Cone

MERGE_TOL = 1e-13


@dataclass(frozen=True)
class Facet:
    normal: np.ndarray
    offset: float
    vertices: np.ndarray
    area: float
    interior: bool  # normal lies in the open domain


@dataclass(frozen=True)
class Slice:
    """The bounded polytope ``K^-(t) = K ∩ {<x, u_*> <= t}``."""

    t: float
    vertices: np.ndarray
    A: np.ndarray
    b: np.ndarray
    facets: list

    def distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if np.all(self.A @ p <= self.b + 1e-14 * (1 + np.abs(self.b))):
            return 0.0
        if len(p) == 2:
            return _polytope.point_polygon_distance(p, self.vertices)
        return min(_polytope.point_polygon3d_distance(p, f) for f in self.facets if len(f) >= 3)


@dataclass
class _Geometry:
    vertices: np.ndarray
    facets: list
    height: float
    exact_vertices: list | None = None


def _is_boundary(cone: Cone, v: np.ndarray) -> bool:
    return bool(np.max(cone.rays @ v) > -ANGLE_TOL)


@dataclass(frozen=True, eq=False)
class PseudoCone:
    """``C`` cut by finitely many half-spaces ``<x, v> <= h`` with ``v`` in the closed domain.

    Use :meth:`from_cuts` rather than the raw constructor; it normalises the
    normals, merges duplicates and drops cuts with ``h >= 0`` (these never
    bite inside ``C``).
    """

    cone: Cone
    normals: np.ndarray
    offsets: tuple
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_cuts(cls, cone: Cone, normals, offsets) -> "PseudoCone":
        if cone.is_circular:
            cone = cone.polyhedral()
        n = cone.dim
        normals = np.asarray(normals, dtype=float).reshape(-1, n)
        offsets = list(offsets)
        if len(offsets) != len(normals):
            raise ValueError("normals and offsets differ in length")
        exact = n == 2
        kept_v: list[np.ndarray] = []
        kept_h: list = []
        for v, h in zip(normals, offsets):
            nv = np.linalg.norm(v)
            if nv == 0:
                raise ValueError("zero cut normal")
            if abs(nv - 1.0) > 1e-14:
                # keep (nearly) unit input bit-for-bit so planar data stays exact
                v = v / nv
                h = Fraction(h) / Fraction(float(nv)) if exact else float(h) / nv
            elif exact:
                h = Fraction(h)
            else:
                h = float(h)
            if np.max(cone.rays @ v) > ANGLE_TOL:
                raise ValueError("cut normal outside closed domain")
            # snap normals lying on a facet normal of C to that normal exactly
            gd = np.linalg.norm(cone.dual_normals - v, axis=1) if len(cone.dual_normals) else np.zeros(0)
            if len(gd) and gd.min() < 1e-12:
                v = cone.dual_normals[int(np.argmin(gd))].copy()
            if kept_v:
                kd = np.linalg.norm(np.asarray(kept_v) - v, axis=1)
                idx = int(np.argmin(kd))
                if kd[idx] < MERGE_TOL:
                    kept_h[idx] = min(kept_h[idx], h)
                    continue
            kept_v.append(v)
            kept_h.append(h)
        pairs = [(v, h) for v, h in zip(kept_v, kept_h) if h < 0]
        vs = np.array([p[0] for p in pairs]) if pairs else np.zeros((0, n))
        return cls(cone, vs, tuple(p[1] for p in pairs))

    @classmethod
    def full(cls, cone: Cone) -> "PseudoCone":
        return cls.from_cuts(cone, np.zeros((0, cone.dim)), [])

    def __post_init__(self):
        arr = np.array(self.normals, dtype=float).reshape(-1, self.cone.dim)
        arr.setflags(write=False)
        object.__setattr__(self, "normals", arr)

    @property
    def dim(self) -> int:
        return self.cone.dim

    @property
    def h(self) -> np.ndarray:
        return np.array([float(x) for x in self.offsets])

    @property
    def is_exact(self) -> bool:
        return self.dim == 2

    def boundary_cut_mask(self) -> np.ndarray:
        return np.array([_is_boundary(self.cone, v) for v in self.normals], dtype=bool)

    # -- lazy geometry ----------------------------------------------------
    def geometry(self) -> _Geometry:
        geo = self._cache.get("geo")
        if geo is None:
            with self._lock:
                geo = self._cache.get("geo")
                if geo is None:
                    geo = _build_geometry(self)
                    self._cache["geo"] = geo
        return geo

    @property
    def vertices(self) -> np.ndarray:
        return self.geometry().vertices

    @property
    def facets(self) -> list[Facet]:
        return self.geometry().facets

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        scale = max(1.0, float(np.linalg.norm(x)))
        if not self.cone.contains(x, tol):
            return False
        return bool(np.all(self.normals @ x <= self.h + tol * scale))

    def redundant_cuts(self) -> list[int]:
        """Indices of cuts whose hyperplane does not carry a facet of ``K``."""
        used = set()
        for f in self.facets:
            for i, v in enumerate(self.normals):
                if np.linalg.norm(v - f.normal) < MERGE_TOL and f.area > 0:
                    used.add(i)
        return [i for i in range(len(self.normals)) if i not in used]

    def __repr__(self) -> str:
        return f"PseudoCone(dim={self.dim}, cuts={len(self.normals)})"


# ---------------------------------------------------------------------------
# geometry builders


def _build_geometry(k: PseudoCone) -> _Geometry:
    if k.dim == 2:
        return _build_planar(k)
    return _build_truncated(k)


def _planar_lines(k: PseudoCone):
    cone = k.cone
    g_lo, g_hi = sorted(cone.dual_normals, key=lambda g: g[1])
    b0 = math.atan2(g_hi[1], g_hi[0])
    # boundary lines of C carry tags -1 (lower) and -2 (upper)
    entries = [(-b0, g_lo, Fraction(0), -1), (b0, g_hi, Fraction(0), -2)]
    for i, (v, h) in enumerate(zip(k.normals, k.offsets)):
        if np.array_equal(v, g_lo):
            entries[0] = (-b0, g_lo, min(Fraction(0), h), -1)
        elif np.array_equal(v, g_hi):
            entries[1] = (b0, g_hi, min(Fraction(0), h), -2)
        else:
            entries.append((math.atan2(v[1], v[0]), v, h, i))
    entries.sort(key=lambda e: e[0])
    out = []
    for ang, v, h, tag in entries:
        if out and ang - out[-1][0] < MERGE_TOL:
            if h < out[-1][2]:
                out[-1] = (out[-1][0], out[-1][1], h, out[-1][3])
            continue
        out.append((ang, _planar.frac_vec(v), h, tag))
    return out


def _build_planar(k: PseudoCone) -> _Geometry:
    lines = _planar_lines(k)
    stack, verts = _planar.boundary_chain(lines)
    if not verts:
        raise ValueError("degenerate planar set")
    fverts = np.array([[float(p[0]), float(p[1])] for p in verts])
    facets = []
    for idx, (ang, g, h, tag) in enumerate(stack):
        normal = np.array([float(g[0]), float(g[1])])
        if idx == 0 or idx == len(stack) - 1:
            facets.append(Facet(normal, float(h), fverts[[idx - 1 if idx else 0]], math.inf, False))
            continue
        a, b = verts[idx - 1], verts[idx]
        facets.append(Facet(normal, float(h), fverts[[idx - 1, idx]], _planar.edge_length(a, b), True))
    height = float(np.max(-fverts[:, 0]))
    return _Geometry(fverts, facets, height, exact_vertices=verts)


def _cap_height(cone: Cone, v: np.ndarray, h: float) -> float:
    s = cone.rays @ v
    return float(np.max(h * (cone.rays[:, 0] * -1.0) / s))


def _halfspaces(k: PseudoCone, t: float):
    cone = k.cone
    A = [v for v in k.normals]
    b = list(k.h)
    for g in cone.dual_normals:
        if not any(np.array_equal(g, v) for v in k.normals):
            A.append(g)
            b.append(0.0)
    interior = [not _is_boundary(cone, v) for v in A]
    A.append(cone.axis)
    b.append(t)
    interior.append(False)
    return np.array(A), np.array(b), interior


def _build_truncated(k: PseudoCone) -> _Geometry:
    cone = k.cone
    caps = [_cap_height(cone, v, h) for v, h in zip(k.normals, k.h)
            if not _is_boundary(cone, v)]
    bnd = [abs(h) for v, h in zip(k.normals, k.h) if _is_boundary(cone, v)]
    c_min = float(np.min(cone.rays @ cone.axis))
    t = 4.0 * max([1.0] + caps + [x / c_min for x in bnd])
    for _ in range(80):
        geo = _truncated_at(k, t)
        if geo.height <= 0.5 * t:
            return geo
        t *= 2.0
    raise RuntimeError("truncation height did not stabilise; increase T")


def _truncated_at(k: PseudoCone, t: float) -> _Geometry:
    cone = k.cone
    A, b, interior = _halfspaces(k, t)
    c_min = float(np.min(cone.rays @ cone.axis))
    radius = t / c_min
    n = k.dim
    if n == 3:
        polys = _polytope.facet_polygons_3d(A, b, radius)
        allv = np.vstack([p for p in polys if len(p)]) if any(len(p) for p in polys) else np.zeros((0, 3))
        areas = [_polytope.polygon_area_3d(p) for p in polys]
    else:
        allv = _polytope.polytope_vertices(A, b)
        areas = _polytope.facet_measures_nd(A, b, allv)
        polys = []
        for i in range(len(A)):
            a = A[i] / np.linalg.norm(A[i])
            polys.append(allv[np.abs(allv @ a - b[i]) < 1e-9 * (1 + t)])
    heights = allv @ cone.axis
    true = allv[heights < t * (1 - 1e-9)]
    if len(true) == 0:
        true = np.zeros((1, n))
    keep: list[np.ndarray] = []
    for p in true:
        if not any(np.linalg.norm(p - q) < 1e-11 * (1 + np.linalg.norm(p)) for q in keep):
            keep.append(p)
    verts = np.array(keep)
    facets = []
    for i in range(len(A) - 1):
        poly = polys[i]
        if len(poly) == 0:
            continue
        touches = bool(np.any(poly @ cone.axis >= t * (1 - 1e-9)))
        if interior[i] and touches and areas[i] > 0:
            raise RuntimeError("unbounded facet with normal in Omega (invariant breach)")
        facets.append(Facet(A[i], float(b[i]), poly, math.inf if touches else areas[i], interior[i]))
    height = float(np.max(verts @ cone.axis))
    return _Geometry(verts, facets, height)


# ---------------------------------------------------------------------------
# support function and derived predicates


def _check_direction(k: PseudoCone, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (k.dim,):
        raise ValueError("direction has wrong dimension")
    v = v / np.linalg.norm(v)
    if not k.cone.in_closed_domain(v):
        raise ValueError("direction outside closed domain")
    return v


def support(k: PseudoCone, v) -> float:
    """``h_K(v) = sup_{x in K} <x, v>`` for ``v`` in the closed domain.

    The supremum is the maximum over the vertices of ``K`` (``K`` is the
    vertex hull plus ``C`` and ``h_C = 0`` on the closed domain), so boundary
    directions need no limiting process.
    """
    v = _check_direction(k, v)
    geo = k.geometry()
    if geo.exact_vertices is not None:
        fv = _planar.frac_vec(v)
        return float(max(_planar.dot(p, fv) for p in geo.exact_vertices))
    return float(np.max(geo.vertices @ v))


def support_exact(k: PseudoCone, v) -> Fraction:
    """Exact planar support value (``v`` taken literally as a float vector)."""
    if not k.is_exact:
        raise ValueError("exact support is only available in the plane")
    fv = _planar.frac_vec(np.asarray(v, dtype=float))
    return max(_planar.dot(p, fv) for p in k.geometry().exact_vertices)


def support_many(k: PseudoCone, vs: np.ndarray) -> np.ndarray:
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    return np.max(vs @ k.vertices.T, axis=1)


@dataclass(frozen=True)
class AsymptoticReport:
    asymptotic: bool
    worst: float
    witness: np.ndarray


def is_asymptotic(k: PseudoCone, tol: float = 1e-9) -> AsymptoticReport:
    """Test ``h_K = 0`` on ``∂Omega``.

    ``h_K(w) < 0`` at some ``w`` on the boundary exactly when a cut with
    ``h < 0`` has its normal on the boundary, so the candidates are those
    normals plus the extreme boundary directions of the cone.
    """
    cands = list(k.cone.dual_normals)
    cands += [v for v in k.normals if _is_boundary(k.cone, v)]
    vals = [support(k, w) for w in cands]
    i = int(np.argmin(vals))
    return AsymptoticReport(bool(abs(vals[i]) < tol), float(vals[i]), np.array(cands[i]))


def touching_vertices(k: PseudoCone, v, tol: float = 1e-10) -> np.ndarray:
    v = _check_direction(k, v)
    verts = k.vertices
    vals = verts @ v
    top = float(np.max(vals))
    return verts[vals >= top - tol * (1 + abs(top))]


def localization_height(k: PseudoCone, v) -> float:
    """Height bound for the touching set ``tau_K(v)`` with ``v`` in the open domain.

    ``tau_K(v)`` lies in ``C ∩ {<x, v> = h_K(v)}``, a bounded cap whose
    farthest point along ``u_*`` sits on an extreme ray of ``C``.
    """
    v = _check_direction(k, v)
    if _is_boundary(k.cone, v):
        raise ValueError("localization needs a direction in the open domain")
    return _cap_height(k.cone, v, support(k, v))


# ---------------------------------------------------------------------------
# transformations


def scale(k: PseudoCone, lam: float) -> PseudoCone:
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    f = Fraction(lam) if k.is_exact else float(lam)
    return PseudoCone(k.cone, k.normals, tuple(h * f for h in k.offsets))


def translate(k: PseudoCone, z) -> PseudoCone:
    """``K + z`` for ``z`` in ``C`` (so that the result stays inside ``C``)."""
    z = np.asarray(z, dtype=float)
    if not k.cone.contains(z):
        raise ValueError("translation must lie in C to keep K + z inside C")
    normals = list(k.normals) + list(k.cone.dual_normals)
    if k.is_exact:
        fz = _planar.frac_vec(z)
        offs = [h + _planar.dot(_planar.frac_vec(v), fz) for v, h in zip(k.normals, k.offsets)]
        offs += [_planar.dot(_planar.frac_vec(g), fz) for g in k.cone.dual_normals]
    else:
        offs = [h + float(v @ z) for v, h in zip(k.normals, k.offsets)]
        offs += [float(g @ z) for g in k.cone.dual_normals]
    return PseudoCone.from_cuts(k.cone, normals, offs)


def boundary_translation(k: PseudoCone):
    """The point ``z_0`` with ``<z_0, g> = h_K(g)`` at the extreme boundary directions."""
    g = k.cone.dual_normals
    if k.is_exact:
        hs = [support_exact(k, gi) for gi in g]
        return _planar.intersect(_planar.frac_vec(g[0]), hs[0], _planar.frac_vec(g[1]), hs[1])
    hs = np.array([support(k, gi) for gi in g])
    if np.linalg.matrix_rank(g, tol=1e-10) < k.dim:
        raise ValueError("boundary data rank-deficient")
    z, *_ = np.linalg.lstsq(g, hs, rcond=None)
    if np.max(np.abs(g @ z - hs)) > 1e-9 * (1 + np.max(np.abs(hs))):
        raise ValueError("boundary data rank-deficient: support on ∂Omega is not that of a translate of C")
    return z


def normalize_translation(k: PseudoCone) -> PseudoCone:
    """Return ``K - z_0``, the translate with zero support on ``∂Omega``."""
    z0 = boundary_translation(k)
    if k.is_exact:
        offs = [h - _planar.dot(_planar.frac_vec(v), z0) for v, h in zip(k.normals, k.offsets)]
    else:
        offs = [h - float(v @ z0) for v, h in zip(k.normals, k.offsets)]
    keep = [i for i, v in enumerate(k.normals) if not _is_boundary(k.cone, v)]
    return PseudoCone.from_cuts(k.cone, k.normals[keep], [offs[i] for i in keep])


def same_cone(a: Cone, b: Cone) -> bool:
    if a is b:
        return True
    return (a.dim == b.dim and a.rays.shape == b.rays.shape
            and np.allclose(a.rays, b.rays, atol=1e-12)
            and np.allclose(a.dual_normals, b.dual_normals, atol=1e-12))


@dataclass(frozen=True)
class SumCertificate:
    candidates: int
    facets: int
    max_support_error: float


def minkowski_sum(k: PseudoCone, l: PseudoCone, with_certificate: bool = False):
    """``K + L`` as a pseudo cone; its support function is ``h_K + h_L``.

    Planar sums merge the two normal lists with exact offsets.  In higher
    dimension the facet normals come from the hull of the vertex sums
    together with those sums pushed along the rays of ``C``; a facet of that
    hull whose normal lies in the closed domain is a facet of ``K + L``.
    """
    if not same_cone(k.cone, l.cone):
        raise ValueError("pseudo cones live in different cones")
    cone = k.cone
    if k.is_exact:
        normals = list(k.normals) + list(l.normals) + list(cone.dual_normals)
        offs = [support_exact(k, v) + support_exact(l, v) for v in normals]
        res = PseudoCone.from_cuts(cone, normals, offs)
        cert = SumCertificate(len(normals), len(res.normals), 0.0)
        return (res, cert) if with_certificate else res
    from scipy.spatial import ConvexHull

    P = (k.vertices[:, None, :] + l.vertices[None, :, :]).reshape(-1, k.dim)
    P = np.unique(np.round(P, 14), axis=0)
    lam = 1.0 + float(np.ptp(P, axis=0).max()) if len(P) > 1 else 1.0
    pts = np.vstack([P] + [P + lam * r for r in cone.rays])
    hull = ConvexHull(pts)
    normals: list[np.ndarray] = []
    for eq in hull.equations:
        w = eq[:-1] / np.linalg.norm(eq[:-1])
        if np.max(cone.rays @ w) <= 1e-9 and not any(np.linalg.norm(w - q) < 1e-9 for q in normals):
            normals.append(w)
    normals = [w / np.linalg.norm(w) for w in normals]
    offs = [float(np.max(P @ w)) for w in normals]
    res = PseudoCone.from_cuts(cone, normals, offs)
    rng = np.random.default_rng(0)
    err = 0.0
    for v in _random_domain_directions(cone, 64, rng):
        err = max(err, abs(support(res, v) - support(k, v) - support(l, v)))
    cert = SumCertificate(len(hull.equations), len(res.normals), err)
    if err > 1e-8 * (1 + lam):
        raise RuntimeError(f"increase T: sampled support error {err:.3e}")
    return (res, cert) if with_certificate else res


def _random_domain_directions(cone: Cone, count: int, rng) -> np.ndarray:
    g = cone.dual_normals
    out = []
    for _ in range(count):
        w = rng.dirichlet(np.ones(len(g))) @ g
        out.append(w / np.linalg.norm(w))
    return np.array(out)


random_domain_directions = _random_domain_directions


# ---------------------------------------------------------------------------
# slices and Hausdorff comparison


def slice_at(k: PseudoCone, t: float) -> Slice:
    """The truncation ``K^-(t)``; raises if it is empty or flat."""
    if t <= 0:
        raise ValueError("empty slice")
    cone = k.cone
    if k.dim == 2:
        geo = k.geometry()
        verts = geo.vertices
        if np.min(verts @ cone.axis) >= t:
            raise ValueError("empty slice")
        g_lo, g_hi = sorted(cone.dual_normals, key=lambda g: g[1])
        d_lo = np.array([-g_lo[1], g_lo[0]])  # edge direction, lower ray runs backwards
        d_hi = np.array([-g_hi[1], g_hi[0]])
        far = 2.0 * t + 1.0 + float(np.max(np.abs(verts)))
        p0 = verts[0] - d_lo * (far / float(-d_lo @ cone.axis))
        p1 = verts[-1] + d_hi * (far / float(d_hi @ cone.axis))
        poly = np.vstack([p0, verts, p1])
        poly = _polytope.clip_polygon(poly, cone.axis, t)
        A = np.vstack([k.normals, cone.dual_normals, cone.axis]) if len(k.normals) else \
            np.vstack([cone.dual_normals, cone.axis])
        b = np.concatenate([k.h, [0.0, 0.0, t]])
        if _polytope.polygon_area(poly) <= 0:
            raise ValueError("empty slice")
        return Slice(t, poly, A, b, [])
    A, b, _ = _halfspaces(k, t)
    c_min = float(np.min(cone.rays @ cone.axis))
    if k.dim == 3:
        polys = _polytope.facet_polygons_3d(A, b, t / c_min)
        polys = [p for p in polys if len(p) >= 3 and _polytope.polygon_area_3d(p) > 0]
        if not polys:
            raise ValueError("empty slice")
        verts = np.unique(np.round(np.vstack(polys), 13), axis=0)
        return Slice(t, verts, A, b, polys)
    verts = _polytope.polytope_vertices(A, b)
    return Slice(t, verts, A, b, [])


def hausdorff_slices(a: Slice, b: Slice) -> float:
    """Exact Hausdorff distance between two polytopes (vertex maxima of the distance)."""
    d1 = max(b.distance(p) for p in a.vertices)
    d2 = max(a.distance(p) for p in b.vertices)
    return float(max(d1, d2))


def hausdorff_truncated(k: PseudoCone, l: PseudoCone, t: float) -> float:
    """``d_H(K^-(t), L^-(t))``."""
    return hausdorff_slices(slice_at(k, t), slice_at(l, t))


def hausdorff_bound_check(k: PseudoCone, l: PseudoCone, t: float, z, r: float) -> dict:
    """Check the inscribed-ball estimate for planar slices ``K^-(t) ⊆ L^-(t)``."""
    if k.dim != 2:
        raise ValueError("bound check implemented for planar slices")
    return _polytope.hausdorff_lemma_check(slice_at(k, t).vertices, slice_at(l, t).vertices, z, r)
