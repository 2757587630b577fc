"""Pointed convex cones, their duals, the spherical domain and the projective chart.

All geometry is carried out in an *internal frame* in which the cone axis
``u_*`` equals ``-e_1``.  Cones built with a different axis store the
orthogonal change of basis in :attr:`Cone.frame` (user -> internal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

ANGLE_TOL = 1e-12
DEFAULT_RING = 256


def _unit_rows(a: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero generator vector")
    return a / norms[:, None]


def _dedupe_rows(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    keep: list[np.ndarray] = []
    for row in a:
        if not any(np.linalg.norm(row - k) < tol for k in keep):
            keep.append(row)
    return np.array(keep)


def is_pointed(generators: np.ndarray) -> bool:
    """LP test: the cone spanned by ``generators`` contains no line.

    Equivalent to the existence of ``u`` with ``<g, u> > 0`` for every generator.
    """
    g = _unit_rows(generators)
    n = g.shape[1]
    # variables (u, t); maximise t subject to <g_j, u> >= t, |u_i| <= 1
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-g, np.ones((len(g), 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(g)),
                  bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9)


def _inner_direction(g: np.ndarray) -> np.ndarray:
    """Unit ``u`` maximizing ``min_j <g_j, u>`` (positive for a pointed cone)."""
    n = g.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-g, np.ones((len(g), 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(g)),
                  bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    u = res.x[:n]
    return u / np.linalg.norm(u)


def facet_normals(generators: np.ndarray) -> np.ndarray:
    """Unit outer facet normals of the cone spanned by ``generators``.

    The outer facet normals of a polyhedral cone are the extreme rays of its
    polar, so applying this twice returns the extreme rays.
    """
    g = _unit_rows(generators)
    n = g.shape[1]
    if np.linalg.matrix_rank(g, tol=1e-10) < n:
        raise ValueError("not full-dimensional")
    if not is_pointed(g):
        raise ValueError("cone is not pointed")
    if n == 2:
        ang = np.arctan2(g[:, 1], g[:, 0])
        mid = np.arctan2(g[:, 1].sum(), g[:, 0].sum())
        rel = np.angle(np.exp(1j * (ang - mid)))
        lo, hi = g[np.argmin(rel)], g[np.argmax(rel)]
        # rotate the extreme generators away from the interior
        n_lo = np.array([lo[1], -lo[0]])
        n_hi = np.array([-hi[1], hi[0]])
        return np.array([n_lo, n_hi])
    # project radially onto the hyperplane <x, u> = 1 for a u strictly inside the cone
    u = _inner_direction(g)
    # orthonormal basis of u^perp
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    basis = q[:, 1:n]
    pts = g / (g @ u)[:, None]
    hull = ConvexHull(pts @ basis)
    normals = []
    for eq in hull.equations:
        a, b = eq[:-1], eq[-1]
        w = basis @ a + b * u
        normals.append(w / np.linalg.norm(w))
    return _dedupe_rows(np.array(normals))


def _extreme_rays(generators: np.ndarray) -> np.ndarray:
    return facet_normals(facet_normals(generators))


def _householder_to_minus_e1(u: np.ndarray) -> np.ndarray:
    n = len(u)
    target = np.zeros(n)
    target[0] = -1.0
    w = u - target
    if np.linalg.norm(w) < 1e-15:
        return np.eye(n)
    w /= np.linalg.norm(w)
    return np.eye(n) - 2.0 * np.outer(w, w)


def _choose_axis(rays: np.ndarray, normals: np.ndarray) -> np.ndarray:
    n = rays.shape[1]
    minus_e1 = -np.eye(n)[0]
    if np.min(rays @ minus_e1) > 1e-9 and np.max(normals @ minus_e1) < -1e-9:
        return minus_e1
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.vstack([np.hstack([-rays, np.ones((len(rays), 1))]),
                      np.hstack([normals, np.ones((len(normals), 1))])])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(a_ub)),
                  bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        raise ValueError("no admissible axis u_* for this cone")
    u = res.x[:n]
    return u / np.linalg.norm(u)


@dataclass(frozen=True)
class Direction:
    """A unit vector of the closed domain together with its boundary distance."""

    v: np.ndarray
    delta: float


@dataclass(frozen=True)
class ProjectedDomain:
    """The bounded convex region ``Phi^{-1}(Omega)`` as ``{x : A x < b}``."""

    A: np.ndarray
    b: np.ndarray
    vertices: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def contains(self, x, strict: bool = True, tol: float = 0.0) -> bool:
        s = self.A @ np.asarray(x, dtype=float) - self.b
        return bool(np.all(s < -tol) if strict else np.all(s <= tol))

    def boundary_distance(self, x) -> float:
        """Euclidean distance from an interior point to the boundary."""
        s = self.b - self.A @ np.asarray(x, dtype=float)
        return float(np.min(s / np.linalg.norm(self.A, axis=1)))

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)))


@dataclass(frozen=True, eq=False)
class Cone:
    """A pointed closed convex cone ``C`` with nonempty interior.

    ``rays`` are the unit extreme rays of ``C`` and ``dual_normals`` the unit
    extreme rays of the polar ``C°`` (equivalently the outer facet normals
    of ``C``); both are expressed in the internal frame where ``u_* = -e_1``.
    ``kind == "circular3d"`` is the analytic cone ``x <= -tan(pi/2 - beta)
    * sqrt(y^2 + z^2)`` whose domain ``Omega`` is the spherical cap of
    angular radius ``beta`` about ``e_1``; its ray arrays are empty and
    :meth:`polyhedral` supplies a facetted stand-in.
    """

    rays: np.ndarray
    dual_normals: np.ndarray
    kind: str = "polyhedral"
    beta: float | None = None
    frame: np.ndarray = field(default=None)  # type: ignore[assignment]

    # -- construction -----------------------------------------------------
    @classmethod
    def planar(cls, beta0: float) -> "Cone":
        """The planar cone with ``C° = {angles in [-beta0, beta0]}``."""
        if not 0 < beta0 < math.pi / 2:
            raise ValueError("beta0 must lie in (0, pi/2)")
        c, s = math.cos(beta0), math.sin(beta0)
        rays = np.array([[-s, -c], [-s, c]])
        normals = np.array([[c, -s], [c, s]])
        return cls(rays, normals, beta=float(beta0), frame=np.eye(2))

    @classmethod
    def circular(cls, beta: float = math.pi / 4, axis=None) -> "Cone":
        """Circular cone in R^3 whose domain is a cap of radius ``beta``.

        With the default ``beta = pi/4`` this is ``x <= -sqrt(y^2 + z^2)``.
        """
        if not 0 < beta < math.pi / 2:
            raise ValueError("beta must lie in (0, pi/2)")
        frame = np.eye(3) if axis is None else _householder_to_minus_e1(_unit_rows(axis)[0])
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), kind="circular3d",
                   beta=float(beta), frame=frame)

    @classmethod
    def from_rays(cls, rays, axis=None) -> "Cone":
        """Polyhedral cone spanned by ``rays`` (user coordinates)."""
        r = _extreme_rays(rays)
        g = facet_normals(r)
        return cls._framed(r, g, axis)

    @classmethod
    def from_dual_normals(cls, normals, axis=None) -> "Cone":
        """Polyhedral cone whose polar is spanned by ``normals``."""
        g = _extreme_rays(normals)
        r = facet_normals(g)
        return cls._framed(r, g, axis)

    @classmethod
    def _framed(cls, rays, normals, axis) -> "Cone":
        u = _choose_axis(rays, normals) if axis is None else _unit_rows(axis)[0]
        if np.min(rays @ u) <= 0 or np.max(normals @ u) >= 0:
            raise ValueError("axis u_* must satisfy <r,u_*> > 0 on C and <v,u_*> < 0 on closed Omega")
        q = _householder_to_minus_e1(u)
        return cls(rays @ q.T, normals @ q.T, frame=q)

    def __post_init__(self):
        if self.frame is None:
            object.__setattr__(self, "frame", np.eye(self.dim))
        for name in ("rays", "dual_normals", "frame"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.kind not in ("polyhedral", "circular3d"):
            raise ValueError(f"unknown cone kind {self.kind!r}")

    # -- basic properties -------------------------------------------------
    @property
    def dim(self) -> int:
        if self.kind == "circular3d":
            return 3
        return np.asarray(self.rays).shape[1]

    @property
    def axis(self) -> np.ndarray:
        """``u_*`` in the internal frame (always ``-e_1``)."""
        e = np.zeros(self.dim)
        e[0] = -1.0
        return e

    @property
    def user_axis(self) -> np.ndarray:
        return self.frame.T @ self.axis

    @property
    def user_rays(self) -> np.ndarray:
        return self.rays @ self.frame

    @property
    def user_dual_normals(self) -> np.ndarray:
        return self.dual_normals @ self.frame

    @property
    def beta0(self) -> float:
        """Half-opening angle of ``Omega`` for planar cones."""
        if self.dim != 2:
            raise ValueError("beta0 is defined for planar cones only")
        if self.beta is not None:
            return self.beta
        g = self.dual_normals
        return float(0.5 * math.acos(np.clip(g[0] @ g[1], -1.0, 1.0)))

    @property
    def is_circular(self) -> bool:
        return self.kind == "circular3d"

    def polyhedral(self, q: int = DEFAULT_RING) -> "Cone":
        """Facetted stand-in: the circumscribed cone with ``q`` facets.

        Its domain is the inscribed ``q``-gon cap, so the projected domain is
        the regular polygon inscribed in the disk of radius ``tan(beta)``.
        Polyhedral cones are returned unchanged.
        """
        if not self.is_circular:
            return self
        if q < 3:
            raise ValueError("ring count must be at least 3")
        th = 2 * np.pi * np.arange(q) / q
        b = self.beta
        g = np.column_stack([np.full(q, math.cos(b)), math.sin(b) * np.cos(th),
                             math.sin(b) * np.sin(th)])
        r = facet_normals(g)
        return Cone(r, g, frame=self.frame)

    # -- membership ---------------------------------------------------------
    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        if self.is_circular:
            a = math.tan(math.pi / 2 - self.beta)
            return bool(-x[0] >= a * math.hypot(x[1], x[2]) - tol * max(1.0, np.linalg.norm(x)))
        return bool(np.all(self.dual_normals @ x <= tol * max(1.0, np.linalg.norm(x))))

    def in_closed_domain(self, v, tol: float = ANGLE_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        if self.is_circular:
            ang = math.acos(np.clip(v[0] / np.linalg.norm(v), -1.0, 1.0))
            return ang <= self.beta + tol
        return bool(np.all(self.rays @ v <= tol))

    def direction(self, v) -> Direction:
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return Direction(v, delta_boundary(self, v))


def dual_cone(c: Cone) -> Cone:
    """The polar cone ``C°``; ``dual_cone(dual_cone(c))`` reproduces ``c``."""
    new_axis = -c.user_axis
    if c.is_circular:
        return Cone.circular(math.pi / 2 - c.beta, axis=new_axis)
    if np.linalg.matrix_rank(c.rays, tol=1e-10) < c.dim:
        raise ValueError("not full-dimensional")
    return Cone._framed(c.user_dual_normals, c.user_rays, new_axis)


def delta_boundary(c: Cone, v) -> float:
    """Spherical distance from ``v`` in the closed domain to ``∂Omega`` (radians)."""
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if abs(nv - 1.0) > 1e-9:
        v = v / nv
    if c.is_circular:
        ang = math.acos(float(np.clip(v[0], -1.0, 1.0)))
        d = c.beta - ang
        if d < -ANGLE_TOL:
            raise ValueError("direction outside closed domain")
        return max(d, 0.0)
    s = c.rays @ v
    if np.max(s) > ANGLE_TOL:
        raise ValueError("direction outside closed domain")
    return float(max(0.0, np.min(np.arcsin(np.clip(-s, 0.0, 1.0)))))


def delta_many(c: Cone, vs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`delta_boundary` for rows of ``vs`` (no validation)."""
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    if c.is_circular:
        return np.maximum(c.beta - np.arccos(np.clip(vs[:, 0], -1.0, 1.0)), 0.0)
    s = vs @ c.rays.T
    return np.maximum(np.min(np.arcsin(np.clip(-s, -1.0, 1.0)), axis=1), 0.0)


def chart(c: Cone, x) -> Direction:
    """``Phi(x) = (1, x) / sqrt(1 + |x|^2)`` for ``x`` in the projected domain."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (c.dim - 1,):
        raise ValueError("chart point has wrong dimension")
    y = np.concatenate([[1.0], x])
    if c.is_circular:
        inside = np.linalg.norm(x) < math.tan(c.beta)
    else:
        inside = bool(np.all(c.rays @ y < 0))
    if not inside:
        raise ValueError("outside chart domain")
    v = y / math.sqrt(1.0 + float(x @ x))
    return Direction(v, delta_boundary(c, v))


def chart_inverse(c: Cone, v) -> np.ndarray:
    v = v.v if isinstance(v, Direction) else np.asarray(v, dtype=float)
    if v[0] <= 0:
        raise ValueError("direction not in the open upper hemisphere")
    return v[1:] / v[0]


def chart_many(xs: np.ndarray) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    y = np.hstack([np.ones((len(xs), 1)), xs])
    return y / np.linalg.norm(y, axis=1)[:, None]


def chart_inverse_many(vs: np.ndarray) -> np.ndarray:
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    return vs[:, 1:] / vs[:, :1]


def projected_domain(c: Cone, q: int = DEFAULT_RING) -> ProjectedDomain:
    """Half-space description of ``Phi^{-1}(Omega)``.

    For ``circular3d`` cones the inscribed regular ``q``-gon is returned.
    """
    pc = c.polyhedral(q)
    r = pc.rays
    A, b = r[:, 1:], -r[:, 0]
    if pc.dim == 2:
        lo = max(bb / a[0] for a, bb in zip(A, b) if a[0] < 0)
        hi = min(bb / a[0] for a, bb in zip(A, b) if a[0] > 0)
        verts = np.array([[lo], [hi]])
    else:
        g = pc.dual_normals
        verts = g[:, 1:] / g[:, :1]
        if pc.dim == 3:
            ctr = verts.mean(axis=0)
            order = np.argsort(np.arctan2(verts[:, 1] - ctr[1], verts[:, 0] - ctr[0]))
            verts = verts[order]
    return ProjectedDomain(A, b, verts)


def boundary_directions(c: Cone, per_edge: int = 4) -> np.ndarray:
    """Sample unit vectors on ``∂Omega`` (extreme points plus edge samples)."""
    if c.is_circular:
        th = 2 * np.pi * np.arange(max(per_edge, 4) * 4) / (max(per_edge, 4) * 4)
        b = c.beta
        return np.column_stack([np.full_like(th, math.cos(b)), math.sin(b) * np.cos(th),
                                math.sin(b) * np.sin(th)])
    g = c.dual_normals
    if c.dim == 2 or per_edge <= 1:
        return g.copy()
    out = [gi for gi in g]
    # edges of Omega: pairs of extreme normals sharing n-2 tight rays
    tight = np.abs(g @ c.rays.T) < 1e-10
    for i in range(len(g)):
        for j in range(i + 1, len(g)):
            if np.count_nonzero(tight[i] & tight[j]) >= c.dim - 2:
                for s in np.linspace(0, 1, per_edge + 1)[1:-1]:
                    w = (1 - s) * g[i] + s * g[j]
                    out.append(w / np.linalg.norm(w))
    return np.array(out)
