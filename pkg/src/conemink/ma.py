"""Discrete Monge-Ampère Dirichlet problems on the projected domain.

A :class:`ConvexPLFunction` is the lower convex envelope of the lifted
points ``(x_i, u_i)`` and ``(b, u_b)`` for the domain vertices ``b``
(``u_b = 0`` for the Dirichlet problems solved here).  The Monge-Ampère mass
of a node is the volume of its subdifferential cell.

Two independent ways of computing cells are provided: :func:`cell_oracle`
intersects all half-spaces ``<p, x_j - x_i> <= u_j - u_i`` by brute force,
while the solver reads cells off the lower hull of the lifted points and
assembles the Jacobian of the mass map from the dual edge lengths.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection

from . import _polytope
from .cone import Cone, ProjectedDomain, chart_inverse_many, chart_many, projected_domain
from .errors import ConvergenceError, PreconditionError

log = logging.getLogger(__name__)


def domain_from_polygon(vertices) -> ProjectedDomain:
    """A :class:`ProjectedDomain` from the vertices of a convex polygon (or an interval)."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim == 1 or v.shape[1] == 1:
        v = v.reshape(-1, 1)
        lo, hi = float(v.min()), float(v.max())
        return ProjectedDomain(np.array([[-1.0], [1.0]]), np.array([-lo, hi]), np.array([[lo], [hi]]))
    if v.shape[1] == 2:
        v = _polytope.order_ccw(v)
        A, b = _polytope.polygon_halfspaces(v)
        return ProjectedDomain(A, b, v)
    hull = ConvexHull(v)
    A = hull.equations[:, :-1]
    b = -hull.equations[:, -1]
    return ProjectedDomain(A, b, v[hull.vertices])


@dataclass(frozen=True, eq=False)
class ConvexPLFunction:
    """Convex envelope of node values and boundary values on a convex domain."""

    domain: ProjectedDomain
    nodes: np.ndarray
    values: np.ndarray
    boundary_values: np.ndarray | None = None
    report: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        d = self.domain.dim
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float).reshape(-1, d))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(-1))
        bv = self.boundary_values
        bv = np.zeros(len(self.domain.vertices)) if bv is None else np.asarray(bv, dtype=float)
        object.__setattr__(self, "boundary_values", bv)
        if len(self.nodes) != len(self.values):
            raise ValueError("nodes and values differ in length")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __len__(self) -> int:
        return len(self.values)

    def lifted_points(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.vstack([self.nodes, self.domain.vertices]),
                np.concatenate([self.values, self.boundary_values]))

    def __call__(self, x) -> float:
        """Envelope value at ``x`` (linear program over convex combinations)."""
        from scipy.optimize import linprog

        pts, z = self.lifted_points()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a_eq = np.vstack([pts.T, np.ones(len(pts))])
        res = linprog(z, A_eq=a_eq, b_eq=np.concatenate([x, [1.0]]), bounds=(0, None), method="highs")
        if res.status != 0:
            raise ValueError("point outside the domain")
        return float(res.fun)

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist(), "values": self.values.tolist(),
                "domain": self.domain.vertices.tolist(),
                "boundary_values": self.boundary_values.tolist()}


@dataclass(frozen=True)
class SubdifferentialCell:
    index: int
    vertices: np.ndarray
    volume: float
    inactive: bool


# ---------------------------------------------------------------------------
# brute-force oracle


def _oracle_halfspaces(f: ConvexPLFunction, i: int):
    pts, z = f.lifted_points()
    xi, ui = f.nodes[i], f.values[i]
    mask = np.ones(len(pts), dtype=bool)
    mask[i] = False
    return pts[mask] - xi, z[mask] - ui


def cell_oracle(f: ConvexPLFunction, i: int) -> SubdifferentialCell:
    """``∂u(x_i)`` from every other node and every domain vertex, no shortcuts."""
    A, c = _oracle_halfspaces(f, i)
    d = f.dim
    if d == 1:
        a = A[:, 0]
        lo = max((ci / ai for ai, ci in zip(a, c) if ai < 0), default=-math.inf)
        hi = min((ci / ai for ai, ci in zip(a, c) if ai > 0), default=math.inf)
        vol = max(0.0, hi - lo)
        verts = np.array([[lo], [hi]]) if hi >= lo else np.zeros((0, 1))
        return SubdifferentialCell(i, verts, vol, vol <= 0)
    dist = f.domain.boundary_distance(f.nodes[i])
    if dist <= 0:
        raise ValueError("node not strictly inside the domain")
    # every p in the cell satisfies |p| <= max(u_b - u_i) / dist
    top = float(np.max(f.boundary_values)) - float(f.values[i])
    radius = 2.0 * max(top, 0.0) / dist + 1.0
    if d == 2:
        poly = np.array([[-radius, -radius], [radius, -radius], [radius, radius], [-radius, radius]])
        for a, ci in zip(A, c):
            poly = _polytope.clip_polygon(poly, a, ci)
            if len(poly) == 0:
                break
        vol = _polytope.polygon_area(poly) if len(poly) >= 3 else 0.0
        return SubdifferentialCell(i, poly, vol, vol <= 0)
    box = np.vstack([np.eye(d), -np.eye(d)])
    A_all = np.vstack([A, box])
    c_all = np.concatenate([c, np.full(2 * d, radius)])
    try:
        z, r = _polytope.chebyshev_center(A_all, c_all)
    except ValueError:
        return SubdifferentialCell(i, np.zeros((0, d)), 0.0, True)
    if r <= 1e-13 * radius:
        return SubdifferentialCell(i, np.zeros((0, d)), 0.0, True)
    hs = HalfspaceIntersection(np.hstack([A_all, -c_all[:, None]]), z)
    verts = hs.intersections
    vol = float(ConvexHull(verts).volume)
    return SubdifferentialCell(i, verts, vol, vol <= 0)


def oracle_volumes(f: ConvexPLFunction) -> np.ndarray:
    return np.array([cell_oracle(f, i).volume for i in range(len(f))])


# ---------------------------------------------------------------------------
# hull-based cells and Jacobian


@dataclass
class _HullState:
    volumes: np.ndarray
    jacobian: np.ndarray
    cells: list


def _lower_hull_1d(x: np.ndarray, z: np.ndarray, n_nodes: int) -> _HullState:
    order = np.argsort(x, kind="stable")
    hull: list[int] = []
    for k in order:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (z[k] - z[a]) - (z[b] - z[a]) * (x[k] - x[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(int(k))
    vols = np.zeros(n_nodes)
    jac = np.zeros((n_nodes, n_nodes))
    cells: list = [np.zeros((0, 1))] * n_nodes
    for pos in range(1, len(hull) - 1):
        i = hull[pos]
        if i >= n_nodes:
            continue
        a, b = hull[pos - 1], hull[pos + 1]
        s_lo = (z[i] - z[a]) / (x[i] - x[a])
        s_hi = (z[b] - z[i]) / (x[b] - x[i])
        vols[i] = s_hi - s_lo
        cells[i] = np.array([[s_lo], [s_hi]])
        for j in (a, b):
            w = 1.0 / abs(x[i] - x[j])
            jac[i, i] -= w
            if j < n_nodes:
                jac[i, j] += w
    return _HullState(vols, jac, cells)


def _facet_gradients(pts: np.ndarray, z: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    d = pts.shape[1]
    grads = np.empty((len(simplices), d))
    for s, simp in enumerate(simplices):
        M = np.hstack([pts[simp], np.ones((d + 1, 1))])
        sol = np.linalg.solve(M, z[simp])
        grads[s] = sol[:d]
    return grads


def _dual_measure(grads: np.ndarray, direction: np.ndarray) -> float:
    """(d-1)-volume of the convex hull of gradients lying in a hyperplane ⊥ ``direction``."""
    d = grads.shape[1]
    if len(grads) < 2:
        return 0.0
    if d == 2:
        # the gradients of the two facets sharing an edge
        return float(np.max(np.linalg.norm(grads[:, None] - grads[None, :], axis=2)))
    e = direction / np.linalg.norm(direction)
    q, _ = np.linalg.qr(np.column_stack([e, np.eye(d)]))
    proj = (grads - grads[0]) @ q[:, 1:d]
    if d - 1 == 1:
        return float(np.ptp(proj[:, 0]))
    if len(proj) < d:
        return 0.0
    try:
        return float(ConvexHull(proj).volume)
    except Exception:
        return 0.0


def hull_state(f: ConvexPLFunction) -> _HullState:
    """Cells, volumes and mass Jacobian read off the lower hull of the lifted points."""
    pts, z = f.lifted_points()
    n_nodes = len(f)
    d = f.dim
    if n_nodes == 0:
        return _HullState(np.zeros(0), np.zeros((0, 0)), [])
    if d == 1:
        return _lower_hull_1d(pts[:, 0], z, n_nodes)
    hull = ConvexHull(np.hstack([pts, z[:, None]]))
    lower = hull.equations[:, d] < -1e-12
    simplices = hull.simplices[lower]
    grads = _facet_gradients(pts, z, simplices)
    vols = np.zeros(n_nodes)
    jac = np.zeros((n_nodes, n_nodes))
    cells: list = []
    incident: list[list[int]] = [[] for _ in range(len(pts))]
    for s, simp in enumerate(simplices):
        for v in simp:
            incident[v].append(s)
    for i in range(n_nodes):
        g = grads[incident[i]]
        if len(g) <= d:
            cells.append(g)
            continue
        if d == 2:
            poly = _polytope.order_ccw(g)
            vols[i] = _polytope.polygon_area(poly)
            cells.append(poly)
        else:
            try:
                vols[i] = float(ConvexHull(g).volume)
            except Exception:
                vols[i] = 0.0
            cells.append(g)
    # Jacobian: dV_i/du_j = |dual facet of edge ij| / |x_i - x_j|
    edges: dict[tuple[int, int], list[int]] = {}
    for s, simp in enumerate(simplices):
        for a in range(d + 1):
            for b in range(a + 1, d + 1):
                i, j = int(simp[a]), int(simp[b])
                if i > j:
                    i, j = j, i
                if i < n_nodes:
                    edges.setdefault((i, j), []).append(s)
    for (i, j), ss in edges.items():
        ell = _dual_measure(grads[ss], pts[j] - pts[i])
        w = ell / float(np.linalg.norm(pts[j] - pts[i]))
        jac[i, i] -= w
        if j < n_nodes:
            jac[j, j] -= w
            jac[i, j] += w
            jac[j, i] += w
    return _HullState(vols, jac, cells)


def cell_volumes(f: ConvexPLFunction) -> np.ndarray:
    return hull_state(f).volumes


# ---------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-9
    max_iter: int = 100_000
    depth_factor: float = 1e3
    method: str = "newton"  # or "oliker-prussner"
    polish_steps: int = 3
    oracle_checks: bool = True

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter <= 0 or self.depth_factor <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("newton", "oliker-prussner"):
            raise ValueError(f"unknown method {self.method!r}")


def _validate_problem(domain: ProjectedDomain, nodes: np.ndarray, masses: np.ndarray):
    if np.any(~np.isfinite(masses)) or np.any(masses <= 0):
        raise PreconditionError("all target masses must be positive", "positive masses")
    for x in nodes:
        if not domain.contains(x, strict=True):
            raise PreconditionError("nodes must lie strictly inside the domain", "interior nodes")
    for a in range(len(nodes)):
        for b in range(a + 1, len(nodes)):
            if np.array_equal(nodes[a], nodes[b]):
                raise PreconditionError("nodes must be pairwise distinct", "distinct nodes")


def _initial_values(domain: ProjectedDomain, nodes: np.ndarray, masses: np.ndarray,
                    dominate: bool = False):
    c = domain.vertices.mean(axis=0)
    r2 = float(np.max(np.sum((domain.vertices - c) ** 2, axis=1)))
    base = np.sum((nodes - c) ** 2, axis=1) - r2 * (1.0 + 1e-3)
    f1 = ConvexPLFunction(domain, nodes, base)
    v1 = cell_volumes(f1)
    if np.any(v1 <= 0):
        v1 = oracle_volumes(f1)
    if dominate:
        # every cell at least its target, as the monotone sweep requires
        lam = float(np.max((masses / v1) ** (1.0 / domain.dim))) * 1.01
    else:
        # match the total mass; the worst-cell scaling overshoots the depth by orders of magnitude
        lam = float((np.sum(masses) / np.sum(v1)) ** (1.0 / domain.dim))
    return lam * base


def solve_dirichlet(nodes, masses, domain: ProjectedDomain,
                    opts: SolverOptions | None = None) -> ConvexPLFunction:
    """Convex PL function, zero on the domain vertices, with cell volumes ``masses``.

    The default damped Newton iteration keeps every cell nonempty and
    accepts a step only if the residual norm shrinks by the factor
    ``1 - tau/2``.  ``method="oliker-prussner"`` instead starts with every
    cell too large and raises one value at a time until its cell carries the
    target; values then never decrease.
    """
    opts = opts or SolverOptions()
    d = domain.dim
    nodes = np.asarray(nodes, dtype=float).reshape(-1, d)
    masses = np.asarray(masses, dtype=float).reshape(-1)
    if len(nodes) != len(masses):
        raise ValueError("nodes and masses differ in length")
    if len(nodes) == 0:
        return ConvexPLFunction(domain, nodes, np.zeros(0),
                                report={"iterations": 0, "residuals": [], "method": opts.method})
    _validate_problem(domain, nodes, masses)
    depth = opts.depth_factor * max(domain.diameter, 1e-300)
    u = _initial_values(domain, nodes, masses, dominate=opts.method != "newton")
    if np.max(np.abs(u)) > depth:
        raise PreconditionError("mass too large for domain", "depth limit")
    if opts.method == "newton":
        u, hist, its = _newton(domain, nodes, masses, u, opts, depth)
    else:
        u, hist, its = _oliker_prussner(domain, nodes, masses, u, opts, depth)
    f = ConvexPLFunction(domain, nodes, u)
    vols = cell_volumes(f)
    report = {
        "method": opts.method,
        "iterations": its,
        "residuals": hist,
        "nodes": [{"target": float(m), "achieved": float(a), "u": float(x)}
                  for m, a, x in zip(masses, vols, u)],
    }
    if opts.oracle_checks:
        orc = oracle_volumes(f)
        report["oracle_max_rel_diff"] = float(np.max(np.abs(orc - vols) / masses))
    return ConvexPLFunction(domain, nodes, u, report=report)


def _residual(vols, masses) -> float:
    return float(np.max(np.abs(vols - masses) / masses))


def _newton(domain, nodes, masses, u, opts, depth):
    st = hull_state(ConvexPLFunction(domain, nodes, u))
    F = st.volumes - masses
    hist = [_residual(st.volumes, masses)]
    floor = 0.5 * min(float(np.min(masses)), float(np.min(st.volumes)))
    polish = 0
    it = 0
    while it < opts.max_iter:
        if hist[-1] <= opts.tol:
            if polish >= opts.polish_steps or hist[-1] < 1e-15:
                break
            polish += 1
        it += 1
        try:
            step = np.linalg.solve(st.jacobian, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(st.jacobian, -F, rcond=None)[0]
        norm = float(np.linalg.norm(F))
        tau = 1.0
        accepted = False
        while tau > 1e-12:
            cand = u + tau * step
            if np.all(cand < 0):
                cst = hull_state(ConvexPLFunction(domain, nodes, cand))
                cF = cst.volumes - masses
                if np.min(cst.volumes) >= floor and np.linalg.norm(cF) <= (1 - tau / 2) * norm:
                    accepted = True
                    break
            tau *= 0.5
        if not accepted:
            if hist[-1] <= opts.tol:
                break  # polishing cannot improve further
            raise ConvergenceError("damped Newton step failed", residuals=(F / masses).tolist())
        u, st, F = cand, cst, cF
        if np.max(np.abs(u)) > depth:
            raise PreconditionError("mass too large for domain", "depth limit")
        hist.append(_residual(st.volumes, masses))
    if hist[-1] > opts.tol:
        raise ConvergenceError(f"no convergence within {opts.max_iter} iterations",
                               residuals=(F / masses).tolist())
    return u, hist, it


def _single_cell_volume(domain, nodes, u, i) -> float:
    return cell_oracle(ConvexPLFunction(domain, nodes, u), i).volume


def _raise_node(domain, nodes, u, i, target, tol):
    """Raise ``u_i`` until its cell volume equals ``target`` (volume decreases in ``u_i``)."""
    lo, hi = float(u[i]), 0.0
    v_lo = _single_cell_volume(domain, nodes, u, i)
    w = u.copy()
    x = lo
    for _ in range(200):
        # secant-like guess using the homogeneity of the cell volume in depth, safeguarded
        guess = lo + (hi - lo) * 0.5
        if v_lo > 0:
            ratio = (target / v_lo) ** (1.0 / domain.dim)
            guess2 = lo * ratio if lo < 0 else guess
            if lo < guess2 < hi:
                guess = guess2
        w[i] = guess
        v = _single_cell_volume(domain, nodes, w, i)
        if abs(v - target) <= tol * target:
            x = guess
            break
        if v > target:
            lo, v_lo = guess, v
        else:
            hi = guess
        x = guess
        if hi - lo <= 1e-16 * max(1.0, abs(lo)):
            break
    return min(max(x, float(u[i])), 0.0)


def _oliker_prussner(domain, nodes, masses, u, opts, depth):
    u = u.copy()
    hist = []
    it = 0
    while it < opts.max_iter:
        vols = cell_volumes(ConvexPLFunction(domain, nodes, u))
        res = _residual(vols, masses)
        hist.append(res)
        if res <= opts.tol:
            break
        it += 1
        prev = u.copy()
        for i in range(len(u)):
            vi = _single_cell_volume(domain, nodes, u, i)
            if vi > masses[i] * (1 + 0.1 * opts.tol):
                u[i] = _raise_node(domain, nodes, u, i, masses[i], 0.1 * opts.tol)
        if np.any(u < prev - 1e-15 * np.abs(prev)):
            raise AssertionError("Oliker-Prussner values decreased")
        if np.array_equal(u, prev):
            break
    vols = cell_volumes(ConvexPLFunction(domain, nodes, u))
    if _residual(vols, masses) > opts.tol:
        raise ConvergenceError(f"no convergence within {opts.max_iter} sweeps",
                               residuals=((vols - masses) / masses).tolist())
    return u, hist, it


# ---------------------------------------------------------------------------
# dictionary with pseudo cones


def lift(f: ConvexPLFunction, cone: Cone):
    """The pseudo cone with cuts ``(Phi(x_i), u_i / sqrt(1 + |x_i|^2))``."""
    from .pseudocone import PseudoCone

    cone = cone.polyhedral() if cone.is_circular else cone
    if len(f) == 0:
        return PseudoCone.full(cone)
    normals = chart_many(f.nodes)
    offsets = f.values / np.sqrt(1.0 + np.sum(f.nodes ** 2, axis=1))
    return PseudoCone.from_cuts(cone, normals, offsets)


def solve(mu, opts: SolverOptions | None = None, q: int | None = None):
    """Finite Minkowski problem: the pseudo cone whose surface measure is ``mu``.

    Returns ``(K, f)`` with ``f`` the solved Dirichlet function (carrying the
    solver report).
    """
    from .cone import DEFAULT_RING

    cone = mu.cone
    ring = q or DEFAULT_RING
    pc = cone.polyhedral(ring) if cone.is_circular else cone
    dom = projected_domain(pc)
    if len(mu) == 0:
        f = ConvexPLFunction(dom, np.zeros((0, dom.dim)), np.zeros(0), report={"iterations": 0})
        return lift(f, pc), f
    nodes = chart_inverse_many(mu.directions)
    masses = mu.weights * mu.directions[:, 0]
    f = solve_dirichlet(nodes, masses, dom, opts)
    return lift(f, pc), f


def solve_dominated(mu, L, opts: SolverOptions | None = None, schedule: str = "full",
                    heights=None, i0: int = 1):
    """Solve along the truncations ``mu`` restricted to ``delta >= 1/i``.

    Requires ``mu <= S_L`` atomwise; every iterate then contains ``L``.
    Returns the last iterate and a report with the per-height Hausdorff
    gaps between successive distinct iterates.
    """
    from .pseudocone import hausdorff_truncated, support
    from .sam import check_domination, restrict, surface_measure

    s_l = surface_measure(L)
    bad = check_domination(mu, s_l, rtol=1e-9)
    if bad is not None:
        raise PreconditionError(f"hypothesis failed at atom {bad}: mu exceeds S_L",
                                "comparison: mu <= S_L atomwise")
    deltas = mu.deltas
    if len(mu) == 0:
        from .pseudocone import PseudoCone
        return PseudoCone.full(L.cone), {"levels": [], "gaps": []}
    i_max = max(i0, int(math.ceil(1.0 / float(np.min(deltas)))))
    levels = []
    seen = None
    for i in range(i0, i_max + 1):
        key = tuple(np.flatnonzero(deltas >= 1.0 / i))
        if key != seen and key:
            levels.append(i)
            seen = key
    if schedule == "final":
        levels = levels[-1:]
    if heights is None:
        t_l = float(np.max(L.vertices @ L.cone.axis))
        heights = [1.5 * t_l + 1.0, 3.0 * t_l + 2.0]
    out = []
    prev = None
    K = None
    for i in levels:
        mu_i = restrict(mu, 1.0 / i, closed=True)
        K, f = solve(mu_i, opts)
        viol = 0.0
        for v in K.normals:
            viol = max(viol, support(L, v) - support(K, v))
        at_atoms = [support(K, v) - support(L, v) for v in mu.directions]
        entry = {"i": i, "atoms": len(mu_i), "iterations": f.report.get("iterations"),
                 "contains_L": bool(viol <= 1e-9), "max_violation": float(max(viol, 0.0)),
                 "min_support_gap_at_atoms": float(min(at_atoms))}
        if prev is not None:
            entry["gaps"] = {float(t): hausdorff_truncated(prev, K, t) for t in heights}
        out.append(entry)
        prev = K
    gaps = [e.get("gaps") for e in out if "gaps" in e]
    monotone = all(
        all(b[t] <= a[t] + 1e-12 for t in a) for a, b in zip(gaps, gaps[1:])) if len(gaps) > 1 else True
    return K, {"levels": out, "heights": list(map(float, heights)), "gaps_monotone": monotone}


def blaschke_sum(K, L, opts: SolverOptions | None = None):
    """``K # L``: the asymptotic set with ``S = S_K + S_L``."""
    from .pseudocone import is_asymptotic, minkowski_sum, same_cone
    from .sam import surface_measure

    if not same_cone(K.cone, L.cone):
        raise PreconditionError("pseudo cones live in different cones", "same cone")
    for X in (K, L):
        if not is_asymptotic(X).asymptotic:
            raise PreconditionError("Blaschke sum needs asymptotic summands", "C-asymptotic")
    mu = surface_measure(K) + surface_measure(L)
    if K.dim == 2:
        from .mink2d import solve2d_measure
        return solve2d_measure(mu), {"route": "exact planar"}
    M = minkowski_sum(K, L)
    Q, rep = solve_dominated(mu, M, opts, schedule="final")
    rep["route"] = "dominated by K + L"
    return Q, rep
