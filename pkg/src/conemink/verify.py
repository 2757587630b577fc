"""Seeded random instances and pass/fail suites comparing solvers with oracles."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _polytope
from .cone import Cone
from .ma import ConvexPLFunction, cell_volumes, domain_from_polygon, solve_dirichlet
from .mink2d import AngularMeasure, fubini_form, layer_cake, necessity_check, solve2d
from .pseudocone import PseudoCone
from .sam import pullback_oracle, surface_measure

PLANAR_ANGLES = (math.pi / 6, math.pi / 4, 1.2)


def thread_count() -> int:
    """Worker cap from ``CONEMINK_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CONEMINK_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``map`` over independent jobs, in input order, on at most :func:`thread_count` threads."""
    items = list(items)
    n = thread_count()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# generators


def random_angular_measure(rng, min_atoms: int = 2, max_atoms: int = 50, beta0=None) -> AngularMeasure:
    b0 = float(rng.choice(PLANAR_ANGLES)) if beta0 is None else beta0
    n = int(rng.integers(min_atoms, max_atoms + 1))
    th = rng.uniform(-b0, b0, n) * (1 - 1e-6)
    w = rng.uniform(0.05, 5.0, n)
    return AngularMeasure.from_atoms(b0, list(zip(th, w)))


def random_cone_3d(rng, rays: int | None = None) -> Cone:
    """A pointed cone around ``-e_1`` with 3 to 6 rays at random azimuths."""
    k = int(rng.integers(3, 7)) if rays is None else rays
    az = np.sort(rng.uniform(0, 2 * np.pi, k))
    # keep consecutive azimuth gaps below pi so that -e_1 is interior
    while np.max(np.diff(np.append(az, az[0] + 2 * np.pi))) >= 0.9 * np.pi:
        az = np.sort(rng.uniform(0, 2 * np.pi, k))
    tilt = rng.uniform(0.4, 1.0, k)
    r = np.column_stack([-np.ones(k), tilt * np.cos(az), tilt * np.sin(az)])
    return Cone.from_rays(r, axis=[-1.0, 0.0, 0.0])


def random_domain_directions(cone: Cone, count: int, rng, margin: float = 0.05) -> np.ndarray:
    g = cone.dual_normals
    w = rng.dirichlet(np.ones(len(g)), size=count)
    w = (1 - margin) * w + margin / len(g)
    v = w @ g
    return v / np.linalg.norm(v, axis=1)[:, None]


def random_pseudocone_3d(rng, cuts: int | None = None, cone: Cone | None = None) -> PseudoCone:
    cone = cone or random_cone_3d(rng)
    n = int(rng.integers(3, 9)) if cuts is None else cuts
    v = random_domain_directions(cone, n, rng)
    h = -rng.uniform(0.5, 2.0, n)
    return PseudoCone.from_cuts(cone, v, h)


def random_convex_polygon(rng, sides: int | None = None) -> np.ndarray:
    k = int(rng.integers(3, 9)) if sides is None else sides
    ang = np.sort(rng.uniform(0, 2 * np.pi, k))
    while np.max(np.diff(np.append(ang, ang[0] + 2 * np.pi))) >= 0.95 * np.pi:
        ang = np.sort(rng.uniform(0, 2 * np.pi, k))
    rad = rng.uniform(0.7, 1.5, k)
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return _polytope.order_ccw(pts[_hull_indices(pts)])


def _hull_indices(pts):
    from scipy.spatial import ConvexHull
    return ConvexHull(pts).vertices


def random_ma_instance(rng, min_nodes: int = 3, max_nodes: int = 40):
    """Random nodes in a random polygon and random generator values of a convex PL function."""
    poly = random_convex_polygon(rng)
    dom = domain_from_polygon(poly)
    n = int(rng.integers(min_nodes, max_nodes + 1))
    nodes = []
    while len(nodes) < n:
        w = rng.dirichlet(np.ones(len(poly)))
        x = w @ poly
        if dom.boundary_distance(x) > 0.03 and all(np.linalg.norm(x - y) > 0.02 for y in nodes):
            nodes.append(x)
    nodes = np.array(nodes)
    # a strictly convex quadratic that is <= 0 at the corners puts every node on the lower hull
    m = rng.standard_normal((2, 2))
    P = m @ m.T + 0.2 * np.eye(2)
    c = nodes.mean(axis=0)
    q = lambda x: np.einsum("ij,jk,ik->i", x - c, P, x - c)  # noqa: E731
    vals = q(nodes) - float(np.max(q(poly))) - rng.uniform(0.1, 1.0)
    return dom, nodes, vals


# ---------------------------------------------------------------------------
# suites


def _row(case, value, tol, passed, **extra) -> dict:
    return dict({"case": case, "value": float(value), "tolerance": float(tol), "passed": bool(passed)}, **extra)


def suite_roundtrip2d(seed: int = 0, count: int = 200) -> list[dict]:
    rng = np.random.default_rng(seed)
    measures = [random_angular_measure(rng) for _ in range(count)]

    def one(args):
        i, mu = args
        K = solve2d(mu)
        S = surface_measure(K)
        if len(S) != len(mu):
            return _row(i, math.inf, 1e-12, False)
        th = np.arctan2(S.directions[:, 1], S.directions[:, 0])
        err = max(float(np.max(np.abs(S.weights - mu.weights) / mu.weights)),
                  float(np.max(np.abs(th - mu.thetas))))
        return _row(i, err, 1e-12, err <= 1e-12)

    return ordered_map(one, enumerate(measures))


def suite_necessity2d(seed: int = 0, count: int = 200) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        rep = necessity_check(solve2d(random_angular_measure(rng)))
        slack = min(rep["upper"]["P"] - rep["upper"]["I"], rep["upper"]["dist"] - rep["upper"]["P"],
                    rep["lower"]["P"] - rep["lower"]["I"], rep["lower"]["dist"] - rep["lower"]["P"])
        rows.append(_row(i, slack, -1e-12, slack >= -1e-12))
    return rows


def suite_fubini(seed: int = 0, count: int = 100) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        mu = random_angular_measure(rng, 1, 60)
        a, b = layer_cake(mu.beta0, mu.thetas, mu.weights), fubini_form(mu.beta0, mu.thetas, mu.weights)
        diff = abs(a - b) / max(1.0, abs(b))
        rows.append(_row(i, diff, 1e-12, diff <= 1e-12))
    return rows


def suite_pullback(seed: int = 0, count: int = 20) -> list[dict]:
    """Weighted normal components of ``S_K`` against brute-force subdifferential cells."""
    rng = np.random.default_rng(seed)
    sets = [random_pseudocone_3d(rng) for _ in range(count)]

    def one(args):
        i, k = args
        rep = pullback_oracle(k)
        return _row(i, rep["max_rel_error"], 1e-8, rep["max_rel_error"] <= 1e-8, atoms=len(rep["pullback"]))

    return ordered_map(one, enumerate(sets))


def suite_ma_roundtrip(seed: int = 0, count: int = 50) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        dom, nodes, vals = random_ma_instance(rng)
        gen = ConvexPLFunction(dom, nodes, vals)
        vols = cell_volumes(gen)
        act = vols > 0
        f = solve_dirichlet(nodes[act], vols[act], dom)
        err = float(np.max(np.abs(f.values - vals[act])))
        ach = np.array([n["achieved"] for n in f.report["nodes"]])
        mass = float(np.max(np.abs(ach - vols[act]) / vols[act]))
        rows.append(_row(i, err, 1e-6, err <= 1e-6 and mass <= 1e-9 and f.report["iterations"] <= 10 ** 5,
                         mass_error=mass, iterations=f.report["iterations"], nodes=int(act.sum())))
    return rows


def suite_hausdorff(seed: int = 0, count: int = 100) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        outer = random_convex_polygon(rng)
        z = outer.mean(axis=0)
        shrink = rng.uniform(0.5, 0.95)
        inner = _polytope.order_ccw(z + shrink * (outer - z) + rng.uniform(-0.02, 0.02, 2) * (1 - shrink))
        A, b = _polytope.polygon_halfspaces(outer)
        if np.any(inner @ A.T > b + 1e-12):
            raise RuntimeError("generated polygons are not nested")
        r = min(_polytope.point_segment_distance(z, inner[j], inner[(j + 1) % len(inner)])
                for j in range(len(inner)))
        rep = _polytope.hausdorff_lemma_check(inner, outer, z, r)
        rows.append(_row(i, rep["bound"] - rep["d_H"], 0.0, rep["holds"], d_H=rep["d_H"], bound=rep["bound"]))
    return rows


SUITES = {
    "roundtrip2d": suite_roundtrip2d,
    "necessity2d": suite_necessity2d,
    "fubini": suite_fubini,
    "pullback": suite_pullback,
    "ma-roundtrip": suite_ma_roundtrip,
    "hausdorff": suite_hausdorff,
}


def run_suite(name: str, seed: int = 0, count: int | None = None) -> list[dict]:
    fn = SUITES[name]
    return fn(seed) if count is None else fn(seed, count)

