"""The planar Minkowski problem for pseudo cones, solved exactly.

Atoms are angles ``theta`` in ``(-beta0, beta0)`` with positive weights,
identified with the unit vectors ``(cos theta, sin theta)``.  The solution is
assembled as a boundary polyline from exact rational edge vectors and then
translated so that both unbounded edges lie on ``∂C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _planar
from .cone import Cone
from .errors import PreconditionError
from .families import DEPTHS, TailFamily, doubling_verdict
from .pseudocone import PseudoCone, hausdorff_truncated, is_asymptotic, slice_at, support
from .sam import DiscreteMeasure


@dataclass(frozen=True)
class AngularMeasure:
    """Atoms sorted by angle; equal angles (within ``1e-10``) are merged."""

    beta0: float
    thetas: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_atoms(cls, beta0: float, atoms) -> "AngularMeasure":
        atoms = [(float(t), float(w)) for t, w in atoms]
        if not 0 < beta0 < math.pi / 2:
            raise ValueError("beta0 must lie in (0, pi/2)")
        for t, w in atoms:
            if not (math.isfinite(t) and math.isfinite(w)):
                raise ValueError("non-finite atom; use approximate2d for infinite families")
            if w <= 0:
                raise ValueError("weights must be positive")
            if not -beta0 < t < beta0:
                raise ValueError("atom angle outside (-beta0, beta0)")
        atoms.sort()
        th: list[float] = []
        ws: list[float] = []
        for t, w in atoms:
            if th and t - th[-1] < 1e-10:
                ws[-1] += w
            else:
                th.append(t)
                ws.append(w)
        return cls(float(beta0), np.array(th), np.array(ws))

    @property
    def cone(self) -> Cone:
        return Cone.planar(self.beta0)

    def __len__(self) -> int:
        return len(self.thetas)

    def to_discrete(self, cone: Cone | None = None) -> DiscreteMeasure:
        cone = cone or self.cone
        dirs = np.column_stack([np.cos(self.thetas), np.sin(self.thetas)])
        return DiscreteMeasure(cone, dirs.reshape(-1, 2), self.weights.copy())

    @classmethod
    def from_discrete(cls, mu: DiscreteMeasure) -> "AngularMeasure":
        th = np.arctan2(mu.directions[:, 1], mu.directions[:, 0]) if len(mu) else []
        return cls.from_atoms(mu.cone.beta0, list(zip(th, mu.weights)))


def _solve_directions(cone: Cone, dirs: np.ndarray, weights: np.ndarray) -> PseudoCone:
    if len(weights) == 0:
        return PseudoCone.full(cone)
    order = np.argsort(np.arctan2(dirs[:, 1], dirs[:, 0]), kind="stable")
    dirs, weights = dirs[order], weights[order]
    g_lo, g_hi = sorted(cone.dual_normals, key=lambda g: g[1])
    q = [(Fraction(0), Fraction(0))]
    for v, w in zip(dirs, weights):
        c, s = _planar.frac_vec(v)
        fw = Fraction(float(w))
        q.append((q[-1][0] - fw * s, q[-1][1] + fw * c))
    fg_lo, fg_hi = _planar.frac_vec(g_lo), _planar.frac_vec(g_hi)
    z0 = _planar.intersect(fg_lo, _planar.dot(q[0], fg_lo), fg_hi, _planar.dot(q[-1], fg_hi))
    offs = []
    for i, v in enumerate(dirs):
        p = (q[i][0] - z0[0], q[i][1] - z0[1])
        offs.append(_planar.dot(p, _planar.frac_vec(v)))
    return PseudoCone.from_cuts(cone, dirs, offs)


def solve2d(mu: AngularMeasure) -> PseudoCone:
    """The unique asymptotic set ``K`` with ``S_K = mu``.

    Edges ``w_i (-sin theta_i, cos theta_i)`` are chained in increasing angle
    from the origin; the unique ``z_0`` with ``<z_0, v_-> = h(v_-)`` and
    ``<z_0, v_+> = h(v_+)`` at the boundary directions ``v_pm = (cos beta0,
    ±sin beta0)`` is then subtracted.  Empty input returns ``C``.
    """
    cone = mu.cone
    dirs = np.column_stack([np.cos(mu.thetas), np.sin(mu.thetas)]).reshape(-1, 2)
    return _solve_directions(cone, dirs, mu.weights)


def solve2d_measure(mu: DiscreteMeasure) -> PseudoCone:
    """:func:`solve2d` for a :class:`DiscreteMeasure` on a planar cone (directions used verbatim)."""
    if mu.cone.dim != 2:
        raise ValueError("planar solver needs a planar cone")
    return _solve_directions(mu.cone, mu.directions, mu.weights)


def z0_condition_number(beta0: float) -> float:
    """Condition number bound ``1 / cos beta0`` of the translation system."""
    return 1.0 / math.cos(beta0)


# ---------------------------------------------------------------------------
# necessity


def _axis_point(k: PseudoCone) -> float:
    """``a`` with ``x_0 = (-a, 0)`` the boundary point of ``K`` on the negative first axis."""
    if len(k.normals) == 0:
        return 0.0
    return max(0.0, max(float(-h / Fraction(float(v[0]))) for v, h in zip(k.normals, k.offsets)))


def necessity_check(k: PseudoCone) -> dict:
    """Projection bounds along the two boundary lines of ``C``.

    Reports, for the upper part ``∂^+K`` (``y > 0``), its projected length
    ``P1`` onto the direction ``(cos beta0, sin beta0)``, the atom integral
    ``I1`` of ``sin(beta0 - alpha)`` over ``(alpha_0, beta0)`` and the
    distance ``d1 = a cos beta0`` from ``x_0 = (-a, 0)`` to the upper
    boundary line, and likewise ``P2, I2, d2`` below.  Expected:
    ``I1 <= P1 <= d1`` and ``I2 <= P2 <= d2``.
    """
    if k.dim != 2:
        raise ValueError("necessity check is planar")
    b0 = k.cone.beta0
    if not is_asymptotic(k).asymptotic:
        raise PreconditionError("necessity check needs an asymptotic set", "C-asymptotic")
    a = _axis_point(k)
    if a == 0.0:
        zero = {"P": 0.0, "I": 0.0, "dist": 0.0, "slack": 0.0}
        return {"x0": [0.0, 0.0], "alpha0": None, "upper": dict(zero), "lower": dict(zero),
                "holds": True, "trivial": True}
    up = np.array([math.cos(b0), math.sin(b0)])
    lo = np.array([math.cos(b0), -math.sin(b0)])
    edges = [f for f in k.facets if f.interior]
    # x0 lies on the first edge reaching y > 0; its normal angle is alpha0
    pos = next(j for j, f in enumerate(edges) if f.vertices[1][1] > 0)
    alpha0 = math.atan2(edges[pos].normal[1], edges[pos].normal[0])
    parts_up, parts_lo, atoms_up, atoms_lo = [], [], [], []
    for j, f in enumerate(edges):
        p, q = f.vertices[0], f.vertices[1]
        ang = math.atan2(f.normal[1], f.normal[0])
        if q[1] > 0:
            s = p if p[1] >= 0 else p + (q - p) * (-p[1] / (q[1] - p[1]))
            parts_up.append(abs(float((q - s) @ up)))
        if p[1] < 0:
            s = q if q[1] <= 0 else p + (q - p) * (-p[1] / (q[1] - p[1]))
            parts_lo.append(abs(float((s - p) @ lo)))
        if j > pos:
            atoms_up.append(f.area * math.sin(b0 - ang))
        elif j < pos:
            atoms_lo.append(f.area * math.sin(b0 + ang))
    p1, p2 = math.fsum(parts_up), math.fsum(parts_lo)
    i1, i2 = math.fsum(atoms_up), math.fsum(atoms_lo)
    dist = a * math.cos(b0)
    upper = {"P": p1, "I": i1, "dist": dist, "slack": dist - i1}
    lower = {"P": p2, "I": i2, "dist": dist, "slack": dist - i2}
    tol = 1e-12 * max(1.0, dist)
    holds = (i1 <= p1 + tol and p1 <= dist + tol and i2 <= p2 + tol and p2 <= dist + tol)
    return {"x0": [-a, 0.0], "alpha0": alpha0, "upper": upper, "lower": lower,
            "holds": bool(holds), "trivial": False}


# ---------------------------------------------------------------------------
# integrability condition


def layer_cake(beta0: float, thetas, weights) -> float:
    """``int_0^beta0 mu(omega_alpha) d alpha`` summed layer by layer."""
    d = beta0 - np.abs(np.asarray(thetas, dtype=float))
    w = np.asarray(weights, dtype=float)
    order = np.argsort(-d, kind="stable")
    d, w = d[order], w[order]
    terms = []
    acc: list[float] = []
    for i in range(len(d)):
        acc.append(w[i])
        nxt = d[i + 1] if i + 1 < len(d) else 0.0
        if nxt < d[i]:
            terms.append(math.fsum(acc) * (d[i] - nxt))
    return math.fsum(terms)


def fubini_form(beta0: float, thetas, weights) -> float:
    """``sum w_i (beta0 - |theta_i|)``."""
    return math.fsum(float(w) * (beta0 - abs(float(t))) for t, w in zip(thetas, weights))


def condition_value(mu, depths=DEPTHS) -> dict:
    """Evaluate the integrability condition of a measure or a tail family.

    For atoms both the layer-cake value and ``sum w (beta0 - |theta|)`` are
    returned.  For a :class:`TailFamily` the partial sums at each depth are
    tabulated together with the sine form and a doubling-ratio verdict.
    """
    if isinstance(mu, AngularMeasure):
        lc = layer_cake(mu.beta0, mu.thetas, mu.weights)
        fb = fubini_form(mu.beta0, mu.thetas, mu.weights)
        sn = math.fsum(w * math.sin(mu.beta0 - abs(t)) for t, w in zip(mu.thetas, mu.weights))
        return {"value": fb, "layer_cake": lc, "fubini": fb, "sine_form": sn,
                "difference": abs(lc - fb), "verdict": "finite"}
    if not isinstance(mu, TailFamily):
        raise TypeError("expected AngularMeasure or TailFamily")
    n_max = max(depths)
    th, w = mu.atoms(n_max)
    d = mu.beta0 - np.abs(th)
    lin = np.cumsum(w * d)
    sin_terms = np.cumsum(w * np.sin(d))
    table = [{"depth": int(n), "linear": float(lin[n - 1]), "sine": float(sin_terms[n - 1])}
             for n in depths]
    verdict = doubling_verdict(lambda n: float(lin[n - 1]), n_max)
    return {"table": table, "doubling": verdict,
            "verdict": "condition fails" if verdict["diverging"] else "converges",
            "value": float(lin[-1]),
            "note": "sine form is bounded by the linear form and by (2/pi) times it from below"}


# ---------------------------------------------------------------------------
# truncation scheme for infinite families


def _origin_distance(k: PseudoCone) -> float:
    verts = k.vertices
    t = float(np.max(np.linalg.norm(verts, axis=1))) + 1.0
    return slice_at(k, t).distance(np.zeros(2))


def _closed_bounds(k: PseudoCone, b0: float, alpha0: float | None) -> tuple[float, float]:
    if alpha0 is None:
        return 0.0, 0.0
    edges = [(math.atan2(f.normal[1], f.normal[0]), f.area) for f in k.facets if f.interior]
    A = math.fsum(w * math.sin(b0 - t) for t, w in edges if t >= alpha0)
    B = math.fsum(w * math.sin(b0 + t) for t, w in edges if t <= alpha0)
    return A, B


def approximate2d(family: TailFamily, depth: int, heights=None) -> tuple[list[PseudoCone], dict]:
    """Solve the truncations ``mu`` restricted to ``delta >= 1/i`` for ``i = 1..depth``.

    Refuses families whose condition value diverges.  For every ``i`` the
    report holds ``dist(o, K_i)``, ``|x_0(K_i)|``, the closed-interval
    bound ``min{A, B} / cos beta0`` and the global bound from the sine form
    of the whole family, plus Hausdorff gaps between successive sets.
    """
    cond = condition_value(family)
    if cond["verdict"] != "converges":
        raise PreconditionError(
            "integrability condition fails: the sine integral of the truncations is unbounded, "
            "so the origin-distance bound cannot hold uniformly", "integrability condition")
    b0 = family.beta0
    global_bound = cond["table"][-1]["sine"] / math.cos(b0)
    sets: list[PseudoCone] = []
    rows = []
    prev = None
    for i in range(1, depth + 1):
        n = family.truncation_size(1.0 / i)
        th, w = family.atoms(n)
        mu = AngularMeasure.from_atoms(b0, list(zip(th, w)))
        K = solve2d(mu)
        sets.append(K)
        a = _axis_point(K)
        rep = necessity_check(K) if len(mu) else {"alpha0": None}
        A, B = _closed_bounds(K, b0, rep.get("alpha0"))
        row = {"i": i, "atoms": len(mu), "dist_origin": _origin_distance(K) if len(mu) else 0.0,
               "x0_norm": a, "local_bound": min(A, B) / math.cos(b0), "global_bound": global_bound}
        row["bounded"] = bool(row["dist_origin"] <= row["x0_norm"] + 1e-12
                              and row["x0_norm"] <= row["local_bound"] * (1 + 1e-12) + 1e-15
                              and row["local_bound"] <= global_bound * (1 + 1e-12) + 1e-15)
        if prev is not None:
            ts = heights or [2.0 * global_bound + 1.0, 4.0 * global_bound + 2.0]
            row["gaps"] = {float(t): hausdorff_truncated(prev, K, t) for t in ts}
            # more mass gives a smaller set: h_{K_{i-1}} >= h_{K_i}
            row["nested"] = bool(all(support(prev, v) >= support(K, v) - 1e-12 for v in K.normals))
        rows.append(row)
        prev = K
    gaps = [r["gaps"] for r in rows if "gaps" in r]
    monotone = all(all(b[t] <= a_[t] + 1e-12 for t in a_) for a_, b in zip(gaps, gaps[1:]))
    return sets, {"rows": rows, "condition": cond, "gaps_monotone": bool(monotone),
                  "note": None if monotone else "Hausdorff gaps are not monotone; no subsequence is extracted"}
