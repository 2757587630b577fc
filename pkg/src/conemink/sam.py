"""Discrete measures on the domain, surface area measures and the Monge-Ampère pullback."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .cone import Cone, chart_inverse_many, delta_many
from .pseudocone import PseudoCone, same_cone, support_many

MERGE_ANGLE = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely many atoms ``(v_i, w_i)`` with ``v_i`` in the open domain.

    Directions are unit vectors in the internal frame of ``cone``.  Atoms
    closer than ``1e-10`` radians are merged (weights summed) by
    :meth:`from_atoms`.  Atoms closer to ``∂Omega`` than double precision
    resolves (boundary distance far below ``1e-8``) may carry their exact
    distances in ``exact_deltas``; the directions are then only indicative.
    """

    cone: Cone
    directions: np.ndarray
    weights: np.ndarray
    exact_deltas: np.ndarray | None = None

    @classmethod
    def from_atoms(cls, cone: Cone, directions, weights, deltas=None) -> "DiscreteMeasure":
        n = cone.dim
        d = np.asarray(directions, dtype=float).reshape(-1, n)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(d) != len(w):
            raise ValueError("directions and weights differ in length")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be positive and finite")
        if len(d):
            d = d / np.linalg.norm(d, axis=1)[:, None]
        if deltas is not None:
            dl = np.asarray(deltas, dtype=float).reshape(-1)
            if len(dl) != len(w) or np.any(dl <= 0):
                raise ValueError("exact deltas must be positive, one per atom")
            if len(np.unique(dl)) != len(dl):
                raise ValueError("atoms with exact deltas must be distinct")
            return cls(cone, d, w.copy(), dl)
        dirs: list[np.ndarray] = []
        wts: list[float] = []
        for v, x in zip(d, w):
            for i, u in enumerate(dirs):
                if 2 * math.asin(min(1.0, np.linalg.norm(v - u) / 2)) < MERGE_ANGLE:
                    wts[i] += x
                    break
            else:
                dirs.append(v)
                wts.append(float(x))
        dirs_a = np.array(dirs) if dirs else np.zeros((0, n))
        # rounding leaves a direction on ∂Omega about 1e-17 away from it
        if len(dirs_a) and np.any(delta_many(cone, dirs_a) <= 1e-14):
            raise ValueError("atoms must lie in the open domain (delta > 0)")
        return cls(cone, dirs_a, np.array(wts))

    @classmethod
    def empty(cls, cone: Cone) -> "DiscreteMeasure":
        return cls.from_atoms(cone, np.zeros((0, cone.dim)), [])

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def deltas(self) -> np.ndarray:
        if self.exact_deltas is not None:
            return self.exact_deltas
        return delta_many(self.cone, self.directions) if len(self) else np.zeros(0)

    @property
    def total(self) -> float:
        return math.fsum(self.weights)

    def scaled(self, lam: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.cone, self.directions, self.weights * lam, self.exact_deltas)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        if self.exact_deltas is not None or other.exact_deltas is not None:
            raise ValueError("measures with exact deltas cannot be merged")
        return DiscreteMeasure.from_atoms(self.cone, np.vstack([self.directions, other.directions]),
                                          np.concatenate([self.weights, other.weights]))

    def match(self, other: "DiscreteMeasure", tol: float = 1e-9) -> list[int | None]:
        """Index of the atom of ``other`` at the same direction as each atom of ``self``."""
        out: list[int | None] = []
        for v in self.directions:
            if len(other) == 0:
                out.append(None)
                continue
            dist = np.linalg.norm(other.directions - v, axis=1)
            j = int(np.argmin(dist))
            out.append(j if dist[j] < tol else None)
        return out

    def mass_of(self, alpha: float, closed: bool = False) -> float:
        """``mu(omega_alpha)`` (or of its closure with ``closed=True``)."""
        d = self.deltas
        sel = d >= alpha if closed else d > alpha
        return math.fsum(self.weights[sel])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["delta", "weight"])
        for d, w in sorted(zip(self.deltas, self.weights)):
            wr.writerow([repr(float(d)), repr(float(w))])
        return buf.getvalue()


def surface_measure(k: PseudoCone) -> DiscreteMeasure:
    """``S_K`` on the open domain: one atom per facet with interior normal."""
    dirs, wts = [], []
    for f in k.facets:
        if not f.interior:
            continue
        if not math.isfinite(f.area):
            raise RuntimeError("unbounded facet with normal in Omega (invariant breach)")
        if f.area > 0:
            nv = float(np.linalg.norm(f.normal))
            dirs.append(f.normal if abs(nv - 1.0) <= 1e-14 else f.normal / nv)
            wts.append(f.area)
    if not dirs:
        return DiscreteMeasure.empty(k.cone)
    return DiscreteMeasure(k.cone, np.array(dirs), np.array(wts))


def restrict(mu: DiscreteMeasure, alpha: float, closed: bool = False) -> DiscreteMeasure:
    """``mu`` restricted to ``omega_alpha`` (``delta > alpha``) or its closure (``>=``)."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    d = mu.deltas
    sel = d >= alpha if closed else d > alpha
    ex = None if mu.exact_deltas is None else mu.exact_deltas[sel]
    return DiscreteMeasure(mu.cone, mu.directions[sel], mu.weights[sel], ex)


def ma_pullback(k_or_mu, eta=None) -> float:
    """``sum w_i |<v_i, e_1>|`` over the selected atoms of ``S_K`` (or of a given measure)."""
    mu = k_or_mu if isinstance(k_or_mu, DiscreteMeasure) else surface_measure(k_or_mu)
    idx = range(len(mu)) if eta is None else list(eta)
    return math.fsum(mu.weights[i] * abs(mu.directions[i, 0]) for i in idx)


def lifted_function(k: PseudoCone):
    """The convex PL function ``u(x) = h_K(1, x)`` on the projected domain.

    Nodes sit at the chart preimages of the facet normals of ``K`` with
    values ``sqrt(1 + |x|^2) h_K(v)``; boundary values are ``h_K(1, b)``
    (zero exactly when ``K`` is asymptotic).
    """
    from .cone import projected_domain
    from .ma import ConvexPLFunction

    mu = surface_measure(k)
    dom = projected_domain(k.cone)
    nodes = chart_inverse_many(mu.directions) if len(mu) else np.zeros((0, k.dim - 1))
    scale = np.sqrt(1.0 + np.sum(nodes ** 2, axis=1))
    vals = scale * support_many(k, mu.directions) if len(mu) else np.zeros(0)
    bvals = support_many(k, np.hstack([np.ones((len(dom.vertices), 1)), dom.vertices]))
    return ConvexPLFunction(dom, nodes, vals, boundary_values=bvals), mu


def pullback_oracle(k: PseudoCone) -> dict:
    """Compare ``w_i <v_i, e_1>`` with brute-force cell volumes of the lifted function."""
    from .ma import cell_oracle

    f, mu = lifted_function(k)
    pulled = mu.weights * np.abs(mu.directions[:, 0]) if len(mu) else np.zeros(0)
    cells = np.array([cell_oracle(f, i).volume for i in range(len(mu))])
    rel = np.abs(cells - pulled) / np.maximum(pulled, 1e-300) if len(mu) else np.zeros(0)
    return {"pullback": pulled, "oracle": cells, "max_rel_error": float(rel.max()) if len(rel) else 0.0,
            "total_pullback": math.fsum(pulled), "total_oracle": math.fsum(cells)}


def check_domination(mu: DiscreteMeasure, nu: DiscreteMeasure, rtol: float = 1e-12):
    """Return the first atom index where ``mu > nu`` atomwise, or ``None``."""
    if not same_cone(mu.cone, nu.cone):
        raise ValueError("measures on different cones")
    for i, j in enumerate(mu.match(nu)):
        if j is None or mu.weights[i] > nu.weights[j] * (1 + rtol):
            return i
    return None
