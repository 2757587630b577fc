"""Integrability functionals of the layer profile ``alpha -> mu(omega_alpha)``.

Everything here is evaluated layer by layer in closed form.  A measure with
finitely many atoms (or finitely many rings ``{delta = d}``) has a step
profile, so

    J_m     = sum_k M_k^(1/m) (d_k - d_{k+1})
    Gamma_m = sum_k M_k (d_k^(m+1) - d_{k+1}^(m+1)) / (m + 1)

with ``d_1 > d_2 > ... > d_r > d_{r+1} = 0`` and ``M_k`` the mass carried
by the atoms with ``delta >= d_k``.  Infinite families are handled through
partial sums at increasing depth.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .families import DEPTHS, LayerFamily, TailFamily, doubling_verdict
from .errors import PreconditionError
from .pseudocone import PseudoCone, is_asymptotic
from .sam import DiscreteMeasure, surface_measure


@dataclass(frozen=True)
class LayerProfile:
    """Step profile ``M(alpha) = mu(omega_alpha)``.

    ``breakpoints`` are the distinct deltas in decreasing order and
    ``masses[k]`` is the value of ``M`` on ``[breakpoints[k+1], breakpoints[k])``
    (with ``breakpoints[r] = 0``).  The profile is right-continuous and
    vanishes from ``breakpoints[0]`` on.
    """

    breakpoints: np.ndarray
    masses: np.ndarray

    @classmethod
    def from_layers(cls, deltas, weights) -> "LayerProfile":
        d = np.asarray(deltas, dtype=float).reshape(-1)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(d) != len(w):
            raise ValueError("deltas and weights differ in length")
        if np.any(d <= 0) or np.any(w < 0) or not np.all(np.isfinite(d)) or not np.all(np.isfinite(w)):
            raise ValueError("layers need positive finite deltas and nonnegative finite weights")
        neg, inv = np.unique(-d, return_inverse=True)
        layer = np.bincount(inv.reshape(-1), weights=w, minlength=len(neg))
        return cls(-neg, np.cumsum(layer))

    @classmethod
    def from_measure(cls, mu: DiscreteMeasure) -> "LayerProfile":
        return cls.from_layers(mu.deltas, mu.weights)

    @classmethod
    def empty(cls) -> "LayerProfile":
        return cls(np.zeros(0), np.zeros(0))

    def __len__(self) -> int:
        return len(self.breakpoints)

    @property
    def _lower(self) -> np.ndarray:
        return np.append(self.breakpoints[1:], 0.0)

    @property
    def total(self) -> float:
        return float(self.masses[-1]) if len(self) else 0.0

    def __call__(self, alpha):
        """``M(alpha)``, vectorized over ``alpha``."""
        a = np.asarray(alpha, dtype=float)
        if not len(self):
            return np.zeros_like(a)
        # number of breakpoints strictly above alpha
        idx = np.searchsorted(-self.breakpoints, -a, side="left")
        vals = np.concatenate([[0.0], self.masses])
        return vals[idx]

    def j(self, m: float) -> float:
        if m <= 0:
            raise ValueError("J_m needs m > 0")
        if not len(self):
            return 0.0
        return math.fsum(self.masses ** (1.0 / m) * (self.breakpoints - self._lower))

    def gamma(self, m: float) -> float:
        if m <= -1:
            raise ValueError("Gamma_m needs m > -1")
        if not len(self):
            return 0.0
        p = m + 1.0
        return math.fsum(self.masses * (self.breakpoints ** p - self._lower ** p) / p)

    def sup_weighted(self, power: float) -> tuple[float, float]:
        """``sup_alpha alpha^power M(alpha)`` and the breakpoint approached from below."""
        if not len(self):
            return 0.0, 0.0
        vals = self.breakpoints ** power * self.masses
        k = int(np.argmax(vals))
        return float(vals[k]), float(self.breakpoints[k])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["delta", "cumulative_mass"])
        for d, m in zip(self.breakpoints, self.masses):
            wr.writerow([repr(float(d)), repr(float(m))])
        return buf.getvalue()


def _profile(mu) -> LayerProfile:
    if isinstance(mu, LayerProfile):
        return mu
    if isinstance(mu, DiscreteMeasure):
        return LayerProfile.from_measure(mu)
    raise TypeError("expected a DiscreteMeasure or LayerProfile")


def j_functional(mu, m: float) -> float:
    """``J_m(mu) = int_0^{pi/2} mu(omega_alpha)^(1/m) d alpha``, exact on step profiles."""
    return _profile(mu).j(m)


def gamma_functional(mu, m: float) -> float:
    """``Gamma_m(mu) = int_0^{pi/2} mu(omega_alpha) alpha^m d alpha``, exact on step profiles."""
    return _profile(mu).gamma(m)


def quadrature_oracle(mu, m: float, kind: str = "gamma") -> float:
    """Adaptive quadrature of the same integrals; only used to test the closed forms."""
    from scipy.integrate import quad

    prof = _profile(mu)
    if not len(prof):
        return 0.0
    if kind == "gamma":
        f = lambda a: float(prof(a)) * a ** m  # noqa: E731
    else:
        f = lambda a: float(prof(a)) ** (1.0 / m)  # noqa: E731
    pts = sorted(set(prof.breakpoints.tolist()))
    edges = [0.0] + pts
    return math.fsum(quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
                     for lo, hi in zip(edges, edges[1:]))


# ---------------------------------------------------------------------------
# families


def family_layers(family, count: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``count`` (delta, mass) pairs of a layer or tail family."""
    if isinstance(family, LayerFamily):
        return family.layers(count)
    if isinstance(family, TailFamily):
        th, w = family.atoms(count)
        return family.beta0 - np.abs(th), w
    raise TypeError("expected a LayerFamily or TailFamily")


class _Partials:
    """Partial sums of ``J_m`` and ``Gamma_m`` over the first ``n`` layers of a family."""

    def __init__(self, family, n_max: int):
        d, w = family_layers(family, n_max)
        if np.any(d <= 0) or np.any(w < 0):
            raise ValueError("family produced a nonpositive delta or a negative mass")
        self.d, self.w = d, w
        self._cache: dict[int, LayerProfile] = {}

    def profile(self, n: int) -> LayerProfile:
        if n not in self._cache:
            self._cache[n] = LayerProfile.from_layers(self.d[:n], self.w[:n])
        return self._cache[n]

    def j(self, m: float, n: int) -> float:
        return self.profile(n).j(m)

    def gamma(self, m: float, n: int) -> float:
        return self.profile(n).gamma(m)


def _loglog_slope(ns, sums) -> float:
    x = np.log(np.asarray(ns[-2:], dtype=float))
    y = np.log(np.maximum(np.asarray(sums[-2:], dtype=float), 1e-300))
    return float((y[1] - y[0]) / (x[1] - x[0]))


def family_table(family, functional: str, m: float, depths=DEPTHS) -> dict:
    """Partial sums of ``J_m`` or ``Gamma_m`` at each depth plus a divergence verdict."""
    n_max = int(max(depths))
    parts = _Partials(family, n_max)
    fn = parts.j if functional == "j" else parts.gamma
    table = [{"depth": int(n), "partial_sum": fn(m, int(n))} for n in depths]
    verdict = doubling_verdict(lambda n: fn(m, n), n_max)
    verdict["loglog_slope"] = _loglog_slope(verdict["n"], verdict["sums"])
    return {"functional": functional, "m": m, "table": table, "doubling": verdict,
            "verdict": "diverging" if verdict["diverging"] else "bounded"}


def table_csv(report: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["depth", "partial_sum"])
    for row in report["table"]:
        wr.writerow([row["depth"], repr(row["partial_sum"])])
    wr.writerow(["verdict", report["verdict"]])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Schneider's necessary bound


def schneider_bound(k, alphas=None, epsilons=(0.1, 0.5, 1.0)) -> dict:
    """Tabulate ``alpha^(n-1) S_K(omega_alpha)`` on a grid.

    ``k`` is an asymptotic :class:`PseudoCone` or a precomputed
    ``(LayerProfile, n)`` pair for sets whose surface measure is known in
    closed form.  The exact supremum is attained as ``alpha`` increases to a
    breakpoint, so it is read off the layers rather than the grid.
    """
    if isinstance(k, PseudoCone):
        if not is_asymptotic(k).asymptotic:
            raise PreconditionError("the Schneider bound is stated for asymptotic sets", "C-asymptotic")
        prof, n = LayerProfile.from_measure(surface_measure(k)), k.dim
    else:
        prof, n = k
    p = n - 1
    if alphas is None:
        top = float(prof.breakpoints[0]) if len(prof) else math.pi / 4
        alphas = np.geomspace(top * 1e-6, top, 200)
    alphas = np.sort(np.asarray(alphas, dtype=float))
    vals = alphas ** p * prof(alphas)
    sup, at = prof.sup_weighted(p)
    # below the smallest breakpoint M is constant, so the profile shrinks as alpha -> 0
    low = prof.breakpoints[-1] if len(prof) else math.inf
    tail = vals[alphas < low]
    eventually = bool(np.all(np.diff(tail) >= 0)) if len(tail) > 1 else True
    flags = {float(e): {"value": prof.j(p + e), "finite": bool(math.isfinite(prof.j(p + e)))}
             for e in epsilons}
    return {"table": [{"alpha": float(a), "value": float(v)} for a, v in zip(alphas, vals)],
            "sup": sup, "sup_at": at, "eventually_nonincreasing_to_zero": eventually,
            "exponent": p, "j_flags": flags}


def schneider_family(family, n: int, depths=DEPTHS) -> dict:
    """``sup alpha^(n-1) M(alpha)`` and ``J_{n-1+eps}`` partial sums across truncation depths."""
    parts = _Partials(family, int(max(depths)))
    rows = []
    for d in depths:
        s, at = parts.profile(int(d)).sup_weighted(n - 1)
        rows.append({"depth": int(d), "sup": s, "sup_at": at})
    return {"rows": rows, "j_table": family_table(family, "j", n - 1 + 0.5, depths)}


# ---------------------------------------------------------------------------
# J versus Gamma


def convert(source, m: float, epsilon: float, depths=DEPTHS) -> dict:
    """Check both directions of the J / Gamma comparison on a family or a finite measure.

    Forward: bounded ``J_m`` partial sums force bounded ``Gamma_{m-1+eps}``
    partial sums.  Converse: bounded ``Gamma_m`` forces bounded
    ``J_{m+1+eps}``.  The witness constant is ``c_0 = sup alpha M(alpha)^(1/m)``
    so that ``M(alpha)^(1/m) <= c_0 / alpha``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if m <= 0:
        raise ValueError("m must be positive")
    if isinstance(source, (DiscreteMeasure, LayerProfile)):
        prof = _profile(source)
        c0 = max((float(d * M ** (1.0 / m)) for d, M in zip(prof.breakpoints, prof.masses)), default=0.0)
        vals = {"j_m": prof.j(m), "gamma_m-1+eps": prof.gamma(m - 1 + epsilon),
                "gamma_m": prof.gamma(m), "j_m+1+eps": prof.j(m + 1 + epsilon)}
        return {"finite_measure": True, "values": vals, "forward_holds": True,
                "converse_holds": True, "c0": c0, "vacuous": True}
    jm = family_table(source, "j", m, depths)
    gm = family_table(source, "gamma", m - 1 + epsilon, depths)
    gc = family_table(source, "gamma", m, depths)
    jc = family_table(source, "j", m + 1 + epsilon, depths)
    parts = _Partials(source, int(max(depths)))
    prof = parts.profile(int(max(depths)))
    c0 = max((float(d * M ** (1.0 / m)) for d, M in zip(prof.breakpoints, prof.masses)), default=0.0)
    fwd = not (jm["verdict"] == "bounded" and gm["verdict"] == "diverging")
    conv = not (gc["verdict"] == "bounded" and jc["verdict"] == "diverging")
    return {"finite_measure": False, "j_m": jm, "gamma_m-1+eps": gm, "gamma_m": gc,
            "j_m+1+eps": jc, "forward_holds": fwd, "converse_holds": conv, "c0": c0,
            "forward_applies": jm["verdict"] == "bounded",
            "converse_applies": gc["verdict"] == "bounded"}
