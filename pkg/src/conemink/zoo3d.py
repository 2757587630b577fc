"""Explicit solids on the right circular cone ``C = {x_1 <= -sqrt(x_2^2 + x_3^2)}``.

Here ``u_* = -e_1`` and the domain is the cap of directions within ``pi/4``
of ``e_1``; a direction at angle ``phi`` from ``e_1`` has boundary distance
``delta = pi/4 - phi``.  Write ``s = <x, u_*>`` for the height and ``rho``
for the distance from the axis.  The set ``A(alpha, t u_*)`` is then the
solid of revolution

    rho <= min(s, tan(psi) (s - t)),   psi = pi/4 + alpha,

whose lateral surface is a cone of slope ``tan psi`` carrying all of its
surface measure on the ring ``{delta = alpha}``.  Ring masses come from the
closed forms; q-gon realizations as :class:`PseudoCone` are labelled
approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cone import DEFAULT_RING, Cone
from .errors import PreconditionError
from .functionals import LayerProfile, gamma_functional
from .pseudocone import PseudoCone, support_many, translate
from .sam import DiscreteMeasure

QUARTER = math.pi / 4


def standard_cone() -> Cone:
    return Cone.circular(QUARTER)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= QUARTER:
        raise ValueError("alpha must lie in (0, pi/4]")


def _slope(alpha: float) -> float:
    return math.tan(QUARTER + alpha)


def ring_normals(alpha: float, q: int = DEFAULT_RING) -> np.ndarray:
    """``q`` unit normals on the ring ``{delta = alpha}``, aligned with the ``q``-gon stand-in of ``C``."""
    phi = QUARTER - alpha
    th = 2 * np.pi * np.arange(q) / q
    return np.column_stack([np.full(q, math.cos(phi)), math.sin(phi) * np.cos(th), math.sin(phi) * np.sin(th)])


def a_set_end(alpha: float, t: float) -> float:
    """Height where the lateral cone of ``A(alpha, t u_*)`` meets ``∂C``."""
    return t / (1.0 - math.tan(QUARTER - alpha))


def a_set_mass(alpha: float, t: float = 1.0) -> float:
    """Lateral area of ``A(alpha, t u_*)`` inside ``int C``.

    ``t^2 pi (1 - tan(pi/4 - alpha))^-2 / cos(pi/4 - alpha)``; at
    ``alpha = pi/4`` the set is ``C ∩ {x_1 <= -t}`` and the value is ``pi t^2``.
    """
    _check_alpha(alpha)
    if t <= 0:
        raise ValueError("t must be positive")
    return t * t * math.pi / (1.0 - math.tan(QUARTER - alpha)) ** 2 / math.cos(QUARTER - alpha)


def polygonal_mass(alpha: float, t: float, q: int) -> float:
    """Closed-form mass of the ``q``-gon realization (circumscribed pyramid)."""
    return a_set_mass(alpha, t) * q * math.tan(math.pi / q) / math.pi


@dataclass(frozen=True)
class ASet:
    """``A(alpha, t u_*)`` with a ``q``-gon realization."""

    alpha: float
    t: float = 1.0
    q: int = DEFAULT_RING

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.t <= 0:
            raise ValueError("t must be positive")

    @property
    def mass(self) -> float:
        return a_set_mass(self.alpha, self.t)

    @property
    def end_height(self) -> float:
        return a_set_end(self.alpha, self.t)

    def measure_profile(self) -> LayerProfile:
        return LayerProfile.from_layers([self.alpha], [self.mass])

    def realize(self) -> PseudoCone:
        """Approximation: ``q`` cuts on the ring, over the ``q``-facet stand-in of ``C``."""
        v = ring_normals(self.alpha, self.q)
        cone = standard_cone().polyhedral(self.q)
        return PseudoCone.from_cuts(cone, v, np.full(self.q, -self.t * v[0, 0]))

    def apex(self) -> np.ndarray:
        return np.array([-self.t, 0.0, 0.0])


def realized_mass(a: ASet) -> float:
    k = a.realize()
    return math.fsum(f.area for f in k.facets if f.interior)


def polygonal_convergence(alpha: float, t: float = 1.0, qs=(16, 32, 64, 128)) -> dict:
    """Realized q-gon masses against the analytic value and the fitted order."""
    exact = a_set_mass(alpha, t)
    rows = []
    for q in qs:
        m = realized_mass(ASet(alpha, t, q))
        rows.append({"q": q, "mass": m, "closed_form": polygonal_mass(alpha, t, q),
                     "error": abs(m - exact), "label": "approximation"})
    errs = np.array([r["error"] for r in rows])
    qq = np.array(qs, dtype=float)
    slopes = np.diff(np.log(errs)) / np.diff(np.log(qq))
    return {"analytic": exact, "rows": rows, "slopes": slopes.tolist(), "order": float(-slopes[-1])}


def scaling_check(alpha: float, t: float, q: int = 32, samples: int = 100, seed: int = 0) -> float:
    """Largest ``|h_{A(alpha, t u_*)} - t h_{A(alpha, u_*)}|`` over random domain directions."""
    k1 = ASet(alpha, 1.0, q).realize()
    kt = ASet(alpha, t, q).realize()
    rng = np.random.default_rng(seed)
    v = _random_cap_directions(k1.cone, samples, rng)
    return float(np.max(np.abs(support_many(kt, v) - t * support_many(k1, v))))


def _random_cap_directions(cone: Cone, count: int, rng) -> np.ndarray:
    g = cone.dual_normals
    w = rng.dirichlet(np.ones(len(g)), size=count)
    v = w @ g
    return v / np.linalg.norm(v, axis=1)[:, None]


# ---------------------------------------------------------------------------
# Q sets


@dataclass(frozen=True)
class QSet:
    """``(C + t1 u_*) ∩ A(alpha, t2 u_*)`` cut below height ``t3``.

    The lower cut ``{s >= t3}`` is kept as metadata: only the ring part of the
    surface measure (away from ``-u_*``) is reported as a measure, the flat
    face at height ``t3`` is listed in :meth:`facet_inventory`.
    """

    alpha: float
    t1: float
    t2: float
    t3: float
    q: int = DEFAULT_RING
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not 0 < self.t1 < self.t2 < self.t3:
            raise ValueError("need 0 < t1 < t2 < t3")

    def _radius(self, s: float) -> float:
        return max(0.0, min(s - self.t1, _slope(self.alpha) * (s - self.t2)))

    @property
    def knee(self) -> float:
        """Height where the lateral cone meets ``∂(C + t1 u_*)``."""
        k = _slope(self.alpha)
        return (k * self.t2 - self.t1) / (k - 1.0)

    def ring_mass(self) -> float:
        psi = QUARTER + self.alpha
        hi = self.knee - self.t1
        lo = _slope(self.alpha) * (max(self.t3, self.t2) - self.t2)
        if lo >= hi:
            return 0.0
        return math.pi * (hi * hi - lo * lo) / math.sin(psi)

    def gamma(self, m: float) -> float:
        return gamma_functional(LayerProfile.from_layers([self.alpha], [self.ring_mass()]), m)

    def facet_inventory(self) -> list[dict]:
        r = self._radius(self.t3)
        return [{"kind": "ring", "delta": self.alpha, "mass": self.ring_mass()},
                {"kind": "bottom", "normal": [1.0, 0.0, 0.0], "height": self.t3, "mass": math.pi * r * r}]

    def realize_untruncated(self) -> PseudoCone:
        """Approximation of ``(C + t1 u_*) ∩ A(alpha, t2 u_*)`` on the ``q``-gon stand-in."""
        cone = standard_cone().polyhedral(self.q)
        v = ring_normals(self.alpha, self.q)
        g = cone.dual_normals
        normals = np.vstack([v, g])
        offsets = np.concatenate([np.full(self.q, -self.t2 * v[0, 0]), -self.t1 * g[:, 0]])
        return PseudoCone.from_cuts(cone, normals, offsets)


def q_identity_check(q_set: QSet, samples: int = 100, seed: int = 0) -> dict:
    """Compare ``(C + t1 u_*) ∩ A(alpha, t2 u_*)`` with ``t1 u_* + A(alpha, (t2 - t1) u_*)``."""
    lhs = q_set.realize_untruncated()
    rhs = translate(ASet(q_set.alpha, q_set.t2 - q_set.t1, q_set.q).realize(), np.array([-q_set.t1, 0.0, 0.0]))
    rng = np.random.default_rng(seed)
    v = _random_cap_directions(lhs.cone, samples, rng)
    diff = float(np.max(np.abs(support_many(lhs, v) - support_many(rhs, v))))
    scale = max(1.0, q_set.t2)
    return {"max_difference": diff, "tolerance": 1e-9 * scale, "holds": diff <= 1e-9 * scale}


# ---------------------------------------------------------------------------
# facet of a single-cut set


def _tilt_check(t: float) -> None:
    if not 0 < t <= QUARTER:
        raise ValueError("tilt must lie in (0, pi/4]")


def tilt_normal(t: float) -> np.ndarray:
    return np.array([math.cos(QUARTER - t), math.sin(QUARTER - t), 0.0])


def facet_ellipse_area(t: float) -> float:
    """Area of the ellipse cut from ``C`` by the plane through ``u_*`` with normal at tilt ``t``.

    The plane is ``<x, v> = <u_*, v>`` with ``v = (cos phi, sin phi, 0)``,
    ``phi = pi/4 - t``; with ``k = tan phi`` its shadow on ``x_1 = 0`` is an
    ellipse of area ``pi / (1 - k^2)^(3/2)``.
    """
    _tilt_check(t)
    phi = QUARTER - t
    k = math.tan(phi)
    return math.pi / ((1.0 - k * k) ** 1.5 * math.cos(phi))


def facet_area_oracle(t: float) -> float:
    """The same area by integrating the shadow width numerically."""
    from scipy.integrate import quad

    _tilt_check(t)
    phi = QUARTER - t
    k = math.tan(phi)
    lo, hi = -1.0 / (1.0 + k), 1.0 / (1.0 - k)
    val, _ = quad(lambda y: 2.0 * math.sqrt(max(0.0, (1 + k * y) ** 2 - y * y)), lo, hi,
                  epsabs=0.0, epsrel=1e-13, limit=400)
    return val / math.cos(phi)


def single_cut_set(t: float, q: int = DEFAULT_RING) -> PseudoCone:
    """Approximation of ``C ∩ H^-(v, <v, u_*>)`` on the ``q``-gon stand-in."""
    v = tilt_normal(t)
    return PseudoCone.from_cuts(standard_cone().polyhedral(q), v[None, :], [-v[0]])


def facet_decay_fit(tilts=None) -> dict:
    """``area(t) t^(3/2)`` over small tilts; ``c1`` is its maximum."""
    tilts = np.geomspace(1e-4, 1e-1, 31) if tilts is None else np.asarray(tilts, dtype=float)
    band = np.array([facet_ellipse_area(float(t)) * t ** 1.5 for t in tilts])
    return {"tilts": tilts.tolist(), "scaled": band.tolist(), "c1": float(band.max()),
            "band": [float(band.min()), float(band.max())]}


# ---------------------------------------------------------------------------
# layered set


def _envelope(alphas, heights) -> list[dict]:
    """Pieces of ``rho(s) = min(s, min_i tan(psi_i) (s - a_i))`` with their ring index."""
    lines = [(_slope(a), -_slope(a) * h, i) for i, (a, h) in enumerate(zip(alphas, heights))]
    lines.append((1.0, 0.0, None))
    start = max(heights)
    cuts = {start}
    for i, (k1, c1, _) in enumerate(lines):
        for k2, c2, _ in lines[i + 1:]:
            if k1 != k2:
                s = (c2 - c1) / (k1 - k2)
                if s > start:
                    cuts.add(s)
    pts = sorted(cuts)
    far = pts[-1] * 2 + 1
    pts.append(far)
    pieces: list[dict] = []
    for lo, hi in zip(pts, pts[1:]):
        mid = 0.5 * (lo + hi)
        k, c, idx = min(lines, key=lambda ln: ln[0] * mid + ln[1])
        r_lo, r_hi = k * lo + c, k * hi + c
        if pieces and pieces[-1]["index"] == idx:
            pieces[-1]["s_hi"], pieces[-1]["rho_hi"] = hi, r_hi
        else:
            pieces.append({"index": idx, "s_lo": lo, "s_hi": hi, "rho_lo": r_lo, "rho_hi": r_hi})
    return pieces


def _certify_alpha(gamma_of, upper: float, m: float, target: float, resolution: float) -> float | None:
    """Some ``alpha < upper`` with ``gamma_of(alpha) >= target``, found by halving then bisection."""
    lo = upper * 0.5
    while gamma_of(lo) < target:
        lo *= 0.5
        if lo < resolution:
            return None
    hi = upper * (1 - 1e-9)
    if gamma_of(hi) >= target:
        return hi
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if gamma_of(mid) >= target:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-12:
            break
    return lo


def layered_set(depth: int, m: float = 0.5, alphas=None, radii=None, q: int = DEFAULT_RING,
                target: float = 1.1, resolution: float = 1e-300) -> tuple[PseudoCone, dict]:
    """``K = ∩_{i <= depth} A(alpha_i, 2^-i u_*)`` with per-layer certificates.

    Layer ``i`` is certified by ``Q_i = Q(alpha_i, 2^-(i+1), 2^-i, r_{i-1})``
    (with ``r_{-1} = 2``) whose ring part must carry ``Gamma_m >= 1``.
    Radii ``r_i`` must bound the lateral surface of ``A(alpha_i, 2^-i u_*)``
    and increase; when omitted they are set just above the larger of that
    height and ``r_{i-1}``.  When ``alphas`` are omitted they are chosen by
    bisection so that each ``Q_i`` carries ``Gamma_m`` close to ``target``.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if not -1 < m < 1:
        raise PreconditionError("layered construction needs -1 < m < 1", "m < 1")
    if alphas is not None and len(alphas) < depth + 1:
        raise ValueError("need depth + 1 angles")
    if radii is not None and len(radii) < depth + 1:
        raise ValueError("need depth + 1 radii")
    chosen: list[float] = []
    rs: list[float] = []
    layers = []
    r_prev = 2.0
    for i in range(depth + 1):
        t1, t2 = 2.0 ** -(i + 1), 2.0 ** -i
        upper = QUARTER if i == 0 else min(chosen[-1], 1.0 / i)
        if alphas is None:
            a = _certify_alpha(lambda x: QSet(x, t1, t2, r_prev, q).gamma(m), upper, m, target, resolution)
            flagged = a is None
            if flagged:
                a = upper * 0.5
        else:
            a = float(alphas[i])
            if not 0 < a < upper or (i == 0 and a >= QUARTER):
                raise PreconditionError(f"alpha_{i} must be below {upper!r} and the previous angle",
                                        "alpha_i decreasing with alpha_i < 1/i")
            flagged = False
        qs = QSet(a, t1, t2, r_prev, q)
        g = qs.gamma(m)
        end = a_set_end(a, t2)
        if radii is None:
            r = max(end, r_prev) * (1 + 1e-6)
        else:
            r = float(radii[i])
            if r < end or r <= r_prev:
                raise PreconditionError(f"radius r_{i} = {r!r} does not bound the lateral surface "
                                        f"(needs >= {end!r}) or does not increase",
                                        "tau_A(Omega) in H^-(r_i)")
        chosen.append(a)
        rs.append(r)
        layers.append({"i": i, "alpha": a, "t1": t1, "t2": t2, "t3": r_prev, "radius": r,
                       "lateral_end": end, "q_gamma": g, "certified": bool(g >= 1.0),
                       "flagged": bool(flagged or g < 1.0)})
        r_prev = r
    heights = [2.0 ** -i for i in range(depth + 1)]
    pieces = _envelope(chosen, heights)
    masses = np.zeros(depth + 1)
    for p in pieces:
        if p["index"] is not None:
            psi = QUARTER + chosen[p["index"]]
            masses[p["index"]] += math.pi * (p["rho_hi"] ** 2 - p["rho_lo"] ** 2) / math.sin(psi)
    prof = LayerProfile.from_layers(np.array(chosen)[masses > 0], masses[masses > 0])
    for i, row in enumerate(layers):
        row["k_ring_mass"] = float(masses[i])
        row["k_gamma"] = float(masses[i]) * chosen[i] ** (m + 1) / (m + 1)
        row["dominates_q"] = bool(row["k_gamma"] >= row["q_gamma"] * (1 - 1e-12))
    # support on ∂Omega: (rho - s) / sqrt 2 maximized along the profile (the same at every boundary point)
    h_bd = max((p["rho_hi"] - p["s_hi"]) / math.sqrt(2) for p in pieces)
    h_bd = min(0.0, h_bd)
    boundary = [{"theta": float(th), "h": h_bd} for th in 2 * np.pi * np.arange(16) / 16]
    normals = np.vstack([ring_normals(a, q) for a in chosen])
    offsets = np.concatenate([np.full(q, -h * math.cos(QUARTER - a)) for a, h in zip(chosen, heights)])
    k = PseudoCone.from_cuts(standard_cone().polyhedral(q), normals, offsets)
    report = {"depth": depth, "m": m, "layers": layers, "alphas": chosen, "radii": rs,
              "profile": {"deltas": prof.breakpoints.tolist(), "cumulative": prof.masses.tolist()},
              "cumulative_gamma": prof.gamma(m),
              "certified_gamma": math.fsum(r["q_gamma"] for r in layers),
              "boundary_support": boundary,
              "boundary_support_in_range": bool(all(-2.0 ** -depth <= b["h"] <= 0 for b in boundary)),
              "realization": f"approximation with {q}-gon rings"}
    report["_profile"] = prof
    return k, report


# ---------------------------------------------------------------------------
# a measure that no asymptotic set realizes


def divergent_measure(depth: int, m: float = 2.0, eps0: float | None = None,
                      q: int = DEFAULT_RING) -> tuple[DiscreteMeasure, dict]:
    """``mu = sum_{i <= depth} i S_{K_i}`` with ``K_i`` single-cut sets at tilts ``t_i``.

    Each tilt is bisected so that ``Gamma_{m'}(i S_{K_i})`` sits at half its
    budget ``2^-i``, where ``m' = m - 1 - eps0``.  The witness radius
    ``sqrt(i)`` records that a solution would have to lie inside
    ``sqrt(i) K_i``, so the segment from ``o`` to ``sqrt(i) u_*`` misses it.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if m <= 1.5:
        raise PreconditionError("the construction needs m > 3/2", "m > 3/2")
    eps0 = (m - 1.5) / 2 if eps0 is None else float(eps0)
    mp = m - 1.0 - eps0
    if mp <= 0.5:
        raise PreconditionError("need m - 1 - eps0 > 1/2", "m - 1 - eps0 > 1/2")

    def term(i: int, t: float) -> float:
        return i * facet_ellipse_area(t) * t ** (mp + 1) / (mp + 1)

    dirs, wts, certs = [], [], []
    for i in range(1, depth + 1):
        goal = 0.5 * 2.0 ** -i
        lo, hi = 1e-300, QUARTER
        if term(i, hi) <= goal:
            t = hi
        else:
            for _ in range(2000):
                mid = math.sqrt(lo * hi) if lo > 0 else hi * 0.5
                if term(i, mid) > goal:
                    hi = mid
                else:
                    lo = mid
                if hi / lo - 1 < 1e-13:
                    break
            t = lo
        g = term(i, t)
        if not g < 2.0 ** -i:
            raise RuntimeError(f"bisection failed to certify term {i}")
        dirs.append(tilt_normal(t))
        wts.append(i * facet_ellipse_area(t))
        certs.append({"i": i, "tilt": t, "area": facet_ellipse_area(t), "gamma": g, "budget": 2.0 ** -i,
                      "certified": bool(g < 2.0 ** -i), "excluded_radius": math.sqrt(i)})
    tilts = np.array([c["tilt"] for c in certs])
    mu = DiscreteMeasure.from_atoms(standard_cone(), np.array(dirs), np.array(wts), deltas=tilts)
    total = gamma_functional(mu, mp)
    radii = [c["excluded_radius"] for c in certs]
    return mu, {"m": m, "eps0": eps0, "m_prime": mp, "terms": certs, "total_gamma": total,
                "budget": math.fsum(2.0 ** -i for i in range(1, depth + 1)),
                "total_within_budget": bool(total <= 1.0),
                "excluded_radius_monotone": bool(all(b > a for a, b in zip(radii, radii[1:])))}
